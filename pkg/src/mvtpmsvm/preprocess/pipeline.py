"""
Per-view preprocessing fitted on training rows only.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

from mvtpmsvm.data.dataset import TwoViewDataset
from mvtpmsvm.exceptions import InvalidArgumentError
from mvtpmsvm.preprocess.transforms import (
    DEFAULT_PCA_THRESHOLD,
    SCALING_MINMAX,
    PcaBasis,
    Scaler,
    fit_pca,
    fit_scaler,
    project,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViewPreprocessor:
    """
    Scalers for both views plus, for synthesized view B, the PCA basis.

    When ``pca`` is set, view B is never read from input. It is recomputed as the
    projection of the scaled view A onto the training basis, then scaled.

    Attributes:
        scaler_a (Scaler): Scaler of view A.
        scaler_b (Scaler): Scaler of view B (applied after projection when ``pca`` is set).
        pca (PcaBasis, optional): Basis that produces view B from scaled view A.
    """

    scaler_a: Scaler
    scaler_b: Scaler
    pca: Optional[PcaBasis] = None

    @classmethod
    def fit(cls, dataset: TwoViewDataset, mode: str = SCALING_MINMAX) -> "ViewPreprocessor":
        """
        Fit on a training dataset.

        Args:
            dataset (TwoViewDataset): Training rows.
            mode (str, optional): Scaling mode for both views. Defaults to ``minmax01``.

        Returns:
            ViewPreprocessor: The fitted preprocessor.
        """
        scaler_a = fit_scaler(dataset.view_a, mode)
        scaled_a = scaler_a.transform(dataset.view_a)
        pca = None
        raw_b = dataset.view_b
        if dataset.view_b_synthesized:
            pca = fit_pca(scaled_a, dataset.pca_threshold or DEFAULT_PCA_THRESHOLD)
            raw_b = project(pca, scaled_a)
            log.debug("Refitted view B basis on %s training rows: %s components", dataset.n_samples, pca.n_components)
        return cls(scaler_a=scaler_a, scaler_b=fit_scaler(raw_b, mode), pca=pca)

    def transform_views(self, view_a, view_b=None):
        """
        Map raw views into the space the model was trained in.

        Args:
            view_a (array-like): Raw view A rows.
            view_b (array-like, optional): Raw view B rows. Ignored when a PCA basis is present.

        Returns:
            tuple: (view A, view B) after preprocessing.

        Raises:
            InvalidArgumentError: If view B is absent and there is no PCA basis to synthesize it.
        """
        scaled_a = self.scaler_a.transform(view_a)
        if self.pca is not None:
            raw_b = project(self.pca, scaled_a)
        elif view_b is None:
            raise InvalidArgumentError("View B is absent and no PCA basis is available to synthesize it")
        else:
            raw_b = view_b
        return scaled_a, self.scaler_b.transform(raw_b)

    def transform(self, dataset: TwoViewDataset) -> TwoViewDataset:
        view_a, view_b = self.transform_views(dataset.view_a, dataset.view_b)
        return replace(dataset, view_a=view_a, view_b=view_b)

    def to_dict(self) -> dict:
        return {
            "scaler_a": self.scaler_a.to_dict(),
            "scaler_b": self.scaler_b.to_dict(),
            "pca": None if self.pca is None else self.pca.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ViewPreprocessor":
        pca = payload.get("pca")
        return cls(
            scaler_a=Scaler.from_dict(payload["scaler_a"]),
            scaler_b=Scaler.from_dict(payload["scaler_b"]),
            pca=None if pca is None else PcaBasis.from_dict(pca),
        )
