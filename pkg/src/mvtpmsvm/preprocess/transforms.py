"""
Feature scaling and principal component analysis.

PCA is used to synthesize a second view from single-view data: the original
features are view A and their projection onto the leading principal components
is view B.
"""

from dataclasses import dataclass

import numpy as np

from mvtpmsvm.exceptions import InvalidArgumentError

SCALING_NONE = "none"
SCALING_MINMAX = "minmax01"
SCALING_ZSCORE = "zscore"
SCALING_MODES = (SCALING_NONE, SCALING_MINMAX, SCALING_ZSCORE)

DEFAULT_PCA_THRESHOLD = 0.95


def _as_matrix(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a matrix, got an array with {X.ndim} dimensions")
    return X


@dataclass(frozen=True)
class Scaler:
    """
    Per-feature affine map ``(x - offset) / scale`` learned on training data.

    Attributes:
        mode (str): ``none``, ``minmax01`` or ``zscore``.
        offset (np.ndarray): Per-feature offset (minimum or mean).
        scale (np.ndarray): Per-feature divisor (range or standard deviation).
            Constant features get a divisor of 1 so they map to 0.
    """

    mode: str
    offset: np.ndarray
    scale: np.ndarray

    @property
    def n_features(self) -> int:
        return int(self.offset.shape[0])

    def transform(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != self.n_features:
            raise InvalidArgumentError(
                f"Dimension mismatch: scaler was fitted on {self.n_features} features, got {X.shape[1]}"
            )
        if self.mode == SCALING_NONE:
            return X.copy()
        return (X - self.offset) / self.scale

    def to_dict(self) -> dict:
        return {"mode": self.mode, "offset": self.offset.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "Scaler":
        return cls(
            mode=payload["mode"],
            offset=np.asarray(payload["offset"], dtype=float),
            scale=np.asarray(payload["scale"], dtype=float),
        )


def fit_scaler(X, mode: str = SCALING_MINMAX) -> Scaler:
    """
    Learn a per-feature scaler.

    Args:
        X (array-like): Training matrix of shape (n, d).
        mode (str, optional): ``none``, ``minmax01`` or ``zscore``. Defaults to ``minmax01``.

    Returns:
        Scaler: The fitted scaler.
    """
    if mode not in SCALING_MODES:
        raise InvalidArgumentError(f"Unknown scaling mode {mode!r}. Allowed values are: {', '.join(SCALING_MODES)}")
    X = _as_matrix(X)
    if X.shape[0] < 1:
        raise InvalidArgumentError("Cannot fit a scaler on an empty matrix")
    d = X.shape[1]
    if mode == SCALING_NONE:
        return Scaler(mode, np.zeros(d), np.ones(d))
    if mode == SCALING_MINMAX:
        offset = X.min(axis=0)
        spread = X.max(axis=0) - offset
    else:
        offset = X.mean(axis=0)
        spread = X.std(axis=0)
    scale = np.where(spread > 0.0, spread, 1.0)
    return Scaler(mode, offset, scale)


@dataclass(frozen=True)
class PcaBasis:
    """
    Retained principal components.

    Attributes:
        mean (np.ndarray): Feature means of the fitted data, length d.
        components (np.ndarray): Orthonormal rows, shape (r, d).
        explained_variance (np.ndarray): Retained covariance eigenvalues, length r.
        explained_variance_ratio (np.ndarray): Retained share of total variance, length r.
        threshold (float): Cumulative explained-variance target used for fitting.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    threshold: float

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])

    def inverse_project(self, Z) -> np.ndarray:
        """Map projected coordinates back into the original feature space."""
        Z = _as_matrix(Z, "Z")
        if Z.shape[1] != self.n_components:
            raise InvalidArgumentError(f"Expected {self.n_components} components, got {Z.shape[1]}")
        return Z @ self.components + self.mean

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PcaBasis":
        return cls(
            mean=np.asarray(payload["mean"], dtype=float),
            components=np.asarray(payload["components"], dtype=float).reshape(-1, len(payload["mean"])),
            explained_variance=np.asarray(payload["explained_variance"], dtype=float),
            explained_variance_ratio=np.asarray(payload["explained_variance_ratio"], dtype=float),
            threshold=float(payload["threshold"]),
        )


def fit_pca(X, threshold: float = DEFAULT_PCA_THRESHOLD) -> PcaBasis:
    """
    Fit principal components reaching a cumulative explained-variance threshold.

    The sample covariance uses the divisor n - 1. Eigenvalues are sorted in
    descending order and the smallest number of components whose cumulative share
    reaches ``threshold`` is kept. Each component is signed so that its
    largest-magnitude entry is positive.

    Args:
        X (array-like): Matrix of shape (n, d) with n >= 2.
        threshold (float, optional): Target in (0, 1]. Defaults to 0.95.

    Returns:
        PcaBasis: The retained basis.

    Raises:
        InvalidArgumentError: If n < 2, the threshold is out of range or the data has no variance.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InvalidArgumentError(f"PCA needs at least 2 samples, got {n}")
    if not 0.0 < threshold <= 1.0:
        raise InvalidArgumentError(f"PCA threshold must be in (0, 1], got {threshold}")

    mean = X.mean(axis=0)
    centered = X - mean
    covariance = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]

    total = eigenvalues.sum()
    if total <= 0.0:
        raise InvalidArgumentError("PCA needs data with non-zero total variance")
    ratios = eigenvalues / total
    cumulative = np.cumsum(ratios)
    # roundoff can leave the full sum a hair below 1.0
    retained = int(np.searchsorted(cumulative, threshold - 1e-12) + 1)
    retained = min(retained, eigenvalues.shape[0])

    components = eigenvectors[:, :retained].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0

    return PcaBasis(
        mean=mean,
        components=components,
        explained_variance=eigenvalues[:retained],
        explained_variance_ratio=ratios[:retained],
        threshold=float(threshold),
    )


def project(basis: PcaBasis, X) -> np.ndarray:
    """
    Project rows onto the retained components: ``(X - mean) components^T``.

    Args:
        basis (PcaBasis): The fitted basis.
        X (array-like): Matrix of shape (n, d).

    Returns:
        np.ndarray: Matrix of shape (n, r).

    Raises:
        InvalidArgumentError: If the feature dimension does not match the basis.
    """
    X = _as_matrix(X)
    if X.shape[1] != basis.mean.shape[0]:
        raise InvalidArgumentError(
            f"Dimension mismatch: basis has {basis.mean.shape[0]} features, got {X.shape[1]}"
        )
    return (X - basis.mean) @ basis.components.T
