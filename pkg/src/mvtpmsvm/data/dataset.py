"""
Two-view datasets: manifests, CSV loading, splits and folds.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
import pandas as pd

from mvtpmsvm.exceptions import DataParseError, InvalidArgumentError, ManifestError
from mvtpmsvm.preprocess.transforms import SCALING_MINMAX, SCALING_MODES, fit_pca, fit_scaler, project

log = logging.getLogger(__name__)

MANIFEST_SCHEMA = "mvtpm-manifest/1"


@dataclass
class TwoViewDataset:
    """
    Aligned samples seen through two views, with labels in {+1, -1}.

    Attributes:
        view_a (np.ndarray): Matrix of shape (m, dA).
        view_b (np.ndarray): Matrix of shape (m, dB).
        labels (np.ndarray): Integer vector of +1 / -1, length m.
        name (str): Dataset name used in reports.
        label_names (dict): Original label values for +1 and -1.
        view_b_synthesized (bool): Whether view B was derived from view A by PCA.
        pca_threshold (float, optional): Threshold used for the synthesized view B.
        provenance (dict): Free-form metadata (source paths, generator settings).
    """

    view_a: np.ndarray
    view_b: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    label_names: dict = field(default_factory=lambda: {1: "1", -1: "-1"})
    view_b_synthesized: bool = False
    pca_threshold: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.view_a = np.asarray(self.view_a, dtype=float)
        self.view_b = np.asarray(self.view_b, dtype=float)
        labels = np.asarray(self.labels, dtype=float).ravel()
        if not np.all(np.isin(labels, (1.0, -1.0))):
            raise InvalidArgumentError("Labels must take only the values +1 and -1")
        self.labels = labels.astype(int)
        if self.view_a.ndim != 2 or self.view_b.ndim != 2:
            raise InvalidArgumentError("Both views must be matrices")
        m = self.labels.shape[0]
        if self.view_a.shape[0] != m or self.view_b.shape[0] != m:
            raise InvalidArgumentError(
                f"Row counts disagree: view A {self.view_a.shape[0]}, view B {self.view_b.shape[0]}, labels {m}"
            )

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])

    @property
    def m1(self) -> int:
        """Number of positive samples."""
        return int(np.sum(self.labels == 1))

    @property
    def m2(self) -> int:
        """Number of negative samples."""
        return int(np.sum(self.labels == -1))

    def subset(self, indices) -> "TwoViewDataset":
        indices = np.asarray(indices, dtype=int)
        return replace(
            self,
            view_a=self.view_a[indices],
            view_b=self.view_b[indices],
            labels=self.labels[indices],
        )

    def with_negated_labels(self) -> "TwoViewDataset":
        return replace(
            self,
            labels=-self.labels,
            label_names={1: self.label_names[-1], -1: self.label_names[1]},
        )


@dataclass(frozen=True)
class DatasetManifest:
    """
    Where a dataset lives and how to read it.

    Attributes:
        view_a (str): CSV file with the view A features.
        view_b (str, optional): CSV file with the view B features. Absent means view B is
            synthesized from view A by PCA at ``pca_threshold``.
        labels (str, optional): CSV file holding the label column. Absent means the label
            column is part of the view A file.
        label_column (str or int, optional): Label column name (or zero-based index
            without header). Only unlabeled prediction inputs may omit it.
        positive_label (str, optional): Raw label value mapped to +1.
        header (bool): Whether CSV files start with a header row.
        scaling (str): Scaling mode applied per view.
        pca_threshold (float, optional): Explained-variance target for the synthesized view B.
        name (str): Dataset name.
    """

    view_a: str
    label_column: Optional[Union[str, int]] = None
    positive_label: Optional[str] = None
    view_b: Optional[str] = None
    labels: Optional[str] = None
    header: bool = True
    scaling: str = SCALING_MINMAX
    pca_threshold: Optional[float] = None
    name: str = "dataset"

    def __post_init__(self):
        if self.view_b is not None and self.pca_threshold is not None:
            raise ManifestError("view_b and pca_threshold are mutually exclusive sources of view B")
        if self.scaling not in SCALING_MODES:
            raise ManifestError(f"Unknown scaling mode {self.scaling!r}")
        if not self.header and self.label_column is not None and not isinstance(self.label_column, int):
            raise ManifestError("label_column must be a column index when files have no header")

    @property
    def effective_pca_threshold(self) -> Optional[float]:
        if self.view_b is not None:
            return None
        return 0.95 if self.pca_threshold is None else self.pca_threshold

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "name": self.name,
            "view_a": self.view_a,
            "view_b": self.view_b,
            "labels": self.labels,
            "label_column": self.label_column,
            "positive_label": self.positive_label,
            "header": self.header,
            "scaling": self.scaling,
            "pca_threshold": self.pca_threshold,
        }


def load_manifest(path: str, require_labels: bool = True) -> DatasetManifest:
    """
    Read a manifest document and resolve its file paths against its own directory.

    Args:
        path (str): Path to a JSON manifest with schema ``mvtpm-manifest/1``.
        require_labels (bool, optional): Insist on ``label_column`` and ``positive_label``.
            Defaults to True.

    Returns:
        DatasetManifest: The manifest with absolute file paths.

    Raises:
        ManifestError: If the schema tag or a required entry is missing, or an entry has the wrong type.
        DataParseError: If the file is not valid JSON.
    """
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as ex:
            raise DataParseError(f"Manifest {path} is not valid JSON: {ex}") from ex

    if not isinstance(payload, dict) or payload.get("schema") != MANIFEST_SCHEMA:
        raise ManifestError(f"Manifest {path} must declare schema {MANIFEST_SCHEMA!r}")
    required = ("view_a", "label_column", "positive_label") if require_labels else ("view_a",)
    for key in required:
        if payload.get(key) is None:
            raise ManifestError(f"Manifest {path} is missing {key!r}")
    for key in ("view_a", "view_b", "labels"):
        if payload.get(key) is not None and not isinstance(payload[key], str):
            raise ManifestError(f"Manifest {path}: {key!r} must be a file path, got {payload[key]!r}")
    threshold = payload.get("pca_threshold")
    if threshold is not None and (isinstance(threshold, bool) or not isinstance(threshold, (int, float))):
        raise ManifestError(f"Manifest {path}: 'pca_threshold' must be a number, got {threshold!r}")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(entry):
        if entry is None:
            return None
        return entry if os.path.isabs(entry) else os.path.join(base, entry)

    return DatasetManifest(
        view_a=resolve(payload["view_a"]),
        view_b=resolve(payload.get("view_b")),
        labels=resolve(payload.get("labels")),
        label_column=payload.get("label_column"),
        positive_label=None if payload.get("positive_label") is None else str(payload["positive_label"]),
        header=bool(payload.get("header", True)),
        scaling=payload.get("scaling", SCALING_MINMAX),
        pca_threshold=payload.get("pca_threshold"),
        name=payload.get("name") or os.path.splitext(os.path.basename(path))[0],
    )


def _read_table(path: str, header: bool) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=",",
            decimal=".",
            encoding="utf-8",
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.ParserError as ex:
        raise DataParseError(f"Could not parse {path}: {ex}") from ex
    except pd.errors.EmptyDataError as ex:
        raise DataParseError(f"{path} is empty") from ex


def _column_key(frame: pd.DataFrame, label_column, path: str):
    if isinstance(label_column, int):
        if not 0 <= label_column < frame.shape[1]:
            raise ManifestError(f"Label column {label_column} does not exist in {path}")
        return frame.columns[label_column]
    if label_column not in frame.columns:
        raise ManifestError(f"Label column {label_column!r} does not exist in {path}")
    return label_column


def _to_features(frame: pd.DataFrame, path: str) -> np.ndarray:
    try:
        values = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors="raise")).to_numpy(dtype=float)
    except (ValueError, AttributeError) as ex:
        raise DataParseError(f"{path} contains empty or non-numeric fields: {ex}") from ex
    if not np.all(np.isfinite(values)):
        raise DataParseError(f"{path} has ragged rows or missing values")
    return values


def _binarize(raw_labels: np.ndarray, positive_label: str, path: str):
    raw_labels = np.array([str(value).strip() for value in raw_labels])
    distinct = sorted(set(raw_labels.tolist()))
    if len(distinct) != 2:
        raise InvalidArgumentError(
            f"{path} must contain exactly two distinct labels, found {len(distinct)}: {distinct[:10]}"
        )
    if positive_label not in distinct:
        raise InvalidArgumentError(f"Positive label {positive_label!r} does not occur in {path}")
    negative_label = distinct[0] if distinct[1] == positive_label else distinct[1]
    labels = np.where(raw_labels == positive_label, 1, -1)
    return labels, {1: positive_label, -1: negative_label}


def read_views(manifest: DatasetManifest, require_labels: bool = True):
    """
    Read the raw matrices a manifest points at.

    Args:
        manifest (DatasetManifest): The manifest.
        require_labels (bool, optional): Fail when no label column is found. Defaults to True.

    Returns:
        tuple: (view_a, view_b or None, raw label array or None).
    """
    frame_a = _read_table(manifest.view_a, manifest.header)
    raw_labels = None
    if manifest.label_column is None:
        if require_labels:
            raise ManifestError(f"Manifest of {manifest.name} names no label column")
    elif manifest.labels is not None:
        if os.path.exists(manifest.labels) or require_labels:
            frame_labels = _read_table(manifest.labels, manifest.header)
            key = _column_key(frame_labels, manifest.label_column, manifest.labels)
            raw_labels = frame_labels[key].to_numpy()
    else:
        try:
            key = _column_key(frame_a, manifest.label_column, manifest.view_a)
            raw_labels = frame_a[key].to_numpy()
            frame_a = frame_a.drop(columns=[key])
        except ManifestError:
            if require_labels:
                raise

    view_a = _to_features(frame_a, manifest.view_a)
    view_b = None
    if manifest.view_b is not None:
        view_b = _to_features(_read_table(manifest.view_b, manifest.header), manifest.view_b)
        if view_b.shape[0] != view_a.shape[0]:
            raise DataParseError(
                f"{manifest.view_b} has {view_b.shape[0]} rows but {manifest.view_a} has {view_a.shape[0]}"
            )
    if raw_labels is not None and raw_labels.shape[0] != view_a.shape[0]:
        raise DataParseError(f"Label file has {raw_labels.shape[0]} rows but view A has {view_a.shape[0]}")
    return view_a, view_b, raw_labels


def synthesize_view_b(view_a: np.ndarray, scaling: str, threshold: float) -> np.ndarray:
    """View B as the PCA projection of the scaled view A."""
    scaled = fit_scaler(view_a, scaling).transform(view_a)
    return project(fit_pca(scaled, threshold), scaled)


def load_dataset(manifest: Union[DatasetManifest, str]) -> TwoViewDataset:
    """
    Load a two-view dataset.

    Labels equal to the manifest's positive label map to +1, the other label to -1.
    When the manifest has no view B file, view B is the PCA projection of the scaled
    view A at the manifest threshold.

    Args:
        manifest (DatasetManifest or str): The manifest or a path to one.

    Returns:
        TwoViewDataset: The dataset.

    Raises:
        InvalidArgumentError: If the label column does not hold exactly two distinct values.
        DataParseError: If a CSV file is ragged or non-numeric.
        ManifestError: If the label column is missing.
    """
    if isinstance(manifest, str):
        manifest = load_manifest(manifest)
    if manifest.positive_label is None:
        raise ManifestError(f"Manifest of {manifest.name} names no positive label")
    view_a, view_b, raw_labels = read_views(manifest)
    labels, label_names = _binarize(raw_labels, manifest.positive_label, manifest.view_a)

    threshold = manifest.effective_pca_threshold
    synthesized = view_b is None
    if synthesized:
        view_b = synthesize_view_b(view_a, manifest.scaling, threshold)
        log.info("Synthesized view B for %s with %s principal components", manifest.name, view_b.shape[1])

    return TwoViewDataset(
        view_a=view_a,
        view_b=view_b,
        labels=labels,
        name=manifest.name,
        label_names=label_names,
        view_b_synthesized=synthesized,
        pca_threshold=threshold,
        provenance={"manifest": manifest.to_dict()},
    )


def save_dataset(dataset: TwoViewDataset, out_dir: str) -> str:
    """
    Write a dataset as CSV files plus a manifest.

    Files: ``viewA.csv``, ``viewB.csv``, ``labels.csv`` and ``manifest.json``. Output is
    byte-identical for identical datasets.

    Args:
        dataset (TwoViewDataset): The dataset to write.
        out_dir (str): Target directory, created if needed.

    Returns:
        str: Path of the written manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    columns_a = [f"a{i + 1}" for i in range(dataset.view_a.shape[1])]
    columns_b = [f"b{i + 1}" for i in range(dataset.view_b.shape[1])]
    pd.DataFrame(dataset.view_a, columns=columns_a).to_csv(
        os.path.join(out_dir, "viewA.csv"), index=False, lineterminator="\n"
    )
    pd.DataFrame(dataset.view_b, columns=columns_b).to_csv(
        os.path.join(out_dir, "viewB.csv"), index=False, lineterminator="\n"
    )
    raw = [dataset.label_names[int(label)] for label in dataset.labels]
    pd.DataFrame({"label": raw}).to_csv(os.path.join(out_dir, "labels.csv"), index=False, lineterminator="\n")

    manifest = DatasetManifest(
        view_a="viewA.csv",
        view_b="viewB.csv",
        labels="labels.csv",
        label_column="label",
        positive_label=dataset.label_names[1],
        name=dataset.name,
    )
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return manifest_path


def train_test_split(dataset: TwoViewDataset, ratio: float = 0.7, seed: int = 0, stratify: bool = False):
    """
    Seeded random split into training and test parts.

    Args:
        dataset (TwoViewDataset): The dataset.
        ratio (float, optional): Training share in (0, 1). Defaults to 0.7.
        seed (int, optional): Seed of the permutation. Defaults to 0.
        stratify (bool, optional): Split each class separately. Defaults to False.

    Returns:
        tuple: (train, test) datasets.

    Raises:
        InvalidArgumentError: If the ratio is out of range or a side would be empty.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidArgumentError(f"ratio must be in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    m = dataset.n_samples
    if stratify:
        train_parts, test_parts = [], []
        for label in (1, -1):
            members = np.flatnonzero(dataset.labels == label)
            members = members[rng.permutation(members.shape[0])]
            cut = int(np.floor(ratio * members.shape[0]))
            train_parts.append(members[:cut])
            test_parts.append(members[cut:])
        train_idx = np.concatenate(train_parts)
        test_idx = np.concatenate(test_parts)
    else:
        order = rng.permutation(m)
        cut = int(np.floor(ratio * m))
        train_idx, test_idx = order[:cut], order[cut:]
    if train_idx.size == 0 or test_idx.size == 0:
        raise InvalidArgumentError(f"Split of {m} samples at ratio {ratio} leaves one side empty")
    return dataset.subset(train_idx), dataset.subset(test_idx)


def kfold_indices(n: int, k: int = 5, seed: int = 0, labels=None) -> list:
    """
    Seeded k-fold partition of ``range(n)``.

    Without labels the shuffled indices are cut into contiguous chunks whose sizes
    differ by at most one. With labels each class is dealt round-robin over the folds.

    Args:
        n (int): Number of samples.
        k (int, optional): Number of folds, at least 2. Defaults to 5.
        seed (int, optional): Shuffle seed. Defaults to 0.
        labels (array-like, optional): Labels for stratified folds.

    Returns:
        list: k disjoint integer arrays covering 0..n-1.

    Raises:
        InvalidArgumentError: If k < 2 or n < k.
    """
    if k < 2:
        raise InvalidArgumentError(f"k must be at least 2, got {k}")
    if n < k:
        raise InvalidArgumentError(f"Cannot make {k} folds from {n} samples")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    if labels is None:
        return [np.asarray(chunk, dtype=int) for chunk in np.array_split(order, k)]

    labels = np.asarray(labels)
    folds = [[] for _ in range(k)]
    position = 0
    for label in (1, -1):
        for index in order[labels[order] == label]:
            folds[position % k].append(int(index))
            position += 1
    return [np.asarray(fold, dtype=int) for fold in folds]
