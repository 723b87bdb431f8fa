"""
Benchmark runs: split, tune, refit and test over a list of datasets.
"""

import json
import logging
from typing import Optional

import pandas as pd

from mvtpmsvm.data.dataset import DatasetManifest, TwoViewDataset, load_dataset, load_manifest, train_test_split
from mvtpmsvm.eval.metrics import compute_metrics, confusion_counts
from mvtpmsvm.eval.search import GridSpec, cross_validate_grid
from mvtpmsvm.exceptions import MvTpmError
from mvtpmsvm.model.classifier import train
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor
from mvtpmsvm.preprocess.transforms import SCALING_MINMAX
from mvtpmsvm.qp.solvers import SolverOptions

log = logging.getLogger(__name__)

REPORT_SCHEMA = "mvtpm-report/1"
MODEL_COLUMN = "MvTPMSVM"


def _resolve(entry):
    """Return (dataset, scaling) for a manifest path, manifest or dataset."""
    if isinstance(entry, TwoViewDataset):
        return entry, SCALING_MINMAX
    manifest = load_manifest(entry) if isinstance(entry, str) else entry
    if not isinstance(manifest, DatasetManifest):
        raise TypeError(f"Unsupported benchmark entry {entry!r}")
    return load_dataset(manifest), manifest.scaling


def _entry_name(entry) -> str:
    if isinstance(entry, (TwoViewDataset, DatasetManifest)):
        return entry.name
    return str(entry)


def benchmark_dataset(dataset: TwoViewDataset, grid: GridSpec, seed: int = 0, folds: int = 5, ratio: float = 0.7,
                      scaling: str = SCALING_MINMAX, solver_options: Optional[SolverOptions] = None,
                      cv_solver_options: Optional[SolverOptions] = None, stratify: bool = False,
                      max_workers: int = 1) -> dict:
    """
    Run the evaluation protocol on one dataset.

    The dataset is split at ``ratio``, hyperparameters are chosen by k-fold
    cross-validation on the training part, the model is refitted on the whole
    training part and evaluated on the test part. The row keeps the mean
    cross-validation accuracy of every grid point under ``grid_scores`` so the
    sensitivity to (C1, C2, sigma) can be inspected.

    Returns:
        dict: One report row.
    """
    train_set, test_set = train_test_split(dataset, ratio, seed, stratify=stratify)
    search = cross_validate_grid(
        train_set, grid, folds=folds, seed=seed, solver_options=cv_solver_options,
        scaling=scaling, stratify=stratify, max_workers=max_workers,
    )
    preprocessor = ViewPreprocessor.fit(train_set, scaling)
    model = train(train_set, search.best, solver_options, preprocessor)
    counts = confusion_counts(test_set.labels, model.predict(test_set.view_a, test_set.view_b))
    metrics = compute_metrics(counts)
    log.info("Benchmarked %s: test accuracy %.4f", dataset.name, metrics.accuracy)
    return {
        "dataset": dataset.name,
        "status": "ok",
        "n_train": train_set.n_samples,
        "n_test": test_set.n_samples,
        "view_b_synthesized": dataset.view_b_synthesized,
        "best_params": {"C1": search.best_score.c1, "C2": search.best_score.c2, "sigma": search.best_score.sigma},
        "cv_accuracy": search.best_score.mean_accuracy,
        "grid_scores": [
            {"C1": score.c1, "C2": score.c2, "sigma": score.sigma, "mean_accuracy": score.mean_accuracy}
            for score in search.scores
        ],
        "skipped_folds": list(search.skipped_folds),
        "counts": counts.to_dict(),
        "metrics": metrics.to_dict(),
        "diagnostics": model.diagnostics.to_dict(),
    }


def run_benchmark(entries: list, grid: GridSpec, seed: int = 0, folds: int = 5, ratio: float = 0.7,
                  solver_options: Optional[SolverOptions] = None, cv_solver_options: Optional[SolverOptions] = None,
                  stratify: bool = False, max_workers: int = 1) -> dict:
    """
    Benchmark every dataset and collect a report.

    A dataset that fails to load or train is recorded with its error and the run
    moves on to the next one.

    Args:
        entries (list): Manifest paths, manifests or in-memory datasets.
        grid (GridSpec): Grid for the hyperparameter search.
        seed (int, optional): Seed of splits and folds. Defaults to 0.
        folds (int, optional): Cross-validation folds. Defaults to 5.
        ratio (float, optional): Training share of the split. Defaults to 0.7.
        solver_options (SolverOptions, optional): Solver settings of the refit.
        cv_solver_options (SolverOptions, optional): Solver settings of the fold fits.
        stratify (bool, optional): Stratify split and folds. Defaults to False.
        max_workers (int, optional): Threads scoring grid points. Defaults to 1.

    Returns:
        dict: Report with schema ``mvtpm-report/1``.
    """
    rows = []
    for entry in entries:
        try:
            dataset, scaling = _resolve(entry)
            rows.append(benchmark_dataset(
                dataset, grid, seed=seed, folds=folds, ratio=ratio, scaling=scaling,
                solver_options=solver_options, cv_solver_options=cv_solver_options,
                stratify=stratify, max_workers=max_workers,
            ))
        except (MvTpmError, ValueError, TypeError, OSError) as ex:
            log.error("Benchmark of %s failed: %s", _entry_name(entry), ex)
            rows.append({"dataset": _entry_name(entry), "status": "error", "error": str(ex)})

    return {
        "schema": REPORT_SCHEMA,
        "seed": seed,
        "folds": folds,
        "ratio": ratio,
        "stratify": stratify,
        "grid": grid.to_dict(),
        "rows": rows,
    }


def write_report(report: dict, path: str):
    """Write a report as indented JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2)
        handle.write("\n")


def accuracy_frame(report: dict, model_name: str = MODEL_COLUMN) -> pd.DataFrame:
    """Test accuracies of the successful rows, one row per dataset."""
    ok_rows = [row for row in report["rows"] if row["status"] == "ok"]
    frame = pd.DataFrame(
        {model_name: [row["metrics"]["accuracy"] for row in ok_rows]},
        index=pd.Index([row["dataset"] for row in ok_rows], name="dataset"),
    )
    return frame


def write_accuracy_csv(report: dict, path: str, model_name: str = MODEL_COLUMN):
    """
    Write the accuracy matrix column of a report.

    The file has a header row and dataset names in the first column, the layout the
    stats module reads. Columns of other models can be appended before comparing.
    """
    accuracy_frame(report, model_name).to_csv(path, lineterminator="\n", float_format="%.17g")
