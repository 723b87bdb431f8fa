"""
Cross-validated grid search over the tied hyperparameters.

Grid points set ``C1 = C3``, ``C2 = C4 = D1 = D2``, one kernel width for both
views and a fixed epsilon for both problems.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mvtpmsvm.data.dataset import TwoViewDataset, kfold_indices
from mvtpmsvm.exceptions import InvalidArgumentError
from mvtpmsvm.kernel.gram import GAUSSIAN_PAPER, KERNEL_KINDS, KernelSpec
from mvtpmsvm.model.classifier import train
from mvtpmsvm.model.dual import DEFAULT_EPSILON, Hyperparams
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor
from mvtpmsvm.preprocess.transforms import SCALING_MINMAX
from mvtpmsvm.qp.solvers import SolverOptions

log = logging.getLogger(__name__)

DEFAULT_GRID_VALUES = tuple(2.0**power for power in range(-5, 6))
CV_SOLVER_OPTIONS = SolverOptions(tol=1e-6, max_iter=20_000)


@dataclass(frozen=True)
class GridSpec:
    """
    Value sets searched by cross-validation.

    Attributes:
        c1_values (tuple): Candidates for C1 (= C3).
        c2_values (tuple): Candidates for C2 (= C4 = D1 = D2).
        sigma_values (tuple): Candidates for the kernel width of both views.
        epsilon (float): eps1 = eps2.
        kernel_kind (str): Kernel of both views.
    """

    c1_values: tuple = DEFAULT_GRID_VALUES
    c2_values: tuple = DEFAULT_GRID_VALUES
    sigma_values: tuple = DEFAULT_GRID_VALUES
    epsilon: float = DEFAULT_EPSILON
    kernel_kind: str = GAUSSIAN_PAPER

    def __post_init__(self):
        for name in ("c1_values", "c2_values", "sigma_values"):
            values = tuple(float(value) for value in getattr(self, name))
            if not values:
                raise InvalidArgumentError(f"{name} must not be empty")
            if any(not value > 0 for value in values):
                raise InvalidArgumentError(f"{name} must hold positive values")
            object.__setattr__(self, name, tuple(sorted(set(values))))
        if self.epsilon < 0:
            raise InvalidArgumentError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.kernel_kind not in KERNEL_KINDS:
            raise InvalidArgumentError(f"Unknown kernel kind {self.kernel_kind!r}")

    def points(self) -> list:
        """All (C1, C2, sigma) triples in ascending lexicographic order."""
        return list(itertools.product(self.c1_values, self.c2_values, self.sigma_values))

    def hyperparams_for(self, c1: float, c2: float, sigma: float) -> Hyperparams:
        kernel = KernelSpec(kind=self.kernel_kind, sigma=sigma)
        return Hyperparams(
            C1=c1, C2=c2, C3=c1, C4=c2, D1=c2, D2=c2,
            eps1=self.epsilon, eps2=self.epsilon,
            kernel_a=kernel, kernel_b=kernel,
        )

    def to_dict(self) -> dict:
        return {
            "c1_values": list(self.c1_values),
            "c2_values": list(self.c2_values),
            "sigma_values": list(self.sigma_values),
            "epsilon": self.epsilon,
            "kernel_kind": self.kernel_kind,
        }


@dataclass(frozen=True)
class GridScore:
    """Cross-validation outcome of one grid point."""

    c1: float
    c2: float
    sigma: float
    mean_accuracy: float
    fold_accuracies: tuple

    def to_dict(self) -> dict:
        return {
            "C1": self.c1,
            "C2": self.c2,
            "sigma": self.sigma,
            "mean_accuracy": self.mean_accuracy,
            "fold_accuracies": list(self.fold_accuracies),
        }


@dataclass(frozen=True)
class GridSearchResult:
    """
    Attributes:
        best (Hyperparams): Hyperparameters of the best grid point.
        best_score (GridScore): Its cross-validation outcome.
        scores (list): One GridScore per grid point, in grid order.
        skipped_folds (list): Indices of folds that were skipped.
    """

    best: Hyperparams
    best_score: GridScore
    scores: list = field(default_factory=list)
    skipped_folds: list = field(default_factory=list)


@dataclass(frozen=True)
class _Fold:
    train: TwoViewDataset
    validation: TwoViewDataset
    preprocessor: ViewPreprocessor


def _prepare_folds(dataset, folds, seed, scaling, stratify):
    labels = dataset.labels if stratify else None
    partition = kfold_indices(dataset.n_samples, folds, seed, labels=labels)
    prepared, skipped = [], []
    for index, held_out in enumerate(partition):
        mask = np.ones(dataset.n_samples, dtype=bool)
        mask[held_out] = False
        fold_train = dataset.subset(np.flatnonzero(mask))
        if fold_train.m1 == 0 or fold_train.m2 == 0:
            log.warning("Skipping fold %s of %s: its training part holds a single class", index, dataset.name)
            skipped.append(index)
            continue
        prepared.append(_Fold(fold_train, dataset.subset(held_out), ViewPreprocessor.fit(fold_train, scaling)))
    return prepared, skipped


def cross_validate_grid(train_set: TwoViewDataset, grid: GridSpec, folds: int = 5, seed: int = 0,
                        solver_options: Optional[SolverOptions] = None, scaling: str = SCALING_MINMAX,
                        stratify: bool = False, max_workers: int = 1) -> GridSearchResult:
    """
    Pick hyperparameters by k-fold cross-validation.

    Every grid point is scored by its mean validation accuracy. The best point is the
    first maximum in ascending (C1, C2, sigma) order, so ties go to smaller values.
    Scores do not depend on ``max_workers``.

    Args:
        train_set (TwoViewDataset): Raw training rows.
        grid (GridSpec): Values to search.
        folds (int, optional): Number of folds. Defaults to 5.
        seed (int, optional): Fold shuffle seed. Defaults to 0.
        solver_options (SolverOptions, optional): Solver settings for the fold fits.
            Defaults to tol 1e-6 and max_iter 20,000.
        scaling (str, optional): Scaling mode, fitted on each fold's training part.
        stratify (bool, optional): Use class-stratified folds. Defaults to False.
        max_workers (int, optional): Threads scoring grid points. Defaults to 1.

    Returns:
        GridSearchResult: Best hyperparameters and the full score table.

    Raises:
        InvalidArgumentError: If folds < 2 or every fold had to be skipped.
    """
    if folds < 2:
        raise InvalidArgumentError(f"folds must be at least 2, got {folds}")
    solver_options = solver_options or CV_SOLVER_OPTIONS
    prepared, skipped = _prepare_folds(train_set, folds, seed, scaling, stratify)
    if not prepared:
        raise InvalidArgumentError(f"All {folds} folds of {train_set.name} hold a single class in training")

    def score(point) -> GridScore:
        c1, c2, sigma = point
        hp = grid.hyperparams_for(c1, c2, sigma)
        accuracies = tuple(
            train(fold.train, hp, solver_options, fold.preprocessor, record_gaps=False).score(fold.validation)
            for fold in prepared
        )
        result = GridScore(c1, c2, sigma, float(np.mean(accuracies)), accuracies)
        log.debug("C1=%s C2=%s sigma=%s: mean accuracy %.4f", c1, c2, sigma, result.mean_accuracy)
        return result

    points = grid.points()
    log.info("Grid search on %s: %s points x %s folds", train_set.name, len(points), len(prepared))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            scores = list(executor.map(score, points))
    else:
        scores = [score(point) for point in points]

    best_score = scores[0]
    for candidate in scores[1:]:
        if candidate.mean_accuracy > best_score.mean_accuracy:
            best_score = candidate
    log.info(
        "Best on %s: C1=%s C2=%s sigma=%s (%.4f)",
        train_set.name, best_score.c1, best_score.c2, best_score.sigma, best_score.mean_accuracy,
    )
    return GridSearchResult(
        best=grid.hyperparams_for(best_score.c1, best_score.c2, best_score.sigma),
        best_score=best_score,
        scores=scores,
        skipped_folds=skipped,
    )
