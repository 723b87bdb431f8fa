"""
Rank-based comparison of several models over several datasets.

Input is an accuracy matrix with one row per dataset and one column per model.
Larger accuracy is better and receives the smaller rank.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from mvtpmsvm.exceptions import DataParseError, InvalidArgumentError

log = logging.getLogger(__name__)

STATS_SCHEMA = "mvtpm-stats/1"
UNIT_FRACTION = "fraction"
UNIT_PERCENT = "percent"
UNIT_UPPER_BOUNDS = {UNIT_FRACTION: 1.0, UNIT_PERCENT: 100.0}
DEFAULT_Z = 1.96


@dataclass(frozen=True)
class AccuracyMatrix:
    """
    Accuracies of k models on N datasets.

    Attributes:
        values (np.ndarray): Matrix of shape (N, k).
        dataset_names (tuple): N row labels.
        model_names (tuple): k column labels.
        unit (str): ``fraction`` for values in [0, 1], ``percent`` for values in [0, 100].
    """

    values: np.ndarray
    dataset_names: tuple
    model_names: tuple
    unit: str = UNIT_FRACTION

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dataset_names", tuple(str(name) for name in self.dataset_names))
        object.__setattr__(self, "model_names", tuple(str(name) for name in self.model_names))
        if self.unit not in UNIT_UPPER_BOUNDS:
            raise InvalidArgumentError(f"unit must be {UNIT_FRACTION!r} or {UNIT_PERCENT!r}, got {self.unit!r}")
        if values.ndim != 2:
            raise InvalidArgumentError("Accuracy values must form a matrix")
        if values.shape != (len(self.dataset_names), len(self.model_names)):
            raise InvalidArgumentError("Accuracy matrix shape does not match its row and column names")
        if values.shape[0] < 2 or values.shape[1] < 2:
            raise InvalidArgumentError(f"Need at least 2 datasets and 2 models, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("Accuracy matrix has non-finite entries")
        upper = UNIT_UPPER_BOUNDS[self.unit]
        if np.any(values < 0.0) or np.any(values > upper):
            raise InvalidArgumentError(f"Accuracies in unit {self.unit!r} must lie in [0, {upper:g}]")

    @property
    def n_datasets(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_models(self) -> int:
        return int(self.values.shape[1])

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, unit: str = UNIT_FRACTION) -> "AccuracyMatrix":
        """Build from a frame indexed by dataset with one column per model."""
        try:
            values = frame.apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
        except (ValueError, TypeError) as ex:
            raise DataParseError(f"Accuracy table has non-numeric entries: {ex}") from ex
        if not np.all(np.isfinite(values)):
            raise DataParseError("Accuracy table has empty or non-finite entries")
        return cls(values, tuple(frame.index), tuple(frame.columns), unit)

    @classmethod
    def from_csv(cls, path: str, unit: str = UNIT_FRACTION) -> "AccuracyMatrix":
        """
        Read a CSV file with a header row of model names and dataset names in the first column.

        Raises:
            DataParseError: If the file cannot be parsed into a numeric table.
        """
        try:
            frame = pd.read_csv(path, index_col=0, encoding="utf-8")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as ex:
            raise DataParseError(f"Could not parse {path}: {ex}") from ex
        return cls.from_frame(frame, unit)


def average_ranks(acc: AccuracyMatrix) -> np.ndarray:
    """
    Mean rank of every model; tied accuracies share the average of their positions.

    Args:
        acc (AccuracyMatrix): The accuracy matrix.

    Returns:
        np.ndarray: k average ranks, each in [1, k].
    """
    ranks = rankdata(-acc.values, method="average", axis=1)
    return ranks.mean(axis=0)


def friedman_chi_squared(ranks, n_datasets: int) -> float:
    """
    Friedman statistic ``12N / (k(k+1)) * (sum R_j^2 - k(k+1)^2 / 4)``.

    Args:
        ranks (array-like): Average ranks R_j of the k models.
        n_datasets (int): N.

    Returns:
        float: The chi-squared statistic.
    """
    ranks = np.asarray(ranks, dtype=float).ravel()
    k = ranks.shape[0]
    if k < 2 or n_datasets < 2:
        raise InvalidArgumentError(f"Need k >= 2 and N >= 2, got k={k}, N={n_datasets}")
    return float(12.0 * n_datasets / (k * (k + 1)) * (np.sum(ranks**2) - k * (k + 1) ** 2 / 4.0))


def friedman_f_statistic(chi2: float, n_datasets: int, n_models: int) -> float:
    """
    Iman-Davenport form ``(N - 1) chi2 / (N (k - 1) - chi2)``.

    Raises:
        InvalidArgumentError: If the denominator is not positive.
    """
    denominator = n_datasets * (n_models - 1) - chi2
    if denominator <= 0:
        raise InvalidArgumentError(
            f"F statistic undefined: N(k-1) = {n_datasets * (n_models - 1)} does not exceed chi2 = {chi2}"
        )
    return float((n_datasets - 1) * chi2 / denominator)


def nemenyi_critical_difference(n_models: int, n_datasets: int, q_alpha: float) -> float:
    """Critical difference ``q_alpha * sqrt(k(k+1) / (6N))``."""
    if n_models < 1 or n_datasets < 1 or q_alpha < 0:
        raise InvalidArgumentError("k and N must be positive and q_alpha non-negative")
    return float(q_alpha * np.sqrt(n_models * (n_models + 1) / (6.0 * n_datasets)))


def nemenyi_significant_pairs(ranks, critical_difference: float, model_names=None) -> list:
    """
    Model pairs whose average ranks differ by more than the critical difference.

    Returns:
        list: Tuples ``(better, worse, difference)`` ordered by model position.
    """
    ranks = np.asarray(ranks, dtype=float).ravel()
    names = list(model_names) if model_names is not None else [str(index) for index in range(ranks.shape[0])]
    pairs = []
    for i in range(ranks.shape[0]):
        for j in range(i + 1, ranks.shape[0]):
            difference = abs(ranks[i] - ranks[j])
            if difference > critical_difference:
                better, worse = (names[i], names[j]) if ranks[i] < ranks[j] else (names[j], names[i])
                pairs.append((better, worse, float(difference)))
    return pairs


def sign_test_threshold(n_datasets: int, z: float = DEFAULT_Z) -> float:
    """
    Wins needed for a pairwise sign test to call one model better: ``N/2 + z sqrt(N)``.

    For N = 55 and z = 1.96 this gives 42.035.
    """
    if n_datasets < 1:
        raise InvalidArgumentError(f"N must be positive, got {n_datasets}")
    return float(n_datasets / 2.0 + z * np.sqrt(n_datasets))


@dataclass(frozen=True)
class WinTieLossTable:
    """
    Pairwise dataset counts; entry (i, j) compares model i against model j.

    Ties are exact equality of the input values.

    Attributes:
        model_names (tuple): k model names.
        wins (np.ndarray): (k, k) counts of datasets where model i is strictly better.
        ties (np.ndarray): (k, k) counts of exact ties.
        losses (np.ndarray): (k, k) counts where model i is strictly worse.
        threshold (float): Sign-test threshold for N datasets.
        significant (np.ndarray): (k, k) flags; wins plus half of the ties (one
            dropped when odd) reach the threshold.
    """

    model_names: tuple
    wins: np.ndarray
    ties: np.ndarray
    losses: np.ndarray
    threshold: float
    significant: np.ndarray = field(repr=False)

    def counts(self, first: str, second: str) -> tuple:
        i, j = self.model_names.index(first), self.model_names.index(second)
        return int(self.wins[i, j]), int(self.ties[i, j]), int(self.losses[i, j])

    def to_dict(self) -> dict:
        table = {}
        for i, first in enumerate(self.model_names):
            for j, second in enumerate(self.model_names):
                if i != j:
                    table[f"{first} vs {second}"] = {
                        "win_tie_loss": [int(self.wins[i, j]), int(self.ties[i, j]), int(self.losses[i, j])],
                        "significant": bool(self.significant[i, j]),
                    }
        return {"threshold": self.threshold, "pairs": table}


def effective_wins(wins: int, ties: int) -> float:
    """Wins credited for the sign test: an odd tie is dropped, the rest split evenly."""
    return wins + (ties - ties % 2) / 2.0


def win_tie_loss_table(acc: AccuracyMatrix, z: float = DEFAULT_Z) -> WinTieLossTable:
    """
    Count wins, ties and losses of every ordered model pair.

    Args:
        acc (AccuracyMatrix): The accuracy matrix.
        z (float, optional): Normal quantile of the sign test. Defaults to 1.96.

    Returns:
        WinTieLossTable: Raw counts plus the sign-test threshold and significance flags.
    """
    values = acc.values
    wins = (values[:, :, None] > values[:, None, :]).sum(axis=0)
    ties = (values[:, :, None] == values[:, None, :]).sum(axis=0)
    losses = (values[:, :, None] < values[:, None, :]).sum(axis=0)
    threshold = sign_test_threshold(acc.n_datasets, z)
    significant = effective_wins(wins, ties) >= threshold
    np.fill_diagonal(significant, False)
    return WinTieLossTable(acc.model_names, wins, ties, losses, threshold, significant)


@dataclass(frozen=True)
class FriedmanResult:
    """Average ranks with the Friedman chi-squared and F statistics."""

    ranks: np.ndarray
    chi2: float
    f_statistic: float
    n_datasets: int
    n_models: int


def friedman_from_matrix(acc: AccuracyMatrix) -> FriedmanResult:
    """
    Ranks, chi-squared and F statistic in one call.

    The F statistic is ``None`` when every dataset ranks the models identically.
    """
    ranks = average_ranks(acc)
    chi2 = friedman_chi_squared(ranks, acc.n_datasets)
    try:
        f_statistic = friedman_f_statistic(chi2, acc.n_datasets, acc.n_models)
    except InvalidArgumentError as ex:
        log.warning("%s", ex)
        f_statistic = None
    return FriedmanResult(ranks, chi2, f_statistic, acc.n_datasets, acc.n_models)


def stats_report(acc: AccuracyMatrix, q_alpha: float, z: float = DEFAULT_Z) -> dict:
    """
    Full comparison report.

    Args:
        acc (AccuracyMatrix): The accuracy matrix.
        q_alpha (float): Studentized range quantile for the Nemenyi test, e.g. 2.850 for
            six models at alpha = 0.10.
        z (float, optional): Normal quantile of the sign test. Defaults to 1.96.

    Returns:
        dict: Report with schema ``mvtpm-stats/1``.
    """
    friedman = friedman_from_matrix(acc)
    critical_difference = nemenyi_critical_difference(acc.n_models, acc.n_datasets, q_alpha)
    table = win_tie_loss_table(acc, z)
    return {
        "schema": STATS_SCHEMA,
        "n_datasets": acc.n_datasets,
        "n_models": acc.n_models,
        "unit": acc.unit,
        "models": list(acc.model_names),
        "average_ranks": {name: float(rank) for name, rank in zip(acc.model_names, friedman.ranks)},
        "friedman": {"chi2": friedman.chi2, "f_statistic": friedman.f_statistic},
        "nemenyi": {
            "q_alpha": q_alpha,
            "critical_difference": critical_difference,
            "significant_pairs": [
                {"better": better, "worse": worse, "rank_difference": difference}
                for better, worse, difference in nemenyi_significant_pairs(
                    friedman.ranks, critical_difference, acc.model_names
                )
            ],
        },
        "win_tie_loss": table.to_dict(),
    }
