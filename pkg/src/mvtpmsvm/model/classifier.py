"""
Training and prediction for the two-view twin parametric-margin classifier.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mvtpmsvm.data.dataset import TwoViewDataset
from mvtpmsvm.exceptions import InvalidArgumentError
from mvtpmsvm.kernel.gram import augmented_gram
from mvtpmsvm.model.dual import (
    NEGATIVE,
    POSITIVE,
    Hyperparams,
    ViewSplit,
    assemble_negative_dual,
    assemble_positive_dual,
    combine,
    duality_gap,
)
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor
from mvtpmsvm.qp.solvers import SolverOptions, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualDiagnostics:
    """Solver outcome for one dual problem."""

    iterations: int
    converged: bool
    stationarity_residual: float
    objective: float
    duality_gap: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "stationarity_residual": self.stationarity_residual,
            "objective": self.objective,
            "duality_gap": self.duality_gap,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DualDiagnostics":
        return cls(**payload)


@dataclass(frozen=True)
class TrainingDiagnostics:
    """Solver outcome of both dual problems."""

    positive: DualDiagnostics
    negative: DualDiagnostics
    solver: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.positive.converged and self.negative.converged

    def to_dict(self) -> dict:
        return {"positive": self.positive.to_dict(), "negative": self.negative.to_dict(), "solver": dict(self.solver)}

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainingDiagnostics":
        return cls(
            positive=DualDiagnostics.from_dict(payload["positive"]),
            negative=DualDiagnostics.from_dict(payload["negative"]),
            solver=dict(payload.get("solver", {})),
        )


@dataclass(frozen=True)
class MvTpmModel:
    """
    A trained classifier.

    The four hyperplanes are kept in dual form: ``s1``/``s2`` weight the positive
    training rows of view A/B in the positive hyperplanes, ``t1``/``t2`` weight the
    negative rows in the negative hyperplanes. Explicit augmented weight vectors
    ``v1, v2, u1, u2`` are materialized for views with a linear kernel.

    Attributes:
        hyperparams (Hyperparams): Hyperparameters used for training.
        split (ViewSplit): Preprocessed training rows.
        s1, s2 (np.ndarray): Combined positive-problem duals, length m1.
        t1, t2 (np.ndarray): Combined negative-problem duals, length m2.
        v1, v2, u1, u2 (np.ndarray, optional): Explicit weights ``[w, b]`` per view.
        preprocessor (ViewPreprocessor, optional): Applied to raw inputs before evaluation.
        label_map (dict): Original label values of +1 and -1.
        diagnostics (TrainingDiagnostics, optional): Solver outcome.
    """

    hyperparams: Hyperparams
    split: ViewSplit
    s1: np.ndarray
    s2: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    u1: Optional[np.ndarray] = None
    u2: Optional[np.ndarray] = None
    preprocessor: Optional[ViewPreprocessor] = None
    label_map: dict = field(default_factory=lambda: {1: "1", -1: "-1"})
    diagnostics: Optional[TrainingDiagnostics] = None

    def __post_init__(self):
        for name in ("s1", "s2", "t1", "t2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidArgumentError(f"Dual vector {name} has non-finite entries")

    def hyperplane_matrix(self, view_a, view_b) -> np.ndarray:
        """
        Hyperplane values of preprocessed rows.

        Args:
            view_a (array-like): Rows of view A, shape (n, dA).
            view_b (array-like): Rows of view B, shape (n, dB).

        Returns:
            np.ndarray: Shape (n, 4) with columns h1A, h1B, h2A, h2B.
        """
        hp = self.hyperparams
        view_a = np.atleast_2d(np.asarray(view_a, dtype=float))
        view_b = np.atleast_2d(np.asarray(view_b, dtype=float))
        if view_a.shape[0] != view_b.shape[0]:
            raise InvalidArgumentError(f"Views have {view_a.shape[0]} and {view_b.shape[0]} rows")
        a_pos = augmented_gram(hp.kernel_a, view_a, self.split.p_a)
        a_neg = augmented_gram(hp.kernel_a, view_a, self.split.n_a)
        b_pos = augmented_gram(hp.kernel_b, view_b, self.split.p_b)
        b_neg = augmented_gram(hp.kernel_b, view_b, self.split.n_b)
        return np.column_stack([
            a_pos @ self.s1 - hp.C1 * a_neg.sum(axis=1),
            b_pos @ self.s2 - hp.C1 * b_neg.sum(axis=1),
            hp.C3 * a_pos.sum(axis=1) - a_neg @ self.t1,
            hp.C3 * b_pos.sum(axis=1) - b_neg @ self.t2,
        ])

    def _prepare(self, view_a, view_b):
        if self.preprocessor is None:
            if view_b is None:
                raise InvalidArgumentError("View B is absent and no PCA basis is available to synthesize it")
            return view_a, view_b
        return self.preprocessor.transform_views(view_a, view_b)

    def decision_function(self, view_a, view_b=None) -> np.ndarray:
        """
        Decision values ``f = |h1A + h1B| - |h2A + h2B|`` of raw rows.

        Args:
            view_a (array-like): Raw rows of view A.
            view_b (array-like, optional): Raw rows of view B. May be omitted when the
                model synthesizes view B from view A.

        Returns:
            np.ndarray: One value per row. Negative values mean the positive class.
        """
        view_a, view_b = self._prepare(view_a, view_b)
        return decision_values(self.hyperplane_matrix(view_a, view_b))

    def predict(self, view_a, view_b=None) -> np.ndarray:
        """Labels in {+1, -1}; +1 exactly where the decision value is negative."""
        return np.where(self.decision_function(view_a, view_b) < 0.0, 1, -1)

    def predict_labels(self, view_a, view_b=None) -> np.ndarray:
        """Predictions in the original label vocabulary."""
        return np.array([self.label_map[int(label)] for label in self.predict(view_a, view_b)], dtype=object)

    def score(self, dataset: TwoViewDataset) -> float:
        """Accuracy on a raw dataset."""
        return float(np.mean(self.predict(dataset.view_a, dataset.view_b) == dataset.labels))


def decision_values(hyperplanes: np.ndarray) -> np.ndarray:
    """Decision values from an (n, 4) matrix of h1A, h1B, h2A, h2B."""
    return np.abs(hyperplanes[:, 0] + hyperplanes[:, 1]) - np.abs(hyperplanes[:, 2] + hyperplanes[:, 3])


def hyperplane_values(model: MvTpmModel, x_a, x_b) -> tuple:
    """
    The four hyperplane values of one preprocessed sample.

    Args:
        model (MvTpmModel): The trained model.
        x_a (array-like): View A vector.
        x_b (array-like): View B vector.

    Returns:
        tuple: (h1A, h1B, h2A, h2B).

    Raises:
        InvalidArgumentError: If a vector does not match the training dimension.
    """
    row = model.hyperplane_matrix(np.reshape(x_a, (1, -1)), np.reshape(x_b, (1, -1)))[0]
    return tuple(float(value) for value in row)


def decide(model: MvTpmModel, x_a, x_b) -> tuple:
    """
    Decision value and label of one preprocessed sample.

    The positive class is predicted only when ``f < 0``. A tie at exactly zero goes
    to the negative class.

    Returns:
        tuple: (f, label).
    """
    h1a, h1b, h2a, h2b = hyperplane_values(model, x_a, x_b)
    f = abs(h1a + h1b) - abs(h2a + h2b)
    return f, (1 if f < 0.0 else -1)


def _augment(X: np.ndarray) -> np.ndarray:
    return np.column_stack([X, np.ones(X.shape[0])])


def explicit_weights(split: ViewSplit, hp: Hyperparams, s1, s2, t1, t2) -> dict:
    """
    Explicit augmented weight vectors for the linear-kernel views.

    ``v = [P, 1]^T s - C1 [N, 1]^T e`` and ``u = C3 [P, 1]^T e - [N, 1]^T t``.

    Returns:
        dict: Entries ``v1``/``u1`` when view A is linear and ``v2``/``u2`` when view B is.
    """
    weights = {}
    if hp.kernel_a.is_linear:
        p_a, n_a = _augment(split.p_a), _augment(split.n_a)
        weights["v1"] = p_a.T @ s1 - hp.C1 * n_a.sum(axis=0)
        weights["u1"] = hp.C3 * p_a.sum(axis=0) - n_a.T @ t1
    if hp.kernel_b.is_linear:
        p_b, n_b = _augment(split.p_b), _augment(split.n_b)
        weights["v2"] = p_b.T @ s2 - hp.C1 * n_b.sum(axis=0)
        weights["u2"] = hp.C3 * p_b.sum(axis=0) - n_b.T @ t2
    return weights


def explicit_hyperplane_values(model: MvTpmModel, x_a, x_b) -> tuple:
    """
    Hyperplane values through the explicit weights, ``[x, 1] . v`` and ``[x, 1] . u``.

    Raises:
        InvalidArgumentError: If either view was not trained with a linear kernel.
    """
    if any(weight is None for weight in (model.v1, model.v2, model.u1, model.u2)):
        raise InvalidArgumentError("Explicit weights exist only when both views use the linear kernel")
    x_a = np.append(np.asarray(x_a, dtype=float).ravel(), 1.0)
    x_b = np.append(np.asarray(x_b, dtype=float).ravel(), 1.0)
    if x_a.shape != model.v1.shape or x_b.shape != model.v2.shape:
        raise InvalidArgumentError("Dimension mismatch with the trained weights")
    return float(x_a @ model.v1), float(x_b @ model.v2), float(x_a @ model.u1), float(x_b @ model.u2)


def train(dataset: TwoViewDataset, hp: Hyperparams, solver_options: Optional[SolverOptions] = None,
          preprocessor: Optional[ViewPreprocessor] = None, record_gaps: bool = True) -> MvTpmModel:
    """
    Train the classifier by solving the positive and the negative dual.

    Args:
        dataset (TwoViewDataset): Raw training rows.
        hp (Hyperparams): Hyperparameters.
        solver_options (SolverOptions, optional): Dual solver settings.
        preprocessor (ViewPreprocessor, optional): Fitted preprocessing applied to the
            training rows and stored in the model.
        record_gaps (bool, optional): Compute duality gaps for the diagnostics. Defaults to True.

    Returns:
        MvTpmModel: The trained model. Non-convergence is reported in its diagnostics.

    Raises:
        InvalidArgumentError: If the dataset lacks one of the classes.
    """
    solver_options = solver_options or SolverOptions()
    prepared = preprocessor.transform(dataset) if preprocessor is not None else dataset
    split = ViewSplit.from_dataset(prepared)
    log.info("Training on %s: m1=%s, m2=%s, solver=%s", dataset.name, split.m1, split.m2, solver_options.method)

    outcomes = {}
    combined = {}
    for which, assemble, m in ((POSITIVE, assemble_positive_dual, split.m1), (NEGATIVE, assemble_negative_dual, split.m2)):
        solution = solve(assemble(split, hp), solver_options)
        gap = duality_gap(split, hp, which, solution) if record_gaps else None
        outcomes[which] = DualDiagnostics(
            iterations=solution.iterations,
            converged=solution.converged,
            stationarity_residual=solution.stationarity_residual,
            objective=solution.objective,
            duality_gap=gap,
        )
        combined[which] = combine(solution.tau, m)

    s1, s2 = combined[POSITIVE]
    t1, t2 = combined[NEGATIVE]
    diagnostics = TrainingDiagnostics(outcomes[POSITIVE], outcomes[NEGATIVE], solver_options.to_dict())
    if not diagnostics.converged:
        log.warning("Training on %s finished without reaching tol=%s", dataset.name, solver_options.tol)
    log.info(
        "Trained on %s: %s + %s iterations", dataset.name, outcomes[POSITIVE].iterations, outcomes[NEGATIVE].iterations
    )

    return MvTpmModel(
        hyperparams=hp,
        split=split,
        s1=s1,
        s2=s2,
        t1=t1,
        t2=t2,
        preprocessor=preprocessor,
        label_map=dict(dataset.label_names),
        diagnostics=diagnostics,
        **explicit_weights(split, hp, s1, s2, t1, t2),
    )
