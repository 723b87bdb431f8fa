"""
Dual problems of the two-view twin parametric-margin classifier.

The positive problem fits one hyperplane per view around the positive class,
pushed away from the negative class and coupled by an epsilon-insensitive
agreement constraint on the positive samples. Its dual lives in
``tau = (beta1 | beta2 | alpha1 | alpha2)`` of length ``4 m1``.

The negative problem is the same construction with the classes and the
hyperparameter roles exchanged, so it is built by swapping and reusing the
positive assembly.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from mvtpmsvm.exceptions import InvalidArgumentError
from mvtpmsvm.kernel.gram import KernelSpec, augmented_gram
from mvtpmsvm.qp.solvers import QpSolution, StructuredQp, objective

log = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"
DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class Hyperparams:
    """
    Penalties and kernels of both dual problems.

    Attributes:
        C1 (float): Weight pushing the positive hyperplanes away from the negative class.
        C2 (float): Penalty on positive-class margin slack (cap of the positive alphas).
        C3 (float): Weight pushing the negative hyperplanes away from the positive class.
        C4 (float): Penalty on negative-class margin slack (cap of the negative alphas).
        D1 (float): View-agreement penalty of the positive problem.
        D2 (float): View-agreement penalty of the negative problem.
        eps1 (float): Agreement insensitivity of the positive problem.
        eps2 (float): Agreement insensitivity of the negative problem.
        kernel_a (KernelSpec): Kernel of view A.
        kernel_b (KernelSpec): Kernel of view B.
    """

    C1: float = 1.0
    C2: float = 1.0
    C3: float = 1.0
    C4: float = 1.0
    D1: float = 1.0
    D2: float = 1.0
    eps1: float = DEFAULT_EPSILON
    eps2: float = DEFAULT_EPSILON
    kernel_a: KernelSpec = field(default_factory=KernelSpec)
    kernel_b: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        for name in ("C1", "C2", "C3", "C4", "D1", "D2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be a positive number, got {value}")
        for name in ("eps1", "eps2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise InvalidArgumentError(f"{name} must be non-negative, got {value}")

    def swapped(self) -> "Hyperparams":
        """Exchange the roles of the positive and negative problem."""
        return Hyperparams(
            C1=self.C3, C2=self.C4, C3=self.C1, C4=self.C2,
            D1=self.D2, D2=self.D1, eps1=self.eps2, eps2=self.eps1,
            kernel_a=self.kernel_a, kernel_b=self.kernel_b,
        )

    def to_dict(self) -> dict:
        return {
            "C1": self.C1, "C2": self.C2, "C3": self.C3, "C4": self.C4,
            "D1": self.D1, "D2": self.D2, "eps1": self.eps1, "eps2": self.eps2,
            "kernel_a": self.kernel_a.to_dict(),
            "kernel_b": self.kernel_b.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Hyperparams":
        values = {key: float(payload[key]) for key in ("C1", "C2", "C3", "C4", "D1", "D2", "eps1", "eps2")}
        return cls(
            kernel_a=KernelSpec.from_dict(payload["kernel_a"]),
            kernel_b=KernelSpec.from_dict(payload["kernel_b"]),
            **values,
        )


@dataclass(frozen=True)
class ViewSplit:
    """
    Training rows of both views, split by class.

    Attributes:
        p_a (np.ndarray): Positive rows of view A, shape (m1, dA).
        p_b (np.ndarray): Positive rows of view B, shape (m1, dB).
        n_a (np.ndarray): Negative rows of view A, shape (m2, dA).
        n_b (np.ndarray): Negative rows of view B, shape (m2, dB).
    """

    p_a: np.ndarray
    p_b: np.ndarray
    n_a: np.ndarray
    n_b: np.ndarray

    def __post_init__(self):
        for name in ("p_a", "p_b", "n_a", "n_b"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.ndim != 2:
                raise InvalidArgumentError(f"{name} must be a matrix")
            object.__setattr__(self, name, value)
        if self.p_a.shape[0] != self.p_b.shape[0] or self.n_a.shape[0] != self.n_b.shape[0]:
            raise InvalidArgumentError("Both views must hold the same rows of each class")
        if self.p_a.shape[0] < 1 or self.n_a.shape[0] < 1:
            raise InvalidArgumentError(
                f"Both classes need at least one sample, got m1={self.p_a.shape[0]}, m2={self.n_a.shape[0]}"
            )
        if self.p_a.shape[1] != self.n_a.shape[1] or self.p_b.shape[1] != self.n_b.shape[1]:
            raise InvalidArgumentError("Both classes must have the same feature dimension per view")

    @property
    def m1(self) -> int:
        return int(self.p_a.shape[0])

    @property
    def m2(self) -> int:
        return int(self.n_a.shape[0])

    def swapped(self) -> "ViewSplit":
        """The same rows with the class roles exchanged."""
        return ViewSplit(p_a=self.n_a, p_b=self.n_b, n_a=self.p_a, n_b=self.p_b)

    @classmethod
    def from_dataset(cls, dataset) -> "ViewSplit":
        """
        Split a two-view dataset by label.

        Raises:
            InvalidArgumentError: If one of the classes is empty.
        """
        positive = dataset.labels == 1
        negative = dataset.labels == -1
        if not positive.any() or not negative.any():
            raise InvalidArgumentError("Training needs samples of both classes")
        return cls(
            p_a=dataset.view_a[positive],
            p_b=dataset.view_b[positive],
            n_a=dataset.view_a[negative],
            n_b=dataset.view_b[negative],
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist() for name in ("p_a", "p_b", "n_a", "n_b")}

    @classmethod
    def from_dict(cls, payload: dict) -> "ViewSplit":
        return cls(**{name: np.asarray(payload[name], dtype=float) for name in ("p_a", "p_b", "n_a", "n_b")})


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def assemble_positive_dual(split: ViewSplit, hp: Hyperparams) -> StructuredQp:
    """
    Build the dual of the positive problem.

    With ``F1 = K~A(P_A, P_A)``, ``F2 = K~B(P_B, P_B)``, ``G1 = K~A(N_A, P_A)`` and
    ``G2 = K~B(N_B, P_B)`` (``K~`` is the augmented kernel), the quadratic form is
    ``s1^T F1 s1 + s2^T F2 s2`` with ``s1 = alpha1 - beta1 + beta2`` and
    ``s2 = alpha2 + beta1 - beta2``, and the linear term rewards ``C1 G^T e``.

    Args:
        split (ViewSplit): Class-split training rows.
        hp (Hyperparams): Hyperparameters.

    Returns:
        StructuredQp: Problem of size ``4 m1`` with alpha cap C2 and pair cap D1.
    """
    f1 = _symmetric(augmented_gram(hp.kernel_a, split.p_a, split.p_a))
    f2 = _symmetric(augmented_gram(hp.kernel_b, split.p_b, split.p_b))
    k1 = hp.C1 * augmented_gram(hp.kernel_a, split.n_a, split.p_a).sum(axis=0)
    k2 = hp.C1 * augmented_gram(hp.kernel_b, split.n_b, split.p_b).sum(axis=0)

    zero = np.zeros_like(f1)
    q = np.block([
        [f1 + f2, -f1 - f2, -f1, f2],
        [-f1 - f2, f1 + f2, f1, -f2],
        [-f1, f1, f1, zero],
        [f2, -f2, zero, f2],
    ])
    c = np.concatenate([k2 - k1 - hp.eps1, k1 - k2 - hp.eps1, k1, k2])
    return StructuredQp(q=q, c=c, block_size=split.m1, alpha_cap=hp.C2, pair_cap=hp.D1, blocks=(f1, f2))


def assemble_negative_dual(split: ViewSplit, hp: Hyperparams) -> StructuredQp:
    """
    Build the dual of the negative problem.

    This is the positive construction on the class-swapped split with
    ``(C1, C2, D1, eps1)`` and ``(C3, C4, D2, eps2)`` exchanged: size ``4 m2``,
    alpha cap C4, pair cap D2.
    """
    return assemble_positive_dual(split.swapped(), hp.swapped())


def combine(tau: np.ndarray, m: int):
    """Return ``(alpha1 - beta1 + beta2, alpha2 + beta1 - beta2)`` for a dual point."""
    beta1, beta2, alpha1, alpha2 = tau[:m], tau[m:2 * m], tau[2 * m:3 * m], tau[3 * m:]
    return alpha1 - beta1 + beta2, alpha2 + beta1 - beta2


def _positive_objectives(split: ViewSplit, hp: Hyperparams, qp: StructuredQp, tau: np.ndarray):
    f1, f2 = qp.blocks
    g1 = augmented_gram(hp.kernel_a, split.n_a, split.p_a)
    g2 = augmented_gram(hp.kernel_b, split.n_b, split.p_b)
    n1 = augmented_gram(hp.kernel_a, split.n_a, split.n_a).sum()
    n2 = augmented_gram(hp.kernel_b, split.n_b, split.n_b).sum()
    s1, s2 = combine(tau, split.m1)

    # dual value in maximization orientation, constants of the primal included
    dual = -objective(qp, tau) - 0.5 * hp.C1**2 * (n1 + n2)

    pull1 = g1.sum(axis=0)
    pull2 = g2.sum(axis=0)
    # margins A v on the positive rows of each view
    r1 = f1 @ s1 - hp.C1 * pull1
    r2 = f2 @ s2 - hp.C1 * pull2
    norm1 = s1 @ f1 @ s1 - 2.0 * hp.C1 * s1 @ pull1 + hp.C1**2 * n1
    norm2 = s2 @ f2 @ s2 - 2.0 * hp.C1 * s2 @ pull2 + hp.C1**2 * n2
    # e^T B v on the negative rows of each view
    push1 = pull1 @ s1 - hp.C1 * n1
    push2 = pull2 @ s2 - hp.C1 * n2

    slack = np.maximum(0.0, -r1).sum() + np.maximum(0.0, -r2).sum()
    disagreement = np.maximum(0.0, np.abs(r1 - r2) - hp.eps1).sum()
    primal = 0.5 * (norm1 + norm2) + hp.C1 * (push1 + push2) + hp.C2 * slack + hp.D1 * disagreement
    return float(primal), float(dual)


def primal_dual_objectives(split: ViewSplit, hp: Hyperparams, which: str, solution: QpSolution):
    """
    Primal and dual objective values of one problem at a dual point.

    The primal point is recovered from the dual through the stationarity
    conditions; slacks take their smallest feasible values.

    Returns:
        tuple: (primal, dual).
    """
    if which == NEGATIVE:
        split, hp = split.swapped(), hp.swapped()
    elif which != POSITIVE:
        raise InvalidArgumentError(f"which must be {POSITIVE!r} or {NEGATIVE!r}, got {which!r}")
    qp = assemble_positive_dual(split, hp)
    tau = np.asarray(solution.tau, dtype=float)
    if tau.shape != (qp.size,):
        raise InvalidArgumentError(f"Dual point must have length {qp.size}, got {tau.shape[0]}")
    return _positive_objectives(split, hp, qp, tau)


def duality_gap(split: ViewSplit, hp: Hyperparams, which: str, solution: QpSolution) -> float:
    """
    Primal minus dual objective of the positive or negative problem.

    Non-negative up to roundoff for every feasible dual point and zero at the optimum.

    Args:
        split (ViewSplit): Class-split training rows the problem was built from.
        hp (Hyperparams): Hyperparameters the problem was built from.
        which (str): ``positive`` or ``negative``.
        solution (QpSolution): Feasible dual point.

    Returns:
        float: The duality gap.
    """
    primal, dual = primal_dual_objectives(split, hp, which, solution)
    return primal - dual
