"""
Kernel functions and Gram matrices.

The duals work with the augmented kernel ``k(x, y) + 1``. With the linear kernel
this is the dot product of rows extended by a constant 1, so the bias of each
hyperplane is absorbed exactly as the appended ones column does for the
linear formulation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from mvtpmsvm.exceptions import InvalidArgumentError

LINEAR = "linear"
GAUSSIAN_PAPER = "gaussian-paper"
GAUSSIAN_SQUARED = "gaussian-squared"

KERNEL_KINDS = (LINEAR, GAUSSIAN_PAPER, GAUSSIAN_SQUARED)
GAUSSIAN_KINDS = (GAUSSIAN_PAPER, GAUSSIAN_SQUARED)


@dataclass(frozen=True)
class KernelSpec:
    """
    A kernel choice for one view.

    ``gaussian-paper`` evaluates ``exp(-||x - y|| / (2 sigma^2))`` with the
    unsquared Euclidean norm. ``gaussian-squared`` is the conventional RBF kernel
    ``exp(-||x - y||^2 / (2 sigma^2))``. ``sigma`` is ignored by the linear kernel.

    Attributes:
        kind (str): One of ``linear``, ``gaussian-paper``, ``gaussian-squared``.
        sigma (float): Kernel width, strictly positive for gaussian kinds.
    """

    kind: str = GAUSSIAN_PAPER
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidArgumentError(
                f"Unknown kernel kind {self.kind!r}. Allowed values are: {', '.join(KERNEL_KINDS)}"
            )
        if self.kind in GAUSSIAN_KINDS and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidArgumentError(f"Gaussian kernels need sigma > 0, got {self.sigma}")

    @property
    def is_linear(self) -> bool:
        return self.kind == LINEAR

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": float(self.sigma)}

    @classmethod
    def from_dict(cls, payload: dict) -> "KernelSpec":
        return cls(kind=payload["kind"], sigma=float(payload.get("sigma", 1.0)))


def _as_rows(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a matrix, got an array with {X.ndim} dimensions")
    return X


def kernel_value(spec: KernelSpec, x, y) -> float:
    """
    Evaluate the kernel for one pair of vectors.

    Args:
        spec (KernelSpec): The kernel to evaluate.
        x (array-like): First vector.
        y (array-like): Second vector.

    Returns:
        float: ``k(x, y)``.

    Raises:
        InvalidArgumentError: If the vectors have different dimensions.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise InvalidArgumentError(f"Dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if spec.kind == LINEAR:
        return float(np.dot(x, y))
    distance = float(np.linalg.norm(x - y))
    if spec.kind == GAUSSIAN_PAPER:
        return float(np.exp(-distance / (2.0 * spec.sigma**2)))
    return float(np.exp(-distance**2 / (2.0 * spec.sigma**2)))


def gram_matrix(spec: KernelSpec, X, Y) -> np.ndarray:
    """
    Kernel matrix between the rows of ``X`` and the rows of ``Y``.

    Args:
        spec (KernelSpec): The kernel to evaluate.
        X (array-like): Matrix of shape (n, d).
        Y (array-like): Matrix of shape (p, d).

    Returns:
        np.ndarray: Matrix of shape (n, p) with entry (i, j) = k(X_i, Y_j).

    Raises:
        InvalidArgumentError: If X and Y have different feature dimensions.
    """
    X = _as_rows(X, "X")
    Y = _as_rows(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InvalidArgumentError(
            f"Dimension mismatch: X has {X.shape[1]} features, Y has {Y.shape[1]}"
        )
    if spec.kind == LINEAR:
        return X @ Y.T
    if spec.kind == GAUSSIAN_PAPER:
        return np.exp(-cdist(X, Y, "euclidean") / (2.0 * spec.sigma**2))
    return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * spec.sigma**2))


def augmented_gram(spec: KernelSpec, X, Y) -> np.ndarray:
    """
    Augmented kernel matrix ``K(X, Y) + 1``.

    For the linear kernel this equals ``[X, 1] [Y, 1]^T``.

    Args:
        spec (KernelSpec): The kernel to evaluate.
        X (array-like): Matrix of shape (n, d).
        Y (array-like): Matrix of shape (p, d).

    Returns:
        np.ndarray: Matrix of shape (n, p).
    """
    return gram_matrix(spec, X, Y) + 1.0
