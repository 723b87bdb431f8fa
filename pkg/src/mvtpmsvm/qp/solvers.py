"""
Solvers for the structured dual quadratic programs.

Both duals of the classifier reduce to

    minimize    1/2 tau^T Q tau - c^T tau
    subject to  beta1, beta2 >= 0,  beta1 + beta2 <= D   (elementwise)
                0 <= alpha1, alpha2 <= alpha_cap

with ``tau = (beta1 | beta2 | alpha1 | alpha2)``, each block of length ``m``.
The feasible set is a product of per-index triangles and boxes, so the
Euclidean projection onto it is cheap and exact.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mvtpmsvm.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

PROJECTED_GRADIENT = "projected_gradient"
COORDINATE_DESCENT = "coordinate_descent"
SOLVER_METHODS = (PROJECTED_GRADIENT, COORDINATE_DESCENT)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50_000
POWER_ITERATIONS = 200
POWER_TOLERANCE = 1e-3


@dataclass(frozen=True)
class SolverOptions:
    """
    Settings shared by the dual solvers.

    Attributes:
        method (str): ``projected_gradient`` or ``coordinate_descent``.
        tol (float): Tolerance on the stationarity residual.
        max_iter (int): Iteration cap (sweeps for coordinate descent).
    """

    method: str = PROJECTED_GRADIENT
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.method not in SOLVER_METHODS:
            raise InvalidArgumentError(
                f"Unknown solver {self.method!r}. Allowed values are: {', '.join(SOLVER_METHODS)}"
            )
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be at least 1, got {self.max_iter}")

    def to_dict(self) -> dict:
        return {"method": self.method, "tol": self.tol, "max_iter": self.max_iter}


@dataclass
class StructuredQp:
    """
    One dual problem.

    Attributes:
        q (np.ndarray): Symmetric PSD matrix of shape (4m, 4m).
        c (np.ndarray): Linear coefficients of length 4m.
        block_size (int): m, the length of each of the four blocks.
        alpha_cap (float): Upper bound of both alpha blocks.
        pair_cap (float): Bound D on beta1_i + beta2_i.
        blocks (tuple, optional): The kernel blocks (F1, F2) the matrix was built from.
            When present, products with ``q`` go through the block expansion.
    """

    q: np.ndarray
    c: np.ndarray
    block_size: int
    alpha_cap: float
    pair_cap: float
    blocks: Optional[tuple] = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = 4 * self.block_size
        if self.block_size < 1:
            raise InvalidArgumentError(f"block_size must be positive, got {self.block_size}")
        if self.q.shape != (n, n):
            raise InvalidArgumentError(f"Q must have shape ({n}, {n}), got {self.q.shape}")
        if self.c.shape != (n,):
            raise InvalidArgumentError(f"c must have length {n}, got {self.c.shape[0]}")
        if not self.alpha_cap > 0:
            raise InvalidArgumentError(f"alpha_cap must be positive, got {self.alpha_cap}")
        if not self.pair_cap > 0:
            raise InvalidArgumentError(f"pair_cap must be positive, got {self.pair_cap}")

    @property
    def size(self) -> int:
        return 4 * self.block_size

    def product(self, tau: np.ndarray) -> np.ndarray:
        """Return ``Q tau``."""
        if self.blocks is None:
            return self.q @ tau
        f1, f2 = self.blocks
        m = self.block_size
        beta1, beta2, alpha1, alpha2 = tau[:m], tau[m:2 * m], tau[2 * m:3 * m], tau[3 * m:]
        u1 = f1 @ (alpha1 - beta1 + beta2)
        u2 = f2 @ (alpha2 + beta1 - beta2)
        return np.concatenate([u2 - u1, u1 - u2, u1, u2])


@dataclass
class QpSolution:
    """
    Result of a dual solve.

    Attributes:
        tau (np.ndarray): Feasible point of length 4m.
        objective (float): Value of ``1/2 tau^T Q tau - c^T tau``.
        iterations (int): Iterations (or sweeps) performed.
        converged (bool): Whether the stationarity residual reached the tolerance.
        stationarity_residual (float): ``||tau - P(tau - grad f(tau))||_inf``.
        history (list): Objective after every iteration when recorded.
    """

    tau: np.ndarray
    objective: float
    iterations: int
    converged: bool
    stationarity_residual: float
    history: list = field(default_factory=list)


def _check_finite(qp: StructuredQp):
    if not (np.all(np.isfinite(qp.q)) and np.all(np.isfinite(qp.c))):
        raise InvalidArgumentError("Q and c must contain only finite values")


def project_feasible(point, qp: StructuredQp) -> np.ndarray:
    """
    Euclidean projection onto the feasible set, independently per index.

    Alpha entries are clamped to ``[0, alpha_cap]``. Each pair (beta1_i, beta2_i) is
    projected onto the triangle ``{a >= 0, b >= 0, a + b <= D}``.

    Args:
        point (array-like): Vector of length 4m.
        qp (StructuredQp): The problem that defines the bounds.

    Returns:
        np.ndarray: The projected vector.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (qp.size,):
        raise InvalidArgumentError(f"Point must have length {qp.size}, got {point.shape}")
    m = qp.block_size
    cap = qp.pair_cap

    a = np.maximum(point[:m], 0.0)
    b = np.maximum(point[m:2 * m], 0.0)
    over = a + b > cap
    shift = np.where(over, (a + b - cap) / 2.0, 0.0)
    a = a - shift
    b = b - shift
    # mass moves to the other coordinate when the segment endpoint is passed
    a_short = over & (a < 0.0)
    b_short = over & (b < 0.0)
    a = np.where(a_short, 0.0, np.where(b_short, cap, a))
    b = np.where(b_short, 0.0, np.where(a_short, cap, b))

    alphas = np.clip(point[2 * m:], 0.0, qp.alpha_cap)
    return np.concatenate([a, b, alphas])


def objective(qp: StructuredQp, tau) -> float:
    """Return ``1/2 tau^T Q tau - c^T tau``."""
    tau = np.asarray(tau, dtype=float)
    return float(0.5 * tau @ qp.product(tau) - qp.c @ tau)


def stationarity_residual(qp: StructuredQp, tau, gradient=None) -> float:
    """
    Projected-gradient residual ``||tau - P(tau - grad)||_inf``.

    Zero exactly at the minimizers of the problem.
    """
    tau = np.asarray(tau, dtype=float)
    if gradient is None:
        gradient = qp.product(tau) - qp.c
    return float(np.max(np.abs(tau - project_feasible(tau - gradient, qp))))


def spectral_upper_bound(q) -> float:
    """
    Upper bound on the largest eigenvalue of a symmetric matrix.

    Runs a seeded power iteration and inflates the Rayleigh quotient by 1%. The
    maximum absolute row sum (a Gershgorin bound) caps the estimate and is returned
    whenever the iteration stops without its eigen-residual reaching
    ``POWER_TOLERANCE`` relative to the quotient.

    Args:
        q (array-like): Symmetric matrix.

    Returns:
        float: A value >= lambda_max(q).

    Raises:
        InvalidArgumentError: If the matrix has non-finite entries.
    """
    q = np.asarray(q, dtype=float)
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("Matrix must contain only finite values")
    row_sum_bound = float(np.max(np.sum(np.abs(q), axis=1))) if q.size else 0.0

    rng = np.random.default_rng(0)
    vector = rng.standard_normal(q.shape[0])
    vector /= np.linalg.norm(vector)
    rayleigh = 0.0
    converged = False
    for _ in range(POWER_ITERATIONS):
        image = q @ vector
        norm = np.linalg.norm(image)
        if norm == 0.0 or not np.isfinite(norm):
            return row_sum_bound
        rayleigh = float(vector @ image)
        if np.linalg.norm(image - rayleigh * vector) <= POWER_TOLERANCE * abs(rayleigh):
            converged = True
            break
        vector = image / norm

    if not converged or rayleigh <= 0.0:
        log.debug("Power iteration did not settle, using the row-sum bound %.6g", row_sum_bound)
        return row_sum_bound
    return min(1.01 * rayleigh, row_sum_bound)


def solve_projected_gradient(qp: StructuredQp, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                             record_history: bool = False) -> QpSolution:
    """
    Projected gradient descent with constant step ``1/L``.

    Starts from ``tau = 0`` and iterates ``tau <- P(tau - (Q tau - c) / L)`` where L is
    ``spectral_upper_bound(Q)``. The objective never increases.

    Args:
        qp (StructuredQp): The problem.
        tol (float): Tolerance on the stationarity residual.
        max_iter (int): Iteration cap.
        record_history (bool): Keep the objective after every iteration.

    Returns:
        QpSolution: The last iterate, flagged not converged when the cap was hit.

    Raises:
        InvalidArgumentError: If Q or c contain non-finite values.
    """
    _check_finite(qp)
    lipschitz = spectral_upper_bound(qp.q)
    if lipschitz <= 0.0:
        lipschitz = 1.0

    tau = np.zeros(qp.size)
    gradient = -qp.c
    history = [0.0] if record_history else []
    residual = stationarity_residual(qp, tau, gradient)
    iterations = 0
    while residual > tol and iterations < max_iter:
        tau = project_feasible(tau - gradient / lipschitz, qp)
        gradient = qp.product(tau) - qp.c
        iterations += 1
        if record_history:
            history.append(objective(qp, tau))
        residual = stationarity_residual(qp, tau, gradient)

    converged = residual <= tol
    if not converged:
        log.warning("Projected gradient stopped at max_iter=%s with residual %.3e", max_iter, residual)
    log.debug("Projected gradient: %s iterations, residual %.3e", iterations, residual)
    return QpSolution(
        tau=tau,
        objective=objective(qp, tau),
        iterations=iterations,
        converged=converged,
        stationarity_residual=residual,
        history=history,
    )


def _pair_value(h11, h12, h22, p_a, p_b, a, b):
    return 0.5 * h11 * a * a + h12 * a * b + 0.5 * h22 * b * b + p_a * a + p_b * b


def _minimize_segment(quadratic, linear, upper):
    """Minimize ``1/2 quadratic t^2 + linear t`` over ``[0, upper]``."""
    if quadratic > 0.0:
        return min(max(-linear / quadratic, 0.0), upper)
    return upper if linear < 0.0 else 0.0


def _minimize_pair(h11, h12, h22, p_a, p_b, cap, current):
    """
    Exact minimizer of a 2-D quadratic over the triangle ``{a, b >= 0, a + b <= cap}``.

    Candidates are the interior stationary point, the minimizer on each of the three
    edges and the three vertices. The current point wins ties.
    """
    candidates = [current, (0.0, 0.0), (cap, 0.0), (0.0, cap)]
    det = h11 * h22 - h12 * h12
    if det > 1e-14 * max(1.0, h11 * h22):
        a = (-p_a * h22 + p_b * h12) / det
        b = (-p_b * h11 + p_a * h12) / det
        if a >= 0.0 and b >= 0.0 and a + b <= cap:
            candidates.append((a, b))
    candidates.append((0.0, _minimize_segment(h22, p_b, cap)))
    candidates.append((_minimize_segment(h11, p_a, cap), 0.0))
    # a = t, b = cap - t
    t = _minimize_segment(h11 - 2.0 * h12 + h22, h12 * cap - h22 * cap + p_a - p_b, cap)
    candidates.append((t, cap - t))

    best = current
    best_value = _pair_value(h11, h12, h22, p_a, p_b, *current)
    for a, b in candidates[1:]:
        value = _pair_value(h11, h12, h22, p_a, p_b, a, b)
        if value < best_value:
            best, best_value = (a, b), value
    return best


def solve_coordinate_descent(qp: StructuredQp, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                             record_history: bool = False) -> QpSolution:
    """
    Cyclic exact coordinate minimization.

    Each sweep visits every (beta1_i, beta2_i) pair, minimizing the 2-D quadratic over
    its triangle exactly, then every alpha coordinate, minimizing the 1-D quadratic
    over ``[0, alpha_cap]`` exactly. Convergence uses the same stationarity residual as
    the projected gradient solver.

    Args:
        qp (StructuredQp): The problem.
        tol (float): Tolerance on the stationarity residual.
        max_iter (int): Maximum number of sweeps.
        record_history (bool): Keep the objective after every sweep.

    Returns:
        QpSolution: The last iterate, flagged not converged when the cap was hit.

    Raises:
        InvalidArgumentError: If Q or c contain non-finite values.
    """
    _check_finite(qp)
    q = qp.q
    m = qp.block_size
    tau = np.zeros(qp.size)
    gradient = -qp.c.copy()
    history = [0.0] if record_history else []
    residual = stationarity_residual(qp, tau, gradient)
    sweeps = 0

    while residual > tol and sweeps < max_iter:
        for i in range(m):
            ia, ib = i, m + i
            h11, h12, h22 = q[ia, ia], q[ia, ib], q[ib, ib]
            a0, b0 = tau[ia], tau[ib]
            p_a = gradient[ia] - h11 * a0 - h12 * b0
            p_b = gradient[ib] - h12 * a0 - h22 * b0
            a, b = _minimize_pair(h11, h12, h22, p_a, p_b, qp.pair_cap, (a0, b0))
            if a != a0 or b != b0:
                tau[ia], tau[ib] = a, b
                gradient += q[:, ia] * (a - a0) + q[:, ib] * (b - b0)

        for j in range(2 * m, 4 * m):
            h = q[j, j]
            old = tau[j]
            p = gradient[j] - h * old
            new = _minimize_segment(h, p, qp.alpha_cap)
            if 0.5 * h * new * new + p * new < 0.5 * h * old * old + p * old:
                tau[j] = new
                gradient += q[:, j] * (new - old)

        gradient = qp.product(tau) - qp.c
        sweeps += 1
        if record_history:
            history.append(objective(qp, tau))
        residual = stationarity_residual(qp, tau, gradient)

    converged = residual <= tol
    if not converged:
        log.warning("Coordinate descent stopped at max_iter=%s with residual %.3e", max_iter, residual)
    log.debug("Coordinate descent: %s sweeps, residual %.3e", sweeps, residual)
    return QpSolution(
        tau=tau,
        objective=objective(qp, tau),
        iterations=sweeps,
        converged=converged,
        stationarity_residual=residual,
        history=history,
    )


def solve(qp: StructuredQp, options: Optional[SolverOptions] = None) -> QpSolution:
    """
    Solve ``qp`` with the solver named in ``options``.

    Args:
        qp (StructuredQp): The problem.
        options (SolverOptions, optional): Solver settings. Defaults to projected gradient
            with tol 1e-8 and max_iter 50,000.

    Returns:
        QpSolution: The solver result.
    """
    options = options or SolverOptions()
    if options.method == COORDINATE_DESCENT:
        return solve_coordinate_descent(qp, tol=options.tol, max_iter=options.max_iter)
    return solve_projected_gradient(qp, tol=options.tol, max_iter=options.max_iter)
