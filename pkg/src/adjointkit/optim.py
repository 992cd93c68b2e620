"""Reduced-space gradients for equality-constrained problems.

A problem couples a state ``u`` and a control ``z`` through a residual
``c(u, z) = 0`` that determines the state.  The total derivative of the
objective with respect to the control alone is assembled from one
forward solve, one linear adjoint solve

    [d c / d u]^T y = -grad_u f,

and the combination ``grad_z f + [d c / d z]^T y``.  The adjoint system
is linear even when the constraint is not, which is what makes the
gradient as cheap as a pair of solves regardless of the control
dimension.  Problems expose their structure through callbacks; dense
fallbacks are provided for the adjoint operations so simple problems
only need the forward pieces.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError

ARMIJO_SLOPE = 1e-4
MAX_BACKTRACKS = 60


class ConstrainedProblem(ABC):
    """Callback bundle for one equality-constrained problem instance.

    Subclasses set ``state_dim`` and ``control_dim`` and implement the
    abstract methods.  The default adjoint operations densify the state
    Jacobian column by column; override them when the constraint has
    exploitable structure (triangular, tridiagonal, ...).  Instances
    must be safe for concurrent read-only evaluation.
    """

    state_dim: int
    control_dim: int

    @abstractmethod
    def residual(self, u: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Constraint value c(u, z); zero at a feasible pair."""

    @abstractmethod
    def solve_forward(self, z: np.ndarray) -> np.ndarray:
        """State u with residual(u, z) = 0."""

    @abstractmethod
    def apply_state_jacobian(self, u, z, du) -> np.ndarray:
        """Directional derivative of the residual in the state."""

    @abstractmethod
    def apply_control_adjoint(self, u, z, y) -> np.ndarray:
        """Transposed control Jacobian applied to a multiplier."""

    @abstractmethod
    def objective(self, u, z) -> float:
        pass

    @abstractmethod
    def objective_grad_state(self, u, z) -> np.ndarray:
        pass

    @abstractmethod
    def objective_grad_control(self, u, z) -> np.ndarray:
        pass

    # -- dense fallbacks ------------------------------------------------------

    def _dense_state_jacobian(self, u, z) -> np.ndarray:
        cols = []
        for j in range(self.state_dim):
            e = np.zeros(self.state_dim)
            e[j] = 1.0
            cols.append(self.apply_state_jacobian(u, z, e))
        return np.column_stack(cols)

    def apply_state_adjoint(self, u, z, w) -> np.ndarray:
        """Transposed state Jacobian applied to a multiplier."""
        return self._dense_state_jacobian(u, z).T @ w

    def solve_adjoint(self, u, z, rhs) -> np.ndarray:
        """Solve the transposed state-Jacobian system for the multiplier."""
        jac = self._dense_state_jacobian(u, z)
        try:
            return np.linalg.solve(jac.T, rhs)
        except np.linalg.LinAlgError:
            raise NumericalError("adjoint system is singular") from None


@dataclass(frozen=True)
class ReducedGradientReport:
    f_value: float
    gradient: np.ndarray
    forward_residual_norm: float
    adjoint_residual_norm: float


@dataclass(frozen=True)
class DescentResult:
    z: np.ndarray
    history: list = field(default_factory=list)  # rows (k, f, grad_norm, step)
    converged: bool = False
    iterations: int = 0


def reduced_gradient(problem: ConstrainedProblem, z: np.ndarray) -> ReducedGradientReport:
    """Objective value and total control gradient at ``z``.

    Runs forward solve, adjoint solve, and gradient assembly, and
    reports the residual norms of both linear systems actually achieved.
    """
    z = np.asarray(z, dtype=float)
    u = problem.solve_forward(z)
    forward_norm = float(np.linalg.norm(problem.residual(u, z)))
    gu = problem.objective_grad_state(u, z)
    y = problem.solve_adjoint(u, z, -gu)
    adjoint_norm = float(np.linalg.norm(problem.apply_state_adjoint(u, z, y) + gu))
    gradient = problem.objective_grad_control(u, z) + problem.apply_control_adjoint(u, z, y)
    return ReducedGradientReport(
        f_value=float(problem.objective(u, z)), gradient=gradient,
        forward_residual_norm=forward_norm, adjoint_residual_norm=adjoint_norm)


def reduced_objective(problem: ConstrainedProblem, z: np.ndarray) -> float:
    """Objective after eliminating the state through the constraint."""
    z = np.asarray(z, dtype=float)
    u = problem.solve_forward(z)
    return float(problem.objective(u, z))


def fd_gradient_check(problem: ConstrainedProblem, z: np.ndarray,
                      steps=(1e-2, 1e-3, 1e-4)) -> dict:
    """Central-difference probe of the reduced gradient.

    Differences the eliminated objective along every control direction
    and reports, per step size, the relative mismatch against the
    adjoint-based gradient.  Errors decay like the square of the step
    until roundoff takes over.
    """
    z = np.asarray(z, dtype=float)
    if any(h <= 0.0 for h in steps):
        raise ValueError("finite-difference steps must be positive")
    grad = reduced_gradient(problem, z).gradient
    out = {}
    for h in steps:
        fd = np.zeros(problem.control_dim)
        for j in range(problem.control_dim):
            e = np.zeros(problem.control_dim)
            e[j] = h
            fd[j] = (reduced_objective(problem, z + e)
                     - reduced_objective(problem, z - e)) / (2.0 * h)
        scale = max(np.linalg.norm(grad), np.linalg.norm(fd), 1e-12)
        out[h] = float(np.linalg.norm(fd - grad) / scale)
    return out


def gradient_descent(problem: ConstrainedProblem, z0: np.ndarray, step: float,
                     iters: int, tol: float) -> DescentResult:
    """Steepest descent on the reduced objective with Armijo backtracking.

    Each iteration halves the step until the sufficient-decrease test
    ``f(z - a g) <= f - 1e-4 a |g|^2`` passes, so the recorded objective
    values are strictly decreasing.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    z = np.asarray(z0, dtype=float).copy()
    history = []
    f_curr = None
    for k in range(iters):
        try:
            report = reduced_gradient(problem, z)
        except NumericalError as exc:
            raise NumericalError(f"forward solve failed at iteration {k}: {exc}") from None
        g = report.gradient
        gnorm = float(np.linalg.norm(g))
        f_curr = report.f_value
        history.append((k, f_curr, gnorm, 0.0))
        if gnorm <= tol:
            return DescentResult(z=z, history=history, converged=True, iterations=k)
        alpha = step
        for _ in range(MAX_BACKTRACKS):
            candidate = z - alpha * g
            f_new = reduced_objective(problem, candidate)
            if f_new <= f_curr - ARMIJO_SLOPE * alpha * gnorm * gnorm:
                break
            alpha *= 0.5
        else:
            raise NumericalError(f"line search failed at iteration {k}")
        history[-1] = (k, f_curr, gnorm, alpha)
        z = candidate
    return DescentResult(z=z, history=history, converged=False, iterations=iters)


def kkt_residuals(problem: ConstrainedProblem, u, z, y) -> dict:
    """Norms of the three first-order optimality blocks at (u, y, z)."""
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if u.shape != (problem.state_dim,) or z.shape != (problem.control_dim,) \
            or y.shape != (problem.state_dim,):
        raise ValueError("inconsistent dimensions for KKT evaluation")
    forward = float(np.linalg.norm(problem.residual(u, z)))
    adjoint_block = problem.objective_grad_state(u, z) \
        + problem.apply_state_adjoint(u, z, y)
    control_block = problem.objective_grad_control(u, z) \
        + problem.apply_control_adjoint(u, z, y)
    return {"forward": forward,
            "adjoint": float(np.linalg.norm(adjoint_block)),
            "control": float(np.linalg.norm(control_block))}
