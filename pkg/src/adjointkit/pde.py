"""Two 1-D PDE-constrained control problems on (0, 1).

Advection boundary control: transport ``beta u_x = 0`` with the inflow
flux condition ``-beta u(0) = z`` and objective ``0.5 integral u^2``.
The discrete adjoint of the upwind sweep is a downwind sweep, and the
control gradient is the multiplier of the inflow condition, whose value
reproduces the closed form ``z / beta^2`` exactly because upwinding is
exact for constants.

Elliptic coefficient inversion: ``-(exp(z) u')' = 0`` with Dirichlet
data, misfit objective against observed interior values, control ``z``
sampled at cell midpoints.  The conservative stencil is symmetric, so
the adjoint solve reuses the forward tridiagonal system, and the
per-cell gradient is ``exp(z) (du/h)(dv/h) h`` assembled from the state
and multiplier slopes.
"""

import numpy as np

from .core import matrix_operator
from .errors import NumericalError
from .optim import ConstrainedProblem
from .spectral import svd


def tridiagonal_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Thomas algorithm; ``lower[0]`` and ``upper[-1]`` are ignored.

    Intended for diagonally dominant or SPD systems, where the
    elimination is stable without pivoting.
    """
    a = np.asarray(lower, dtype=float)
    b = np.asarray(diag, dtype=float)
    c = np.asarray(upper, dtype=float)
    d = np.asarray(rhs, dtype=float)
    n = b.size
    if not (a.size == c.size == d.size == n):
        raise ValueError("all bands and the right-hand side must share a length")
    scale = np.abs(b).max()
    cp = np.zeros(n)
    dp = np.zeros(n)
    denom = b[0]
    if abs(denom) <= 1e-14 * max(scale, 1e-300):
        raise NumericalError("zero pivot in tridiagonal elimination")
    cp[0] = c[0] / denom
    dp[0] = d[0] / denom
    for i in range(1, n):
        denom = b[i] - a[i] * cp[i - 1]
        if abs(denom) <= 1e-14 * max(scale, 1e-300):
            raise NumericalError("zero pivot in tridiagonal elimination")
        cp[i] = c[i] / denom
        dp[i] = (d[i] - a[i] * dp[i - 1]) / denom
    x = np.zeros(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


class AdvectionControlProblem(ConstrainedProblem):
    """Scalar inflow control of constant-velocity transport.

    State: nodal values on a uniform grid of n cells (n+1 nodes).
    Control: the single inflow flux datum.  The eliminated objective is
    ``z^2 / (2 beta^2)`` and its derivative ``z / beta^2``; the adjoint
    route reproduces both to roundoff.
    """

    def __init__(self, n: int, beta: float):
        if n < 2:
            raise ValueError("need at least two grid cells")
        if beta <= 0.0:
            raise ValueError("transport velocity must be positive")
        self.n = int(n)
        self.beta = float(beta)
        self.h = 1.0 / n
        self.state_dim = n + 1
        self.control_dim = 1
        # trapezoid weights make the objective an exact integral of constants
        w = np.full(n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        self._weights = w

    def residual(self, u, z):
        r = np.empty(self.state_dim)
        r[0] = self.beta * u[0] + z[0]
        r[1:] = self.beta * np.diff(u) / self.h
        return r

    def solve_forward(self, z):
        return np.full(self.state_dim, -z[0] / self.beta)

    def apply_state_jacobian(self, u, z, du):
        out = np.empty(self.state_dim)
        out[0] = self.beta * du[0]
        out[1:] = self.beta * np.diff(du) / self.h
        return out

    def apply_state_adjoint(self, u, z, y):
        out = np.zeros(self.state_dim)
        out[0] = self.beta * y[0] - self.beta * y[1] / self.h
        out[1:] = self.beta * y[1:] / self.h
        out[1:-1] -= self.beta * y[2:] / self.h
        return out

    def solve_adjoint(self, u, z, rhs):
        # downwind sweep: the transpose of upwinding runs against the flow
        y = np.zeros(self.state_dim)
        y[-1] = self.h * rhs[-1] / self.beta
        for i in range(self.n - 1, 0, -1):
            y[i] = y[i + 1] + self.h * rhs[i] / self.beta
        y[0] = rhs[0] / self.beta + y[1] / self.h
        return y

    def apply_control_adjoint(self, u, z, y):
        return np.array([y[0]])

    def objective(self, u, z):
        return 0.5 * float(self._weights @ (u * u))

    def objective_grad_state(self, u, z):
        return self._weights * u

    def objective_grad_control(self, u, z):
        return np.zeros(1)

    def inflow_adjoint_trace(self, y):
        """Adjoint value at the inflow boundary (equals the gradient)."""
        return float(y[0])


class EllipticInversionProblem(ConstrainedProblem):
    """Recover a log-diffusivity field from interior observations.

    State: n interior nodal values with Dirichlet lift (g0, g1).
    Control: n+1 midpoint samples of the log coefficient.  An optional
    quadratic penalty ``0.5 kappa h |z - z_prior|^2`` regularizes the
    inversion.
    """

    def __init__(self, n: int, g0: float, g1: float, u_obs,
                 kappa: float = 0.0, z_prior=None):
        if n < 3:
            raise ValueError("need at least three interior nodes")
        self.n = int(n)
        self.g0 = float(g0)
        self.g1 = float(g1)
        self.h = 1.0 / (n + 1)
        self.u_obs = np.asarray(u_obs, dtype=float)
        if self.u_obs.shape != (self.n,):
            raise ValueError("observation length must equal interior node count")
        self.state_dim = n
        self.control_dim = n + 1
        self.kappa = float(kappa)
        self.z_prior = (np.zeros(n + 1) if z_prior is None
                        else np.asarray(z_prior, dtype=float))
        if self.kappa < 0.0:
            raise ValueError("penalty weight must be nonnegative")
        self.grid = (np.arange(n) + 1.0) * self.h
        self.midpoints = (np.arange(n + 1) + 0.5) * self.h

    def _padded(self, u):
        return np.concatenate([[self.g0], u, [self.g1]])

    def _bands(self, z):
        coeff = np.exp(z)
        lower = np.zeros(self.n)
        upper = np.zeros(self.n)
        diag = (coeff[:-1] + coeff[1:]) / self.h ** 2
        lower[1:] = -coeff[1:-1] / self.h ** 2
        upper[:-1] = -coeff[1:-1] / self.h ** 2
        return lower, diag, upper, coeff

    def residual(self, u, z):
        coeff = np.exp(z)
        full = self._padded(u)
        flux = coeff * np.diff(full) / self.h  # flux per cell
        return -np.diff(flux) / self.h

    def solve_forward(self, z):
        lower, diag, upper, coeff = self._bands(z)
        rhs = np.zeros(self.n)
        rhs[0] = coeff[0] * self.g0 / self.h ** 2
        rhs[-1] = coeff[-1] * self.g1 / self.h ** 2
        return tridiagonal_solve(lower, diag, upper, rhs)

    def apply_state_jacobian(self, u, z, du):
        lower, diag, upper, _ = self._bands(z)
        out = diag * du
        out[1:] += lower[1:] * du[:-1]
        out[:-1] += upper[:-1] * du[1:]
        return out

    def apply_state_adjoint(self, u, z, w):
        return self.apply_state_jacobian(u, z, w)  # symmetric stencil

    def solve_adjoint(self, u, z, rhs):
        lower, diag, upper, _ = self._bands(z)
        return tridiagonal_solve(lower, diag, upper, rhs)

    def apply_control_adjoint(self, u, z, y):
        # per cell: coeff * (du/h) * (dv/h) * h with v = y/h, the multiplier
        # rescaled to the continuous adjoint amplitude
        coeff = np.exp(z)
        du = np.diff(self._padded(u))
        dy = np.diff(np.concatenate([[0.0], y, [0.0]]))
        return coeff * du * dy / self.h ** 2

    def objective(self, u, z):
        misfit = u - self.u_obs
        value = 0.5 * self.h * float(misfit @ misfit)
        if self.kappa > 0.0:
            dz = z - self.z_prior
            value += 0.5 * self.kappa * self.h * float(dz @ dz)
        return value

    def objective_grad_state(self, u, z):
        return self.h * (u - self.u_obs)

    def objective_grad_control(self, u, z):
        if self.kappa > 0.0:
            return self.kappa * self.h * (z - self.z_prior)
        return np.zeros(self.control_dim)

    def stiffness_matrix(self, z) -> np.ndarray:
        lower, diag, upper, _ = self._bands(z)
        k = np.diag(diag)
        k += np.diag(lower[1:], -1)
        k += np.diag(upper[:-1], 1)
        return k


def build_advection_problem(n: int, beta: float) -> AdvectionControlProblem:
    return AdvectionControlProblem(n, beta)


def build_elliptic_problem(n: int, g0: float, g1: float, u_obs,
                           kappa: float = 0.0, z_prior=None) -> EllipticInversionProblem:
    return EllipticInversionProblem(n, g0, g1, u_obs, kappa=kappa, z_prior=z_prior)


def default_target_field(n: int, amplitude: float = 0.8) -> np.ndarray:
    """Smooth log-diffusivity used to synthesize inversion test data."""
    mid = (np.arange(n + 1) + 0.5) / (n + 1)
    return amplitude * np.sin(2.0 * np.pi * mid)


def make_elliptic_demo(n: int, g0: float = 0.0, g1: float = 1.0,
                       kappa: float = 0.0):
    """Inversion instance whose data comes from a known smooth field."""
    z_true = default_target_field(n)
    clean = EllipticInversionProblem(n, g0, g1, np.zeros(n))
    u_obs = clean.solve_forward(z_true)
    return EllipticInversionProblem(n, g0, g1, u_obs, kappa=kappa), z_true


def discrete_infsup(op) -> float:
    """Smallest singular value of a dense operator.

    A positive value certifies unique discrete solvability with
    stability constant 1/value; zero (to rank tolerance) flags a
    singular discretization.
    """
    dec = svd(op)
    return float(dec.sigma[-1])


def elliptic_stiffness_operator(n: int, z) -> "DenseOperator":
    """Interior stiffness matrix wrapped as a Euclidean dense operator."""
    problem = EllipticInversionProblem(n, 0.0, 0.0, np.zeros(n))
    return matrix_operator(problem.stiffness_matrix(np.asarray(z, dtype=float)))


PROBLEM_NAMES = ("advection", "elliptic")
