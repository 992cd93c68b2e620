"""Stability certificates for autonomous ODE equilibria.

Two independent routes decide whether a matrix has its spectrum in the
open left half plane.  The algebraic route runs the Routh tabulation on
the characteristic polynomial (coefficients by the Faddeev-LeVerrier
recursion).  The certificate route solves the Lyapunov equation

    P A + A^T P + Q = 0

as a dense Kronecker system and checks that P is symmetric positive
definite, which holds exactly for Hurwitz A.  Verdicts chain the two:
linearize, tabulate, certify, and insist the answers agree.  The basic
reproduction number of a compartmental model is the spectral radius of
F V^{-1} from the user-supplied new-infection/transition splitting; it
crosses one exactly when the disease-free linearization loses
stability.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

MAX_LYAPUNOV_DIM = 64
_LYAP_RESIDUAL_TOL = 1e-9
_EQUILIBRIUM_TOL = 1e-8


@dataclass(frozen=True)
class HurwitzVerdict:
    hurwitz: bool
    margin: float
    boundary: bool = False


@dataclass(frozen=True)
class StabilityReport:
    """Joint verdict of the tabulation and the Lyapunov certificate."""
    hurwitz: bool
    lyapunov_p: np.ndarray | None
    spd_certificate: bool
    spectral_abscissa_bound: float
    r0: float | None = None


def lyapunov_solve(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Solve ``P A + A^T P + Q = 0`` for symmetric P.

    Vectorized as ``(A^T (x) I + I (x) A^T) vec(P) = -vec(Q)`` in
    column-major layout, dense, so the dimension is capped.  The system
    is singular exactly when A and -A share an eigenvalue, which covers
    every boundary (imaginary-axis) case.
    """
    a = np.asarray(a, dtype=float)
    q = np.asarray(q, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or q.shape != (n, n):
        raise ValueError("matrices must be square and share a dimension")
    if n > MAX_LYAPUNOV_DIM:
        raise ValueError(f"dense Lyapunov solve capped at n={MAX_LYAPUNOV_DIM}")
    if np.abs(q - q.T).max() > 1e-12 * max(np.abs(q).max(), 1.0):
        raise ValueError("Q must be symmetric")
    eye = np.eye(n)
    system = np.kron(a.T, eye) + np.kron(eye, a.T)
    try:
        vec_p = np.linalg.solve(system, -q.reshape(n * n, order="F"))
    except np.linalg.LinAlgError:
        raise NumericalError("Lyapunov system is singular "
                             "(A and -A share an eigenvalue)") from None
    p = vec_p.reshape(n, n, order="F")
    p = 0.5 * (p + p.T)
    residual = np.linalg.norm(p @ a + a.T @ p + q)
    if residual > _LYAP_RESIDUAL_TOL * np.linalg.norm(q):
        raise NumericalError(f"Lyapunov residual too large ({residual:.3e})")
    return p


def is_spd(p: np.ndarray) -> bool:
    """Symmetry plus a successful Cholesky factorization."""
    if np.abs(p - p.T).max() > 1e-10 * max(np.abs(p).max(), 1e-300):
        return False
    try:
        np.linalg.cholesky(p)
        return True
    except np.linalg.LinAlgError:
        return False


def characteristic_polynomial(a: np.ndarray) -> np.ndarray:
    """Coefficients of det(lambda I - A) by the Faddeev-LeVerrier recursion.

    Returned highest degree first with leading coefficient one.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def hurwitz_check(a: np.ndarray) -> HurwitzVerdict:
    """Routh tabulation on the characteristic polynomial.

    All leading-column entries strictly positive means Hurwitz; a zero
    entry flags an imaginary-axis eigenvalue and is reported as a
    boundary non-Hurwitz verdict rather than an error.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > MAX_LYAPUNOV_DIM:
        raise ValueError(f"tabulation capped at n={MAX_LYAPUNOV_DIM}")
    coeffs = characteristic_polynomial(a)
    tol = 1e-10 * max(np.abs(coeffs).max(), 1.0)

    width = (n + 2) // 2
    rows = np.zeros((n + 1, width + 1))
    rows[0, :len(coeffs[0::2])] = coeffs[0::2]
    rows[1, :len(coeffs[1::2])] = coeffs[1::2]
    for i in range(1, n):
        if abs(rows[i, 0]) <= tol:
            return HurwitzVerdict(hurwitz=False, margin=0.0, boundary=True)
        for j in range(width):
            rows[i + 1, j] = (rows[i, 0] * rows[i - 1, j + 1]
                              - rows[i - 1, 0] * rows[i, j + 1]) / rows[i, 0]
    first_col = rows[:n + 1, 0]
    margin = float(np.abs(first_col).min())
    if np.any(np.abs(first_col) <= tol):
        return HurwitzVerdict(hurwitz=False, margin=0.0, boundary=True)
    return HurwitzVerdict(hurwitz=bool(np.all(first_col > 0.0)), margin=margin)


def linearize(f, x_eq: np.ndarray, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of the vector field at an equilibrium."""
    x_eq = np.asarray(x_eq, dtype=float)
    n = x_eq.size
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(x_eq))
    f0 = np.asarray(f(x_eq), dtype=float)
    if np.linalg.norm(f0) > _EQUILIBRIUM_TOL:
        raise ValueError(
            f"point is not an equilibrium (|f| = {np.linalg.norm(f0):.3e})")
    jac = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        jac[:, j] = (np.asarray(f(x_eq + e), dtype=float)
                     - np.asarray(f(x_eq - e), dtype=float)) / (2.0 * h)
    return jac


def r0(f_matrix: np.ndarray, v_matrix: np.ndarray, tol: float = 1e-10,
       max_iter: int = 10000) -> float:
    """Spectral radius of ``F V^{-1}`` by power iteration.

    Assumes the next-generation matrix is (entrywise) nonnegative so the
    dominant eigenvalue is real; a warning is issued when negative
    entries show up, since the splitting is then epidemiologically
    suspect.
    """
    f_matrix = np.asarray(f_matrix, dtype=float)
    v_matrix = np.asarray(v_matrix, dtype=float)
    n = f_matrix.shape[0]
    if f_matrix.shape != (n, n) or v_matrix.shape != (n, n):
        raise ValueError("F and V must be square with equal dimension")
    try:
        k = np.linalg.solve(v_matrix.T, f_matrix.T).T
    except np.linalg.LinAlgError:
        raise NumericalError("transition matrix V is singular") from None
    if k.min() < -1e-12 * max(np.abs(k).max(), 1.0):
        warnings.warn("next-generation matrix has negative entries; "
                      "the F/V splitting may be invalid", RuntimeWarning)
    if not np.any(k):
        return 0.0
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        y = k @ x
        nrm = np.linalg.norm(y)
        if nrm <= 1e-300:
            return 0.0
        x_new = y / nrm
        lam_new = float(x_new @ (k @ x_new))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            return abs(lam_new)
        x, lam = x_new, lam_new
    raise NumericalError("power iteration for the reproduction number "
                         "did not converge")


def stability_verdict(f, x_eq, h: float | None = None,
                      reproduction_number: float | None = None) -> StabilityReport:
    """Linearize, tabulate, and certify; the two routes must agree."""
    a = linearize(f, x_eq, h)
    verdict = hurwitz_check(a)
    p = None
    spd = False
    try:
        p = lyapunov_solve(a, np.eye(a.shape[0]))
        spd = is_spd(p)
    except NumericalError:
        p = None
    if verdict.hurwitz != spd:
        raise NumericalError(
            "tabulation and Lyapunov certificate disagree; the spectrum is "
            "too close to the imaginary axis to certify")
    if verdict.hurwitz:
        # Re(lambda) <= -1/(2 lambda_max(P)) for every eigenvalue
        lam_max = _sym_top_eigenvalue(p)
        bound = -1.0 / (2.0 * lam_max)
    else:
        bound = 0.0  # no negative bound exists
    return StabilityReport(hurwitz=verdict.hurwitz, lyapunov_p=p,
                           spd_certificate=spd, spectral_abscissa_bound=bound,
                           r0=reproduction_number)


def _sym_top_eigenvalue(p: np.ndarray, iters: int = 2000) -> float:
    x = np.ones(p.shape[0]) / np.sqrt(p.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = p @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        lam_new = float(x @ (p @ x))
        if abs(lam_new - lam) <= 1e-13 * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # one row per sample


def simulate(f, x0, t_final: float, dt: float) -> Trajectory:
    """Classical fourth-order one-step integration of ``x' = f(x)``."""
    if dt <= 0.0:
        raise ValueError("time step must be positive")
    x = np.asarray(x0, dtype=float).copy()
    steps = int(round(t_final / dt))
    times = np.zeros(steps + 1)
    states = np.zeros((steps + 1, x.size))
    states[0] = x
    for k in range(steps):
        k1 = np.asarray(f(x))
        k2 = np.asarray(f(x + 0.5 * dt * k1))
        k3 = np.asarray(f(x + 0.5 * dt * k2))
        k4 = np.asarray(f(x + dt * k3))
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"state became non-finite at step {k + 1}")
        times[k + 1] = (k + 1) * dt
        states[k + 1] = x
    return Trajectory(times=times, states=states)


# -- built-in models -----------------------------------------------------------

def damped_oscillator(x):
    return np.array([x[1], -x[0] - x[1]])


def logistic(x):
    return np.array([x[0] * (1.0 - x[0])])


@dataclass(frozen=True)
class SeirsModel:
    """SEIRS compartments with births/deaths and waning immunity.

    State (s, e, i, r) as population fractions.  The disease-free
    equilibrium is (1, 0, 0, 0); the new-infection/transition splitting
    of its infected block gives R0 = beta sigma / ((mu+sigma)(mu+gamma)).
    """
    beta: float = 0.3
    sigma: float = 0.5
    gamma: float = 0.25
    mu: float = 0.02
    omega: float = 0.05

    def __call__(self, x):
        s, e, i, r = x
        return np.array([
            self.mu - self.mu * s - self.beta * s * i + self.omega * r,
            self.beta * s * i - (self.mu + self.sigma) * e,
            self.sigma * e - (self.mu + self.gamma) * i,
            self.gamma * i - (self.mu + self.omega) * r,
        ])

    @property
    def disease_free_equilibrium(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def next_generation_split(self):
        """(F, V) for the infected block (e, i) at the disease-free state."""
        f = np.array([[0.0, self.beta], [0.0, 0.0]])
        v = np.array([[self.mu + self.sigma, 0.0],
                      [-self.sigma, self.mu + self.gamma]])
        return f, v

    @property
    def reproduction_number(self):
        return self.beta * self.sigma / ((self.mu + self.sigma) * (self.mu + self.gamma))
