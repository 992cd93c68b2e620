"""Discretized Sturm-Liouville eigenproblems on (0, 1).

The operator ``-(p v')' + q v = lambda rho v`` is discretized with the
conservative second-order stencil

    (K v)_i = [p_{i+1/2} (v_i - v_{i+1}) + p_{i-1/2} (v_i - v_{i-1})] / h^2
              + q_i v_i,

which keeps K symmetric for all three boundary treatments: interior
nodes with zero end values (dirichlet), cell midpoints with ghost
reflection (neumann), and wraparound indices (periodic).  Modes solve
the generalized problem ``K v = lambda diag(rho) v`` and are normalized
in the discrete weighted L2 product ``h * sum(rho u v)``, so for the
constant-coefficient dirichlet case they reproduce the sine basis
samples ``sqrt(2) sin(n pi x)`` and the eigenvalues obey the exact
discrete formula ``(4/h^2) sin^2(n pi h / 2)``.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import _jacobi

BOUNDARY_CONDITIONS = ("dirichlet", "neumann", "periodic")


@dataclass(frozen=True)
class SLProblem:
    """Coefficients (callables of x), boundary condition, and grid size."""
    p: callable
    q: callable
    rho: callable
    bc: str = "dirichlet"
    n: int = 63

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.n < 3:
            raise ValueError("grid must have at least three nodes")


def constant_coefficient_problem(bc: str = "dirichlet", n: int = 63) -> SLProblem:
    """-v'' = lambda v, the classical Fourier case."""
    one = np.vectorize(lambda x: 1.0)
    zero = np.vectorize(lambda x: 0.0)
    return SLProblem(p=one, q=zero, rho=one, bc=bc, n=n)


@dataclass(frozen=True)
class Discretization:
    """Stiffness matrix, weight samples, and the grid they live on."""
    stiffness: np.ndarray
    rho: np.ndarray  # diagonal of the weight matrix
    grid: np.ndarray
    h: float
    bc: str

    def weighted_inner(self, u, v) -> float:
        return float(self.h * np.sum(self.rho * u * v))

    def weighted_norm(self, u) -> float:
        return float(np.sqrt(max(self.weighted_inner(u, u), 0.0)))


@dataclass(frozen=True)
class ModeSet:
    """Ascending eigenvalues with weight-orthonormal mode columns."""
    eigenvalues: np.ndarray
    modes: np.ndarray
    disc: Discretization


def discretize(problem: SLProblem) -> Discretization:
    """Assemble the conservative stencil for the chosen boundary condition."""
    n = problem.n
    if problem.bc == "dirichlet":
        h = 1.0 / (n + 1)
        grid = (np.arange(n) + 1.0) * h
        flux_nodes = np.concatenate([[grid[0] - 0.5 * h],
                                     0.5 * (grid[:-1] + grid[1:]),
                                     [grid[-1] + 0.5 * h]])
        p_half = np.asarray([problem.p(x) for x in flux_nodes], dtype=float)
        k = np.zeros((n, n))
        for i in range(n):
            k[i, i] = (p_half[i] + p_half[i + 1]) / h ** 2 + problem.q(grid[i])
            if i > 0:
                k[i, i - 1] = -p_half[i] / h ** 2
            if i < n - 1:
                k[i, i + 1] = -p_half[i + 1] / h ** 2
    elif problem.bc == "neumann":
        # cell midpoints; ghost reflection zeroes the boundary fluxes
        h = 1.0 / n
        grid = (np.arange(n) + 0.5) * h
        interfaces = np.arange(1, n) * h
        p_half = np.asarray([problem.p(x) for x in interfaces], dtype=float)
        k = np.zeros((n, n))
        for i in range(n):
            k[i, i] = problem.q(grid[i])
            if i > 0:
                k[i, i] += p_half[i - 1] / h ** 2
                k[i, i - 1] = -p_half[i - 1] / h ** 2
            if i < n - 1:
                k[i, i] += p_half[i] / h ** 2
                k[i, i + 1] = -p_half[i] / h ** 2
    else:  # periodic
        h = 1.0 / n
        grid = np.arange(n) * h
        interfaces = (np.arange(n) + 0.5) * h  # interface i sits between i and i+1
        p_half = np.asarray([problem.p(x) for x in interfaces], dtype=float)
        k = np.zeros((n, n))
        for i in range(n):
            right = p_half[i]
            left = p_half[(i - 1) % n]
            k[i, i] = (left + right) / h ** 2 + problem.q(grid[i])
            k[i, (i + 1) % n] += -right / h ** 2
            k[i, (i - 1) % n] += -left / h ** 2
    rho = np.asarray([problem.rho(x) for x in grid], dtype=float)
    if np.any(rho <= 0.0):
        raise ValueError("weight function must be strictly positive on the grid")
    if np.any(p_half <= 0.0):
        raise ValueError("diffusion coefficient must be strictly positive")
    return Discretization(stiffness=k, rho=rho, grid=grid, h=h, bc=problem.bc)


def solve_modes(disc: Discretization, k: int) -> ModeSet:
    """First ``k`` eigenpairs of ``K v = lambda diag(rho) v``, ascending.

    The weight is folded in symmetrically through its square root, the
    standard problem is Jacobi-diagonalized, and modes are scaled to
    unit discrete weighted L2 norm.
    """
    n = disc.stiffness.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"requested {k} modes from an {n}-point grid")
    d_half = np.sqrt(disc.rho)
    sym = disc.stiffness / np.outer(d_half, d_half)
    vals, vecs = _jacobi(0.5 * (sym + sym.T))
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    modes = (vecs / d_half[:, None]) / np.sqrt(disc.h)
    return ModeSet(eigenvalues=vals[:k], modes=modes[:, :k], disc=disc)


def fourier_coefficients(f: np.ndarray, modes: ModeSet) -> np.ndarray:
    """Expansion coefficients ``c_n = h sum(rho f v_n)`` of sampled data."""
    f = np.asarray(f, dtype=float)
    disc = modes.disc
    if f.shape != disc.grid.shape:
        raise ValueError("sample length does not match the grid")
    return np.array([disc.weighted_inner(f, modes.modes[:, j])
                     for j in range(modes.modes.shape[1])])


def reconstruct(coefficients: np.ndarray, modes: ModeSet,
                n_terms: int | None = None) -> np.ndarray:
    cut = len(coefficients) if n_terms is None else n_terms
    return modes.modes[:, :cut] @ np.asarray(coefficients[:cut], dtype=float)


def truncation_error(f: np.ndarray, modes: ModeSet, n_list) -> np.ndarray:
    """Weighted L2 error of the N-term reconstruction, per requested N."""
    f = np.asarray(f, dtype=float)
    coeffs = fourier_coefficients(f, modes)
    out = []
    for n_terms in n_list:
        if n_terms > modes.modes.shape[1]:
            raise ValueError("truncation length exceeds available modes")
        residual = f - reconstruct(coeffs, modes, n_terms)
        out.append(modes.disc.weighted_norm(residual))
    return np.array(out)


def dirichlet_eigenvalue_formula(n_mode: int, h: float) -> float:
    """Exact eigenvalue of the constant-coefficient dirichlet stencil."""
    return (4.0 / h ** 2) * np.sin(n_mode * np.pi * h / 2.0) ** 2
