"""Self-adjoint eigendecomposition and the SVD built from the normal operator.

The eigensolver is a cyclic Jacobi iteration on the symmetrized matrix.
For a weighted space with metric ``M = L L^T`` the operator is first
transformed to ``L^T A L^{-T}``, which is symmetric exactly when ``A``
is self-adjoint in the metric, and eigenvectors are mapped back through
``L^{-T}`` so they come out orthonormal in the metric.  The SVD then
follows the constructive route: eigenpairs of ``A* A`` give the right
vectors and squared singular values, left vectors are ``A u_i / s_i``,
and the remaining left directions are an orthonormal completion, which
automatically spans the null space of ``A*``.
"""

from dataclasses import dataclass

import numpy as np

from .core import (DenseOperator, InnerProductSpace, adjoint,
                   adjoint_consistency_check, complete_basis)
from .errors import NumericalError

_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 100
_SELF_ADJOINT_TOL = 1e-8
DEFAULT_RANK_TOL_FACTOR = 1e-10


@dataclass(frozen=True)
class EigResult:
    """Eigenvalues (descending) and metric-orthonormal eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SvdResult:
    """Singular triplets plus full orthonormal bases of domain and codomain.

    ``sigma`` holds the min(m, n) singular values in descending order,
    ``right_vectors`` all n domain vectors, ``left_vectors`` all m
    codomain vectors, and ``rank`` the number of values above the rank
    tolerance used at construction.
    """
    sigma: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    rank: int
    domain: InnerProductSpace
    codomain: InnerProductSpace


@dataclass(frozen=True)
class SubspaceBases:
    """Orthonormal bases of the four fundamental subspaces."""
    range_a: np.ndarray
    null_a: np.ndarray
    range_astar: np.ndarray
    null_astar: np.ndarray


def _jacobi(sym: np.ndarray):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues, eigenvector columns), unsorted.  Convergence
    is declared when the off-diagonal Frobenius mass drops below
    1e-14 of the matrix Frobenius norm.
    """
    s = np.array(sym, dtype=float)
    n = s.shape[0]
    v = np.eye(n)
    total = np.linalg.norm(s)
    if total == 0.0:
        return np.zeros(n), v

    def offdiag():
        return np.linalg.norm(s - np.diag(np.diag(s)))

    for _ in range(_MAX_SWEEPS):
        off = offdiag()
        if off <= _JACOBI_TOL * total:
            break
        # entries below this cannot carry the remaining mass; skipping them
        # keeps every sweep cheap without stalling (some entry always exceeds
        # off / 2n while the mass is above the convergence target)
        thresh = off / (2.0 * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[p, q]
                if abs(apq) <= thresh:
                    continue
                tau = (s[q, q] - s[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 1.0 / (2.0 * tau)
                elif tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * c
                # two-sided rotation in the (p, q) plane
                sp, sq = s[:, p].copy(), s[:, q].copy()
                s[:, p] = c * sp - sn * sq
                s[:, q] = sn * sp + c * sq
                sp, sq = s[p, :].copy(), s[q, :].copy()
                s[p, :] = c * sp - sn * sq
                s[q, :] = sn * sp + c * sq
                s[p, q] = 0.0
                s[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    else:
        raise NumericalError("Jacobi iteration did not converge")
    return np.diag(s).copy(), v


def eig_self_adjoint(op: DenseOperator) -> EigResult:
    """Spectral decomposition of a self-adjoint operator.

    The input must map a space to itself and satisfy the adjoint
    identity against itself to 1e-8; otherwise a ``ValueError`` is
    raised.  Eigenvalues are real and returned descending with
    metric-orthonormal eigenvectors.
    """
    space = op.domain
    if op.codomain.dim != space.dim or not np.array_equal(op.codomain.metric, space.metric):
        raise ValueError("operator must map a space to itself")
    report = adjoint_consistency_check(op, trials=20, seed=2024, adjoint_op=op)
    if report.max_defect > _SELF_ADJOINT_TOL:
        raise ValueError(
            f"operator is not self-adjoint (defect {report.max_defect:.3e})")
    if space.is_euclidean:
        sym = 0.5 * (op.entries + op.entries.T)
        vals, vecs = _jacobi(sym)
    else:
        ell = space.cholesky
        transformed = ell.T @ np.linalg.solve(ell, op.entries.T).T
        vals, vecs = _jacobi(0.5 * (transformed + transformed.T))
        vecs = np.linalg.solve(ell.T, vecs)
    order = np.argsort(vals)[::-1]
    return EigResult(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0.0:
            out[:, j] = -col
    return out


def svd(op: DenseOperator, rank_tol: float | None = None) -> SvdResult:
    """Singular value decomposition through the normal operator.

    Right vectors are eigenvectors of ``A* A``; left vectors for
    positive singular values are ``A u_i / s_i`` and the rest complete
    an orthonormal basis of the codomain (hence span the null space of
    the adjoint).  Signs follow a fixed convention: the dominant entry
    of each right vector is positive, and left vectors inherit signs
    through the map.
    """
    normal = _compose_adjoint(op)
    eig = eig_self_adjoint(normal)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    # eigenvalues of A*A below the float noise floor of its formation are
    # indistinguishable from zero; report those singular values as exact zeros
    if lam.size and lam[0] > 0.0:
        floor = 64.0 * op.domain.dim * np.finfo(float).eps * lam[0]
        lam = np.where(lam > floor, lam, 0.0)
    sig_all = np.sqrt(lam)
    right = _fix_signs(eig.eigenvectors)
    sigma1 = sig_all[0] if sig_all.size else 0.0
    tol = DEFAULT_RANK_TOL_FACTOR * sigma1 if rank_tol is None else float(rank_tol)
    rank = int(np.sum(sig_all > tol))

    left_cols = []
    for i in range(rank):
        left_cols.append(op.matvec(right[:, i]) / sig_all[i])
    partial = np.column_stack(left_cols) if left_cols else np.zeros((op.codomain.dim, 0))
    left = complete_basis(partial, op.codomain)
    if rank < left.shape[1]:
        left[:, rank:] = _fix_signs(left[:, rank:])

    k = min(op.domain.dim, op.codomain.dim)
    return SvdResult(sigma=sig_all[:k], right_vectors=right, left_vectors=left,
                     rank=rank, domain=op.domain, codomain=op.codomain)


def _compose_adjoint(op: DenseOperator) -> DenseOperator:
    """The normal operator ``A* A`` on the domain space."""
    adj = adjoint(op)
    return DenseOperator(op.domain, op.domain, adj.entries @ op.entries)


def fundamental_subspaces(s: SvdResult) -> SubspaceBases:
    """Slice the SVD bases into the four fundamental subspaces."""
    r = s.rank
    return SubspaceBases(
        range_a=s.left_vectors[:, :r],
        null_a=s.right_vectors[:, r:],
        range_astar=s.right_vectors[:, :r],
        null_astar=s.left_vectors[:, r:],
    )


def solvability_check(op: DenseOperator, y: np.ndarray, tol: float = 1e-10) -> dict:
    """Existence test for ``A u = y`` via the null space of the adjoint.

    The equation is solvable exactly when ``y`` is orthogonal to
    ``N(A*)``; the defect reported is the relative norm of the offending
    component.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (op.codomain.dim,):
        raise ValueError("right-hand side length does not match codomain")
    y_norm = op.codomain.norm(y)
    if y_norm == 0.0:
        return {"solvable": True, "defect": 0.0}
    bases = fundamental_subspaces(svd(op))
    null_astar = bases.null_astar
    coeffs = np.array([op.codomain.inner(null_astar[:, j], y)
                       for j in range(null_astar.shape[1])])
    defect = float(np.sqrt(np.sum(coeffs ** 2)) / y_norm)
    return {"solvable": bool(defect <= tol), "defect": defect}


def orthogonal_projector(basis: np.ndarray, space: InnerProductSpace) -> DenseOperator:
    """Orthogonal projector onto the span of metric-orthonormal columns.

    ``P x = sum_i (x, u_i) u_i``; as a matrix this is ``U U^T M``.  The
    result is idempotent and self-adjoint in the space's inner product.
    """
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != space.dim:
        raise ValueError("basis must be columns of length space.dim")
    gram = np.array([[space.inner(basis[:, i], basis[:, j])
                      for j in range(basis.shape[1])] for i in range(basis.shape[1])])
    if gram.size and np.abs(gram - np.eye(basis.shape[1])).max() > 1e-8:
        raise ValueError("basis is not orthonormal in the space metric")
    entries = basis @ basis.T
    if not space.is_euclidean:
        entries = entries @ space.metric
    return DenseOperator(space, space, entries)
