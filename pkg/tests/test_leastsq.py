import numpy as np
import pytest

from adjointkit import adjoint, matrix_operator, svd
from adjointkit.leastsq import (instability_demo, integration_operator,
                                normal_solve, picard_diagnostic,
                                tikhonov_solve)


def lstsq_oracle(op, y):
    """Minimum-norm least squares through a metric square-root transform.

    Independent of the package's SVD path: solve the Euclidean problem
    min |C^{1/2}(A x - y)| with numpy's LAPACK-backed lstsq after the
    change of variables that absorbs the domain metric.
    """
    ld = np.linalg.cholesky(op.domain.metric)
    lc = np.linalg.cholesky(op.codomain.metric)
    a_tilde = lc.T @ op.entries @ np.linalg.inv(ld.T)
    x_tilde, *_ = np.linalg.lstsq(a_tilde, lc.T @ y, rcond=None)
    return np.linalg.solve(ld.T, x_tilde)


# -- normal_solve ----------------------------------------------------------------

def test_normal_solve_recovers_consistent_system():
    rng = np.random.default_rng(20)
    a = rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
    op = matrix_operator(a)
    x_true = rng.standard_normal(4)
    x = normal_solve(op, op.matvec(x_true))
    np.testing.assert_allclose(x, x_true, atol=1e-10)


def test_normal_solve_rank_deficient_minimum_norm():
    # A^T A x = A^T y restricted to the row space gives x = (0.1, 0.2) by hand
    op = matrix_operator([[1.0, 2.0], [1.0, 2.0]])
    y = np.array([1.0, 0.0])
    x = normal_solve(op, y)
    np.testing.assert_allclose(x, [0.1, 0.2], atol=1e-12)
    lhs = op.entries.T @ op.entries @ x
    rhs = op.entries.T @ y
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_normal_solve_line_fit():
    t = np.array([0.0, 1.0, 2.0])
    design = np.column_stack([np.ones(3), t])
    y = 2.0 * t + 1.0
    coeffs = normal_solve(matrix_operator(design), y)
    np.testing.assert_allclose(coeffs, [1.0, 2.0], atol=1e-12)


def test_normal_solve_residual_orthogonal_to_range():
    rng = np.random.default_rng(21)
    op = matrix_operator(rng.standard_normal((6, 3)))
    y = rng.standard_normal(6)
    x = normal_solve(op, y)
    residual = op.matvec(x) - y
    for _ in range(20):
        w = rng.standard_normal(3)
        assert abs(op.codomain.inner(residual, op.matvec(w))) <= 1e-9


def test_normal_solve_matches_bruteforce_oracle():
    rng = np.random.default_rng(22)
    for trial in range(8):
        m, n = 7, 4
        dom = cod = None
        if trial % 2 == 0:
            b = rng.standard_normal((n, n))
            dom = b @ b.T + n * np.eye(n)
            c = rng.standard_normal((m, m))
            cod = c @ c.T + m * np.eye(m)
        op = matrix_operator(rng.standard_normal((m, n)), dom, cod)
        y = rng.standard_normal(m)
        np.testing.assert_allclose(normal_solve(op, y), lstsq_oracle(op, y),
                                   atol=1e-8)


# -- tikhonov_solve ---------------------------------------------------------------

def test_tikhonov_prior_dominated_limit():
    rng = np.random.default_rng(23)
    op = matrix_operator(rng.standard_normal((4, 3)))
    y = rng.standard_normal(4)
    x0 = rng.standard_normal(3)
    sol = tikhonov_solve(op, y, 1e8, x0)
    assert np.linalg.norm(sol.x - x0) <= 1e-6 * np.linalg.norm(x0)


def test_tikhonov_data_dominated_limit():
    rng = np.random.default_rng(24)
    a = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
    op = matrix_operator(a)
    y = rng.standard_normal(3)
    sol = tikhonov_solve(op, y, 1e-12)
    base = normal_solve(op, y)
    assert np.linalg.norm(sol.x - base) <= 1e-6 * np.linalg.norm(base)


def test_tikhonov_optimality_residual():
    rng = np.random.default_rng(25)
    for kappa in (1e-6, 1e-2, 10.0):
        op = matrix_operator(rng.standard_normal((5, 4)))
        y = rng.standard_normal(5)
        x0 = rng.standard_normal(4)
        sol = tikhonov_solve(op, y, kappa, x0)
        adj = adjoint(op)
        lhs = adj.matvec(op.matvec(sol.x)) + kappa * sol.x
        rhs = adj.matvec(y) + kappa * x0
        nrm_a = svd(op).sigma[0]
        assert op.domain.norm(lhs - rhs) <= 1e-10 * (nrm_a ** 2 + kappa) \
            * max(op.domain.norm(sol.x), 1e-30)
        # stability: |x| <= (|A||y| + kappa |x0|) / kappa
        bound = (nrm_a * op.codomain.norm(y) + kappa * op.domain.norm(x0)) / kappa
        assert op.domain.norm(sol.x) <= bound * (1.0 + 1e-12)


def test_tikhonov_rejects_nonpositive_kappa():
    op = matrix_operator(np.eye(2))
    with pytest.raises(ValueError):
        tikhonov_solve(op, np.ones(2), 0.0)


def test_tikhonov_stabilizes_integration_inverse():
    # deterministic perturbation along the weakest retained mode; the
    # unregularized error grows like 1/sigma_min while the regularized
    # error is damped by sigma_min/(sigma_min^2 + kappa)
    op = integration_operator(64)
    dec = svd(op)
    grid = (np.arange(64) + 0.5) / 64
    y = op.matvec(np.sin(np.pi * grid))
    noise = 1e-3 * dec.left_vectors[:, dec.rank - 1]
    x_plain = normal_solve(op, y, decomposition=dec)
    x_plain_noisy = normal_solve(op, y + noise, decomposition=dec)
    err_plain = op.domain.norm(x_plain_noisy - x_plain)
    reg = tikhonov_solve(op, y, 1e-1)
    reg_noisy = tikhonov_solve(op, y + noise, 1e-1)
    err_reg = op.domain.norm(reg_noisy.x - reg.x)
    assert err_plain / err_reg >= 1e3
    assert op.domain.norm(reg_noisy.x) <= 2.0 * op.domain.norm(reg.x)


# -- picard_diagnostic -------------------------------------------------------------

def test_picard_smooth_data_decays():
    op = integration_operator(48)
    grid = (np.arange(48) + 0.5) / 48
    y = op.matvec(np.sin(np.pi * grid))
    table = picard_diagnostic(op, y)
    ratios = [row.ratio for row in table.rows]
    assert ratios[-1] <= 1e-3 * ratios[0]
    cums = [row.cumulative for row in table.rows]
    # the tail of the cumulative sum contributes almost nothing
    assert cums[-1] - cums[len(cums) // 2] <= 1e-4 * cums[-1]
    assert all(b >= a for a, b in zip(cums, cums[1:]))


def test_picard_single_mode_data():
    op = integration_operator(32)
    dec = svd(op)
    idx = 20
    y = dec.left_vectors[:, idx - 1]
    table = picard_diagnostic(op, y, decomposition=dec)
    target = table.rows[idx - 1]
    assert target.ratio == pytest.approx(1.0 / dec.sigma[idx - 1], rel=1e-9)
    others = [row.coeff for row in table.rows if row.index != idx]
    assert max(others) <= 1e-10


def test_picard_null_space_data():
    op = matrix_operator([[1.0, 2.0], [1.0, 2.0]])
    y = np.array([1.0, -1.0]) / np.sqrt(2.0)
    table = picard_diagnostic(op, y)
    assert all(row.coeff <= 1e-12 for row in table.rows)
    assert table.null_defect == pytest.approx(1.0, abs=1e-12)


# -- instability_demo --------------------------------------------------------------

def test_instability_first_mode_is_smallest():
    op = integration_operator(32)
    dec = svd(op)
    grid = (np.arange(32) + 0.5) / 32
    y = op.matvec(grid * (1.0 - grid))
    amp = instability_demo(op, y, 1, 1e-4)
    assert amp == pytest.approx(1.0 / dec.sigma[0], rel=1e-6)


def test_instability_grows_toward_spectral_tail():
    op = integration_operator(64)
    dec = svd(op)
    grid = (np.arange(64) + 0.5) / 64
    y = op.matvec(np.sin(np.pi * grid))
    amp_tail = instability_demo(op, y, dec.rank, 1e-3)
    amp_head = instability_demo(op, y, 1, 1e-3)
    assert amp_tail == pytest.approx(1.0 / dec.sigma[dec.rank - 1], rel=1e-6)
    assert amp_tail >= 10.0 * amp_head


def test_instability_independent_of_delta():
    op = integration_operator(16)
    grid = (np.arange(16) + 0.5) / 16
    y = op.matvec(np.cos(np.pi * grid))
    a1 = instability_demo(op, y, 5, 1e-2)
    a2 = instability_demo(op, y, 5, 1e-7)
    assert abs(a1 - a2) <= 1e-10 * a1


def test_instability_rejects_out_of_rank_index():
    op = integration_operator(8)
    with pytest.raises(ValueError):
        instability_demo(op, np.zeros(8), 9, 1e-3)


# -- integration_operator -----------------------------------------------------------

def test_integration_operator_constant_input():
    op = integration_operator(2)
    np.testing.assert_allclose(op.matvec(np.ones(2)), [0.5, 1.0])


def test_integration_operator_zero_input():
    op = integration_operator(8)
    np.testing.assert_allclose(op.matvec(np.zeros(8)), np.zeros(8))


def test_integration_operator_conditioning_grows():
    conds = []
    for n in (16, 32, 64):
        dec = svd(integration_operator(n))
        conds.append(dec.sigma[0] / dec.sigma[dec.rank - 1])
    assert conds[0] < conds[1] < conds[2]


def test_integration_operator_rejects_small_n():
    with pytest.raises(ValueError):
        integration_operator(1)
