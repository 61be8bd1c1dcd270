"""Discretization, norms, dyadic pieces, and sweeps."""
import math

import numpy as np
import pytest

from oscdecay.damping import build_damping
from oscdecay.errors import EmptyPiece, GridBudgetExceeded
from oscdecay.operators import (
    CutoffSpec,
    bump_profile,
    composed_norm,
    discretize,
    dyadic_cover,
    dyadic_piece,
    dyadic_window,
    from_kernel_matrix,
    grid_size_for,
    l2_norm,
    log_spaced,
    loglog_slope,
    lp_norm_estimate,
    sweep,
)
from oscdecay.phase import parse_phase
from oscdecay.puiseux import classify_roots, puiseux_roots


def P(text):
    return parse_phase(text)


# --- cutoffs -----------------------------------------------------------------


def test_bump_profile_shape():
    w = 0.5
    assert bump_profile(0.0, w) == 1.0
    assert bump_profile(0.24, w) == 1.0  # inner half
    assert bump_profile(0.51, w) == 0.0
    mid = bump_profile(0.375, w)
    assert 0.0 < mid < 1.0


def test_dyadic_partition_of_unity():
    t = np.exp(np.linspace(math.log(1e-4), math.log(0.49), 500))
    total = sum(dyadic_window(t / 2.0**j) for j in range(-18, 3))
    assert np.max(np.abs(total - 1.0)) < 1e-12
    assert dyadic_window(np.array([0.49, 2.1, -1.0])).tolist()[1:] == [0.0, 0.0]


# --- discretization -----------------------------------------------------------


def test_grid_size_guard_formula():
    # S = x*y, lambda=100, w=1/2: at least ceil(8*100*0.5/(2pi)) points/axis
    n = grid_size_for(100.0, 0.5, 0.5, grid_budget=4096, min_points=4)
    assert n >= math.ceil(8 * 100 * 0.5 / (2 * math.pi))
    assert n % 4 == 0


def test_grid_budget_exceeded_reports_cap():
    with pytest.raises(GridBudgetExceeded) as err:
        grid_size_for(1e7, 0.5, 0.7, grid_budget=1024)
    assert err.value.lambda_cap is not None
    assert err.value.lambda_cap < 1e7


def test_zero_lambda_rejected():
    with pytest.raises(ValueError):
        discretize(P("x*y"), CutoffSpec(), 0.0)


def test_grid_avoids_axes_and_diagonals():
    op = discretize(P("x*y"), CutoffSpec(), 50.0, min_points=96, grid_budget=512)
    assert not np.any(op.x == 0) and not np.any(op.y == 0)
    diff = op.y[None, :] - op.x[:, None]
    anti = op.y[None, :] + op.x[:, None]
    assert np.min(np.abs(diff)) > 0 and np.min(np.abs(anti)) > 0
    assert op.sampling_ratio >= 8.0


def test_applier_linear_and_zero():
    op = discretize(P("x*y"), CutoffSpec(), 40.0, min_points=96, grid_budget=512)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(op.shape[1])
    g = rng.standard_normal(op.shape[1])
    lhs = op.apply(2.0 * f - 3.0 * g)
    rhs = 2.0 * op.apply(f) - 3.0 * op.apply(g)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(rhs) + 1)
    assert np.all(op.apply(np.zeros(op.shape[1])) == 0)


def test_damped_zero_exponent_matches_undamped():
    tree = classify_roots(puiseux_roots(P("3*x^2 + 3*y^2")))
    damping = build_damping(tree, 1, 0.0)
    S = P("x^3*y + x*y^3")
    a = discretize(S, CutoffSpec(), 60.0, min_points=96, grid_budget=512)
    b = discretize(S, CutoffSpec(), 60.0, damping=damping, min_points=96, grid_budget=512)
    assert np.max(np.abs(a.kernel - b.kernel)) < 1e-12


# --- norms ---------------------------------------------------------------------


def test_rank_one_kernel_norm():
    n = 64
    op = from_kernel_matrix(np.ones((n, n + 2)), hx=1.0 / n, hy=1.0 / (n + 2))
    est = l2_norm(op)
    assert est.converged
    assert abs(est.value - 1.0) < 1e-9


def test_zero_kernel_norm():
    op = from_kernel_matrix(np.zeros((8, 10)))
    assert l2_norm(op).value == 0.0
    assert lp_norm_estimate(op, 1.5).value == 0.0


def test_l2_matches_exact_svd():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((40, 46)) + 1j * rng.standard_normal((40, 46))
    op = from_kernel_matrix(M, hx=0.25, hy=0.125)
    exact = math.sqrt(0.25 * 0.125) * np.linalg.svd(M, compute_uv=False)[0]
    assert abs(l2_norm(op, tol=1e-10).value - exact) < 1e-7 * exact


def test_lp_p2_agrees_with_l2():
    op = discretize(P("x*y"), CutoffSpec(), 150.0, grid_budget=1024)
    a = l2_norm(op).value
    b = lp_norm_estimate(op, 2.0, seed=3).value
    assert abs(a - b) / a < 1e-4


def test_lp_diagonal_kernel():
    d = np.array([0.3, -2.0, 1.0, 0.5])
    op = from_kernel_matrix(np.diag(d))
    for p in (1.5, 2.0, 3.0):
        est = lp_norm_estimate(op, p, seed=0)
        assert abs(est.value - 2.0) < 1e-8
        assert est.monotone


def test_lp_rejects_bad_p():
    op = from_kernel_matrix(np.eye(4))
    with pytest.raises(ValueError):
        lp_norm_estimate(op, 1.0)
    with pytest.raises(ValueError):
        lp_norm_estimate(op, math.inf)


def test_transpose_duality_on_random_matrices():
    rng = np.random.default_rng(5)
    for trial in range(4):
        M = rng.standard_normal((30, 34)) + 1j * rng.standard_normal((30, 34))
        p = 1.0 + 0.5 * (trial + 1)
        a = lp_norm_estimate(from_kernel_matrix(M), p, seed=trial).value
        b = lp_norm_estimate(from_kernel_matrix(M.conj().T), p / (p - 1), seed=trial + 9).value
        assert abs(a - b) / a < 1e-3


def test_lower_bound_is_certified():
    # every reported value must be <= the true norm (p=2 comparison)
    rng = np.random.default_rng(8)
    M = rng.standard_normal((25, 25))
    op = from_kernel_matrix(M)
    exact = np.linalg.svd(M, compute_uv=False)[0]
    est = lp_norm_estimate(op, 2.0, restarts=3, max_iter=5, seed=1)
    assert est.value <= exact * (1 + 1e-12)


def test_conjugation_symmetry():
    S = P("x^2*y")
    pos = discretize(S, CutoffSpec(), 75.0, min_points=96, grid_budget=512)
    neg = discretize(S, CutoffSpec(), -75.0, min_points=96, grid_budget=512)
    # kernels are exact conjugates, so every norm coincides
    assert np.array_equal(neg.kernel, pos.kernel.conj())
    a, b = l2_norm(pos).value, l2_norm(neg).value
    assert abs(a - b) < 2e-6 * a  # same up to iteration tolerance


def test_grid_refinement_stability():
    S = P("x*y")
    base = discretize(S, CutoffSpec(), 100.0, grid_budget=4096)
    fine = discretize(S, CutoffSpec(), 100.0, grid_budget=4096, min_points=2 * base.shape[0])
    na, nb = l2_norm(base).value, l2_norm(fine).value
    assert abs(na - nb) / na < 0.01


# --- dyadic pieces ---------------------------------------------------------------


def test_partition_of_unity_reconstruction():
    op = discretize(P("x*y"), CutoffSpec(), 60.0, min_points=96, grid_budget=512)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(op.shape[1])
    full = op.apply(f)
    acc = np.zeros_like(full)
    for j, k, s1, s2 in dyadic_cover(op):
        try:
            acc += dyadic_piece(op, j, k, s1, s2).apply(f)
        except EmptyPiece:
            continue
    assert np.max(np.abs(acc - full)) / np.max(np.abs(full)) < 1e-8


def test_piece_outside_support_is_empty():
    op = discretize(P("x*y"), CutoffSpec(0.5), 60.0, min_points=96, grid_budget=512)
    with pytest.raises(EmptyPiece):
        dyadic_piece(op, 0, -2)  # 2^{j+1} = 2 > 2 * half_width
    with pytest.raises(EmptyPiece):
        dyadic_piece(op, -2, 1)


def test_piece_norm_bounded_by_full():
    op = discretize(P("x*y"), CutoffSpec(), 80.0, min_points=96, grid_budget=512)
    full = l2_norm(op).value
    piece = l2_norm(dyadic_piece(op, -2, -2)).value
    assert piece <= full * (1 + 1e-9)


def test_composed_norm_consistency():
    op = discretize(P("x*y"), CutoffSpec(), 60.0, min_points=96, grid_budget=512)
    p1 = dyadic_piece(op, -2, -2)
    square = composed_norm(p1, p1).value
    norm = l2_norm(p1).value
    assert abs(square - norm**2) < 1e-6 * norm**2
    p2 = dyadic_piece(op, -2, -4)
    assert composed_norm(p1, p2).value == 0.0


# --- sweeps -----------------------------------------------------------------------


def test_loglog_slope_recovers_exponent():
    lams = log_spaced(10, 1000, 9)
    norms = [3.0 * lam**-0.5 for lam in lams]
    slope, stderr = loglog_slope(lams, norms)
    assert abs(slope + 0.5) < 1e-12
    assert stderr < 1e-12


def test_sweep_budget_statuses_recorded():
    res = sweep(
        P("x*y"), CutoffSpec(), None, 2.0,
        log_spaced(30, 100000, 8), grid_budget=256, min_points=64,
    )
    statuses = {s.status for s in res.samples}
    assert "budget_exceeded" in statuses
    dropped = [s for s in res.samples if s.status == "budget_exceeded"]
    assert all(s.norm is None for s in dropped)
    assert res.fitted_slope is None or res.n_valid >= 6


def test_sweep_deterministic():
    grid = log_spaced(30, 120, 6)
    r1 = sweep(P("x*y"), CutoffSpec(), None, 2.0, grid, grid_budget=512, min_points=96, seed=5)
    r2 = sweep(P("x*y"), CutoffSpec(), None, 2.0, grid, grid_budget=512, min_points=96, seed=5)
    assert [s.norm for s in r1.samples] == [s.norm for s in r2.samples]
    assert r1.fitted_slope == r2.fitted_slope
