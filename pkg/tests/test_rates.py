"""Growth polynomials, companion-matrix roots, rates, tuning, efficiency."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stale_momentum import (
    DomainError,
    QuadraticObjective,
    convergence_rate,
    efficiency_metrics,
    growth_polynomial,
    rate_grid,
    recurrence_iterates,
    smallest_magnitude_root,
    strategy_compare,
    tune,
    tune_sweep,
    two_point_spectrum,
)
from stale_momentum.rates import fitted_decay_rate


# ----------------------------------------------------------------------
# growth polynomial construction
# ----------------------------------------------------------------------
def test_polynomial_no_momentum():
    p = growth_polynomial(0.0, 0.0, 0.1, 1.0)
    assert p.z == pytest.approx(0.9)
    assert p.coefficients == (-1.0, p.z, -0.0, 0.0)
    assert p.degree == 1


def test_polynomial_implicit_only():
    p = growth_polynomial(0.5, 0.0, 0.1, 1.0)
    assert p.z == pytest.approx(1.45)
    assert p.coefficients[2] == pytest.approx(-0.5)
    assert p.degree == 2


def test_polynomial_both_momenta():
    p = growth_polynomial(0.5, 0.5, 0.1, 1.0)
    assert p.coefficients[3] == pytest.approx(0.25)
    assert p.coefficients[2] == pytest.approx(-1.25)
    assert p.degree == 3


def test_polynomial_constant_coefficient_is_minus_one():
    p = growth_polynomial(0.3, -0.2, 0.05, 7.0)
    assert p.coefficients[0] == -1.0


def test_polynomial_domain_errors():
    with pytest.raises(DomainError):
        growth_polynomial(1.0, 0.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        growth_polynomial(0.0, 1.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        growth_polynomial(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        growth_polynomial(0.0, 0.0, 0.1, -1.0)


# ----------------------------------------------------------------------
# roots
# ----------------------------------------------------------------------
def test_linear_root_is_gd_rate():
    p = growth_polynomial(0.0, 0.0, 0.1, 1.0)
    root = smallest_magnitude_root(p)
    assert root == pytest.approx(1.0 / 0.9)
    assert 1.0 / abs(root) == pytest.approx(0.9)


def test_degree_zero_root_errors():
    p = growth_polynomial(0.0, 0.0, 1.0, 1.0)  # z == 0
    assert p.degree == 0
    with pytest.raises(DomainError):
        smallest_magnitude_root(p)


def _companion_max_modulus(b, c):
    """Independent oracle: max |eigenvalue| of the companion of r^2 - b r + c."""
    comp = np.array([[0.0, -c], [1.0, b]])
    return np.abs(np.linalg.eigvals(comp)).max()


@pytest.mark.parametrize("mu_l,alpha,lam", [(0.4, 0.1, 1.0), (0.8, 0.3, 4.0), (0.1, 1.2, 0.7)])
def test_heavy_ball_rate_matches_companion_oracle(mu_l, alpha, lam):
    # mu_s = 0: 1/|t*| equals the max-modulus root of r^2 - z r + mu_l
    p = growth_polynomial(0.0, mu_l, alpha, lam)
    rate = 1.0 / abs(smallest_magnitude_root(p))
    oracle = _companion_max_modulus(p.z, mu_l)
    assert abs(rate - oracle) <= 1e-10 * max(1.0, oracle)


@pytest.mark.parametrize("mu_s,alpha,lam", [(0.5, 0.1, 1.0), (0.9, 0.05, 3.0), (0.25, 0.7, 1.3)])
def test_implicit_only_rate_matches_companion_oracle(mu_s, alpha, lam):
    # mu_l = 0 reduces to the two-term expected recurrence r^2 - z r + mu_s
    p = growth_polynomial(mu_s, 0.0, alpha, lam)
    rate = 1.0 / abs(smallest_magnitude_root(p))
    oracle = _companion_max_modulus(p.z, mu_s)
    assert abs(rate - oracle) <= 1e-10 * max(1.0, oracle)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=0.95),
    st.floats(min_value=-0.95, max_value=0.95),
    st.floats(min_value=1e-3, max_value=2.0),
    st.floats(min_value=0.05, max_value=50.0),
)
def test_root_residual_property(mu_s, mu_l, alpha, lam):
    p = growth_polynomial(mu_s, mu_l, alpha, lam)
    if p.degree == 0:
        return
    root = smallest_magnitude_root(p)
    residual = abs(p(root))
    assert residual < 1e-9 * max(abs(c) for c in p.coefficients)


def test_conjugate_pair_rate_is_magnitude_only():
    # complex case: either root of the pair gives the same rate
    p = growth_polynomial(0.0, 0.9, 0.1, 1.0)
    root = smallest_magnitude_root(p)
    assert root.imag != 0.0
    assert 1.0 / abs(root) == pytest.approx(math.sqrt(0.9), rel=1e-12)


# ----------------------------------------------------------------------
# convergence_rate
# ----------------------------------------------------------------------
def test_rate_optimal_gd():
    q = 10.0
    rep = convergence_rate([1.0, q], 0.0, 0.0, 2.0 / (1.0 + q))
    assert abs(rep.gamma - (q - 1.0) / (q + 1.0)) < 1e-10
    assert rep.stable


def test_rate_alpha_to_zero_tends_to_one():
    rep = convergence_rate([1.0], 0.3, 0.2, 1e-9)
    assert 1.0 - 1e-6 < rep.gamma < 1.0


def test_rate_excess_momentum_unstable():
    rep = convergence_rate([1.0, 5.0], 0.9, 0.9, 0.1)
    assert rep.gamma >= 1.0
    assert not rep.stable


def test_rate_handles_one_step_convergence():
    rep = convergence_rate([1.0, 10.0], 0.0, 0.0, 1.0)  # z = 0 for lambda = 1
    assert rep.per_eigenvalue[0].rate == 0.0
    assert rep.per_eigenvalue[0].root is None
    assert rep.gamma == pytest.approx(9.0)  # |1 - 10|


def test_rate_grid_matches_scalar_path():
    eigs = [1.0, 6.0]
    ml = [-0.3, 0.0, 0.4]
    al = [0.05, 0.2, 0.9]
    grid = rate_grid(eigs, 0.45, ml, al)
    for i, mu_l in enumerate(ml):
        for j, alpha in enumerate(al):
            assert grid[i, j] == pytest.approx(
                convergence_rate(eigs, 0.45, mu_l, alpha).gamma, rel=1e-12, abs=1e-12
            )


def test_degree_reduction_continuity():
    # cubic with epsilon leading coefficient vs the quadratic limit
    eigs = [1.0, 4.0]
    for alpha in (0.05, 0.3):
        quad = convergence_rate(eigs, 0.5, 0.0, alpha).gamma
        cub = convergence_rate(eigs, 0.5, 2e-8, alpha).gamma  # mu_s*mu_l = 1e-8
        assert abs(quad - cub) < 1e-5


@pytest.mark.parametrize("c", [0.25, 2.0, 8.0, 1024.0])
def test_scale_invariance_exact_for_binary_scales(c):
    eigs = np.array([1.0, 7.3])
    base = convergence_rate(eigs, 0.4, -0.2, 0.13)
    scaled = convergence_rate(eigs * c, 0.4, -0.2, 0.13 / c)
    assert scaled.gamma == base.gamma  # z is bit-identical for power-of-two scales


# ----------------------------------------------------------------------
# empirical decay vs analytic rate
# ----------------------------------------------------------------------
def test_recurrence_decay_matches_gamma_within_two_percent():
    rng = np.random.default_rng(2)
    accepted = 0
    while accepted < 5:
        mu_s = rng.uniform(0.0, 0.9)
        mu_l = rng.uniform(-0.5, 0.8)
        lam = [1.0, rng.uniform(1.0, 20.0)]
        alpha = 10 ** rng.uniform(-2.5, 0.0)
        rep = convergence_rate(lam, mu_s, mu_l, alpha)
        if not 0.5 < rep.gamma < 0.995:
            continue
        obj = QuadraticObjective.from_spectrum(lam)
        rec = recurrence_iterates(obj, alpha, mu_l, mu_s, 200, np.ones(2))
        d = rec.distances()
        if np.any(d[50:] <= 0):
            continue
        fitted = fitted_decay_rate(d, 50, 200)
        assert abs(fitted - rep.gamma) / rep.gamma < 0.02
        accepted += 1


def test_fitted_decay_rate_validation():
    with pytest.raises(DomainError):
        fitted_decay_rate(np.ones(10), 5, 20)
    with pytest.raises(DomainError):
        fitted_decay_rate(np.zeros(300), 50, 200)


# ----------------------------------------------------------------------
# tuning
# ----------------------------------------------------------------------
def test_tune_recovers_heavy_ball_optimum():
    q = 10.0
    target = ((math.sqrt(q) - 1) / (math.sqrt(q) + 1)) ** 2
    step = 0.005
    entry = tune(
        two_point_spectrum(q),
        0.0,
        np.round(np.arange(0.0, 0.5001, step), 10),
        np.linspace(0.02, 0.8, 781),
    )
    assert abs(entry.best_mu_l - target) <= 1.5 * step
    assert entry.stable


def test_tune_tie_break_is_canonical():
    # alpha = 0.5 and 1.5 give exactly gamma = 0.5 on lambda = 1; the tie
    # resolves to the smaller alpha regardless of grid order
    entry = tune([1.0], 0.0, [0.0], [1.5, 0.5])
    assert entry.best_gamma == 0.5
    assert entry.best_alpha == 0.5
    # permuting the grids never changes the selected cell
    e1 = tune([1.0], 0.5, [0.4, -0.4, 0.0], [1.5, 0.5, 0.7])
    e2 = tune([1.0], 0.5, [0.0, -0.4, 0.4], [0.7, 0.5, 1.5])
    assert (e1.best_mu_l, e1.best_alpha, e1.best_gamma) == (
        e2.best_mu_l,
        e2.best_alpha,
        e2.best_gamma,
    )


def test_tune_all_unstable_flagged():
    entry = tune([1.0], 0.9, [0.9], [2.5, 3.0])
    assert not entry.stable
    assert entry.best_gamma >= 1.0


def test_tune_sweep_canonical_order_and_threads(monkeypatch):
    eigs = two_point_spectrum(5.0)
    mu_s_values = [0.0, 0.4, 0.8]
    grid_serial = tune_sweep(eigs, mu_s_values)
    monkeypatch.setenv("STALE_MOMENTUM_THREADS", "1")
    grid_capped = tune_sweep(eigs, mu_s_values)
    assert np.array_equal(grid_serial.mu_s_values, grid_capped.mu_s_values)
    assert np.array_equal(grid_serial.best_mu_l_curve, grid_capped.best_mu_l_curve)
    for a, b in zip(grid_serial.entries, grid_capped.entries):
        assert np.array_equal(a.gamma, b.gamma)


def test_tune_sweep_optimal_gamma_monotone_past_minimum():
    grid = tune_sweep(two_point_spectrum(10.0))
    best = np.array([e.best_gamma for e in grid.entries])
    i0 = int(np.argmin(best))
    assert np.all(np.diff(best[i0:]) >= -1e-12)


def test_negative_momentum_optimal_at_high_staleness():
    entry = tune(two_point_spectrum(5.0), 0.8)
    assert entry.best_mu_l < 0


def test_log_spectrum_spans_condition_number():
    from stale_momentum import log_spectrum

    eigs = log_spectrum(10.0)
    assert eigs.size == 10
    assert eigs[0] == pytest.approx(1.0) and eigs[-1] == pytest.approx(10.0)
    # at these parameters the extreme eigenvalues pin the rate
    dense = convergence_rate(eigs, 0.5, -0.2, 0.1).gamma
    extremes = convergence_rate(two_point_spectrum(10.0), 0.5, -0.2, 0.1).gamma
    assert dense == pytest.approx(extremes, abs=1e-12)


def test_tuning_grid_rows_cover_every_cell():
    grid = tune_sweep(two_point_spectrum(5.0), [0.0, 0.5], [0.0, 0.3], [0.1, 0.2])
    rows = list(grid.rows())
    assert len(rows) == 2 * 2 * 2
    assert rows[0][:3] == (0.0, 0.0, 0.1)  # canonical mu_s, mu_l, alpha order


# ----------------------------------------------------------------------
# strategy comparison
# ----------------------------------------------------------------------
def test_strategies_tuned_dominates_fixed():
    rows = strategy_compare(two_point_spectrum(10.0), [0.0, 0.3, 0.6], 10)
    for r in rows:
        assert r.gamma_tuned <= r.gamma_fixed_zero + 1e-15
        assert r.gamma_tuned <= r.gamma_fixed_half + 1e-15
    assert rows[0].gamma_tuned < rows[0].gamma_fixed_zero  # momentum beats GD


def test_strategy_speedup_definition():
    rows = strategy_compare(two_point_spectrum(10.0), [0.0], 10)
    r = rows[0]
    assert r.speedup_vs_zero == pytest.approx(
        math.log(r.gamma_tuned) / math.log(r.gamma_fixed_zero)
    )
    assert r.proxy_tuned == pytest.approx(r.gamma_tuned**10)


# ----------------------------------------------------------------------
# efficiency metrics
# ----------------------------------------------------------------------
def test_efficiency_baseline_is_one():
    rows = efficiency_metrics([1], [0.9], 0.01)
    assert rows[0].hardware_efficiency == 1.0
    assert rows[0].statistical_efficiency == 1.0
    assert rows[0].time_proxy == 1.0


def test_efficiency_hardware_is_reciprocal():
    rows = efficiency_metrics([1, 4], [0.9, 0.9], 0.01)
    assert rows[1].hardware_efficiency == 0.25
    assert rows[1].statistical_efficiency == 1.0  # same gamma, no penalty


def test_efficiency_iterations_match_brute_force():
    gammas = [0.9, 0.93, 0.97]
    rows = efficiency_metrics([1, 2, 4], gammas, 0.01)
    for row, g in zip(rows, gammas):
        k = 1
        while g**k > 0.01:
            k += 1
        assert row.iterations == k


def test_efficiency_unstable_flagged():
    rows = efficiency_metrics([1, 2], [0.9, 1.0], 0.01)
    assert rows[1].unstable
    assert math.isinf(rows[1].iterations)


def test_efficiency_validation():
    with pytest.raises(DomainError):
        efficiency_metrics([2, 4], [0.9, 0.9], 0.01)  # missing baseline
    with pytest.raises(DomainError):
        efficiency_metrics([1], [0.9], 1.5)
    with pytest.raises(DomainError):
        efficiency_metrics([1], [0.9, 0.8], 0.01)
