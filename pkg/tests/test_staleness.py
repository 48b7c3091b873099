"""Staleness distribution: pmf values, moments, sampling, TV distance."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stale_momentum import DomainError, StalenessDistribution


def test_geometric_pmf_values():
    d = StalenessDistribution.geometric(0.5)
    assert d.pmf_value(0) == 0.5
    assert d.pmf_value(2) == 0.125


def test_geometric_zero_is_degenerate_at_zero():
    d = StalenessDistribution.geometric(0.0)
    assert d.pmf_value(0) == 1.0
    assert d.pmf_value(1) == 0.0
    assert d.pmf_value(5) == 0.0
    assert d.total_variation(StalenessDistribution.degenerate(0)) == 0.0


def test_geometric_domain():
    with pytest.raises(DomainError):
        StalenessDistribution.geometric(1.0)
    with pytest.raises(DomainError):
        StalenessDistribution.geometric(-0.1)


def test_from_worker_count():
    assert StalenessDistribution.from_worker_count(1).mu_s == 0.0
    assert StalenessDistribution.from_worker_count(2).mu_s == 0.5
    assert StalenessDistribution.from_worker_count(10).mu_s == pytest.approx(0.9)
    with pytest.raises(DomainError):
        StalenessDistribution.from_worker_count(0)


def test_mean_examples():
    assert StalenessDistribution.from_worker_count(4).mean() == 3.0
    assert StalenessDistribution.geometric(0.0).mean() == 0.0
    assert StalenessDistribution.empirical([0.5, 0.5]).mean() == 0.5


def test_worker_count_mean_exact_up_to_1000():
    for workers in range(1, 1001):
        d = StalenessDistribution.from_worker_count(workers)
        assert d.mean() == float(workers - 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.99))
def test_geometric_mass_is_one(mu_s):
    d = StalenessDistribution.geometric(mu_s)
    level = d.truncation_level
    total = d.pmf_array(level).sum() + d.tail_mass(level)
    assert abs(total - 1.0) < 1e-12
    # truncated tail itself is below the configured bound
    assert d.tail_mass(level) <= max(mu_s**level, 0.0) + 1e-300


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.95), st.integers(min_value=0, max_value=2**32))
def test_serialization_round_trip(mu_s, seed):
    d = StalenessDistribution.geometric(mu_s)
    back = StalenessDistribution.from_json(d.to_json())
    assert back.kind == "geometric" and back.mu_s == d.mu_s
    rng1, rng2 = np.random.default_rng(seed), np.random.default_rng(seed)
    assert np.array_equal(d.sample(rng1, 32), back.sample(rng2, 32))


def test_serialization_other_kinds():
    e = StalenessDistribution.empirical([0.25, 0.75])
    e2 = StalenessDistribution.from_json(e.to_json())
    assert np.allclose(e2.pmf, [0.25, 0.75])
    g = StalenessDistribution.degenerate(3)
    g2 = StalenessDistribution.from_json(g.to_json())
    assert g2.delay == 3


def test_empirical_validation():
    with pytest.raises(DomainError):
        StalenessDistribution.empirical([0.5, 0.6])
    with pytest.raises(DomainError):
        StalenessDistribution.empirical([-0.1, 1.1])
    with pytest.raises(DomainError):
        StalenessDistribution.empirical([])


def test_from_counts_keeps_raw_counts():
    d = StalenessDistribution.from_counts([3, 1])
    assert np.array_equal(d.counts, [3, 1])
    assert np.allclose(d.pmf, [0.75, 0.25])


def test_sampling_trivial_cases():
    rng = np.random.default_rng(0)
    assert StalenessDistribution.geometric(0.0).sample(rng, 100).max() == 0
    assert np.all(StalenessDistribution.degenerate(3).sample(rng, 100) == 3)


def test_sampling_geometric_mean_monte_carlo():
    # mean of Geom(0.5) is 1, variance 2; 3 sigma at one million draws
    rng = np.random.default_rng(123)
    samples = StalenessDistribution.geometric(0.5).sample(rng, 1_000_000)
    se = math.sqrt(2.0 / 1_000_000)
    assert abs(samples.mean() - 1.0) < 3 * se


@pytest.mark.parametrize("mu_s", [0.2, 0.5, 0.9])
def test_sampling_pmf_convergence(mu_s):
    d = StalenessDistribution.geometric(mu_s)
    rng = np.random.default_rng(7)
    counts = np.bincount(d.sample(rng, 1_000_000))
    emp = StalenessDistribution.from_counts(counts)
    assert emp.total_variation(d) < 0.01


def test_empirical_sampling_matches_pmf():
    d = StalenessDistribution.empirical([0.2, 0.0, 0.8])
    rng = np.random.default_rng(5)
    s = d.sample(rng, 200_000)
    assert not np.any(s == 1)
    assert abs((s == 0).mean() - 0.2) < 0.01


def test_total_variation_identity_and_symmetry():
    d1 = StalenessDistribution.geometric(0.5)
    d2 = StalenessDistribution.geometric(0.9)
    assert d1.total_variation(d1) == 0.0
    assert d1.total_variation(d2) == pytest.approx(d2.total_variation(d1))
    assert 0.0 <= d1.total_variation(d2) <= 1.0


def test_total_variation_direct_summation_oracle():
    # independent oracle: direct series summation to truncation 200
    l = np.arange(201)
    q1 = 0.5 * 0.5**l
    q2 = 0.1 * 0.9**l
    oracle = 0.5 * np.abs(q1 - q2).sum()  # = 0.6039999996825214
    d1 = StalenessDistribution.geometric(0.5)
    d2 = StalenessDistribution.geometric(0.9)
    assert d1.total_variation(d2) == pytest.approx(oracle, abs=1e-9)


def test_truncation_level_override():
    d = StalenessDistribution.geometric(0.5, truncation_level=200)
    assert d.support_bound() == 200
    with pytest.raises(DomainError):
        StalenessDistribution.geometric(0.5, truncation_level=0)
