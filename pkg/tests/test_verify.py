"""Verification suites: identities hold, negative controls fail."""

import json

import numpy as np
import pytest

from stale_momentum import (
    DomainError,
    QuadraticObjective,
    StalenessDistribution,
    expected_iterates_exact,
    verify_theorem1,
    verify_theorem2,
    verify_theorem3,
    verify_theorem4,
)
from stale_momentum.verify import theorem2_gaps

ONE_D = QuadraticObjective.from_spectrum([1.0])
TEN_D = QuadraticObjective.from_spectrum(np.arange(1.0, 11.0))


def test_theorem1_degenerate_zero_is_exact_gd_identity():
    report = verify_theorem1(ONE_D, 0.1, StalenessDistribution.degenerate(0), 50)
    assert report.passed
    assert report.max_discrepancy < 1e-15  # zero up to float evaluation order


def test_theorem1_two_point_pmf():
    report = verify_theorem1(
        ONE_D, 0.1, StalenessDistribution.empirical([0.5, 0.5]), 100
    )
    assert report.passed
    assert report.max_discrepancy < 1e-10
    assert report.steps[0] == 2


def test_theorem1_geometric_truncation_limited():
    report = verify_theorem1(ONE_D, 0.1, StalenessDistribution.geometric(0.5), 100)
    assert report.passed
    assert report.max_discrepancy < 1e-9
    assert report.extra["tail_mass"] <= 0.5**40


def test_theorem2_no_staleness_is_gd():
    report = verify_theorem2(ONE_D, 0.1, 0.0, 50)
    assert report.passed
    assert report.max_discrepancy < 1e-14


def test_theorem2_exact_mode():
    report = verify_theorem2(ONE_D, 0.1, 0.5, 100)
    assert report.passed
    assert report.max_discrepancy < 1e-9


def test_theorem2_monte_carlo_mode():
    report = verify_theorem2(
        ONE_D, 0.1, 0.5, 50, mc_runs=4000, noise_sigma=0.01, seed=42
    )
    assert report.passed
    mc = report.extra["monte_carlo"]
    assert mc["within_band"] and mc["runs"] == 4000


def test_theorem2_negative_control_wrong_mu_s():
    # the identity checked with mu_s off by 0.1 must blow far past tolerance
    traj = expected_iterates_exact(
        ONE_D, 0.1, 0.0, StalenessDistribution.geometric(0.5), 100, np.ones(1)
    )
    report = verify_theorem2(ONE_D, 0.1, 0.5, 100)
    _, wrong = theorem2_gaps(traj, ONE_D, 0.1, 0.6, 2)
    assert max(wrong) > 10 * report.tolerance


def test_theorem3_two_workers_pass():
    report = verify_theorem3(2, num_writes=100_000, seed=2028)
    assert report.passed
    assert report.extra["chi2_p_value"] > 1e-3
    assert report.extra["mean_ok"]


def test_theorem3_single_worker_trivial():
    report = verify_theorem3(1, num_writes=20_000, seed=0)
    assert report.passed
    assert report.extra["mu_s_hat"] == 0.0


def test_theorem3_constant_work_fails_fit():
    report = verify_theorem3(4, num_writes=100_000, seed=2030, work="constant")
    assert report.status == "fail"
    assert not report.extra["fit_ok"]
    assert report.extra["mean_ok"]  # the mean alone cannot tell them apart


def test_theorem3_inconclusive_with_few_samples():
    report = verify_theorem3(2, num_writes=500, seed=1)
    assert report.status == "inconclusive"
    assert report.exit_code == 2


def test_theorem4_mu_l_zero_reduces_to_theorem2():
    r4 = verify_theorem4(ONE_D, 0.1, 0.5, 0.0, 100)
    r2 = verify_theorem2(ONE_D, 0.1, 0.5, 100)
    assert r4.passed
    assert np.allclose(r4.discrepancy, r2.discrepancy, atol=1e-15)


def test_theorem4_mu_s_zero_heavy_ball_exact():
    report = verify_theorem4(ONE_D, 0.1, 0.0, 0.4, 100)
    assert report.passed
    assert report.max_discrepancy < 1e-12


def test_theorem4_combined_momenta():
    report = verify_theorem4(ONE_D, 0.1, 0.5, 0.3, 50)
    assert report.passed
    assert report.max_discrepancy < 1e-9
    assert report.extra["max_identity_gap"] < 1e-9
    assert report.extra["max_recurrence_gap"] < 1e-9


def test_theorem4_multidimensional():
    report = verify_theorem4(TEN_D, 0.005, 0.75, -0.5, 200)
    assert report.passed


def test_reports_are_reproducible():
    a = verify_theorem4(ONE_D, 0.1, 0.5, 0.3, 60).to_dict()
    b = verify_theorem4(ONE_D, 0.1, 0.5, 0.3, 60).to_dict()
    assert a == b
    c = verify_theorem3(2, num_writes=20_000, seed=5).to_dict()
    d = verify_theorem3(2, num_writes=20_000, seed=5).to_dict()
    assert c == d


def test_report_serializes_to_json():
    report = verify_theorem2(ONE_D, 0.1, 0.25, 50)
    payload = json.loads(report.to_json())
    assert payload["theorem"] == 2
    assert payload["status"] == "pass"
    assert payload["parameters"]["mu_s"] == 0.25
    assert len(payload["discrepancy"]) == len(payload["steps"])


def test_exit_codes():
    assert verify_theorem2(ONE_D, 0.1, 0.5, 50).exit_code == 0
    assert verify_theorem3(4, num_writes=50_000, seed=3, work="constant").exit_code == 1


def test_domain_validation():
    with pytest.raises(DomainError):
        verify_theorem2(ONE_D, 0.1, 1.0, 50)
    with pytest.raises(DomainError):
        verify_theorem2(ONE_D, 0.1, 0.5, 1)  # horizon below burn-in
    with pytest.raises(DomainError):
        verify_theorem4(ONE_D, -0.1, 0.5, 0.0, 50)
