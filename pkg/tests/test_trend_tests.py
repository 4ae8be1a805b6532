"""Space and time homogeneity tests, with closed-form and scipy oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from scedex import (
    NoExceedanceError,
    RangeError,
    SingularCovarianceError,
    bonferroni,
    k_sweep,
    kolmogorov_pvalue,
    space_test,
    space_test_from_estimates,
    time_test,
)
from scedex.trend_tests import ks_statistic_from_jumps

from conftest import make_panel


# ---------------------------------------------------------------------------
# Kolmogorov tail probabilities
# ---------------------------------------------------------------------------


def test_kolmogorov_pvalue_against_scipy():
    for d in (0.3, 0.5, 0.8, 1.0, 1.36, 2.0):
        assert kolmogorov_pvalue(d) == pytest.approx(float(special.kolmogorov(d)), abs=1e-12)


def test_kolmogorov_pvalue_near_critical_value():
    # 1.36 sits just above the 5% critical point of the Kolmogorov law
    assert kolmogorov_pvalue(1.36) == pytest.approx(0.049486, abs=1e-5)
    assert kolmogorov_pvalue(1.3581) == pytest.approx(0.05, abs=1e-4)


def test_kolmogorov_pvalue_edges():
    assert kolmogorov_pvalue(0.0) == 1.0
    assert kolmogorov_pvalue(10.0) == 0.0  # series underflows, clamped
    assert 0.0 <= kolmogorov_pvalue(0.02) <= 1.0  # tiny d: near-certain p
    with pytest.raises(RangeError):
        kolmogorov_pvalue(-0.1)


# ---------------------------------------------------------------------------
# space test
# ---------------------------------------------------------------------------


def test_space_statistic_hand_value():
    # shares (.6, .4) with diagonal joint matrix .5 I and k = 25:
    # D = (.5, -.5), centred covariance block [[.25]], statistic exactly 1
    res = space_test_from_estimates([0.6, 0.4], np.eye(2) * 0.5, k=25)
    assert res.statistic == pytest.approx(1.0, abs=1e-12)
    assert res.df == 1
    assert res.p_value == pytest.approx(float(stats.chi2.sf(1.0, 1)), abs=1e-12)


def test_space_statistic_three_stations():
    # equal shares: statistic is identically zero whatever the covariance
    res = space_test_from_estimates([1 / 3] * 3, np.eye(3) / 3, k=99)
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.df == 2


def test_space_test_balanced_panel(small_panel):
    res = space_test(small_panel, k=4)
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == 1.0
    assert res.df == 1
    assert res.extras["tie_count"] == 0


def test_space_test_duplicated_station_is_singular():
    col = np.array([10.0, 1, 11, 2, 12, 3, 13, 4])
    p = make_panel(np.column_stack([col, col]))
    with pytest.raises(SingularCovarianceError) as exc:
        space_test(p, k=4)
    assert (0, 1) in exc.value.suspects


def test_space_test_needs_two_stations():
    p = make_panel(np.arange(1.0, 9.0).reshape(-1, 1))
    with pytest.raises(RangeError):
        space_test(p, k=3)


def test_space_test_invariant_to_scale(small_panel):
    a = space_test(small_panel, k=4)
    b = space_test(make_panel(small_panel.values * 3.7), k=4)
    assert a.statistic == b.statistic
    assert a.p_value == b.p_value


# ---------------------------------------------------------------------------
# time test
# ---------------------------------------------------------------------------


def test_ks_statistic_hand_values():
    # single jump at 1/2: both one-sided deviations are 1/2
    assert ks_statistic_from_jumps(np.array([0.5])) == pytest.approx(0.5, abs=1e-15)
    # perfectly spread jumps (i - 1/2)/N: deviation 1/(2 sqrt(N))
    N = 25
    u = (np.arange(1, N + 1) - 0.5) / N
    assert ks_statistic_from_jumps(u) == pytest.approx(0.1, abs=1e-14)
    with pytest.raises(NoExceedanceError):
        ks_statistic_from_jumps(np.array([]))


def test_time_test_hand_value():
    # exceedances land on days 1, 3, 5, 7 of 8: u = (1, 3, 5, 7)/8,
    # both deviations equal 1/8, so the statistic is sqrt(4)/8 = 1/4
    p = make_panel(np.array([[10.0, 1, 11, 2, 12, 3, 13, 4]]).T)
    res = time_test(p, k=4, j=0)
    assert res.statistic == pytest.approx(0.25, abs=1e-12)
    assert res.station == 0
    assert res.extras["n_exceedances"] == 4
    assert res.p_value == pytest.approx(kolmogorov_pvalue(0.25), abs=1e-15)


def test_time_test_clustered_start():
    # all exceedances in the first quarter: strong deviation from uniformity
    vals = np.concatenate([[50.0, 60, 70, 80], np.linspace(1, 2, 12)])
    p = make_panel(vals.reshape(-1, 1))
    res = time_test(p, k=4, j=0)
    assert res.statistic == pytest.approx(np.sqrt(4) * (1 - 4 / 16), abs=1e-12)
    assert res.p_value == pytest.approx(kolmogorov_pvalue(1.5), abs=1e-15)
    assert res.p_value < 0.05


def test_time_test_no_exceedances():
    p = make_panel([[10.0, 0.1], [11.0, 0.2], [12.0, 0.3], [13.0, 0.4]])
    with pytest.raises(NoExceedanceError):
        time_test(p, k=3, j=1)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=80),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_ks_statistic_matches_scipy(n, seed):
    rng = np.random.default_rng(seed)
    u = np.sort(rng.uniform(1e-6, 1.0, size=n))
    want = stats.kstest(u, "uniform").statistic * np.sqrt(n)
    assert ks_statistic_from_jumps(u) == pytest.approx(want, abs=1e-10)


# ---------------------------------------------------------------------------
# multiple comparisons and sweeps
# ---------------------------------------------------------------------------


def test_bonferroni_divides_alpha():
    p = np.full(49, 0.5)
    p[7] = 1e-4
    res = bonferroni(p)
    assert res.corrected_level == pytest.approx(0.05 / 49, abs=1e-15)
    assert res.reject.sum() == 1
    assert bool(res.reject[7])


def test_bonferroni_validation():
    with pytest.raises(RangeError):
        bonferroni([])
    with pytest.raises(RangeError):
        bonferroni([0.5, 1.5])
    with pytest.raises(RangeError):
        bonferroni([0.5], alpha=0.0)


def test_k_sweep_space(small_panel):
    rows = k_sweep(small_panel, [2, 4, 6], which="space")
    assert [r.k for r in rows] == [2, 4, 6]
    assert all(r.error is None for r in rows)
    assert all(r.p_value is not None for r in rows)


def test_k_sweep_records_errors_and_continues():
    col = np.array([10.0, 1, 11, 2, 12, 3, 13, 4])
    p = make_panel(np.column_stack([col, col]))
    rows = k_sweep(p, [3, 4], which="space")
    assert all(r.statistic is None and r.error for r in rows)


def test_k_sweep_time_requires_station(small_panel):
    with pytest.raises(RangeError):
        k_sweep(small_panel, [4], which="time")
    rows = k_sweep(small_panel, [4], which="time", station=0)
    assert rows[0].error is None
    with pytest.raises(RangeError):
        k_sweep(small_panel, [4], which="sideways")
