import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import special, stats as sps

from dupnet import (EmpiricalDist, GridPath, Kind, ModelParams, Mm1Params, NetworkState, TestReport,
                    Trajectory, chi2_cdf, chi2_quantile, chi_square_geometric, dispersion_index,
                    empirical_marginal, gammainc_lower, ks_critical, ks_exponential, mean_ci,
                    poisson_loss_check, replica_seeds, reports_csv, simulate, simulate_mm1, sup_deviation)


def loss_stream(times, horizon):
    """A trajectory made only of loss events at ``times``; enough for the loss checks."""
    times = np.asarray(times, dtype=float)
    n = times.shape[0]
    p = ModelParams(1.0, 1.0, 1, n + 1)
    return Trajectory(p, 0, NetworkState(0, n + 1), times, np.full(n, int(Kind.LOSS), dtype=np.int8),
                      np.arange(1, n + 1), np.arange(n, 0, -1), False, float(horizon))


@given(st.floats(0.05, 200), st.floats(0, 400))
def test_incomplete_gamma_against_scipy(a, x):
    assert gammainc_lower(a, x) == pytest.approx(special.gammainc(a, x), abs=1e-12)


@pytest.mark.parametrize("df", [1, 2, 3, 7, 20, 100])
@pytest.mark.parametrize("p", [0.5, 0.95, 0.99, 0.999])
def test_chi2_quantile_against_scipy(df, p):
    q = chi2_quantile(p, df)
    assert q == pytest.approx(sps.chi2.ppf(p, df), rel=1e-8)
    assert chi2_cdf(q, df) == pytest.approx(p, abs=1e-12)


def test_chi2_quantile_domain():
    with pytest.raises(ValueError):
        chi2_quantile(1.0, 3)


def test_empirical_dist():
    d = EmpiricalDist.from_values([0, 2, 2, 5])
    assert d.total == 4 and d.counts == {0: 1, 2: 2, 5: 1}
    assert d.mean == 2.25
    assert d.frequencies().tolist() == [1, 0, 2, 0, 0, 1]
    with pytest.raises(ValueError):
        EmpiricalDist({1: 2}, 3)


def test_geometric_null_pass_rate():
    rng = np.random.default_rng(0)
    alpha = 0.01
    passes = 0
    for _ in range(300):
        d = EmpiricalDist.from_values(rng.geometric(0.5, 10_000) - 1)
        passes += chi_square_geometric(d, 0.5, alpha).passed
    assert passes / 300 >= 1 - 2 * alpha


def test_geometric_statistic_against_scipy():
    d = EmpiricalDist.from_values(np.random.default_rng(1).geometric(0.6, 2000) - 1)
    rep = chi_square_geometric(d, 0.4)
    # rebuild the same cells independently
    n, r = d.total, 0.4
    k = int(math.floor(math.log(5 / (n * (1 - r))) / math.log(r))) + 1
    e = [n * (1 - r) * r**j for j in range(k)] + [n * r**k]
    o = [d.counts.get(j, 0) for j in range(k)] + [n - sum(d.counts.get(j, 0) for j in range(k))]
    if e[-1] < 5:
        e[-2] += e.pop()
        o[-2] += o.pop()
    assert rep.statistic == pytest.approx(sps.chisquare(o, e).statistic)
    assert rep.threshold == pytest.approx(sps.chi2.ppf(0.99, len(e) - 1))


def test_geometric_power():
    d = EmpiricalDist.from_values(np.random.default_rng(2).geometric(0.5, 10_000) - 1)
    assert not chi_square_geometric(d, 0.8).passed


def test_geometric_degenerate():
    assert chi_square_geometric(EmpiricalDist.from_values([0] * 50), 0.0).passed
    assert not chi_square_geometric(EmpiricalDist.from_values([0] * 49 + [1]), 0.0).passed
    with pytest.raises(ValueError):
        chi_square_geometric(EmpiricalDist.from_values([0, 1, 0]), 0.5)


def test_marginal_of_one_trajectory_is_point_mass():
    tr = simulate(ModelParams(4.0, 1.0, 50, 50), horizon=2.0, seed=1)
    d = empirical_marginal([tr], 1.0)
    assert d.total == 1 and len(d.counts) == 1
    with pytest.raises(ValueError):
        empirical_marginal([], 1.0)


def test_stationary_queue_marginal_is_geometric():
    values = [simulate_mm1(Mm1Params(1.0, 2.0), 0, 30.0, seed=s).value_at(30.0)
              for s in replica_seeds(4, 3000)]
    assert chi_square_geometric(EmpiricalDist.from_values(values), 0.5).passed


def test_ks_statistic_against_scipy():
    x = np.random.default_rng(3).exponential(0.5, 300)
    assert ks_exponential(x, 2.0) == pytest.approx(sps.kstest(x, "expon", args=(0, 0.5)).statistic)


def test_ks_critical_value():
    # leading term of the Kolmogorov distribution tail
    assert ks_critical(100, 0.05) == pytest.approx(math.sqrt(-0.5 * math.log(0.025)) / 10)
    assert ks_critical(400, 0.01) * 20 == pytest.approx(sps.kstwobign.isf(0.01), rel=1e-3)


def test_dispersion_index_by_hand():
    # counts 2, 0, 1, 1 over four subwindows: mean 1, sample variance 2/3
    assert dispersion_index([0.1, 0.2, 2.5, 3.5], (0, 4), 4) == pytest.approx(2 / 3)


def test_poisson_check_on_long_poisson_streams():
    alpha = 0.01
    passes = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        times = np.cumsum(rng.exponential(1.0, 6000))
        passes += poisson_loss_check(loss_stream(times, times[-1]), (2.0, 5000.0), alpha).passed
    assert passes >= 97


def test_poisson_check_rejects_regular_stream():
    rep = poisson_loss_check(loss_stream(np.arange(1, 101) + 0.5, 101.0), (1.0, 100.0))
    assert not rep.passed
    disp = rep.parts[0]
    assert disp.statistic == pytest.approx(0.0, abs=0.05) and not disp.passed


def test_poisson_check_needs_events():
    with pytest.raises(ValueError, match="20"):
        poisson_loss_check(loss_stream(np.arange(1, 11), 11.0), (0.5, 10.5))
    with pytest.raises(ValueError):
        poisson_loss_check(loss_stream(np.arange(1, 40), 40.0), (2.0, 50.0))


def test_sup_deviation_examples():
    a = GridPath(0.1, [0.0, 1.0, 2.0])
    assert sup_deviation(a, a) == 0.0
    assert sup_deviation(a, GridPath(0.1, a.values - 0.25)) == 0.25
    with pytest.raises(ValueError):
        sup_deviation(a, GridPath(0.2, a.values))
    with pytest.raises(ValueError):
        sup_deviation([0.0, 1.0], [0.0, 1.0, 2.0])


vectors = arrays(np.float64, 8, elements=st.floats(-1e6, 1e6))


@given(vectors, vectors, vectors)
def test_sup_deviation_is_a_metric(a, b, c):
    dab = sup_deviation(a, b)
    assert dab == sup_deviation(b, a)
    assert (dab == 0) == np.array_equal(a, b)
    assert sup_deviation(a, c) <= dab + sup_deviation(b, c) + 1e-9 * (1 + dab)


def test_mean_ci_examples():
    assert mean_ci([3.0, 3.0, 3.0]) == (3.0, 0.0)
    m, hw = mean_ci([0.0, 1.0])
    assert m == 0.5 and hw == pytest.approx(1.96 * math.sqrt(0.5) / math.sqrt(2))
    m, hw = mean_ci(np.random.default_rng(5).standard_normal(10_000))
    assert abs(m) < 0.03 and hw == pytest.approx(0.0196, rel=0.05)
    with pytest.raises(ValueError):
        mean_ci([1.0])


def test_report_rendering():
    inner = TestReport("ks", 0.1, 0.2, True)
    outer = TestReport("combined", 0.0, 0.0, True, "note", parts=(inner,))
    assert str(inner) == "[PASS] ks: statistic=0.1 threshold=0.2"
    assert list(outer.lines())[1].strip().startswith("[PASS] ks")
    assert reports_csv([outer]) == "name,statistic,threshold,pass\ncombined,0.0,0.0,true\nks,0.1,0.2,true\n"
