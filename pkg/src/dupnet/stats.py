"""Estimators and goodness-of-fit checks for the Monte Carlo ensembles.

The chi-square quantile is computed here from the regularized incomplete
gamma function (series / continued fraction), so the verification path
needs nothing beyond numpy.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import _csv
from .ctmc import sample_at
from .skorokhod import GridPath

__all__ = [
    "EmpiricalDist",
    "TestReport",
    "empirical_marginal",
    "gammainc_lower",
    "chi2_cdf",
    "chi2_quantile",
    "chi_square_geometric",
    "ks_exponential",
    "ks_critical",
    "dispersion_index",
    "poisson_loss_check",
    "loss_rate",
    "sup_deviation",
    "mean_ci",
    "reports_csv",
]


@dataclass(frozen=True)
class EmpiricalDist:
    counts: dict
    total: int

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise ValueError("total must equal the sum of counts")

    @classmethod
    def from_values(cls, values):
        c = Counter(int(v) for v in np.asarray(values).ravel())
        if any(k < 0 for k in c):
            raise ValueError("values must be nonnegative integers")
        return cls(dict(sorted(c.items())), sum(c.values()))

    def frequencies(self, size=None):
        size = size if size is not None else max(self.counts, default=-1) + 1
        out = np.zeros(size)
        for k, v in self.counts.items():
            if k < size:
                out[k] = v
        return out

    @property
    def mean(self):
        return sum(k * v for k, v in self.counts.items()) / self.total


@dataclass(frozen=True)
class TestReport:
    """Outcome of one check; ``passed`` means the statistic fell in the acceptance region."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    passed: bool
    description: str = ""
    parts: tuple = field(default=())

    def __str__(self):
        flag = "PASS" if self.passed else "FAIL"
        text = f"[{flag}] {self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g}"
        if self.description:
            text += f"  ({self.description})"
        return text

    def lines(self):
        yield str(self)
        for p in self.parts:
            for line in p.lines():
                yield "    " + line


def reports_csv(reports, path=None):
    """Columns ``name, statistic, threshold, pass``; sub-reports are flattened."""

    def flat(rs):
        for r in rs:
            yield r
            yield from flat(r.parts)

    rows = ((r.name, float(r.statistic), float(r.threshold), r.passed) for r in flat(reports))
    return _csv.write(path, ("name", "statistic", "threshold", "pass"), rows)


def empirical_marginal(trajectories, t):
    """Histogram of ``x1`` at time ``t`` across replicas."""
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("need at least one trajectory")
    return EmpiricalDist.from_values([sample_at(tr, t).x1 for tr in trajectories])


# regularized lower incomplete gamma P(a, x)

def _gamma_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_lower(a, x):
    """Regularized ``P(a, x) = gamma(a, x) / Gamma(a)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def chi2_cdf(x, df):
    return gammainc_lower(0.5 * df, 0.5 * x)


def chi2_quantile(p, df):
    """Inverse of :func:`chi2_cdf` by bracketing and bisection (relative accuracy ~1e-12)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, max(1.0, float(df))
    while chi2_cdf(hi, df) < p:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


def chi_square_geometric(d, r, alpha_level=0.01):
    """Pearson test of ``d`` against ``P(k) = (1 - r) r^k``.

    Cells ``0..K-1`` are kept while their expected count is at least 5; the
    rest form a tail cell ``k >= K`` (folded into the last cell if its own
    expectation is below 5).  The ratio is treated as known.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    n = d.total
    if r == 0.0:
        misfit = n - d.counts.get(0, 0)
        return TestReport("chi2-geometric", float(misfit), 0.0, misfit == 0,
                          f"degenerate law at 0, n={n}")
    expected = []
    k = 0
    while n * (1.0 - r) * r**k >= 5.0:
        expected.append(n * (1.0 - r) * r**k)
        k += 1
    tail = n * r**k
    observed = [d.counts.get(j, 0) for j in range(k)]
    obs_tail = n - sum(observed)
    if tail < 5.0 and expected:
        expected[-1] += tail
        observed[-1] += obs_tail
    else:
        expected.append(tail)
        observed.append(obs_tail)
    if len(expected) < 2:
        raise ValueError(f"too few observations for a chi-square test (n={n}, r={r})")
    e = np.array(expected)
    o = np.array(observed, dtype=float)
    stat = float(np.sum((o - e) ** 2 / e))
    df = len(e) - 1
    crit = chi2_quantile(1.0 - alpha_level, df)
    return TestReport("chi2-geometric", stat, crit, stat <= crit,
                      f"r={r:g}, n={n}, cells={len(e)}, alpha={alpha_level:g}")


def ks_critical(n, alpha_level):
    """Asymptotic one-sample Kolmogorov-Smirnov critical value."""
    return math.sqrt(-0.5 * math.log(alpha_level / 2.0)) / math.sqrt(n)


def ks_exponential(samples, rate):
    """Kolmogorov-Smirnov distance between ``samples`` and Exponential(``rate``)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.shape[0]
    cdf = -np.expm1(-rate * x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


def dispersion_index(event_times, window, n_sub):
    """Variance-to-mean ratio of event counts over ``n_sub`` equal subwindows."""
    t1, t2 = window
    counts, _ = np.histogram(event_times, bins=n_sub, range=(t1, t2))
    m = counts.mean()
    if m == 0:
        return math.nan
    return float(counts.var(ddof=1) / m)


def loss_rate(tr, window):
    """Number of losses in ``window`` divided by its length."""
    t1, t2 = window
    lt = tr.loss_times()
    return float(np.count_nonzero((lt > t1) & (lt <= t2))) / (t2 - t1)


def poisson_loss_check(tr, window, alpha_level=0.01, band=(0.85, 1.15), n_sub=None):
    """Check that the loss times of ``tr`` inside ``window`` look Poisson.

    (a) dispersion index over ``n_sub`` equal subwindows (default: one per
    observed loss, i.e. about one expected event per subwindow) must lie in
    ``band``; (b) the gaps between successive losses must pass a
    Kolmogorov-Smirnov test against Exponential(estimated rate).
    """
    t1, t2 = window
    if not 0 <= t1 < t2 or (t2 > tr.horizon and not tr.absorbed):
        raise ValueError("window must satisfy 0 <= t1 < t2 <= horizon")
    lt = tr.loss_times()
    lt = lt[(lt > t1) & (lt <= t2)]
    count = lt.shape[0]
    if count < 20:
        raise ValueError(f"only {count} losses in window {window}; need at least 20")
    rate = count / (t2 - t1)
    n_sub = n_sub or count
    di = dispersion_index(lt, window, n_sub)
    disp = TestReport("dispersion-index", di, band[1], band[0] <= di <= band[1],
                      f"band [{band[0]:g}, {band[1]:g}], {n_sub} subwindows")
    gaps = np.diff(lt)
    dks = ks_exponential(gaps, rate)
    crit = ks_critical(gaps.shape[0], alpha_level)
    ks = TestReport("ks-exponential-gaps", dks, crit, dks <= crit,
                    f"{gaps.shape[0]} gaps, alpha={alpha_level:g}")
    failed = sum(not p.passed for p in (disp, ks))
    return TestReport("poisson-losses", float(failed), 0.0, failed == 0,
                      f"{count} losses, estimated rate {rate:.4g}", parts=(disp, ks))


def sup_deviation(a, b):
    """``max_k |a_k - b_k|`` for two paths on the same grid."""
    if isinstance(a, GridPath) and isinstance(b, GridPath):
        if not a.same_grid(b):
            raise ValueError("paths live on different grids")
        a, b = a.values, b.values
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paths live on different grids")
    return float(np.max(np.abs(a - b)))


def mean_ci(samples, level=0.95):
    """Sample mean and normal-approximation half-width ``z s / sqrt(n)``."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two samples")
    if np.all(x == x[0]):
        return float(x[0]), 0.0
    z = 1.96 if level == 0.95 else statistics.NormalDist().inv_cdf(0.5 + level / 2.0)
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(n))
