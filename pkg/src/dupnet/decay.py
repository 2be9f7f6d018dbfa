"""Decay curve of a stable network on the time scale ``N t``.

``psi(t)`` is the limiting lost fraction ``X0(N t) / N``: the root in
``[0, beta)`` of ``(1 - y/beta)^(rho/2) exp(y + mu t) = 1``.  Around time
``N t`` the single-copy count is at equilibrium, geometric with ratio
``2 (beta - psi(t)) / rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _csv

__all__ = [
    "DecayCurve",
    "GeometricLaw",
    "psi",
    "psi_curve",
    "psi_ode",
    "t_of_delta",
    "local_equilibrium",
    "fixed_point_residual",
]


def _check_stable(beta, rho, mu):
    if not (beta > 0 and mu > 0):
        raise ValueError("beta and mu must be positive")
    if not rho > 2.0 * beta:
        raise ValueError(f"decay curve needs a stable network (rho > 2 beta), got rho={rho}, beta={beta}")


def fixed_point_residual(beta, rho, mu, t, y):
    """``(1 - y/beta)^(rho/2) exp(y + mu t) - 1``."""
    return math.expm1(0.5 * rho * math.log1p(-y / beta) + y + mu * t)


def psi(beta, rho, mu, t, tol=1e-13):
    """Root of the decay equation by bisection.

    The search runs on ``u = -log(1 - y/beta)``, where the equation reads
    ``g(u) = beta (1 - e^-u) + mu t - rho u / 2 = 0``.  ``g`` is strictly
    decreasing for ``rho > 2 beta``, ``g(0) = mu t`` and
    ``g(2 (beta + mu t) / rho) < 0``, so the bracket is explicit and the
    root stays resolvable as ``y`` approaches ``beta``.
    """
    _check_stable(beta, rho, mu)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if t == 0:
        return 0.0
    half = 0.5 * rho

    def g(u):
        return -beta * math.expm1(-u) + mu * t - half * u

    lo, hi = 0.0, 2.0 * (beta + mu * t) / rho
    while True:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= tol or mid in (lo, hi):
            break
        if gm > 0:
            lo = mid
        else:
            hi = mid
    return -beta * math.expm1(-mid)


@dataclass(frozen=True, eq=False)
class DecayCurve:
    step: float
    values: np.ndarray
    residuals: np.ndarray
    beta: float
    rho: float
    mu: float

    @property
    def times(self):
        return self.step * np.arange(self.values.shape[0])

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "psi", "residual"),
                          zip(self.times.tolist(), self.values.tolist(), self.residuals.tolist()))


def _grid(horizon, h):
    if not (horizon >= 0 and h > 0):
        raise ValueError("need horizon >= 0 and h > 0")
    return int(round(horizon / h)) + 1


def psi_curve(beta, rho, mu, horizon, h, tol=1e-13):
    n = _grid(horizon, h)
    t = h * np.arange(n)
    vals = np.array([psi(beta, rho, mu, ti, tol) for ti in t])
    res = np.array([fixed_point_residual(beta, rho, mu, ti, yi) for ti, yi in zip(t, vals)])
    return DecayCurve(h, vals, res, beta, rho, mu)


def psi_ode(beta, rho, mu, horizon, h):
    """RK4 solution of ``psi' = 2 mu^2 (beta - psi) / (lam - 2 mu (beta - psi))``, ``psi(0) = 0``."""
    _check_stable(beta, rho, mu)
    lam = rho * mu

    def rate(y):
        free = beta - y
        den = lam - 2.0 * mu * free
        if den <= 0:
            raise ArithmeticError("nonpositive denominator in the decay rate")
        return 2.0 * mu * mu * free / den

    n = _grid(horizon, h)
    out = np.zeros(n)
    y = 0.0
    for k in range(1, n):
        k1 = rate(y)
        k2 = rate(y + 0.5 * h * k1)
        k3 = rate(y + 0.5 * h * k2)
        k4 = rate(y + h * k3)
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k] = y
    res = np.array([fixed_point_residual(beta, rho, mu, h * k, out[k]) for k in range(n)])
    return DecayCurve(h, out, res, beta, rho, mu)


def t_of_delta(beta, rho, mu, delta):
    """Limit of ``T_N(delta) / N``: ``(-(rho/2) log(1 - delta) - delta beta) / mu``."""
    _check_stable(beta, rho, mu)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    return (-0.5 * rho * math.log1p(-delta) - delta * beta) / mu


@dataclass(frozen=True)
class GeometricLaw:
    """``P(k) = (1 - ratio) ratio^k`` on ``k = 0, 1, 2, ...``."""

    ratio: float

    def __post_init__(self):
        if not 0.0 <= self.ratio < 1.0:
            raise ValueError("ratio must lie in [0, 1)")

    def pmf(self, k):
        k = np.asarray(k)
        return np.where(k >= 0, (1.0 - self.ratio) * self.ratio ** np.maximum(k, 0), 0.0)

    def sf(self, k):
        """``P(X >= k)``."""
        return self.ratio ** np.maximum(np.asarray(k), 0)

    @property
    def mean(self):
        return self.ratio / (1.0 - self.ratio)

    @property
    def var(self):
        return self.ratio / (1.0 - self.ratio) ** 2

    def sample(self, rng, size=None):
        if self.ratio == 0.0:
            return np.zeros(size, dtype=np.int64) if size is not None else 0
        # numpy's geometric counts trials, starting at 1
        return rng.geometric(1.0 - self.ratio, size=size) - 1


def local_equilibrium(beta, rho, mu, t):
    """Equilibrium law of the single-copy count around time ``N t``."""
    return GeometricLaw(2.0 * (beta - psi(beta, rho, mu, t)) / rho)
