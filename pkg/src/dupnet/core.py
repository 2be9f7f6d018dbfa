"""Model parameters, states and jump rates of the duplicated-file network.

Files live with two copies, one copy, or none (lost). The Markov process
tracks ``(x0, x1)``, the lost and single-copy counts; ``x2`` is implied by
``f_n - x0 - x1``.  ``(f_n, 0)`` is absorbing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "ModelParams",
    "NetworkState",
    "Regime",
    "classify_regime",
    "transition_rates",
    "AbsorbedError",
]


class AbsorbedError(ValueError):
    """Raised when a transition is requested from the absorbing state."""


@dataclass(frozen=True)
class ModelParams:
    """Rates and sizes of one network.

    lam : duplication bandwidth per unit of scale (total bandwidth ``lam * n``)
    mu : failure rate of a single copy
    n : scale parameter
    f_n : number of files
    """

    lam: float
    mu: float
    n: int
    f_n: int

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be a finite positive number, got {self.lam!r}")
        if not (isinstance(self.mu, (int, float)) and math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be a finite positive number, got {self.mu!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if isinstance(self.f_n, bool) or int(self.f_n) != self.f_n or self.f_n < 1:
            raise ValueError(f"f_n must be a positive integer, got {self.f_n!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "f_n", int(self.f_n))

    @classmethod
    def from_beta(cls, lam, mu, n, beta):
        """Build with ``f_n = floor(beta * n)``."""
        if not beta > 0:
            raise ValueError(f"beta must be positive, got {beta!r}")
        # the epsilon absorbs representation error such as 0.29 * 100 = 28.999...
        return cls(lam, mu, n, math.floor(beta * n + 1e-9))

    @classmethod
    def critical(cls, mu, n, f_n):
        """Preset sitting exactly on the critical line ``lam = 2 mu f_n / n``."""
        return cls(2.0 * mu * f_n / n, mu, n, f_n)

    @property
    def beta(self):
        return self.f_n / self.n

    @property
    def rho(self):
        return self.lam / self.mu

    @property
    def dup_rate(self):
        """Total duplication rate ``lam * n`` available while a one-copy file exists."""
        return self.lam * self.n

    @property
    def gamma(self):
        """Centering constant ``(f_n - n rho / 2) / sqrt(n)`` of the critical scaling."""
        return (self.f_n - self.n * self.rho / 2.0) / math.sqrt(self.n)

    @property
    def loss_rate(self):
        """Limiting loss rate ``2 mu beta / (rho - 2 beta)`` on the normal time scale.

        Only meaningful in the stable regime; infinite otherwise.
        """
        gap = self.rho - 2.0 * self.beta
        return 2.0 * self.mu * self.beta / gap if gap > 0 else math.inf

    def regime(self, tol=0.0):
        return classify_regime(self, tol)

    def contains(self, state):
        x0, x1 = state
        return x0 >= 0 and x1 >= 0 and x0 + x1 <= self.f_n

    @property
    def absorbing(self):
        return NetworkState(self.f_n, 0)


class NetworkState(tuple):
    """Immutable ``(x0, x1)`` pair of lost and single-copy file counts."""

    __slots__ = ()

    def __new__(cls, x0=0, x1=0):
        if int(x0) != x0 or int(x1) != x1 or x0 < 0 or x1 < 0:
            raise ValueError(f"state components must be nonnegative integers, got {(x0, x1)!r}")
        return super().__new__(cls, (int(x0), int(x1)))

    @property
    def x0(self):
        return self[0]

    @property
    def x1(self):
        return self[1]

    def x2(self, params):
        """Number of files still holding two copies."""
        return params.f_n - self[0] - self[1]

    def __repr__(self):
        return f"NetworkState(x0={self[0]}, x1={self[1]})"


class Regime(str, enum.Enum):
    OVERLOADED = "overloaded"
    CRITICAL = "critical"
    STABLE = "stable"


def classify_regime(params, tol=0.0):
    """Compare ``rho`` with ``2 beta``.

    Values within ``tol`` (plus a few ulps, so that the critical preset is
    recognised despite rounding in ``lam / mu``) are critical.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    rho, two_beta = params.rho, 2.0 * params.beta
    band = tol + 4.0 * math.ulp(max(rho, two_beta))
    if rho < two_beta - band:
        return Regime.OVERLOADED
    if rho > two_beta + band:
        return Regime.STABLE
    return Regime.CRITICAL


def transition_rates(params, state):
    """Rates ``(up, dup, loss)`` out of ``state``.

    up   : a two-copy file loses a copy, ``x1 + 1``
    dup  : a one-copy file is duplicated, ``x1 - 1``
    loss : a one-copy file loses its last copy, ``x0 + 1, x1 - 1``
    """
    x0, x1 = state
    if not params.contains(state):
        raise ValueError(f"state {tuple(state)} is outside the state space of f_n={params.f_n}")
    r_up = 2.0 * params.mu * (params.f_n - x0 - x1)
    r_dup = params.dup_rate if x1 > 0 else 0.0
    r_loss = params.mu * x1
    return r_up, r_dup, r_loss
