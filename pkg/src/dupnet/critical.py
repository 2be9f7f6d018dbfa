"""Reflected integro-differential SDE describing the critical regime.

    dY = sqrt(2 lam) dB + mu (2 gamma - 3 Y - 2 mu S) dt,   S(t) = int_0^t Y,

with ``Y`` kept nonnegative by reflection at 0.  ``(mu S, Y)`` is the limit
of ``(X0, X1) / sqrt(N)`` when ``lam = 2 mu beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _csv
from .ctmc import replica_seeds
from .skorokhod import GridPath, _n_points

__all__ = [
    "CriticalParams",
    "ReflectedPath",
    "EnsembleMoments",
    "simulate_reflected_sde",
    "ensemble_moments",
]

_BLOCK = 1000


@dataclass(frozen=True)
class CriticalParams:
    lam: float
    mu: float
    gamma: float = 0.0
    y: float = 0.0

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("lambda and mu must be positive")
        if not self.y >= 0:
            raise ValueError("initial value y must be nonnegative")

    @classmethod
    def from_model(cls, params, y=0.0):
        """Take ``lam``, ``mu`` and the centering ``gamma`` of a network."""
        return cls(params.lam, params.mu, params.gamma, y)

    def drift(self, y, s):
        return self.mu * (2.0 * self.gamma - 3.0 * y - 2.0 * self.mu * s)


@dataclass(frozen=True, eq=False)
class ReflectedPath:
    y: GridPath
    s: GridPath

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "y", "s"),
                          zip(self.y.times.tolist(), self.y.values.tolist(), self.s.values.tolist()))


def _euler(p, n_steps, h, noise, n_paths):
    """Projected Euler over ``n_paths`` paths at once.

    ``noise`` is ``(n_paths, n_steps)`` standard normals or None.  Yields
    ``(Y, S)`` at each grid point, starting with the initial values.
    """
    y = np.full(n_paths, float(p.y))
    s = np.zeros(n_paths)
    kick = math.sqrt(2.0 * p.lam * h)
    yield y, s
    for k in range(n_steps):
        y_next = y + h * p.drift(y, s)
        if noise is not None:
            y_next += kick * noise[:, k]
        np.maximum(y_next, 0.0, out=y_next)
        s = s + 0.5 * h * (y + y_next)
        y = y_next
        yield y, s


def simulate_reflected_sde(p, horizon, h, seed=0, noise_mode="normal"):
    """One path of the projected Euler scheme

        Y_{k+1} = max(0, Y_k + drift(Y_k, S_k) h + sqrt(2 lam h) xi_k)

    with ``S`` advanced by the trapezoid rule.  ``noise_mode="zero"``
    drops the Brownian term.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if noise_mode not in ("normal", "zero"):
        raise ValueError(f"noise_mode must be 'normal' or 'zero', got {noise_mode!r}")
    n_steps = _n_points(h, horizon) - 1
    noise = None
    if noise_mode == "normal":
        noise = np.random.default_rng(seed).standard_normal(n_steps)[None, :]
    ys = np.empty(n_steps + 1)
    ss = np.empty(n_steps + 1)
    for k, (y, s) in enumerate(_euler(p, n_steps, h, noise, 1)):
        ys[k] = y[0]
        ss[k] = s[0]
    return ReflectedPath(GridPath(h, ys), GridPath(h, ss))


@dataclass(frozen=True, eq=False)
class EnsembleMoments:
    """Pointwise ensemble statistics; ``x0`` columns refer to ``mu * S``."""

    step: float
    n_paths: int
    mean_y: np.ndarray
    var_y: np.ndarray
    mean_x0: np.ndarray
    var_x0: np.ndarray

    @property
    def times(self):
        return self.step * np.arange(self.mean_y.shape[0])

    @property
    def se_y(self):
        return np.sqrt(self.var_y / self.n_paths)

    @property
    def se_x0(self):
        return np.sqrt(self.var_x0 / self.n_paths)

    def at(self, t):
        k = int(round(t / self.step))
        return {"mean_y": float(self.mean_y[k]), "se_y": float(self.se_y[k]),
                "mean_x0": float(self.mean_x0[k]), "se_x0": float(self.se_x0[k])}

    def to_csv(self, path=None):
        cols = (self.times, self.mean_y, self.var_y, self.mean_x0, self.se_y, self.se_x0)
        return _csv.write(path, ("t", "mean_Y", "var_Y", "mean_x0_scaled", "se_Y", "se_x0_scaled"),
                          zip(*(c.tolist() for c in cols)))


def ensemble_moments(p, horizon, h, n_paths, seed=0, noise_mode="normal"):
    """Mean and variance curves of ``Y`` and ``mu S`` over independent paths.

    Path ``i`` uses the ``i``-th seed of ``replica_seeds(seed, n_paths)`` and
    coincides with ``simulate_reflected_sde`` run on that seed.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2 to estimate a variance")
    n_steps = _n_points(h, horizon) - 1
    seeds = replica_seeds(seed, n_paths)
    # per grid point: running count-weighted mean and M2 of (Y, mu S), merged block by block
    mean = np.zeros((2, n_steps + 1))
    m2 = np.zeros((2, n_steps + 1))
    count = 0
    for lo in range(0, n_paths, _BLOCK):
        block = seeds[lo: lo + _BLOCK]
        nb = len(block)
        noise = None
        if noise_mode == "normal":
            noise = np.stack([np.random.default_rng(s).standard_normal(n_steps) for s in block])
        for k, (y, s) in enumerate(_euler(p, n_steps, h, noise, nb)):
            for j, v in enumerate((y, p.mu * s)):
                if v[0] == v.min() == v.max():
                    mb, m2b = float(v[0]), 0.0
                else:
                    mb = v.mean()
                    m2b = float(np.sum((v - mb) ** 2))
                delta = mb - mean[j, k]
                tot = count + nb
                mean[j, k] += delta * nb / tot
                m2[j, k] += m2b + delta * delta * count * nb / tot
        count += nb
    var = m2 / (count - 1)
    return EnsembleMoments(h, n_paths, mean[0], var[0], mean[1], var[1])
