"""Fluid limit of ``(X0/N, X1/N)`` started from an empty loss count.

Two independent routes: the closed-form curves, and a numerical solution
of the generalized Skorokhod problem the single-copy fraction satisfies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _csv
from .skorokhod import GridPath, PathFunctional, cumtrapz, gsp_solve

__all__ = ["FluidCurve", "fluid_closed_form", "fluid_functional", "fluid_gsp", "closed_form_curve"]


def fluid_closed_form(beta, rho, mu, t):
    """Limit ``(x0(t), x1(t))``; works elementwise on array ``t``.

    For ``rho <= 2 beta``::

        x0 = (beta - rho/2) (1 - e^{-mu t})^2
        x1 = (2 beta - rho) (e^{-mu t} - e^{-2 mu t})

    and ``(0, 0)`` otherwise.
    """
    t = np.asarray(t, dtype=float)
    if rho > 2.0 * beta:
        z = np.zeros_like(t)
        return (z, z.copy()) if t.ndim else (0.0, 0.0)
    e = np.exp(-mu * t)
    x0 = (beta - rho / 2.0) * (1.0 - e) ** 2
    x1 = (2.0 * beta - rho) * (e - e * e)
    if t.ndim == 0:
        return float(x0), float(x1)
    return x0, x1


def fluid_functional(beta, lam, mu):
    """``F(x)(t) = (2 mu beta - lam) t - mu int_0^t (3 x(u) + 2 mu int_0^u x) du``.

    Integrals use the trapezoidal rule; the inner integral is carried as a
    running sum.  Lipschitz bound ``C_T = mu (3 + 2 mu T)``.
    """
    drift = 2.0 * mu * beta - lam

    def fn(values, step):
        t = step * np.arange(values.shape[0])
        inner = cumtrapz(values, step)
        return drift * t - mu * cumtrapz(3.0 * values + 2.0 * mu * inner, step)

    return PathFunctional(fn, lambda T: mu * (3.0 + 2.0 * mu * T), name="fluid")


@dataclass(frozen=True, eq=False)
class FluidCurve:
    step: float
    x0: np.ndarray
    x1: np.ndarray
    beta: float
    rho: float
    mu: float

    @property
    def times(self):
        return self.step * np.arange(self.x0.shape[0])

    def path(self, which):
        return GridPath(self.step, self.x0 if which == 0 else self.x1)

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "x0", "x1"),
                          zip(self.times.tolist(), self.x0.tolist(), self.x1.tolist()))


def closed_form_curve(beta, rho, mu, horizon, h):
    n = int(round(horizon / h)) + 1
    x0, x1 = fluid_closed_form(beta, rho, mu, h * np.arange(n))
    return FluidCurve(h, x0, x1, beta, rho, mu)


def fluid_gsp(beta, lam, mu, horizon, h, tol=1e-10, max_iter=200):
    """Solve for ``x1`` as the GSP of :func:`fluid_functional`; ``x0 = mu int x1``."""
    if not (beta > 0 and lam > 0 and mu > 0):
        raise ValueError("beta, lambda and mu must be positive")
    sol = gsp_solve(fluid_functional(beta, lam, mu), horizon, h, tol=tol, max_iter=max_iter)
    x1 = sol.x.values
    return FluidCurve(h, mu * cumtrapz(x1, h), x1, beta, lam / mu, mu)
