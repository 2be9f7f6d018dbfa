"""One-dimensional Skorokhod reflection on a uniform grid, and Picard
iteration for the generalized problem where the driving path depends on
the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _csv

__all__ = [
    "GridPath",
    "PathFunctional",
    "GspResult",
    "ConvergenceError",
    "reflect",
    "complementarity_defect",
    "gsp_solve",
    "cumtrapz",
]


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values ``values[k]`` of a real function at times ``k * step``."""

    step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if not self.step > 0:
            raise ValueError("step must be positive")
        if values.ndim != 1 or values.shape[0] < 2:
            raise ValueError("a GridPath needs at least two points")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, step, n_points):
        return cls(step, np.zeros(n_points))

    @classmethod
    def from_function(cls, fn, step, horizon):
        t = step * np.arange(_n_points(step, horizon))
        return cls(step, np.asarray(fn(t), dtype=float) * np.ones_like(t))

    @property
    def times(self):
        return self.step * np.arange(self.values.shape[0])

    @property
    def horizon(self):
        return self.step * (self.values.shape[0] - 1)

    def __len__(self):
        return self.values.shape[0]

    def same_grid(self, other):
        return len(self) == len(other) and abs(self.step - other.step) <= 1e-12 * self.step

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "value"), zip(self.times.tolist(), self.values.tolist()))


def _n_points(step, horizon):
    k = int(round(horizon / step))
    if abs(k * step - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(f"horizon {horizon} is not a multiple of step {step}")
    return k + 1


def cumtrapz(values, step):
    """Running trapezoidal integral, starting at 0."""
    out = np.zeros_like(values, dtype=float)
    out[1:] = np.cumsum(0.5 * step * (values[1:] + values[:-1]))
    return out


class PathFunctional:
    """Non-anticipating map between grid paths.

    ``fn`` takes and returns a value array on the same grid (step passed as
    second argument).  ``lipschitz(T)`` is a bound ``C_T`` with
    ``sup_{s<=t} |G(x)(s) - G(y)(s)| <= C_T int_0^t |x - y|``.
    """

    def __init__(self, fn, lipschitz=None, name=None):
        self._fn = fn
        self._lipschitz = lipschitz
        self.name = name or getattr(fn, "__name__", "functional")

    def __call__(self, x):
        return GridPath(x.step, self._fn(x.values, x.step))

    def lipschitz(self, horizon):
        return None if self._lipschitz is None else self._lipschitz(horizon)

    @classmethod
    def constant(cls, z):
        """The classical Skorokhod problem: ``G(x) = z`` regardless of ``x``."""
        zv = np.asarray(z.values if isinstance(z, GridPath) else z, dtype=float)

        def fn(values, step):
            if values.shape[0] > zv.shape[0]:
                raise ValueError("grid mismatch with the constant path")
            return zv[: values.shape[0]].copy()

        return cls(fn, lambda T: 0.0, name="constant")

    def __repr__(self):
        return f"PathFunctional({self.name})"


def reflect(z):
    """Skorokhod map at 0: ``r_k = max_{j<=k} max(-z_j, 0)``, ``x = z + r``."""
    zv = z.values
    if zv[0] < 0:
        raise ValueError(f"reflection needs z(0) >= 0, got {zv[0]}")
    r = np.maximum.accumulate(np.maximum(-zv, 0.0))
    return GridPath(z.step, zv + r), GridPath(z.step, r)


def complementarity_defect(x, r, post=True):
    """Riemann-Stieltjes sum of ``x dr``.

    With ``post=True`` the value after each increment multiplies it,
    ``sum x_{k+1} (r_{k+1} - r_k)``; this is 0 for :func:`reflect` output.
    ``post=False`` uses ``x_k`` instead.
    """
    if not x.same_grid(r):
        raise ValueError("x and r must live on the same grid")
    dr = np.diff(r.values)
    xv = x.values[1:] if post else x.values[:-1]
    return float(abs(np.sum(xv * dr)))


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class GspResult:
    """Solution pair plus diagnostics.

    ``residual`` is ``sup |reflect(G(x)).x - x|`` for the returned ``x``;
    ``residuals`` holds the last Picard step size of every window.
    """

    x: GridPath
    r: GridPath
    iterations: int
    residual: float
    residuals: np.ndarray
    window: int


def _auto_window(G, horizon, h):
    c_t = G.lipschitz(horizon)
    if not c_t:
        return None
    # sweep contraction bound 2 * C_T * w (reflection is 2-Lipschitz); aim for 1/4
    return max(1, int(0.125 / (c_t * h)))


def gsp_solve(G, horizon, h, tol=1e-10, max_iter=200, window="auto"):
    """Fixed point of ``x = reflect(G(x))`` by Picard iteration from ``x = 0``.

    The grid is swept in windows of ``window`` steps.  Inside a window the
    iteration is repeated until two successive iterates differ by at most
    ``tol``; the window is then frozen and the next one starts from the
    frozen past (valid because ``G`` is non-anticipating).  A single window
    over a long horizon does not reach tight tolerances in double
    precision: sweep rounding is amplified like ``exp(C T)``.  With
    ``window="auto"`` the length is taken from ``G.lipschitz`` so each
    sweep contracts; ``window=None`` iterates over the whole horizon.

    Raises :class:`ConvergenceError` when a window needs more than
    ``max_iter`` sweeps.
    """
    if not (h > 0 and horizon > 0 and tol > 0 and max_iter >= 1):
        raise ValueError("need h > 0, horizon > 0, tol > 0, max_iter >= 1")
    n = _n_points(h, horizon)
    if window == "auto":
        window = _auto_window(G, horizon, h)
    if window is None:
        window = n
    window = int(window)
    if window < 1:
        raise ValueError("window must be at least one grid step")

    xv = np.zeros(n)
    sweeps = 0
    last = []
    lo = 0
    while lo < n:
        hi = min(n, max(2, lo + window))
        steps = []
        for _ in range(max_iter):
            prefix = GridPath(h, xv[:hi])
            new = reflect(G(prefix))[0].values[lo:hi]
            res = float(np.max(np.abs(new - xv[lo:hi])))
            xv[lo:hi] = new
            sweeps += 1
            steps.append(res)
            if not np.isfinite(res) or res <= tol:
                break
        if not res <= tol:
            raise ConvergenceError(
                f"Picard iteration stalled on [{lo * h:g}, {(hi - 1) * h:g}] after {len(steps)} "
                f"sweeps (last step {res:.3e}, tol {tol:g})", res, sweeps)
        last.append(res)
        lo = hi

    x = GridPath(h, xv)
    fx, r = reflect(G(x))
    residual = float(np.max(np.abs(fx.values - xv)))
    return GspResult(x, r, sweeps, residual, np.array(last), window)
