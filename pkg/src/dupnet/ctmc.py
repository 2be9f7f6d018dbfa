"""Exact event-driven simulation of the network and of M/M/1 queues.

Each jump uses one exponential holding time at the total rate and one
uniform to pick the jump category (exponential race).  Random numbers come
from a seeded numpy ``Generator``; replicas get independent 64-bit seeds
derived with :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _csv, _kernels
from .core import AbsorbedError, ModelParams, NetworkState, transition_rates

__all__ = [
    "Kind",
    "JumpRecord",
    "Trajectory",
    "GridSample",
    "Mm1Params",
    "Mm1Path",
    "CoupledRun",
    "step",
    "simulate",
    "simulate_on_grid",
    "sample_at",
    "first_loss_fraction_time",
    "simulate_mm1",
    "simulate_coupled_domination",
    "replica_seeds",
    "run_replicas",
    "trajectories_csv",
]

_MIN_CHUNK = 1 << 10
_MAX_CHUNK = 1 << 16


class Kind(enum.IntEnum):
    UP = _kernels.UP
    DUP = _kernels.DUP
    LOSS = _kernels.LOSS

    @property
    def label(self):
        return self.name.lower()

    @property
    def delta(self):
        """Change of ``(x0, x1)`` caused by this jump."""
        return {Kind.UP: (0, 1), Kind.DUP: (0, -1), Kind.LOSS: (1, -1)}[self]


@dataclass(frozen=True)
class JumpRecord:
    time: float
    kind: Kind
    state_after: NetworkState


def replica_seeds(seed, count):
    """Independent 64-bit seeds for ``count`` replicas of a master ``seed``."""
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(count)]


def run_replicas(fn, seeds, parallelism=None):
    """Map ``fn`` over ``seeds`` and return results in seed order.

    The compiled kernels release the GIL, so threads give real concurrency.
    Results never depend on ``parallelism``.
    """
    seeds = list(seeds)
    if parallelism is None:
        parallelism = os.cpu_count() or 1
    if parallelism <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, seeds))


def _as_state(params, initial):
    state = NetworkState(*(initial if initial is not None else (0, 0)))
    if not params.contains(state):
        raise ValueError(f"initial state {tuple(state)} is outside the state space of f_n={params.f_n}")
    return state


def step(params, state, rng):
    """One jump from ``state``: ``(holding time, next state, kind)``."""
    r_up, r_dup, r_loss = transition_rates(params, state)
    total = r_up + r_dup + r_loss
    if total <= 0.0:
        raise AbsorbedError(f"no transition available from absorbing state {tuple(state)}")
    holding = rng.standard_exponential() / total
    u = rng.random() * total
    if u < r_up:
        kind = Kind.UP
    elif u < r_up + r_dup:
        kind = Kind.DUP
    elif r_loss > 0.0:
        kind = Kind.LOSS
    elif r_dup > 0.0:
        kind = Kind.DUP
    else:
        kind = Kind.UP
    d0, d1 = kind.delta
    return holding, NetworkState(state[0] + d0, state[1] + d1), kind


class _Run:
    """Mutable driver around :func:`_kernels.advance`."""

    def __init__(self, params, initial, rng, record, grid=None, stop_x0=None):
        self.params = params
        self.rng = rng
        self.state = np.array(initial, dtype=np.int64)
        self.clock = np.zeros(1)
        self.cursor = np.zeros(3, dtype=np.int64)
        cap = 4096 if record else 0
        self.rec_t = np.empty(cap)
        self.rec_k = np.empty(cap, dtype=np.int8)
        self.rec_x0 = np.empty(cap, dtype=np.int64)
        self.rec_x1 = np.empty(cap, dtype=np.int64)
        self.grid = np.asarray(grid if grid is not None else [], dtype=float)
        self.grid_x0 = np.zeros(self.grid.shape[0], dtype=np.int64)
        self.grid_x1 = np.zeros(self.grid.shape[0], dtype=np.int64)
        self.stop_x0 = params.f_n + 1 if stop_x0 is None else int(stop_x0)
        self.chunk = _MIN_CHUNK

    def _grow(self):
        cap = 2 * self.rec_t.shape[0]
        for name in ("rec_t", "rec_k", "rec_x0", "rec_x1"):
            old = getattr(self, name)
            new = np.empty(cap, dtype=old.dtype)
            new[: old.shape[0]] = old
            setattr(self, name, new)

    def go(self, horizon):
        p = self.params
        while True:
            exps = self.rng.standard_exponential(self.chunk)
            unifs = self.rng.random(self.chunk)
            self.chunk = min(2 * self.chunk, _MAX_CHUNK)
            self.cursor[0] = 0
            while True:
                status = _kernels.advance(
                    self.state, self.clock, self.cursor, p.f_n, p.dup_rate, p.mu, horizon,
                    exps, unifs, self.rec_t, self.rec_k, self.rec_x0, self.rec_x1,
                    self.grid, self.grid_x0, self.grid_x1, self.stop_x0,
                )
                if status != _kernels.BUFFER_FULL:
                    break
                self._grow()
            if status != _kernels.NEED_RANDOM:
                return status

    def records(self):
        n = int(self.cursor[1])
        return (self.rec_t[:n].copy(), self.rec_k[:n].copy(),
                self.rec_x0[:n].copy(), self.rec_x1[:n].copy())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Every jump of one run, stored column-wise.

    ``times[k]``, ``kinds[k]``, ``x0[k]``, ``x1[k]`` describe the k-th jump
    and the state right after it.
    """

    params: ModelParams
    seed: int
    initial: NetworkState
    times: np.ndarray
    kinds: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    absorbed: bool
    horizon: float

    def __len__(self):
        return self.times.shape[0]

    @property
    def records(self):
        return [JumpRecord(float(t), Kind(int(k)), NetworkState(int(a), int(b)))
                for t, k, a, b in zip(self.times, self.kinds, self.x0, self.x1)]

    @property
    def final_state(self):
        if len(self) == 0:
            return self.initial
        return NetworkState(int(self.x0[-1]), int(self.x1[-1]))

    def loss_times(self):
        return self.times[self.kinds == Kind.LOSS]

    def rows(self):
        labels = [k.label for k in Kind]
        for t, k, a, b in zip(self.times.tolist(), self.kinds.tolist(),
                              self.x0.tolist(), self.x1.tolist()):
            yield t, labels[k], a, b

    def to_csv(self, path=None):
        """Columns ``time, kind, x0, x1``; returns the CSV text."""
        return _csv.write(path, ("time", "kind", "x0", "x1"), self.rows())


def trajectories_csv(trajectories, path=None):
    """Combined CSV of several replicas with a leading ``replica`` column."""
    rows = ((i,) + row for i, tr in enumerate(trajectories) for row in tr.rows())
    return _csv.write(path, ("replica", "time", "kind", "x0", "x1"), rows)


def simulate(params, initial=None, horizon=math.inf, seed=0):
    """Exact simulation up to ``horizon`` or absorption, recording every jump."""
    if not horizon >= 0:
        raise ValueError("horizon must be nonnegative")
    start = _as_state(params, initial)
    run = _Run(params, start, np.random.default_rng(seed), record=True)
    status = run.go(float(horizon))
    times, kinds, x0, x1 = run.records()
    return Trajectory(params, seed, start, times, kinds, x0, x1,
                      status == _kernels.ABSORBED, float(horizon))


@dataclass(frozen=True, eq=False)
class GridSample:
    """States of one run observed only at the points of ``grid``."""

    params: ModelParams
    seed: int
    grid: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    absorbed: bool

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "x0", "x1"),
                          zip(self.grid.tolist(), self.x0.tolist(), self.x1.tolist()))


def simulate_on_grid(params, grid, seed=0, initial=None):
    """Simulate up to ``grid[-1]`` keeping only the states at the grid times.

    This is the thinned recording mode for long runs (order ``n**2`` jumps).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) < 0):
        raise ValueError("grid must be a nonempty nondecreasing array of nonnegative times")
    start = _as_state(params, initial)
    run = _Run(params, start, np.random.default_rng(seed), record=False, grid=grid)
    status = run.go(float(grid[-1]))
    return GridSample(params, seed, grid, run.grid_x0, run.grid_x1, status == _kernels.ABSORBED)


def sample_at(tr, t):
    """State of a trajectory at time ``t`` (right-continuous)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t > tr.horizon and not tr.absorbed:
        raise ValueError(f"t={t} is beyond the horizon {tr.horizon} of a non-absorbed trajectory")
    k = int(np.searchsorted(tr.times, t, side="right")) - 1
    if k < 0:
        return tr.initial
    return NetworkState(int(tr.x0[k]), int(tr.x1[k]))


def first_loss_fraction_time(params, delta, seed=0, initial=None):
    """First time at which at least ``ceil(delta * f_n)`` files are lost."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    start = _as_state(params, initial)
    threshold = max(1, math.ceil(delta * params.f_n))
    if start[0] >= threshold:
        return 0.0
    run = _Run(params, start, np.random.default_rng(seed), record=False, stop_x0=threshold)
    run.go(math.inf)
    return float(run.clock[0])


@dataclass(frozen=True)
class Mm1Params:
    arrival: float
    service: float

    def __post_init__(self):
        if not self.arrival >= 0:
            raise ValueError("arrival rate must be nonnegative")
        if not self.service > 0:
            raise ValueError("service rate must be positive")

    @property
    def load(self):
        return self.arrival / self.service

    @property
    def ergodic(self):
        return self.arrival < self.service


@dataclass(frozen=True, eq=False)
class Mm1Path:
    """Piecewise-constant integer path: value ``values[k]`` from ``times[k]`` on.

    ``times[0]`` is the start time and ``values[0]`` the initial value.
    """

    times: np.ndarray
    values: np.ndarray
    horizon: float

    def value_at(self, t):
        if t < self.times[0] or t > self.horizon:
            raise ValueError(f"t={t} outside [{self.times[0]}, {self.horizon}]")
        return int(self.values[np.searchsorted(self.times, t, side="right") - 1])

    def occupation(self, t_from=0.0):
        """Fraction of ``[t_from, horizon]`` spent in each value, as an array."""
        ends = np.append(self.times[1:], self.horizon)
        starts = np.maximum(self.times, t_from)
        dur = np.clip(ends - starts, 0.0, None)
        occ = np.bincount(self.values, weights=dur)
        return occ / occ.sum()

    def to_csv(self, path=None):
        return _csv.write(path, ("t", "value"), zip(self.times.tolist(), self.values.tolist()))


def simulate_mm1(q, initial=0, horizon=1.0, seed=0):
    """Birth-death path with up-rate ``arrival`` and down-rate ``service`` (when positive)."""
    if int(initial) != initial or initial < 0:
        raise ValueError("initial queue length must be a nonnegative integer")
    rng = np.random.default_rng(seed)
    value = np.array([initial], dtype=np.int64)
    clock = np.zeros(1)
    cursor = np.zeros(2, dtype=np.int64)
    rec_t = np.empty(1024)
    rec_v = np.empty(1024, dtype=np.int64)
    chunk = _MIN_CHUNK
    while True:
        exps = rng.standard_exponential(chunk)
        unifs = rng.random(chunk)
        chunk = min(2 * chunk, _MAX_CHUNK)
        cursor[0] = 0
        while True:
            status = _kernels.advance_mm1(value, clock, cursor, float(q.arrival), float(q.service),
                                          float(horizon), exps, unifs, rec_t, rec_v)
            if status != _kernels.BUFFER_FULL:
                break
            rec_t = np.concatenate([rec_t, np.empty_like(rec_t)])
            rec_v = np.concatenate([rec_v, np.empty_like(rec_v)])
        if status != _kernels.NEED_RANDOM:
            break
    n = int(cursor[1])
    times = np.concatenate([[0.0], rec_t[:n]])
    values = np.concatenate([[int(initial)], rec_v[:n]])
    return Mm1Path(times, values, float(horizon))


@dataclass(frozen=True, eq=False)
class CoupledRun:
    """Network trajectory together with the M/M/1 path that dominates it.

    The queue is expressed on the network clock, i.e. ``queue.value_at(t)``
    is ``L(n t)`` for a queue with arrival ``2 mu beta0`` and service ``lam``.
    ``gaps`` holds ``x1 - L`` after every proposed event.
    """

    trajectory: Trajectory
    queue: Mm1Path
    gaps: np.ndarray = field(repr=False)

    @property
    def violations(self):
        return int(np.count_nonzero(self.gaps > 0))


def simulate_coupled_domination(params, beta0, horizon, seed=0, initial=None):
    """Drive the network and a dominating M/M/1 queue with shared event streams.

    Arrivals are proposed at rate ``2 mu beta0 n``; the queue always accepts,
    the network accepts with probability ``x2 / (beta0 n)``.  Departures are
    proposed at rate ``lam n`` and applied to each process that is positive.
    Copy losses of one-copy files (rate ``mu x1``) move only the network.
    """
    p = params
    if not 2.0 * p.mu * beta0 < p.lam:
        raise ValueError("need 2 * mu * beta0 < lambda for an ergodic dominating queue")
    if not p.f_n <= beta0 * p.n:
        raise ValueError("need f_n <= beta0 * n")
    start = _as_state(p, initial)
    rng = np.random.default_rng(seed)
    x0, x1 = start
    queue = x1
    arrive = 2.0 * p.mu * beta0 * p.n
    depart = p.dup_rate
    cap = beta0 * p.n

    t = 0.0
    rec = []  # (time, kind, x0, x1)
    q_t, q_v = [0.0], [queue]
    gaps = [x1 - queue]
    absorbed = False
    exps = unifs = accepts = ()
    i = len(exps)
    while True:
        if i == len(exps):
            exps = rng.standard_exponential(_MIN_CHUNK).tolist()
            unifs = rng.random(_MIN_CHUNK).tolist()
            accepts = rng.random(_MIN_CHUNK).tolist()
            i = 0
        if x0 == p.f_n:
            absorbed = True
        loss = p.mu * x1
        total = arrive + depart + loss
        t_next = t + exps[i] / total
        if t_next > horizon:
            break
        u = unifs[i] * total
        acc = accepts[i]
        i += 1
        t = t_next
        kind = None
        if u < arrive:
            queue += 1
            q_t.append(t)
            q_v.append(queue)
            if acc * cap < p.f_n - x0 - x1:
                x1 += 1
                kind = Kind.UP
        elif u < arrive + depart:
            if queue > 0:
                queue -= 1
                q_t.append(t)
                q_v.append(queue)
            if x1 > 0:
                x1 -= 1
                kind = Kind.DUP
        elif x1 > 0:
            x1 -= 1
            x0 += 1
            kind = Kind.LOSS
        if kind is not None:
            rec.append((t, int(kind), x0, x1))
        gaps.append(x1 - queue)

    if rec:
        times, kinds, a, b = (np.array(c) for c in zip(*rec))
    else:
        times, kinds, a, b = np.empty(0), np.empty(0), np.empty(0), np.empty(0)
    tr = Trajectory(p, seed, start, times.astype(float), kinds.astype(np.int8),
                    a.astype(np.int64), b.astype(np.int64), absorbed, float(horizon))
    path = Mm1Path(np.array(q_t), np.array(q_v, dtype=np.int64), float(horizon))
    return CoupledRun(tr, path, np.array(gaps, dtype=np.int64))
