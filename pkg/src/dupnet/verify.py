"""Named verification suites: desk-scale checks of every limit result.

Each suite returns a list of :class:`~dupnet.stats.TestReport`; the last
report of every suite compares its wall-clock time with a budget.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .core import ModelParams, NetworkState
from .critical import CriticalParams, ensemble_moments, simulate_reflected_sde
from .ctmc import (Kind, first_loss_fraction_time, replica_seeds, run_replicas, simulate,
                   simulate_coupled_domination, simulate_on_grid)
from .decay import psi_curve, psi_ode, t_of_delta
from .fluid import fluid_closed_form, fluid_gsp
from .skorokhod import GridPath, PathFunctional, complementarity_defect, gsp_solve, reflect
from .stats import (EmpiricalDist, TestReport, chi_square_geometric, loss_rate, mean_ci,
                    poisson_loss_check, sup_deviation)

__all__ = ["SUITES", "run_suite", "reflected_ode_oracle"]

DEFAULT_SEED = 1


def _within(name, value, limit, description=""):
    return TestReport(name, float(value), float(limit), bool(value <= limit), description)


def _timed(name, budget, start):
    elapsed = time.perf_counter() - start
    return _within(f"{name}-runtime", elapsed, budget, "seconds")


def fluid_suite(seed=DEFAULT_SEED, parallelism=None, n=5000, replicas=20, lam=1.0, mu=1.0,
                horizon=6.0, step=0.05, tol=0.02, budget=60.0):
    start = time.perf_counter()
    p = ModelParams(lam, mu, n, n)
    grid = step * np.arange(int(round(horizon / step)) + 1)
    runs = run_replicas(lambda s: simulate_on_grid(p, grid, seed=s),
                        replica_seeds(seed, replicas), parallelism)
    m0 = np.mean([r.x0 for r in runs], axis=0) / n
    m1 = np.mean([r.x1 for r in runs], axis=0) / n
    x0, x1 = fluid_closed_form(p.beta, p.rho, mu, grid)
    desc = f"N={n}, {replicas} replicas, grid {step:g} on [0, {horizon:g}]"
    return [
        _within("fluid-x0-sup-deviation", sup_deviation(m0, x0), tol, desc),
        _within("fluid-x1-sup-deviation", sup_deviation(m1, x1), tol, desc),
        _timed("fluid", budget, start),
    ]


def gsp_suite(seed=DEFAULT_SEED, parallelism=None, beta=1.0, lam=1.0, mu=1.0, horizon=5.0,
              h=1e-3, budget=5.0):
    start = time.perf_counter()
    curve = fluid_gsp(beta, lam, mu, horizon, h)
    x0, x1 = fluid_closed_form(beta, lam / mu, mu, curve.times)
    err = max(sup_deviation(curve.x0, x0), sup_deviation(curve.x1, x1))

    # rough driving path: random walk started at 1 that goes negative
    rng = np.random.default_rng(seed)
    n = int(round(horizon / h)) + 1
    zv = 1.0 + np.concatenate([[0.0], np.cumsum(rng.normal(-0.2 * h, math.sqrt(h), n - 1))])
    z = GridPath(h, zv)
    x, r = reflect(z)
    sol = gsp_solve(PathFunctional.constant(z), horizon, h)
    const_err = max(sup_deviation(sol.x, x), sup_deviation(sol.r, r))
    return [
        _within("gsp-fluid-vs-closed-form", err, 1e-4, f"beta={beta:g}, rho={lam / mu:g}, h={h:g}, T={horizon:g}"),
        _within("gsp-constant-functional-vs-reflect", const_err, 1e-12, f"{sol.iterations} sweeps"),
        _within("reflect-complementarity-defect", complementarity_defect(x, r), 1e-9,
                f"reflection total {r.values[-1]:.4g}"),
        _timed("gsp", budget, start),
    ]


def reflected_ode_oracle(p, horizon, h):
    """Noise-free reflected solution by RK4 with exact handling of the boundary.

    Integrates ``Y' = mu (2 gamma - 3 Y - 2 mu S)``, ``S' = Y``.  When a step
    would take ``Y`` below 0 the hitting time inside the step is located by
    bisection and ``Y`` is held at 0 (``S`` frozen) while the drift there is
    nonpositive.  Independent of the Euler scheme it checks.
    """
    mu, g = p.mu, p.gamma

    def f(v):
        y, s = v
        return np.array([mu * (2.0 * g - 3.0 * y - 2.0 * mu * s), y])

    def rk4(v, dt):
        k1 = f(v)
        k2 = f(v + 0.5 * dt * k1)
        k3 = f(v + 0.5 * dt * k2)
        k4 = f(v + dt * k3)
        return v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    n = int(round(horizon / h)) + 1
    out = np.zeros(n)
    v = np.array([float(p.y), 0.0])
    out[0] = v[0]
    stuck = v[0] == 0.0 and mu * (2.0 * g - 2.0 * mu * v[1]) <= 0.0
    for k in range(1, n):
        if stuck:
            out[k] = 0.0
            continue
        w = rk4(v, h)
        if w[0] < 0.0:
            lo, hi = 0.0, h
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if rk4(v, mid)[0] < 0.0:
                    hi = mid
                else:
                    lo = mid
            v = rk4(v, lo)
            v[0] = 0.0
            if mu * (2.0 * g - 2.0 * mu * v[1]) <= 0.0:
                stuck = True
                out[k] = 0.0
                continue
            w = rk4(v, h - lo)
        v = w
        out[k] = v[0]
    return GridPath(h, out)


def critical_suite(seed=DEFAULT_SEED, parallelism=None, n=10_000, lam=2.0, mu=1.0, t=1.0,
                   ctmc_runs=500, paths=5000, h=1e-3, ode_h=1e-4, ode_horizon=5.0, budget=300.0):
    start = time.perf_counter()
    beta = lam / (2.0 * mu)
    p = ModelParams.critical(mu, n, math.floor(beta * n + 1e-9))
    seeds = replica_seeds(seed, ctmc_runs + 1)
    runs = run_replicas(lambda s: simulate_on_grid(p, [t], seed=s), seeds[:ctmc_runs], parallelism)
    root = math.sqrt(n)
    y_ctmc = mean_ci([r.x1[0] / root for r in runs])
    x0_ctmc = mean_ci([r.x0[0] / root for r in runs])
    cp = CriticalParams.from_model(p, y=0.0)
    mom = ensemble_moments(cp, t, h, paths, seed=seeds[-1]).at(t)

    def agree(name, ctmc, mean, se):
        se_ctmc = ctmc[1] / 1.96
        comb = math.sqrt(se_ctmc**2 + se**2)
        gap = abs(ctmc[0] - mean)
        return _within(name, gap, 3.0 * comb,
                       f"ctmc {ctmc[0]:.4f} vs euler {mean:.4f}, combined se {comb:.4f}")

    zp = CriticalParams(lam, mu, 0.0, 1.0)
    euler = simulate_reflected_sde(zp, ode_horizon, ode_h, noise_mode="zero").y
    oracle = reflected_ode_oracle(zp, ode_horizon, ode_h)
    return [
        agree("critical-x1-mean", y_ctmc, mom["mean_y"], mom["se_y"]),
        agree("critical-x0-mean", x0_ctmc, mom["mean_x0"], mom["se_x0"]),
        _within("critical-zero-noise-vs-ode", sup_deviation(euler, oracle), 1e-4,
                f"gamma=0, y=1, h={ode_h:g} on [0, {ode_horizon:g}]"),
        _timed("critical", budget, start),
    ]


def normal_suite(seed=DEFAULT_SEED, parallelism=None, n=2000, lam=4.0, mu=1.0, beta=1.0,
                 replicas=2000, alpha_level=0.01, window=(2.0, 50.0), budget=180.0):
    start = time.perf_counter()
    p = ModelParams.from_beta(lam, mu, n, beta)
    seeds = replica_seeds(seed, replicas + 1)
    runs = run_replicas(lambda s: simulate_on_grid(p, [5.0, 10.0], seed=s), seeds[:replicas], parallelism)
    marg = EmpiricalDist.from_values([r.x1[0] for r in runs])
    chi = chi_square_geometric(marg, 2.0 * p.beta / p.rho, alpha_level)
    mean_x0 = float(np.mean([r.x0[1] for r in runs]))
    mean_rep = TestReport("normal-mean-x0-at-10", mean_x0, 11.0, 9.0 <= mean_x0 <= 11.0,
                          f"band [9, 11], {replicas} replicas")

    tr = simulate(p, horizon=window[1], seed=seeds[-1])
    poisson = poisson_loss_check(tr, window, alpha_level)
    rate = loss_rate(tr, window)
    rel = abs(rate - p.loss_rate) / p.loss_rate
    rate_rep = _within("normal-loss-rate", rel, 0.10,
                       f"relative error of {rate:.4g} vs {p.loss_rate:.4g}")
    return [chi, poisson, rate_rep, mean_rep, _timed("normal", budget, start)]


def decay_suite(seed=DEFAULT_SEED, parallelism=None, n=500, lam=4.0, mu=1.0, beta=1.0,
                horizon=3.0, step=0.1, replicas=10, tol=0.05, budget=300.0):
    start = time.perf_counter()
    p = ModelParams.from_beta(lam, mu, n, beta)
    tgrid = step * np.arange(int(round(horizon / step)) + 1)
    runs = run_replicas(lambda s: simulate_on_grid(p, n * tgrid, seed=s),
                        replica_seeds(seed, replicas), parallelism)
    mean_frac = np.mean([r.x0 for r in runs], axis=0) / n
    curve = psi_curve(p.beta, p.rho, mu, horizon, step)
    fine = psi_curve(p.beta, p.rho, mu, 10.0 / mu, 1e-3)
    ode = psi_ode(p.beta, p.rho, mu, 10.0 / mu, 1e-3)
    return [
        _within("decay-sup-deviation", sup_deviation(mean_frac, curve.values), tol,
                f"N={n}, {replicas} replicas, t-grid {step:g} on [0, {horizon:g}]"),
        _within("decay-fixed-point-residual", float(np.max(np.abs(fine.residuals))), 1e-10,
                f"grid 1e-3 on [0, {10.0 / mu:g}]"),
        _within("decay-root-vs-ode", sup_deviation(fine.values, ode.values), 1e-5, "RK4 at h=1e-3"),
        _timed("decay", budget, start),
    ]


def tdelta_suite(seed=DEFAULT_SEED, parallelism=None, n=500, lam=4.0, mu=1.0, beta=1.0, delta=0.5,
                 runs=20, budget=180.0):
    start = time.perf_counter()
    p = ModelParams.from_beta(lam, mu, n, beta)
    times = run_replicas(lambda s: first_loss_fraction_time(p, delta, seed=s),
                         replica_seeds(seed, runs), parallelism)
    target = t_of_delta(p.beta, p.rho, mu, delta)
    mean = float(np.mean(times)) / n
    return [
        _within("tdelta-relative-error", abs(mean - target) / target, 0.10,
                f"mean T_N/N {mean:.4f} vs {target:.4f}, {runs} runs"),
        _timed("tdelta", budget, start),
    ]


def coupling_suite(seed=DEFAULT_SEED, parallelism=None, n=200, lam=4.0, mu=1.0, beta=1.0,
                   horizon=5.0, runs=100, budget=30.0):
    start = time.perf_counter()
    p = ModelParams.from_beta(lam, mu, n, beta)
    beta0 = 1.1 * p.beta
    out = run_replicas(lambda s: simulate_coupled_domination(p, beta0, horizon, seed=s),
                       replica_seeds(seed, runs), parallelism)
    violations = sum(c.violations for c in out)
    events = sum(c.gaps.shape[0] for c in out)
    return [
        TestReport("coupling-violations", float(violations), 0.0, violations == 0,
                   f"{runs} runs, {events} events, beta0={beta0:g}"),
        _timed("coupling", budget, start),
    ]


def random_config(rng):
    """A random small network, start state and horizon for property checks."""
    n = int(rng.integers(1, 40))
    f_n = int(rng.integers(1, 3 * n + 2))
    p = ModelParams(float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.1, 3.0)), n, f_n)
    x0 = int(rng.integers(0, f_n + 1))
    x1 = int(rng.integers(0, f_n - x0 + 1))
    horizon = float(rng.choice([0.0, rng.uniform(0.0, 5.0), rng.uniform(5.0, 200.0)]))
    return p, NetworkState(x0, x1), horizon


def check_trajectory(tr):
    """List of invariant violations of a trajectory (empty when it is sound)."""
    p = tr.params
    bad = []
    if np.any(np.diff(tr.times) <= 0):
        bad.append("times not strictly increasing")
    if len(tr) and (tr.times[0] <= 0 or tr.times[-1] > tr.horizon):
        bad.append("jump time outside (0, horizon]")
    if np.any(np.diff(np.concatenate([[tr.initial.x0], tr.x0])) < 0):
        bad.append("x0 decreased")
    x2 = p.f_n - tr.x0 - tr.x1
    if np.any(tr.x0 < 0) or np.any(tr.x1 < 0) or np.any(x2 < 0):
        bad.append("state left the state space")
    x0, x1 = tr.initial
    for k, kind in enumerate(tr.kinds.tolist()):
        d0, d1 = Kind(kind).delta
        x0, x1 = x0 + d0, x1 + d1
        if (x0, x1) != (tr.x0[k], tr.x1[k]):
            bad.append(f"replay mismatch at record {k}")
            break
    hit = np.nonzero((tr.x0 == p.f_n) & (tr.x1 == 0))[0]
    if hit.size and hit[0] != len(tr) - 1:
        bad.append("records after absorption")
    if tr.absorbed != (tr.final_state == (p.f_n, 0)):
        bad.append("absorbed flag inconsistent with final state")
    return bad


def invariants_suite(seed=DEFAULT_SEED, parallelism=None, configs=100, budget=60.0):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(configs):
        p, s0, horizon = random_config(rng)
        run_seed = int(rng.integers(0, 2**63))
        tr = simulate(p, s0, horizon, seed=run_seed)
        bad = check_trajectory(tr)
        if simulate(p, s0, horizon, seed=run_seed).to_csv() != tr.to_csv():
            bad.append("rerun not byte-identical")
        failures += [f"config {i}: {b}" for b in bad]
    desc = "; ".join(failures[:3]) if failures else f"{configs} random configurations"
    return [
        TestReport("exact-law-invariants", float(len(failures)), 0.0, not failures, desc),
        _timed("invariants", budget, start),
    ]


SUITES = {
    "fluid": fluid_suite,
    "gsp": gsp_suite,
    "critical": critical_suite,
    "normal": normal_suite,
    "decay": decay_suite,
    "tdelta": tdelta_suite,
    "coupling": coupling_suite,
    "invariants": invariants_suite,
}


def run_suite(name, seed=DEFAULT_SEED, parallelism=None, **overrides):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](seed=seed, parallelism=parallelism, **overrides)
