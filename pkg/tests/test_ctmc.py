import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps
from scipy.linalg import expm

from dupnet import (AbsorbedError, Kind, ModelParams, Mm1Params, NetworkState, first_loss_fraction_time,
                    replica_seeds, run_replicas, sample_at, simulate, simulate_coupled_domination,
                    simulate_mm1, simulate_on_grid, step, trajectories_csv, transition_rates)
from dupnet.verify import check_trajectory, random_config

SMALL = ModelParams(2.0, 1.0, 10, 10)


def test_step_only_degradation_possible():
    rng = np.random.default_rng(0)
    for _ in range(200):
        _, nxt, kind = step(SMALL, NetworkState(4, 0), rng)
        assert kind is Kind.UP and nxt == (4, 1)


def test_step_category_and_holding_laws():
    rng = np.random.default_rng(1)
    n = 40_000
    draws = [step(SMALL, NetworkState(3, 2), rng) for _ in range(n)]
    kinds = np.array([int(k) for _, _, k in draws])
    counts = np.bincount(kinds, minlength=3)
    expected = n * np.array([10, 20, 2]) / 32
    assert sps.chisquare(counts, expected).pvalue > 1e-3
    holds = np.array([h for h, _, _ in draws])
    assert sps.kstest(holds, "expon", args=(0, 1 / 32)).pvalue > 1e-3
    for _, nxt, k in draws[:50]:
        d0, d1 = k.delta
        assert nxt == (3 + d0, 2 + d1)


def test_step_from_absorbing_state():
    with pytest.raises(AbsorbedError, match="no transition"):
        step(SMALL, NetworkState(10, 0), np.random.default_rng(0))


def test_absorbing_start_gives_empty_trajectory():
    tr = simulate(SMALL, NetworkState(10, 0), horizon=5.0, seed=3)
    assert len(tr) == 0 and tr.absorbed
    assert tr.to_csv() == "time,kind,x0,x1\n"
    assert sample_at(tr, 100.0) == (10, 0)


def test_sample_at_is_piecewise_constant():
    tr = simulate(SMALL, horizon=3.0, seed=5)
    assert sample_at(tr, 0.0) == (0, 0)
    k = len(tr) // 2
    mid = 0.5 * (tr.times[k] + tr.times[k + 1])
    assert sample_at(tr, mid) == tr.records[k].state_after
    assert sample_at(tr, tr.times[k]) == tr.records[k].state_after
    with pytest.raises(ValueError, match="horizon"):
        sample_at(tr, 3.5)


def test_long_run_absorbs_and_stops():
    tr = simulate(ModelParams(0.5, 1.0, 5, 5), horizon=math.inf, seed=2)
    assert tr.absorbed and tr.final_state == (5, 0)
    assert sample_at(tr, tr.times[-1] + 10.0) == (5, 0)
    assert check_trajectory(tr) == []


def test_transient_law_matches_generator_exponential():
    # brute-force oracle: P(t) = expm(Q t) on the enumerated state space
    p = ModelParams(1.5, 1.0, 2, 3)
    states = [(a, b) for a in range(p.f_n + 1) for b in range(p.f_n + 1 - a)]
    index = {s: i for i, s in enumerate(states)}
    q = np.zeros((len(states), len(states)))
    for s, i in index.items():
        up, dup, loss = transition_rates(p, NetworkState(*s))
        for rate, (d0, d1) in ((up, (0, 1)), (dup, (0, -1)), (loss, (1, -1))):
            if rate > 0:
                q[i, index[(s[0] + d0, s[1] + d1)]] += rate
                q[i, i] -= rate
    t = 0.8
    law = expm(q * t)[index[(0, 0)]]
    runs = 20_000
    hits = np.zeros(len(states))
    for s in replica_seeds(11, runs):
        g = simulate_on_grid(p, [t], seed=s)
        hits[index[(int(g.x0[0]), int(g.x1[0]))]] += 1
    keep = law * runs >= 5
    obs = np.append(hits[keep], hits[~keep].sum())
    exp = np.append(law[keep], law[~keep].sum()) * runs
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    assert sps.chisquare(obs, exp).pvalue > 1e-3


def test_grid_mode_agrees_with_full_recording():
    p = ModelParams(3.0, 1.0, 50, 60)
    tr = simulate(p, horizon=4.0, seed=9)
    grid = np.linspace(0.0, 4.0, 41)
    g = simulate_on_grid(p, grid, seed=9)
    for t, a, b in zip(grid, g.x0, g.x1):
        assert sample_at(tr, t) == (a, b)


def test_reproducible_and_seed_sensitive():
    p = ModelParams(3.0, 1.0, 30, 30)
    a = simulate(p, horizon=20.0, seed=123).to_csv()
    assert a == simulate(p, horizon=20.0, seed=123).to_csv()
    assert a != simulate(p, horizon=20.0, seed=124).to_csv()


def test_replicas_independent_of_parallelism():
    p = ModelParams(3.0, 1.0, 30, 30)
    seeds = replica_seeds(7, 8)
    assert len(set(seeds)) == 8
    serial = run_replicas(lambda s: simulate(p, horizon=5.0, seed=s), seeds, parallelism=1)
    threaded = run_replicas(lambda s: simulate(p, horizon=5.0, seed=s), seeds, parallelism=4)
    assert trajectories_csv(serial) == trajectories_csv(threaded)
    assert trajectories_csv(serial).splitlines()[0] == "replica,time,kind,x0,x1"


def test_first_threshold_of_one_is_first_loss():
    p = ModelParams(4.0, 1.0, 20, 20)
    tr = simulate(p, horizon=math.inf, seed=4)
    assert first_loss_fraction_time(p, 0.01, seed=4) == tr.loss_times()[0]
    with pytest.raises(ValueError):
        first_loss_fraction_time(p, 1.0)


def test_first_threshold_uses_ceiling():
    p = ModelParams(4.0, 1.0, 20, 20)
    tr = simulate(p, horizon=math.inf, seed=8)
    # delta * f_n = 5.4 -> six losses
    assert first_loss_fraction_time(p, 0.27, seed=8) == tr.loss_times()[5]


def test_mm1_pure_death():
    path = simulate_mm1(Mm1Params(0.0, 2.0), initial=6, horizon=50.0, seed=1)
    assert np.all(np.diff(path.values) == -1)
    assert path.values[-1] == 0 and path.value_at(50.0) == 0


def test_mm1_first_move_from_empty_is_arrival():
    for s in range(20):
        path = simulate_mm1(Mm1Params(1.0, 5.0), initial=0, horizon=10.0, seed=s)
        assert path.values[1] == 1


def test_mm1_occupation_is_geometric():
    path = simulate_mm1(Mm1Params(1.0, 2.0), initial=0, horizon=20_000.0, seed=3)
    occ = path.occupation(t_from=100.0)
    k = np.arange(5)
    assert np.allclose(occ[:5], 0.5 * 0.5**k, atol=0.015)


def test_coupling_start_and_acceptance():
    # f_n = beta0 n: from (0, 0) every proposed arrival is accepted
    p = ModelParams(5.0, 1.0, 100, 200)
    run = simulate_coupled_domination(p, 2.0, horizon=0.02, seed=3)
    assert run.gaps[0] == 0
    first_arrival = run.queue.times[1]
    assert run.trajectory.times[0] == first_arrival
    assert run.trajectory.kinds[0] == Kind.UP


def test_coupling_preconditions():
    p = ModelParams(4.0, 1.0, 100, 100)
    with pytest.raises(ValueError):
        simulate_coupled_domination(p, 2.5, 1.0)  # 2 mu beta0 >= lambda
    with pytest.raises(ValueError):
        simulate_coupled_domination(p, 0.9, 1.0)  # f_n > beta0 n


@settings(max_examples=100)
@given(st.integers(0, 2**63 - 1), st.integers(5, 60), st.floats(1.0, 1.9))
def test_coupling_dominates_for_every_seed(seed, n, beta0):
    p = ModelParams(4.0, 1.0, n, n)
    run = simulate_coupled_domination(p, beta0, horizon=3.0, seed=seed)
    assert run.violations == 0
    assert check_trajectory(run.trajectory) == []


@settings(max_examples=150)
@given(st.integers(0, 2**32 - 1))
def test_exact_law_invariants(seed):
    p, s0, horizon = random_config(np.random.default_rng(seed))
    tr = simulate(p, s0, horizon, seed=seed)
    assert check_trajectory(tr) == []
    if tr.absorbed:
        assert tr.final_state == (p.f_n, 0)
    assert simulate(p, s0, horizon, seed=seed).to_csv() == tr.to_csv()


def test_normal_scale_mean_losses():
    # limit rate 2 mu beta / (rho - 2 beta) = 1 -> about 10 losses by t = 10
    p = ModelParams(4.0, 1.0, 2000, 2000)
    runs = run_replicas(lambda s: simulate_on_grid(p, [10.0], seed=s), replica_seeds(21, 500))
    assert abs(np.mean([r.x0[0] for r in runs]) - 10.0) <= 0.5


def test_slow_scale_single_copy_count_tracks_queue():
    # X1 at time t / N behaves like an M/M/1 (arrival 2 mu beta, service lam) at time t
    p = ModelParams(4.0, 1.0, 2000, 2000)
    t = 3.0
    net = [int(simulate_on_grid(p, [t / p.n], seed=s).x1[0]) for s in replica_seeds(2, 3000)]
    q = Mm1Params(2.0, 4.0)
    queue = [simulate_mm1(q, 0, t, seed=s).value_at(t) for s in replica_seeds(3, 3000)]
    table = np.array([np.bincount(net, minlength=12)[:12], np.bincount(queue, minlength=12)[:12]])
    table = table[:, table.min(axis=0) >= 5]
    assert sps.chi2_contingency(table).pvalue > 1e-3
