import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from dupnet import (GeometricLaw, ModelParams, fixed_point_residual, local_equilibrium, psi, psi_curve,
                    psi_ode, t_of_delta)


def test_origin():
    assert psi(1.0, 4.0, 1.0, 0.0) == 0.0


def test_half_lost_at_closed_form_time():
    t = 2 * math.log(2) - 0.5
    assert psi(1.0, 4.0, 1.0, t) == pytest.approx(0.5, abs=1e-12)


def test_against_independent_root_finder():
    beta, rho, mu = 0.8, 3.0, 1.3
    for t in (0.1, 1.0, 4.0):
        ref = brentq(lambda y: 0.5 * rho * math.log(1 - y / beta) + y + mu * t, 0, beta * (1 - 1e-15),
                     xtol=1e-15)
        assert psi(beta, rho, mu, t) == pytest.approx(ref, abs=1e-12)


def test_late_time_asymptotics():
    beta, rho = 1.0, 4.0
    for t in (10.0, 15.0):
        gap = beta - psi(beta, rho, 1.0, t)
        approx = beta * math.exp(-2 * (beta + t) / rho)
        assert abs(gap - approx) / approx <= 0.01


def test_rejects_non_stable():
    with pytest.raises(ValueError):
        psi(1.0, 2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        psi_ode(1.0, 1.0, 1.0, 1.0, 0.1)


def test_residuals_small():
    c = psi_curve(1.0, 4.0, 1.0, 10.0, 1e-3)
    assert np.max(np.abs(c.residuals)) <= 1e-10


def test_curve_shape():
    c = psi_curve(1.0, 4.0, 1.0, 10.0, 0.01)
    assert c.values[0] == 0.0
    assert np.all(np.diff(c.values) > 0) and np.all(c.values < 1.0)
    assert c.to_csv().splitlines()[0] == "t,psi,residual"


def test_zero_horizon():
    c = psi_curve(1.0, 4.0, 1.0, 0.0, 0.1)
    assert c.values.tolist() == [0.0]


def test_root_and_ode_agree():
    root = psi_curve(1.0, 4.0, 1.0, 10.0, 1e-3)
    ode = psi_ode(1.0, 4.0, 1.0, 10.0, 1e-3)
    assert np.max(np.abs(root.values - ode.values)) <= 1e-5


def test_initial_slope_is_loss_rate():
    p = ModelParams(4.0, 1.0, 100, 100)
    h = 1e-6
    slope = psi_ode(p.beta, p.rho, p.mu, h, h).values[1] / h
    assert slope == pytest.approx(p.mu * p.loss_rate, rel=1e-5)
    assert np.all(np.diff(psi_ode(1.0, 4.0, 1.0, 5.0, 0.01).values) > 0)


@pytest.mark.parametrize("beta, rho, mu, delta, expected", [
    (1.0, 4.0, 1.0, 0.5, 2 * math.log(2) - 0.5),
    (0.5, 2.0, 1.0, 1 - math.exp(-1), 1 - 0.5 * (1 - math.exp(-1))),
])
def test_t_of_delta(beta, rho, mu, delta, expected):
    assert t_of_delta(beta, rho, mu, delta) == pytest.approx(expected, abs=1e-14)


def test_t_of_delta_small_and_invalid():
    assert t_of_delta(1.0, 4.0, 1.0, 1e-12) == pytest.approx(0.0, abs=1e-11)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            t_of_delta(1.0, 4.0, 1.0, bad)


def test_inverse_consistency_on_grid():
    for delta in np.linspace(0.01, 0.99, 99):
        assert psi(1.0, 4.0, 1.0, t_of_delta(1.0, 4.0, 1.0, delta)) == pytest.approx(delta, abs=1e-11)


@given(st.floats(0.1, 5), st.floats(0.01, 1), st.floats(0.1, 5), st.floats(0.001, 0.999))
def test_inverse_consistency_property(beta, excess, mu, delta):
    rho = 2 * beta + excess
    t = t_of_delta(beta, rho, mu, delta)
    y = psi(beta, rho, mu, t)
    assert abs(y - delta * beta) <= 1e-9 * max(1.0, beta)
    assert abs(fixed_point_residual(beta, rho, mu, t, y)) <= 1e-9


def test_local_equilibrium_ratio():
    assert local_equilibrium(1.0, 4.0, 1.0, 0.0).ratio == 0.5
    assert local_equilibrium(0.7, 2.0, 1.0, 0.0).ratio == pytest.approx(0.7)
    assert local_equilibrium(1.0, 4.0, 1.0, 40.0).ratio < 1e-4


def test_geometric_law():
    g = GeometricLaw(0.3)
    k = np.arange(200)
    assert g.pmf(k).sum() == pytest.approx(1.0)
    assert g.pmf(-1) == 0.0
    assert g.sf(3) == pytest.approx(g.pmf(np.arange(3, 200)).sum())
    assert g.mean == pytest.approx((k * g.pmf(k)).sum())
    assert g.var == pytest.approx(((k - g.mean) ** 2 * g.pmf(k)).sum())
    draws = g.sample(np.random.default_rng(0), 100_000)
    assert draws.min() == 0
    assert abs(draws.mean() - g.mean) < 4 * math.sqrt(g.var / draws.size)
    with pytest.raises(ValueError):
        GeometricLaw(1.0)
    assert GeometricLaw(0.0).sample(np.random.default_rng(0), 5).tolist() == [0] * 5
