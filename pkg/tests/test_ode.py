import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from leafwise.ode import OdeParams, integrate, log_linear_fit, stationary_points

A = OdeParams.from_lambda0(3.5, 3.5, 1.0, 1.0)


def test_regime_a_stationary_points():
    pts = stationary_points(A)
    assert [p.y for p in pts] == pytest.approx([math.sqrt(0.5), 1.0, math.sqrt(2)], abs=1e-12)
    assert [p.stability for p in pts] == ["unstable", "stable", "unstable"]
    assert pts[1].slope == pytest.approx(-1.0, abs=1e-12)


def test_zero_cubic_stationary_points():
    pts = stationary_points(OdeParams(-1.0, 4.0, 0.0, 0.0))
    assert [(p.y, p.stability) for p in pts] == [(2.0, "stable")]
    pts = stationary_points(OdeParams(1.0, 1.0, 1.0, 0.0))
    assert len(pts) == 1 and pts[0].stability == "unstable"


def test_double_root_is_marginal():
    # -4βΨ2 = Ψ1² with β = -1, Ψ1 = 2, Ψ2 = 1: P(z) = -(z - 1)²
    pts = stationary_points(OdeParams(-1.0, 2.0, 1.0, 0.0))
    assert [p.stability for p in pts] == ["marginal"]
    assert pts[0].y == pytest.approx(1.0, abs=1e-6)


def test_integration_terminal_states():
    run = integrate(A, 0.9, 50.0)
    assert run.terminal == "converged" and abs(run.y_final - 1.0) < 1e-8
    assert run.y_star == pytest.approx(1.0, abs=1e-12)
    assert integrate(A, 0.7, 50.0).terminal == "blow_down"
    assert integrate(A, 1.5, 50.0).terminal == "blow_up"
    with pytest.raises(ValueError):
        integrate(A, -1.0, 1.0)


def test_matches_independent_integrator():
    t = np.linspace(0, 10, 101)
    for params, y0 in ((A, 0.9), (OdeParams(4.75, -2.75, 1.0, -1.0), 1.5),
                       (OdeParams(-1.0, 2.0, 0.5, 0.0), 1.0)):
        run = integrate(params, y0, 10.0, t_eval=t)
        ref = solve_ivp(lambda _, y: params.f(y), (0, 10), [y0], t_eval=t, method="DOP853",
                        rtol=1e-12, atol=1e-14).y[0]
        assert np.max(np.abs(run.y - ref)) < 1e-8


@given(st.floats(0.72, 1.40))
def test_trajectories_are_monotone_between_stationary_points(y0):
    t = np.linspace(0, 20, 401)
    run = integrate(A, y0, 20.0, t_eval=t)
    d = np.diff(run.y)
    if y0 < 1.0:
        assert np.all(d >= -1e-12)
    else:
        assert np.all(d <= 1e-12)


@pytest.mark.parametrize("params,y0,ystar", [
    (A, 0.9, 1.0),
    (OdeParams(-1.0, 4.0, 0.0, 0.0), 1.0, 2.0),
    (OdeParams(-1.0, 2.0, 0.5, 0.0), 1.0, math.sqrt((2 + math.sqrt(2)) / 2)),
])
def test_decay_rate_matches_linearization(params, y0, ystar):
    t = np.linspace(0, 25, 501)
    run = integrate(params, y0, 25.0, t_eval=t)
    rate, r2 = log_linear_fit(run.t, np.abs(run.y - ystar), floor=1e-11)
    expected = -float(params.fprime(ystar))
    assert abs(rate - expected) <= 0.1 * expected
    assert r2 > 0.99


def test_fit_needs_enough_points():
    with pytest.raises(ValueError):
        log_linear_fit(np.arange(5.0), np.exp(-np.arange(5.0)))


def test_serialization(tmp_path):
    run = integrate(A, 0.9, 5.0, t_eval=np.linspace(0, 5, 11))
    run.write_csv(tmp_path / "r.csv")
    run.write_json(tmp_path / "r.json")
    assert (tmp_path / "r.csv").read_text().startswith("t,y")
    rec = json.loads((tmp_path / "r.json").read_text())
    assert rec["terminal"] == run.terminal and rec["params"]["psi1"] == 3.5
