import json
import math

import numpy as np
import pytest

from leafwise.conditions import (THEOREMS, check_conditions, envelope_checks, k2_value,
                                 kbar_value, k_uniqueness_value)
from leafwise.cubic import EnvelopeSet
from leafwise.geometry import GeometryInput
from leafwise.grid import ScalarField, TorusGrid
from leafwise.model import Coefficients
from leafwise.spectral import ground_state

from instances import single_violations

G = TorusGrid.uniform(64)


def _const(beta, p1, p2, p3, phi=0.0):
    co = Coefficients.constant(G, beta, p1, p2, p3, phi)
    return co, ground_state(co.beta)


def test_cubic_smallness_margin():
    co, sp = _const(-1.0, 3.5, 1.0, 1.0)
    rep = check_conditions("leaf", sp, coefficients=co, case="1")
    c = rep.check("field_cubic_smallness")
    assert c.lhs == pytest.approx(27 / 3.5 ** 3, abs=1e-12)
    assert round(c.lhs, 4) == 0.6297
    assert c.passed and c.margin == pytest.approx(1 - 27 / 3.5 ** 3, abs=1e-9)


def test_psi3_flatness_margin():
    g = G
    zero = ScalarField.constant(g, 0.0)
    for lo, ok in ((0.5, True), (0.3, False)):
        p3 = ScalarField.from_function(g, lambda x: -(lo + (1 - lo) * (1 + np.cos(x)) / 2))
        co = Coefficients(ScalarField.constant(g, 5.0), zero, zero, p3)
        rep = check_conditions("leaf_integrable", ground_state(co.beta), coefficients=co,
                               case="2")
        c = rep.check("field_psi3_flatness")
        assert c.passed is ok
        assert c.margin == pytest.approx(lo - 1 / 3, abs=1e-9)


def test_c1_window_margin():
    env = EnvelopeSet.constant(2.0, 0.5, 0.0)
    (c,), _ = envelope_checks("C1", 0.5, env)
    assert c.rhs == pytest.approx(2.0) and c.margin == pytest.approx(0.5, abs=1e-12)
    (c,), _ = envelope_checks("C1", 2.5, env)
    assert not c.passed and c.margin == pytest.approx(-0.5, abs=1e-12)


def test_regime_b_bounds_on_factored_instance():
    env = EnvelopeSet.constant(2.75, 1.0, 1.0)
    # max(18·2.75, 4·2.75³ + 27) / 4 = 110.1875 / 4
    assert kbar_value(env) == pytest.approx(1 + math.sqrt(27.546875), abs=1e-12)
    # max(36·2.75·2, 27·4 + 2.75³·16) / 16 = 440.75 / 16
    assert k_uniqueness_value(env) == pytest.approx(27.546875, abs=1e-12)
    checks, _ = envelope_checks("B", -10.0, env)
    byname = {c.name: c for c in checks}
    assert byname["lambda0_below_kbar"].margin == pytest.approx(
        -1 - math.sqrt(27.546875) + 10, abs=1e-9)
    assert byname["lambda0_uniqueness_bound"].margin == pytest.approx(
        10 - 1 - math.sqrt(27.546875), abs=1e-9)
    assert byname["envelope_psi3_spread"].margin == pytest.approx(2.0)
    checks, _ = envelope_checks("B", -4.75, env)
    assert not {c.name: c for c in checks}["lambda0_below_kbar"].passed


def test_negative_cubic_leaf_interval_uses_k1():
    co, sp = _const(-1.0, -2.75, 1.0, -1.0)
    rep = check_conditions("leaf", sp, coefficients=co, case="2")
    assert rep.extras["K1"] == pytest.approx(27.546875, abs=1e-12)
    lo, hi = rep.phi_interval
    assert lo == pytest.approx(1.0 + 1 + math.sqrt(27.546875), abs=1e-8)
    assert hi == math.inf
    # Φ = 0 is far below the interval
    assert rep.check("phi_in_interval").margin == pytest.approx(-(2 + math.sqrt(27.546875)),
                                                                 abs=1e-8)


def test_k2_groupings_differ_and_are_reported():
    co, sp = _const(-1.0, -1.0, 1.0, -1.0)
    a = k2_value(co, "as_printed")
    b = k2_value(co, "grouped")
    # ψ all one: as printed 27 + 3 + 16 = 46, grouped 27·4 + 16 = 124, first term 72
    assert a == pytest.approx(72 / 16)
    assert b == pytest.approx(124 / 16)
    rep = check_conditions("fibred", sp, coefficients=co, case="1", k2_grouping="grouped")
    assert rep.extras["k2_grouping"] == "grouped"
    with pytest.raises(ValueError):
        k2_value(co, "other")


def test_pseudo_riemannian_interval_from_geometry():
    geo = GeometryInput.constant(G, n=1, h_top_sq=2.0, t_bot_sq=1.0)
    from leafwise.geometry import coefficients_from_geometry
    co = coefficients_from_geometry(geo)
    sp = ground_state(co.beta_top)
    rep = check_conditions("pseudo_riemannian", sp, geometry=geo)
    lo, hi = rep.phi_interval
    # β⊤ = -1 so the interval is (-β⊤ - 1, -β⊤) = (0, 1)
    assert lo == pytest.approx(0.0, abs=1e-10) and hi == pytest.approx(1.0, abs=1e-10)


def test_report_serializes():
    co, sp = _const(-1.0, 3.5, 1.0, 1.0)
    d = check_conditions("leaf", sp, coefficients=co).to_dict()
    text = json.dumps(d)
    back = json.loads(text)
    assert set(back) >= {"theorem", "case", "checks", "phi_interval"}
    assert set(back["checks"][0]) == {"name", "lhs", "rhs", "pass", "margin"}


def test_unknown_theorem():
    co, sp = _const(-1.0, 3.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        check_conditions("nope", sp, coefficients=co)
    assert "attractor" in THEOREMS


def test_negative_psi2_is_flagged_for_every_theorem():
    co, sp = _const(-1.0, 3.5, -1.0, 1.0)
    for th in THEOREMS[:-1]:
        rep = check_conditions(th, sp, coefficients=co, case="1")
        assert "psi2_nonnegative" in rep.failing()


@pytest.mark.parametrize("regime", ["A", "B", "C1"])
def test_single_violation_is_named(regime):
    found = 0
    for target, lam, env in single_violations(regime, np.random.default_rng(4), 30):
        checks, _ = envelope_checks(regime, lam, env)
        others = [c.name for c in checks if not c.passed and c.name != target]
        if others:
            continue
        failing = [c.name for c in checks if not c.passed]
        assert failing == [target]
        found += 1
    assert found > 0


def test_sign_violation_is_named():
    g = G
    p1 = ScalarField.from_function(g, lambda x: 3.5 + 4.0 * np.cos(x))
    co = Coefficients(ScalarField.constant(g, -3.5), p1, ScalarField.constant(g, 1.0),
                      ScalarField.constant(g, 1.0))
    sp = ground_state(co.beta)
    rep = check_conditions("attractor", sp, coefficients=co, case="A")
    assert "psi1_positive" in rep.failing()
    co = Coefficients.constant(g, 10.0, 2.75, 1.0, -1.0)
    rep = check_conditions("attractor", ground_state(co.beta), coefficients=co, case="B")
    assert rep.failing() == ["psi1_negative"]
