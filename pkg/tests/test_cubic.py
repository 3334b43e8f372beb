import dataclasses
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from leafwise.cubic import (EnvelopeSet, RegimeTag, c_of_z, classify_regime, discriminant_cubic,
                            envelope_coefficients, maclaurin_bound, positivity_criterion_a3,
                            resultant_sweep_R1, resultant_sweep_R2, resultant_sweep_R3,
                            root_ladder, roots_cubic, sylvester_resultant, trig_roots_depressed)
from leafwise.errors import HypothesisError
from leafwise.grid import ScalarField, TorusGrid

from instances import admissible

coef = st.floats(-10, 10, allow_nan=False)


def test_discriminant_examples():
    assert discriminant_cubic(1, -3.5, 3.5, -1) == pytest.approx(0.5625, abs=1e-12)
    assert discriminant_cubic(1, 0, 0, 0) == 0.0
    assert discriminant_cubic(1, 0, 1, 0) == -4.0


def test_discriminant_matches_printed_form_in_beta():
    # 4Ψ2β³ + Ψ1²β² − 18Ψ1Ψ2Ψ3β − (4Ψ1³ + 27Ψ2²Ψ3)Ψ3 for P = Ψ3z³ + βz² + Ψ1z − Ψ2
    rng = np.random.default_rng(3)
    for _ in range(50):
        b, p1, p2, p3 = rng.uniform(-3, 3, 4)
        printed = (4 * p2 * b ** 3 + p1 ** 2 * b ** 2 - 18 * p1 * p2 * p3 * b
                   - (4 * p1 ** 3 + 27 * p2 ** 2 * p3) * p3)
        assert discriminant_cubic(p3, b, p1, -p2) == pytest.approx(printed, rel=1e-12, abs=1e-12)


def test_roots_examples():
    assert roots_cubic(1, -3.5, 3.5, -1).real_roots == pytest.approx((0.5, 1.0, 2.0), abs=1e-12)
    r = roots_cubic(0, -1, 2, -0.5).real_roots
    assert r == pytest.approx((1 - math.sqrt(0.5), 1 + math.sqrt(0.5)), abs=1e-12)
    an = roots_cubic(1, 0, 1, 0)
    assert an.real_roots == (0.0,) and an.complex_pair
    with pytest.raises(ValueError):
        roots_cubic(0, 0, 0, 0)


@given(coef, coef, coef, coef)
def test_roots_residual_and_count(a3, a2, a1, a0):
    assume(abs(a3) > 1e-3)
    an = roots_cubic(a3, a2, a1, a0)
    scale = 1 + max(abs(a3), abs(a2), abs(a1), abs(a0))
    for r in an.real_roots:
        assert abs(an(r)) <= 1e-9 * scale * (1 + abs(r)) ** 3
    if an.discriminant > 1e-6 * scale ** 4:
        assert len(an.real_roots) == 3
    elif an.discriminant < -1e-6 * scale ** 4:
        assert len(an.real_roots) == 1


def test_trig_roots_examples():
    assert trig_roots_depressed(-3, 0) == pytest.approx((math.sqrt(3), 0, -math.sqrt(3)), abs=1e-12)
    assert trig_roots_depressed(-1, 0) == pytest.approx((1, 0, -1), abs=1e-12)
    assert trig_roots_depressed(-3, 2) == pytest.approx((1, 1, -2), abs=1e-7)
    with pytest.raises(ValueError):
        trig_roots_depressed(-3, 3)
    with pytest.raises(ValueError):
        trig_roots_depressed(1, 0)


@given(st.floats(-50, -1e-3), st.floats(-1, 1))
def test_trig_roots_vieta(p, frac):
    q = frac * 2 * (-p / 3) ** 1.5
    m1, m2, m3 = trig_roots_depressed(p, q)
    assert m1 >= m2 >= m3
    s = max(1.0, abs(p), abs(q))
    assert abs(m1 + m2 + m3) < 1e-9 * s
    assert abs(m1 * m2 + m1 * m3 + m2 * m3 - p) < 1e-9 * s
    assert abs(m1 * m2 * m3 + q) < 1e-9 * s


def test_c_of_z():
    assert c_of_z(0) == pytest.approx(1, abs=1e-12)
    assert c_of_z(1 / 27) == pytest.approx(-1, abs=1e-12)
    assert c_of_z(0.01) > c_of_z(0.02)
    v = [c_of_z(z) for z in np.linspace(0, 1 / 27, 1000)]
    assert all(a > b for a, b in zip(v, v[1:]))
    with pytest.raises(ValueError):
        c_of_z(0.05)


def test_maclaurin_examples():
    assert maclaurin_bound([1, -2, -5, 6]) == pytest.approx(6.0)
    assert maclaurin_bound([1, 1, 1]) == math.inf
    assert maclaurin_bound([1, 1, -8, 1]) == pytest.approx(1 + math.sqrt(8))
    assert max(np.roots([1, 1, -8, 1]).real) < 1 + math.sqrt(8)
    with pytest.raises(ValueError):
        maclaurin_bound([-1, 2])


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=5), st.floats(0.1, 10))
def test_maclaurin_bounds_every_positive_root(tail, lead):
    c = [lead] + tail
    assume(any(x < 0 for x in c))
    roots = np.roots(c)
    pos = [r.real for r in roots if abs(r.imag) < 1e-9 and r.real > 0]
    if pos:
        assert maclaurin_bound(c) >= max(pos) * (1 - 1e-12)


def test_positivity_criterion_examples():
    assert positivity_criterion_a3([2, -0.5, 1])
    t = np.linspace(0, 1, 1000)
    assert np.all(np.polyval([2, -0.5, 1], t) > 0)
    assert positivity_criterion_a3([1, 1])
    assert not positivity_criterion_a3([-3, 1])
    assert np.polyval([-3, 1], 1.0) == -2


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6))
def test_positivity_criterion_is_sufficient(c):
    if positivity_criterion_a3(c):
        assert np.all(np.polyval(c, np.linspace(0, 1, 1000)) > 0)


def test_envelope_coefficient_examples():
    g = TorusGrid.uniform(64)
    one = ScalarField.constant(g, 1.0)
    env = envelope_coefficients(ScalarField.constant(g, 2.0), one, one, one)
    assert env.psi1_minus == env.psi1_plus == 2.0
    p3 = ScalarField.from_function(g, lambda x: 0.75 + 0.25 * np.cos(x))
    env = envelope_coefficients(one, one, p3, one)
    assert (env.psi3_minus, env.psi3_plus) == (0.5, 1.0)
    g = TorusGrid.uniform(256)
    e0 = ScalarField.from_function(g, lambda x: 1 + 0.1 * np.sin(x))
    env = envelope_coefficients(ScalarField.constant(g, 1.0), ScalarField.constant(g, 1.0),
                                ScalarField.constant(g, 1.0), e0)
    assert env.psi2_plus == pytest.approx(0.9 ** -4, rel=1e-9)


def test_classify_regime():
    assert classify_regime(1.0, 1.0, -1.0) == RegimeTag.A
    assert classify_regime(-1.0, 1.0, 1.0) == RegimeTag.B
    assert classify_regime(0.0, 1.0, -1.0) == RegimeTag.C1
    assert classify_regime(0.0, 1.0, 1.0) == RegimeTag.C2
    assert classify_regime(0.0, 0.0, -1.0) == RegimeTag.C3
    assert classify_regime(np.array([1.0, -1.0]), 1.0, -1.0) == RegimeTag.DEGENERATE


def test_ladder_constant_regime_a():
    lad = root_ladder("A", 3.5, EnvelopeSet.constant(3.5, 1, 1))
    for k, v in (("y3", math.sqrt(0.5)), ("y2", 1.0), ("y1", math.sqrt(2))):
        assert lad.roots_plus[k] == pytest.approx(v, abs=1e-12)
        assert lad.roots_minus[k] == lad.roots_plus[k]
    assert lad.degenerate and not lad.ordering_verified


def test_ladder_constant_regime_b():
    lad = root_ladder("B", -4.75, EnvelopeSet.constant(2.75, 1, 1))
    assert lad.roots_plus["y1"] == pytest.approx(1.0, abs=1e-12)
    assert lad.y2_plus == pytest.approx(2.0, abs=1e-12)


def test_ladder_constant_regime_c1_and_c3():
    lad = root_ladder("C1", 1.0, EnvelopeSet.constant(2, 0.5, 0))
    assert lad.y2_minus == pytest.approx(math.sqrt((2 + math.sqrt(2)) / 2), abs=1e-12)
    lad = root_ladder("C3", 1.0, EnvelopeSet.constant(4, 0, 0))
    assert lad.y2_plus == 2.0 and lad.mu_plus == 1.0


@pytest.mark.parametrize("regime", ["A", "B", "C1"])
def test_ladder_orderings_on_admissible_instances(regime):
    for lam, env in admissible(regime, np.random.default_rng(11), 20):
        lad = root_ladder(regime, lam, env)
        assert lad.ordering_verified, lad.chain_values()
        assert lad.mu_plus is not None and lad.mu_plus > 0


def test_ladder_names_violated_hypothesis():
    with pytest.raises(HypothesisError) as ei:
        root_ladder("C1", 3.0, EnvelopeSet.constant(2, 0.5, 0))
    assert ei.value.check == "lambda0_c1_window"
    with pytest.raises(HypothesisError) as ei:
        root_ladder("B", 1.0, EnvelopeSet.constant(2.75, 1, 1))
    assert ei.value.check == "lambda0_negative"
    with pytest.raises(HypothesisError) as ei:
        root_ladder("A", 10.0, EnvelopeSet.constant(3.5, 1, 1))
    assert ei.value.check == "lambda0_in_window"
    with pytest.raises(HypothesisError) as ei:
        root_ladder("C2", 1.0, EnvelopeSet.constant(1, 1, 0))
    assert ei.value.check == "lambda0_positive"


def test_raising_psi2_plus_lowers_y2_minus():
    for lam, env in admissible("A", np.random.default_rng(5), 20):
        base = root_ladder("A", lam, env).y2_minus
        bumped = dataclasses.replace(env, psi2_plus=env.psi2_plus * (1 + 1e-3))
        assert root_ladder("A", lam, bumped).y2_minus < base


def test_resultant_linear_case():
    env = EnvelopeSet(0, 0, 0, 0, 0.5, 1.0)
    r = resultant_sweep_R3(-2.0, env)
    assert r.coeffs == pytest.approx((-1.5, 2.0))
    assert r.min_value == pytest.approx(0.5)


def test_collapsed_envelopes_reduce_r1_to_discriminant_term():
    env = EnvelopeSet.constant(3.5, 1, 1)
    r = resultant_sweep_R1(3.5, env)
    a3, a2, a1, a0 = r.coeffs
    assert a3 == a2 == a1 == 0
    assert a0 == pytest.approx(8 * 1 * discriminant_cubic(1, -3.5, 3.5, -1))


@pytest.mark.parametrize("regime,fns", [("A", (resultant_sweep_R1, resultant_sweep_R2)),
                                        ("B", (resultant_sweep_R3,))])
def test_resultant_closed_forms_match_sylvester(regime, fns):
    for lam, env in admissible(regime, np.random.default_rng(2), 30):
        for fn in fns:
            r = fn(lam, env)
            c, g = np.array(r.coeffs), np.array(r.generic_coeffs)
            assert np.max(np.abs(c - g)) <= 1e-8 * np.max(np.abs(g))


def test_sylvester_resultant_of_common_root():
    assert abs(sylvester_resultant([1, -3, 2], [1, -1])) < 1e-12
    assert sylvester_resultant([1, 0, -1], [1, -2]) == pytest.approx(3.0)
