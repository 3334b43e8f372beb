import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from leafwise.grid import ScalarField, TorusGrid, inner_l2, laplacian
from leafwise.spectral import (assemble_operator, ground_state, rayleigh_quotient,
                               shifted_solve)

from conftest import random_trig



def _eigh_lambda0(beta):
    H = assemble_operator(beta, dense=True)
    H = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
    return sla.eigh(H, eigvals_only=True, subset_by_index=[0, 0])[0]


def test_operator_free_stencil():
    g = TorusGrid.uniform(8)
    H = assemble_operator(ScalarField.constant(g, 0.0))
    H = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
    h2 = g.spacing[0] ** 2
    ref = (2 * np.eye(8) - np.roll(np.eye(8), 1, 1) - np.roll(np.eye(8), -1, 1)) / h2
    assert np.allclose(H, ref, atol=1e-12)


def test_operator_shift_and_constants(rng):
    g = TorusGrid.uniform(32)
    H0 = assemble_operator(ScalarField.constant(g, 0.0)).toarray()
    Hc = assemble_operator(ScalarField.constant(g, 2.5)).toarray()
    assert np.allclose(Hc, H0 - 2.5 * np.eye(32), atol=1e-12)
    beta = random_trig(g, rng)
    H = assemble_operator(beta)
    assert np.allclose(H @ np.ones(32), -beta.values, atol=1e-12)
    Hd = H.toarray()
    assert np.max(np.abs(Hd - Hd.T)) < 1e-12
    u = random_trig(g, rng, offset=3.0)
    assert np.allclose(H @ u.values, (-laplacian(u) - beta * u).values, atol=1e-9)


def test_constant_beta_ground_state():
    g = TorusGrid((64,), (3.0,))
    res = ground_state(ScalarField.constant(g, 1.7))
    assert res.lambda0 == pytest.approx(-1.7, abs=1e-10)
    assert np.max(np.abs(res.ground_state.values - g.volume ** -0.5)) < 1e-8
    assert res.delta_e0 == pytest.approx(1.0, abs=1e-8)


def test_cosine_potential_pinned_by_dense_oracle():
    b512 = ScalarField.from_function(TorusGrid.uniform(512), np.cos)
    b1024 = ScalarField.from_function(TorusGrid.uniform(1024), np.cos)
    r = ground_state(b512)
    ref512 = _eigh_lambda0(b512)
    ref1024 = _eigh_lambda0(b1024)
    assert r.lambda0 == pytest.approx(ref512, abs=1e-10)
    assert -1.0 <= r.lambda0 <= 1.0
    # Richardson agreement between the two grids
    rich = (4 * ref1024 - ref512) / 3
    assert abs(rich - ref1024) < 1e-6
    # continuum value a0(q=2)/4 of the Mathieu equation y'' + (a - 2q cos 2t) y = 0
    assert rich == pytest.approx(-0.37848922126413, abs=1e-9)
    assert abs(int(np.argmax(r.ground_state.values))) <= 1


def test_ground_state_invariants(rng):
    g = TorusGrid.uniform(64)
    beta = random_trig(g, rng)
    r = ground_state(beta)
    assert np.min(r.ground_state.values) > 0
    assert inner_l2(r.ground_state, r.ground_state) == pytest.approx(1.0, abs=1e-10)
    assert r.residual < 1e-8
    assert r.gap > 0
    assert rayleigh_quotient(beta, r.ground_state) == pytest.approx(r.lambda0, abs=1e-10)


def test_inverse_iteration_matches_dense(rng):
    g = TorusGrid.uniform(16, dim=2)
    beta = random_trig(g, rng)
    a = ground_state(beta, method="dense")
    b = ground_state(beta, method="inverse")
    assert a.lambda0 == pytest.approx(b.lambda0, abs=1e-9)
    assert np.max(np.abs(a.ground_state.values - b.ground_state.values)) < 1e-7


@given(st.integers(0, 2 ** 31 - 1))
def test_eigenvalue_bounds_and_shift_invariance(seed):
    rng = np.random.default_rng(seed)
    g = TorusGrid.uniform(64)
    beta = random_trig(g, rng)
    r = ground_state(beta)
    assert -beta.values.max() - 1e-6 <= r.lambda0 <= -beta.values.min() + 1e-6
    c = float(rng.uniform(-3, 3))
    s = ground_state(beta + c)
    assert s.lambda0 == pytest.approx(r.lambda0 - c, abs=1e-9)
    assert np.max(np.abs(s.ground_state.values - r.ground_state.values)) < 1e-9


@given(st.integers(0, 2 ** 31 - 1))
def test_lambda0_monotone_in_beta(seed):
    rng = np.random.default_rng(seed)
    g = TorusGrid.uniform(32)
    b1 = random_trig(g, rng)
    b2 = b1 + abs(random_trig(g, rng))
    assert ground_state(b1).lambda0 >= ground_state(b2).lambda0 - 1e-12


def test_shifted_solve_examples(rng):
    g = TorusGrid.uniform(128)
    beta = random_trig(g, rng)
    r = ground_state(beta)
    e0 = r.ground_state
    u = shifted_solve(beta, 2.0, (r.lambda0 + 2.0) * e0)
    assert np.max(np.abs(u.values - e0.values)) < 1e-8
    rhs = random_trig(g, rng)
    u = shifted_solve(beta, 1e6, rhs)
    assert np.max(np.abs(u.values - rhs.values / 1e6)) <= 1e-4 * np.max(np.abs(rhs.values / 1e6))
    zero = ScalarField.constant(g, 0.0)
    c = ScalarField.from_function(g, np.cos)
    u = shifted_solve(zero, 1.0, c)
    assert np.max(np.abs(u.values - c.values / 2)) < 1e-3
    with pytest.raises(ValueError):
        shifted_solve(zero, 0.0, c)
