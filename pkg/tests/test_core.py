import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsac.core import Grid, Params, derivative, inner, integrate, norm_lp, norm_sobolev, quadrature_weights
from nsac.errors import InvalidExponentError, InvalidGridError, InvalidParamsError

from conftest import trig_poly

coef = st.floats(-1.0, 1.0, allow_nan=False)
trig = st.tuples(st.lists(coef, min_size=1, max_size=5), st.lists(coef, min_size=1, max_size=6))


# -- Params / Grid --------------------------------------------------------------

def test_params_defaults_and_floor():
    p = Params()
    assert (p.A, p.gamma, p.nu, p.lam, p.q, p.eps0) == (1.0, 2.0, 1.0, 0.0, 4.0, 0.5)
    assert p.floor(32) == 1.0 / 32
    assert Params(rho_floor=0.01).floor(32) == 0.01
    assert p.lame == 2.0


@pytest.mark.parametrize("kw", [
    dict(A=0.0), dict(gamma=1.0), dict(nu=0.0), dict(nu=1.0, lam=-0.7),
    dict(q=3.0), dict(q=6.0), dict(eps0=0.0), dict(eps0=1.0), dict(rho_floor=0.0),
])
def test_params_invariants_rejected(kw):
    with pytest.raises(InvalidParamsError):
        Params(**kw)


def test_params_lambda_boundary_admissible():
    Params(nu=1.0, lam=-2.0 / 3.0)  # 2 nu + 3 lambda = 0


def test_grid_nodes_uniform():
    g = Grid(64)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) > 0)
    assert np.allclose(np.diff(g.nodes), g.h, rtol=0, atol=1e-15)
    assert g.h == 1.0 / 64


def test_grid_too_small():
    with pytest.raises(InvalidGridError):
        Grid(7)


# -- derivative -----------------------------------------------------------------

def test_derivative_polynomial_exactness():
    g = Grid(64)
    x = g.nodes
    assert np.max(np.abs(derivative(x ** 2, g, 1) - 2 * x)) <= 1e-12
    for order, exact in ((1, 4 * x ** 3), (2, 12 * x ** 2), (3, 24 * x)):
        assert np.max(np.abs(derivative(x ** 4, g, order) - exact)) <= 1e-8


@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivative_of_constant_is_zero(order):
    g = Grid(32)
    assert np.all(derivative(np.full(33, 3.0), g, order) == 0.0)


def test_second_derivative_fourth_order():
    errs = []
    for n in (128, 256):
        g = Grid(n)
        f = np.sin(np.pi * g.nodes)
        err = np.max(np.abs(derivative(f, g, 2) + np.pi ** 2 * f))
        errs.append(err)
        assert err <= 100 * g.h ** 4
    # interior error ratio under doubling (boundary rows superconverge for this f)
    interior = []
    for n in (128, 256):
        g = Grid(n)
        f = np.sin(np.pi * g.nodes)
        e = np.abs(derivative(f, g, 2) + np.pi ** 2 * f)
        interior.append(np.max(e[n // 4: 3 * n // 4]))
    assert 14.0 <= interior[0] / interior[1] <= 18.0


def test_derivative_commutes_with_scaling():
    g = Grid(64)
    f = np.exp(np.sin(3 * g.nodes))
    for order in (1, 2, 3):
        assert np.array_equal(derivative(4.0 * f, g, order), 4.0 * derivative(f, g, order))


def test_derivative_bad_order():
    with pytest.raises(ValueError):
        derivative(np.zeros(33), Grid(32), 4)


# -- integrate ------------------------------------------------------------------

def test_integrate_examples():
    g = Grid(128)
    x = g.nodes
    assert integrate(np.ones_like(x), g) == pytest.approx(1.0, abs=1e-15)
    assert abs(integrate(x ** 3, g) - 0.25) <= 1e-14
    assert abs(integrate(np.sin(np.pi * x), g) - 2 / np.pi) <= 1e-8


def test_integrate_odd_n_cubic_exact():
    g = Grid(33)
    x = g.nodes
    assert abs(integrate(x ** 3, g) - 0.25) <= 1e-14
    assert abs(quadrature_weights(33).sum() - 1.0) <= 1e-14


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2 ** 31))
def test_integrate_linear(alpha, beta, seed):
    g = Grid(64)
    rng = np.random.default_rng(seed)
    f, h = rng.standard_normal(65), rng.standard_normal(65)
    lhs = integrate(alpha * f + beta * h, g)
    assert abs(lhs - alpha * integrate(f, g) - beta * integrate(h, g)) <= 1e-13 * (1 + abs(alpha) + abs(beta)) * 10


# -- norms ------------------------------------------------------------------------

def test_norm_lp_examples():
    g = Grid(128)
    x = g.nodes
    assert norm_lp(np.full_like(x, 2.0), g, 2) == pytest.approx(2.0, abs=1e-14)
    assert abs(norm_lp(np.sin(np.pi * x), g, math.inf) - 1.0) <= np.pi ** 2 * g.h ** 2 / 8
    assert norm_lp(x, g, 4) == pytest.approx(5 ** -0.25, abs=1e-9)


def test_norm_lp_rejects_small_p():
    with pytest.raises(InvalidExponentError):
        norm_lp(np.ones(33), Grid(32), 0.5)


def test_norm_sobolev_examples():
    g = Grid(256)
    for k in range(4):
        for p in (1, 2, 3.5):
            assert norm_sobolev(np.full(257, 1.7), g, k, p) == pytest.approx(1.7, rel=1e-13)
    c = np.cos(np.pi * g.nodes)
    assert abs(norm_sobolev(c, g, 1, 2) - math.sqrt(0.5 + np.pi ** 2 / 2)) <= 1e-6


def test_norm_sobolev_bad_k():
    with pytest.raises(ValueError):
        norm_sobolev(np.ones(33), Grid(32), 4, 2)


@given(trig)
def test_norm_sobolev_monotone_in_k(cs):
    g = Grid(128)
    f = trig_poly(g, *cs)
    assert norm_sobolev(f, g, 2, 2) >= norm_sobolev(f, g, 1, 2) - 1e-12


@given(trig)
def test_l2_norm_squared_is_integral_of_square(cs):
    g = Grid(256)
    f = trig_poly(g, *cs)
    assert abs(norm_lp(f, g, 2) ** 2 - integrate(f * f, g)) <= 1e-12
    assert inner(f, f, g) == pytest.approx(integrate(f * f, g), abs=1e-13)
