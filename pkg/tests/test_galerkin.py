import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import simpson
from scipy.linalg import expm

from nsac.basis import build_basis, synthesize
from nsac.core import Grid, Params, derivative
from nsac.errors import DegenerateMassMatrixError
from nsac.galerkin import (GalerkinSystem, assemble_A, assemble_B, assemble_F,
                           assemble_F_ibp, momentum_step)

from conftest import trig_poly


@pytest.fixture
def basis():
    return build_basis(Params(), Grid(256), 6)


def _w(k, x):
    return np.sqrt(2.0) * np.sin(k * np.pi * x)


def _dw(k, x):
    return np.sqrt(2.0) * k * np.pi * np.cos(k * np.pi * x)


def _frozen(A, B, F):
    s = GalerkinSystem(A, B, F)
    return s, s, s


def _exact_frozen(a, A, B, F, t):
    # a' = -K a + g solved through the augmented matrix exponential
    K = np.linalg.solve(A, B)
    g = np.linalg.solve(A, F)
    n = len(a)
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = -K
    M[:n, n] = g
    return (expm(t * M) @ np.append(a, 1.0))[:n]


def _random_system(rng, N=6):
    Q = rng.standard_normal((N, N))
    A = np.eye(N) + 0.1 * Q @ Q.T
    B = np.diag(np.arange(1, N + 1, dtype=float)) + 0.3 * rng.standard_normal((N, N))
    F = rng.standard_normal(N)
    return A, B, F


# mass matrix

def test_unit_density_gives_identity(basis):
    g = basis.grid
    np.testing.assert_allclose(assemble_A(np.ones(g.size), basis), np.eye(6), atol=1e-10)
    np.testing.assert_allclose(assemble_A(2.0 * np.ones(g.size), basis), 2.0 * np.eye(6), atol=1e-10)


def test_mass_matrix_matches_brute_force_simpson(basis):
    x = basis.grid.nodes
    rho = 1.0 + 0.5 * np.sin(2 * np.pi * x)
    A = assemble_A(rho, basis)
    ref = np.array([[simpson(rho * _w(i, x) * _w(j, x), x=x) for j in range(1, 7)]
                    for i in range(1, 7)])
    np.testing.assert_allclose(A, ref, atol=1e-12)
    assert np.array_equal(A, A.T)


@given(st.integers(0, 2**32 - 1))
def test_mass_matrix_bounded_below_by_min_density(seed):
    rng = np.random.default_rng(seed)
    g = Grid(128)
    b = build_basis(Params(), g, 8)
    rho = 1.0 / 8 + trig_poly(g, [], rng.uniform(-1, 1, 5)) ** 2
    A = assemble_A(rho, b)
    assert np.array_equal(A, A.T)
    for _ in range(20):
        beta = rng.standard_normal(8)
        q = beta @ A @ beta
        assert q >= rho.min() * (beta @ beta) - 1e-9 * (beta @ beta)


# advection-stiffness matrix

def test_zero_velocity_gives_lame_diagonal(basis):
    g = basis.grid
    B = assemble_B(np.ones(g.size), np.zeros(g.size), basis)
    np.testing.assert_array_equal(B, np.diag(basis.eigenvalues))


def test_advection_matches_quadrature_oracle(basis):
    x = basis.grid.nodes
    u = _w(1, x)
    B = assemble_B(np.ones_like(x), u, basis)
    ref = np.array([[simpson(u * _dw(j, x) * _w(i, x), x=x) for j in range(1, 7)]
                    for i in range(1, 7)])
    np.testing.assert_allclose(B - np.diag(basis.eigenvalues), ref, atol=1e-12)


def test_advection_is_linear_in_velocity(basis):
    x = basis.grid.nodes
    rho = 1.0 + 0.3 * np.cos(np.pi * x)
    u = np.sin(np.pi * x) * (1 + x)
    lam = np.diag(basis.eigenvalues)
    B1 = assemble_B(rho, u, basis) - lam
    B2 = assemble_B(rho, 2.0 * u, basis) - lam
    # only the rounding of the lambda diagonal survives the subtraction
    np.testing.assert_allclose(B2, 2.0 * B1, rtol=0, atol=4 * np.finfo(float).eps * lam.max())
    off = ~np.eye(6, dtype=bool)
    np.testing.assert_array_equal(B2[off], 2.0 * B1[off])


@given(st.integers(0, 2**32 - 1))
def test_advection_energy_probe(seed):
    # with rho = 1: a^T (B - Lambda) a = -1/2 int u_x v^2, bounded by |u_x|_inf |a|^2 / 2
    rng = np.random.default_rng(seed)
    g = Grid(256)
    b = build_basis(Params(), g, 8)
    u = trig_poly(g, rng.standard_normal(4), [])
    a = rng.standard_normal(8)
    q = a @ (assemble_B(np.ones(g.size), u, b) - np.diag(b.eigenvalues)) @ a
    bound = 0.5 * np.abs(derivative(u, g, 1)).max() * (a @ a)
    assert abs(q) <= bound * (1 + 1e-8) + 1e-10


# load vector

def test_constant_phase_gives_zero_load(basis):
    g = basis.grid
    F = assemble_F(np.ones(g.size), np.ones(g.size), basis, Params())
    np.testing.assert_allclose(F, 0.0, atol=1e-12)


def test_capillary_load_example():
    b = build_basis(Params(), Grid(512), 6)
    x = b.grid.nodes
    F = assemble_F(np.ones_like(x), np.cos(np.pi * x), b, Params())
    # -chi_xx chi_x = -(pi^3/2) sin(2 pi x), projected on w_2
    assert F[1] == pytest.approx(-np.sqrt(2) * np.pi ** 3 / 4, abs=1e-8)
    np.testing.assert_allclose(np.delete(F, 1), 0.0, atol=1e-8)


def test_pressure_load_integration_by_parts():
    params = Params()
    errs = []
    for n in (64, 128, 256):
        g = Grid(n)
        b = build_basis(params, g, 6)
        x = g.nodes
        rho = 1.0 + 0.4 * np.cos(np.pi * x) + 0.1 * np.sin(3 * np.pi * x)
        chi = np.tanh((x - 0.4) / 0.2)
        # pressure part of the load is -<P_x, w_j> = +<P, w_j'>
        Fp = assemble_F(rho, np.zeros_like(x), b, params)
        ref = np.array([simpson(params.pressure(rho) * _dw(j, x), x=x) for j in range(1, 7)])
        errs.append((np.abs(Fp - ref).max(),
                     np.abs(assemble_F(rho, chi, b, params) - assemble_F_ibp(rho, chi, b, params)).max()))
    errs = np.array(errs)
    assert np.all(errs[:-1] / errs[1:] > 12.0)
    assert errs[-1, 0] < 1e-6 and errs[-1, 1] < 1e-5


# time integration

@pytest.mark.parametrize("method", ["rk4", "gauss2"])
def test_pure_diffusion_decay(method):
    lam = np.array([1.0, 4.0, 9.0, 16.0])
    N = len(lam)
    a0 = np.ones(N)
    dt = 0.05
    a1 = momentum_step(a0, *_frozen(np.eye(N), np.diag(lam), np.zeros(N)), dt, method=method)
    assert np.all(np.abs(a1 - np.exp(-lam * dt)) <= (lam * dt) ** 5 / 120 + 1e-15)


@pytest.mark.parametrize("method", ["rk4", "gauss2"])
def test_constant_force_reaches_steady_state(method):
    lam = np.array([2.0, 5.0, 11.0])
    F = np.array([1.0, -2.0, 0.5])
    a = np.zeros(3)
    for _ in range(400):
        a = momentum_step(a, *_frozen(np.eye(3), np.diag(lam), F), 0.05, method=method)
    np.testing.assert_allclose(a, F / lam, atol=1e-12)


@pytest.mark.parametrize("method", ["rk4", "gauss2"])
def test_frozen_random_system_matches_fine_integration(method):
    rng = np.random.default_rng(7)
    A, B, F = _random_system(rng)
    a0 = rng.standard_normal(6)
    dt = 0.01
    coarse = momentum_step(a0, *_frozen(A, B, F), dt, method=method)
    fine = a0
    for _ in range(1000):
        fine = momentum_step(fine, *_frozen(A, B, F), dt / 1000, method=method)
    exact = _exact_frozen(a0, A, B, F, dt)
    np.testing.assert_allclose(coarse, fine, atol=1e-10)
    np.testing.assert_allclose(fine, exact, atol=1e-12)


@pytest.mark.parametrize("method", ["rk4", "gauss2"])
def test_fourth_order_with_time_dependent_systems(method):
    # A(t) = (1 + t) I, B = diag(lam), F = 0: a_k(t) = (1 + t)^(-lam_k)
    lam = np.array([1.0, 2.0, 3.0])

    def sys(t):
        return GalerkinSystem((1 + t) * np.eye(3), np.diag(lam), np.zeros(3))

    errs = []
    for steps in (10, 20):
        dt = 1.0 / steps
        a = np.ones(3)
        for k in range(steps):
            t = k * dt
            a = momentum_step(a, sys(t), sys(t + dt / 2), sys(t + dt), dt, method=method)
        errs.append(np.abs(a - 2.0 ** (-lam)).max())
    assert errs[0] / errs[1] > 12.0


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_homogeneous_step_is_linear(seed, c1, c2):
    rng = np.random.default_rng(seed)
    A, B, _ = _random_system(rng)
    systems = _frozen(A, B, np.zeros(6))
    x, y = rng.standard_normal(6), rng.standard_normal(6)
    for method in ("rk4", "gauss2"):
        lhs = momentum_step(c1 * x + c2 * y, *systems, 0.01, method=method)
        rhs = c1 * momentum_step(x, *systems, 0.01, method=method) \
            + c2 * momentum_step(y, *systems, 0.01, method=method)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(c1) + abs(c2)))


def test_gauss2_stays_bounded_for_stiff_modes():
    lam = np.array([1e2, 1e4, 1e6])
    a = np.ones(3)
    for _ in range(50):
        a = momentum_step(a, *_frozen(np.eye(3), np.diag(lam), np.zeros(3)), 0.01, method="gauss2")
    assert np.all(np.abs(a) <= 1.0)
    blown = momentum_step(np.ones(3), *_frozen(np.eye(3), np.diag(lam), np.zeros(3)), 0.01)
    assert np.abs(blown).max() > 1.0


@pytest.mark.parametrize("method", ["rk4", "gauss2"])
def test_indefinite_mass_matrix_is_rejected(method):
    A = np.diag([1.0, -1.0, 1.0])
    with pytest.raises(DegenerateMassMatrixError):
        momentum_step(np.ones(3), *_frozen(A, np.eye(3), np.zeros(3)), 0.01, method=method)


def test_unknown_integrator():
    with pytest.raises(ValueError):
        momentum_step(np.ones(2), *_frozen(np.eye(2), np.eye(2), np.zeros(2)), 0.1, method="euler")


def test_galerkin_velocity_synthesis(basis):
    # a_j = <u, w_j> round-trips through the step when dt = 0 and F = B a
    x = basis.grid.nodes
    a = np.array([0.3, -0.1, 0.05, 0.0, 0.02, -0.01])
    u = synthesize(a, basis)
    s = GalerkinSystem(assemble_A(np.ones_like(x), basis), assemble_B(np.ones_like(x), u, basis), None)
    s.F = s.B @ a
    np.testing.assert_allclose(momentum_step(a, s, s, s, 0.1), a, atol=1e-13)
