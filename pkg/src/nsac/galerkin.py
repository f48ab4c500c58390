"""Galerkin system for the velocity coefficients.

With u = sum_j a_j w_j the momentum balance projected on X_N reads

    A(t) a' + B(t) a = F(t),
    A_ij = <rho w_j, w_i>,
    B_ij = <rho u~ w_j', w_i> + delta_ij lambda_j,
    F_j  = -<P(rho)_x + chi_xx chi_x, w_j>.

The pressure enters F with a minus sign: it is a force on the right-hand
side of the momentum equation.  With that sign the discrete system dissipates
the total energy at the rate nu||u_x||^2 + (nu+lambda)||u_x||^2 + ||mu||^2.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from .core import derivative, quadrature_weights
from .errors import DegenerateMassMatrixError


@dataclass
class GalerkinSystem:
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray

    def __add__(self, other):
        return GalerkinSystem(self.A + other.A, self.B + other.B, self.F + other.F)

    def scale(self, c):
        return GalerkinSystem(c * self.A, c * self.B, c * self.F)


def _weighted(basis, weight):
    return basis.eigenfunctions * (quadrature_weights(basis.grid.n) * weight)


def assemble_A(rho, basis):
    """Density-weighted mass matrix, symmetric by construction."""
    M = _weighted(basis, rho) @ basis.eigenfunctions.T
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def assemble_B(rho, u, basis):
    """Advection by the frozen velocity u plus the diagonal Lamé stiffness."""
    B = _weighted(basis, rho * u) @ basis.derivatives.T
    B[np.diag_indices_from(B)] += basis.eigenvalues
    return B


def load_density(rho, chi, params, grid):
    """Pointwise force density -(P(rho)_x + chi_xx chi_x)."""
    dp = derivative(params.pressure(rho), grid, 1)
    return -(dp + derivative(chi, grid, 2) * derivative(chi, grid, 1))


def assemble_F(rho, chi, basis, params):
    return basis.eigenfunctions @ (quadrature_weights(basis.grid.n)
                                   * load_density(rho, chi, params, basis.grid))


def assemble_F_ibp(rho, chi, basis, params):
    """Same load after integration by parts: <P(rho) + chi_x^2 / 2, w_j'>.

    Agrees with :func:`assemble_F` up to discretization error because the
    w_j vanish at both ends; kept as a consistency diagnostic.
    """
    g = basis.grid
    dchi = derivative(chi, g, 1)
    return basis.derivatives @ (quadrature_weights(g.n) * (params.pressure(rho) + 0.5 * dchi * dchi))


def assemble_system(rho, u, chi, basis, params):
    return GalerkinSystem(assemble_A(rho, basis), assemble_B(rho, u, basis),
                          assemble_F(rho, chi, basis, params))


def _factor(A):
    if not np.all(np.isfinite(A)):
        raise DegenerateMassMatrixError("density-weighted mass matrix has non-finite entries")
    try:
        return cho_factor(A)
    except LinAlgError as exc:
        raise DegenerateMassMatrixError(
            "density-weighted mass matrix is not positive definite; "
            "has the density dropped below its floor?") from exc


def _rk4(a, systems, dt):
    s0, sm, s1 = systems
    f0, fm, f1 = (_factor(s.A) for s in systems)

    def rhs(fac, s, y):
        return cho_solve(fac, s.F - s.B @ y)

    k1 = rhs(f0, s0, a)
    k2 = rhs(fm, sm, a + 0.5 * dt * k1)
    k3 = rhs(fm, sm, a + 0.5 * dt * k2)
    k4 = rhs(f1, s1, a + dt * k3)
    return a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


_GAUSS_C = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)
_GAUSS_A = np.array([[0.25, 0.25 - np.sqrt(3.0) / 6.0],
                     [0.25 + np.sqrt(3.0) / 6.0, 0.25]])


def _interp_system(systems, c):
    """Quadratic interpolation through the start/mid/end systems at fraction c."""
    l0 = 2.0 * (c - 0.5) * (c - 1.0)
    lm = -4.0 * c * (c - 1.0)
    l1 = 2.0 * c * (c - 0.5)
    s0, sm, s1 = systems
    return s0.scale(l0) + sm.scale(lm) + s1.scale(l1)


def _gauss2(a, systems, dt):
    # two-stage Gauss-Legendre: A-stable, order 4, for stiff (near-vacuum) runs
    n = a.shape[0]
    st = [_interp_system(systems, c) for c in _GAUSS_C]
    for s in st:
        _factor(s.A)
    M = np.zeros((2 * n, 2 * n))
    r = np.zeros(2 * n)
    for i, s in enumerate(st):
        rows = slice(i * n, (i + 1) * n)
        for j in range(2):
            cols = slice(j * n, (j + 1) * n)
            M[rows, cols] = dt * _GAUSS_A[i, j] * s.B
        M[rows, rows] += s.A
        r[rows] = s.F - s.B @ a
    k = lu_solve(lu_factor(M), r)
    return a + 0.5 * dt * (k[:n] + k[n:])


INTEGRATORS = {"rk4": _rk4, "gauss2": _gauss2}


def momentum_step(a, sys_start, sys_mid, sys_end, dt, method="rk4"):
    """Advance A a' = F - B a over one step.

    ``rk4`` is the classical explicit scheme with stage systems taken at the
    start, midpoint and end of the step; ``gauss2`` is the implicit two-stage
    Gauss rule with quadratically interpolated stage systems.
    """
    try:
        step = INTEGRATORS[method]
    except KeyError:
        raise ValueError(f"unknown integrator {method!r}") from None
    return step(np.asarray(a, dtype=float), (sys_start, sys_mid, sys_end), dt)
