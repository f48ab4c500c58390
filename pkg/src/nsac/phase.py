"""Allen-Cahn phase field: Landau potential, IMEX step and chemical potential.

The phase equation is advanced in its density-divided form

    chi_t + u chi_x - chi_xx / rho^2 + f(chi) / rho = 0,   chi_x = 0 at x = 0, 1,

which is only meaningful once the density has been floored away from zero.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import derivative, integrate
from .errors import DegenerateCoefficientError


def landau_F(s):
    """Double-well potential (s^2 - 1)^2 / 4."""
    s = np.asarray(s, dtype=float)
    return 0.25 * (s * s - 1.0) ** 2


def landau_f(s):
    """F'(s) = s^3 - s."""
    s = np.asarray(s, dtype=float)
    return s * s * s - s


@dataclass
class PotentialEval:
    F_values: np.ndarray
    f_values: np.ndarray


def potential(chi):
    return PotentialEval(landau_F(chi), landau_f(chi))


def _check_density(rho, floor):
    m = float(np.min(rho))
    if not m > 0 or (floor is not None and m < floor):
        raise DegenerateCoefficientError(
            f"density minimum {m:.3e} is below the floor {floor!r}; 1/rho^2 is degenerate")


def _neumann_second_difference(chi, h):
    """(chi[i-1] - 2 chi[i] + chi[i+1]) / h^2 with ghost-node reflection (exactly 0 on constants)."""
    d = np.diff(chi)
    lap = np.empty_like(chi)
    lap[1:-1] = d[1:] - d[:-1]
    lap[0] = 2.0 * d[0]
    lap[-1] = -2.0 * d[-1]
    return lap / (h * h)


def _mass_bands(m, scale):
    """Bands of scale_j * M_ij, where M is the compact (L[i-1] + 10 L[i] + L[i+1]) / 12 stencil
    with reflected end rows; ``scale`` multiplies column j."""
    lower = np.empty(m)
    upper = np.empty(m)
    diag = (10.0 / 12.0) * scale
    lower[1:] = scale[:-1] / 12.0
    upper[:-1] = scale[1:] / 12.0
    upper[0] = 2.0 * scale[1] / 12.0
    lower[-1] = 2.0 * scale[-2] / 12.0
    lower[0] = upper[-1] = 0.0
    return lower, diag, upper


def _apply_bands(bands, v):
    lower, diag, upper = bands
    out = diag * v
    out[1:] += lower[1:] * v[:-1]
    out[:-1] += upper[:-1] * v[1:]
    return out


def _neumann_laplacian(chi, h):
    """Fourth-order compact Laplacian: solves M L = (second difference) with Neumann reflection."""
    lower, diag, upper = _mass_bands(chi.shape[0], np.ones(chi.shape[0]))
    return _kernels.tridiag_solve(lower, diag, upper, _neumann_second_difference(chi, h))


def _implicit_increment(rhs, rho2, s):
    """Solve (I - s h^2 L / rho^2) delta = rhs for the compact Neumann Laplacian L.

    Multiplying through by M diag(rho^2) keeps the system tridiagonal:
    (M diag(rho^2) - s D) delta = M (rho^2 rhs), with D the unscaled second difference.
    """
    m = rho2.shape[0]
    lower, diag, upper = _mass_bands(m, rho2)
    b = _apply_bands((lower, diag, upper), rhs)
    lower = lower - s
    upper = upper - s
    diag = diag + 2.0 * s
    upper[0] -= s
    lower[-1] -= s
    lower[0] = upper[-1] = 0.0
    delta = _kernels.tridiag_solve(lower, diag, upper, b)
    if not np.all(np.isfinite(delta)):
        raise ArithmeticError(f"tridiagonal solve of size {m} produced non-finite values")
    return delta


# ARS(2,2,2): L-stable, stiffly accurate second-order IMEX Runge-Kutta
_GAMMA = 1.0 - 1.0 / np.sqrt(2.0)
_DELTA = 1.0 - 1.0 / (2.0 * _GAMMA)


def _at(pair, theta):
    """Field at fraction theta of the step; ``pair`` is a field or (start, end)."""
    if isinstance(pair, tuple):
        a, b = pair
        return a if theta == 0.0 else (1.0 - theta) * a + theta * b
    return pair


def _as_pair(f):
    if isinstance(f, tuple):
        return tuple(np.asarray(x, dtype=float) for x in f)
    return np.asarray(f, dtype=float)


def chi_step(chi, rho, u, dt, params, grid, floor=None):
    """One IMEX step of the phase equation.

    Diffusion chi_xx / rho^2 is implicit (Neumann ghost nodes, tridiagonal
    solves) and advection plus reaction are explicit, combined in the
    two-stage ARS(2,2,2) scheme, which is second order and L-stable so the
    stiff near-vacuum modes are damped rather than left ringing.  ``rho`` and
    ``u`` are either fixed fields or (start, end) pairs that are interpolated
    linearly to the stage times.  Stages are computed as increments, so
    chi = +-1 with u = 0 is reproduced bit-for-bit.
    """
    chi = np.asarray(chi, dtype=float)
    rho, u = _as_pair(rho), _as_pair(u)
    if floor is None:
        floor = params.rho_floor
    for r in (rho if isinstance(rho, tuple) else (rho,)):
        _check_density(r, floor)
    h2 = grid.h * grid.h

    def stage_ops(theta):
        r = _at(rho, theta)
        inv_rho2 = 1.0 / (r * r)
        vel = _at(u, theta)

        def diffusion(c):
            return inv_rho2 * _neumann_laplacian(c, grid.h)

        def explicit(c):
            return -vel * derivative(c, grid, 1) - landau_f(c) / r

        return diffusion, explicit, r * r

    g, d = _GAMMA, _DELTA
    diff1, expl1, _ = stage_ops(0.0)
    e1 = expl1(chi)
    diff2, expl2, coef2 = stage_ops(g)
    y2 = chi + _implicit_increment(g * dt * (diff2(chi) + e1), coef2, g * dt / h2)
    l2 = diff2(y2)
    e2 = expl2(y2)
    diff3, _, coef3 = stage_ops(1.0)
    rhs = dt * ((1.0 - g) * l2 + g * diff3(chi) + d * e1 + (1.0 - d) * e2)
    return chi + _implicit_increment(rhs, coef3, g * dt / h2)


def chemical_potential(chi, rho, grid, mode="elliptic", chi_prev=None, u=None, dt=None,
                       floor=None):
    """mu from rho mu = -chi_xx + rho f(chi) (elliptic) or mu = -rho (chi_t + u chi_x) (kinetic)."""
    chi = np.asarray(chi, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if mode == "elliptic":
        _check_density(rho, floor)
        return (-derivative(chi, grid, 2) + rho * landau_f(chi)) / rho
    if mode == "kinetic":
        if chi_prev is None or u is None or dt is None:
            raise ValueError("kinetic mode needs chi_prev, u and dt")
        return -rho * ((chi - chi_prev) / dt + u * derivative(chi, grid, 1))
    raise ValueError(f"unknown mode {mode!r}")


def phase_energy(chi, rho, grid):
    """1/2 ||chi_x||^2 + int rho F(chi)."""
    dchi = derivative(chi, grid, 1)
    return 0.5 * integrate(dchi * dchi, grid) + integrate(rho * landau_F(chi), grid)
