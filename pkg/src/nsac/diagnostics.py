"""Energy equality, mass, Phi(t), blow-up integrals and time-weighted norms.

Every quantity here is a function of the nodal fields (t, rho, u, chi, mu)
of consecutive states, so the same code recomputes the diagnostics from
snapshot files after a run.
"""
from dataclasses import dataclass, fields, replace
import math

import numpy as np

from .core import derivative, integrate, norm_lp, norm_sobolev
from .phase import landau_F
from .transport import density_lower_bound


@dataclass(frozen=True)
class Snapshot:
    t: float
    rho: np.ndarray
    u: np.ndarray
    chi: np.ndarray
    mu: np.ndarray


@dataclass(frozen=True)
class Rates:
    """Instantaneous integrands at one record time."""
    dissipation: float
    grad_u_inf: float
    u_inf_sq: float
    grad_chi_inf_sq: float
    phi_sup: float
    phi_int: float


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    t: float
    energy: float
    dissipation_cum: float
    energy_residual: float
    mass: float
    rho_min: float
    rho_bound: float
    phi: float
    J1: float
    J2: float
    J3: float
    w_rho_ut: float
    w_grad_chit: float
    w_u_xx: float
    w_chi_xxx: float
    mu_consistency: float
    # bookkeeping carried between records, not written out
    E0: float
    rho0_min: float
    phi_sup: float
    phi_int: float
    rates: Rates

    @property
    def blowup_functional(self):
        """||u_x||_{L1 Linf} + ||u||_{L2 Linf} + ||chi_x||_{L2 Linf} up to t."""
        return self.J1 + math.sqrt(self.J2) + math.sqrt(self.J3)


CSV_FIELDS = tuple(f.name for f in fields(DiagnosticsRecord))[:17]


def energy(state, params, grid):
    """Kinetic + pressure + gradient + potential energy of a state."""
    rho, u = state.rho, state.u
    dchi = derivative(state.chi, grid, 1)
    return (0.5 * integrate(rho * u * u, grid)
            + params.A / (params.gamma - 1.0) * integrate(rho ** params.gamma, grid)
            + 0.5 * integrate(dchi * dchi, grid)
            + integrate(rho * landau_F(state.chi), grid))


def dissipation_rate(state, params, grid):
    """||mu||^2 + nu ||u_x||^2 + (lambda + nu) ||div u||^2; in 1D div u = u_x."""
    ux = derivative(state.u, grid, 1)
    gu = integrate(ux * ux, grid)
    return integrate(state.mu * state.mu, grid) + (2.0 * params.nu + params.lam) * gu


def _sq(f, grid):
    return integrate(f * f, grid)


def _instant(state, prev, params, grid):
    t = state.t
    u, rho, chi = state.u, state.rho, state.chi
    ux = derivative(u, grid, 1)
    uxx = derivative(u, grid, 2)
    chix = derivative(chi, grid, 1)
    chixxx = derivative(chi, grid, 3)
    if prev is not None:
        dt = t - prev.t
        ut = (u - prev.u) / dt
        chit = (chi - prev.chi) / dt
        uxt = derivative(ut, grid, 1)
        chixt = derivative(chit, grid, 1)
        mu_kin = -rho * (chit + u * chix)
        mu_consistency = norm_lp(state.mu - mu_kin, grid, 2)
    else:
        # time derivatives are undefined on the first record; the sqrt(t) weights vanish there
        ut = chit = uxt = chixt = np.zeros_like(u)
        mu_consistency = math.nan
    rho_ut2 = integrate(rho * ut * ut, grid)
    chixt2 = _sq(chixt, grid)
    uxx2 = _sq(uxx, grid)
    chixxx2 = _sq(chixxx, grid)
    sup_term = (norm_sobolev(rho, grid, 1, params.q) + _sq(ux, grid) + t * rho_ut2
                + norm_sobolev(chi, grid, 2, 2) ** 2 + _sq(rho * chit, grid) + t * chixt2)
    int_term = uxx2 + rho_ut2 + t * _sq(uxt, grid) + chixxx2 + chixt2
    rates = Rates(
        dissipation=dissipation_rate(state, params, grid),
        grad_u_inf=float(np.max(np.abs(ux))),
        u_inf_sq=float(np.max(np.abs(u))) ** 2,
        grad_chi_inf_sq=float(np.max(np.abs(chix))) ** 2,
        phi_sup=sup_term,
        phi_int=int_term,
    )
    st = math.sqrt(t)
    weighted = (st * math.sqrt(rho_ut2), st * math.sqrt(chixt2),
                st * math.sqrt(uxx2), st * math.sqrt(chixxx2))
    return rates, weighted, mu_consistency


def initial_record(state, params, grid, rho0_min=None):
    """Record at the first state; every time integral starts at 0."""
    rates, weighted, mu_c = _instant(state, None, params, grid)
    E = energy(state, params, grid)
    rho0_min = float(np.min(state.rho)) if rho0_min is None else rho0_min
    return DiagnosticsRecord(
        step=0, t=state.t, energy=E, dissipation_cum=0.0, energy_residual=0.0,
        mass=integrate(state.rho, grid), rho_min=float(np.min(state.rho)),
        rho_bound=density_lower_bound(rho0_min, 0.0), phi=rates.phi_sup + 1.0,
        J1=0.0, J2=0.0, J3=0.0,
        w_rho_ut=weighted[0], w_grad_chit=weighted[1], w_u_xx=weighted[2], w_chi_xxx=weighted[3],
        mu_consistency=mu_c, E0=E, rho0_min=rho0_min, phi_sup=rates.phi_sup, phi_int=0.0,
        rates=rates,
    )


def update(record_prev, state_prev, state, params, grid):
    """Advance every time integral from ``state_prev`` to ``state`` by the trapezoid rule."""
    rates, weighted, mu_c = _instant(state, state_prev, params, grid)
    r0 = record_prev.rates
    half = 0.5 * (state.t - state_prev.t)
    J1 = record_prev.J1 + half * (r0.grad_u_inf + rates.grad_u_inf)
    J2 = record_prev.J2 + half * (r0.u_inf_sq + rates.u_inf_sq)
    J3 = record_prev.J3 + half * (r0.grad_chi_inf_sq + rates.grad_chi_inf_sq)
    diss = record_prev.dissipation_cum + half * (r0.dissipation + rates.dissipation)
    phi_sup = max(record_prev.phi_sup, rates.phi_sup)
    phi_int = record_prev.phi_int + half * (r0.phi_int + rates.phi_int)
    E = energy(state, params, grid)
    return replace(
        record_prev,
        step=record_prev.step + 1, t=state.t, energy=E, dissipation_cum=diss,
        energy_residual=E + diss - record_prev.E0, mass=integrate(state.rho, grid),
        rho_min=float(np.min(state.rho)),
        rho_bound=density_lower_bound(record_prev.rho0_min, J1),
        phi=phi_sup + phi_int + 1.0, J1=J1, J2=J2, J3=J3,
        w_rho_ut=weighted[0], w_grad_chit=weighted[1], w_u_xx=weighted[2], w_chi_xxx=weighted[3],
        mu_consistency=mu_c, phi_sup=phi_sup, phi_int=phi_int, rates=rates,
    )


def recompute(snapshots, params, grid, rho0_min=None):
    """Diagnostics series rebuilt from a sequence of snapshots alone."""
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("no snapshots to diagnose")
    records = [initial_record(snapshots[0], params, grid, rho0_min)]
    for prev, cur in zip(snapshots, snapshots[1:]):
        records.append(update(records[-1], prev, cur, params, grid))
    return records


def smallness_horizon(times, phis, params, eps0=None):
    """Largest T with T^((6-q)/(4q)) * Phi(T)^(gamma+1) <= eps0.

    ``eps0`` defaults to ``params.eps0``; passing it explicitly allows
    sweeping the threshold, including the boundary value 1.

    Between samples Phi is bounded by its value at the right end of the
    interval (Phi is nondecreasing), and the condition is inverted in closed
    form there; no extrapolation past the last sample.  Returns 0 when the
    first sample already fails.
    """
    times = np.asarray(times, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if times.size == 0:
        raise ValueError("empty Phi series")
    if np.any(np.diff(phis) < 0):
        raise ValueError("Phi must be nondecreasing")
    expo = (6.0 - params.q) / (4.0 * params.q)
    eps0 = params.eps0 if eps0 is None else float(eps0)

    def cap(phi):
        return (eps0 / phi ** (params.gamma + 1.0)) ** (1.0 / expo)

    if times[0] ** expo * phis[0] ** (params.gamma + 1.0) > eps0:
        return 0.0
    horizon = float(times[0])
    for k in range(times.size - 1):
        c = cap(phis[k + 1])
        if c < times[k + 1]:
            return max(horizon, min(c, float(times[k + 1])))
        horizon = float(times[k + 1])
    return horizon
