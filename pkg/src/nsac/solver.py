"""Time stepping: Picard coupling of transport, phase field and momentum.

Each step iterates on the end-of-step velocity.  Given a guess, the density
is transported along characteristics, the phase field is advanced with that
density, the Galerkin matrices are assembled at the start, middle and end of
the step, and the coefficient ODE is integrated to produce a new velocity.
The loop stops once successive velocities agree to ``tol`` in L2.
"""
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from . import diagnostics
from .basis import build_basis, synthesize
from .core import Grid, integrate, norm_lp
from .errors import (
    DegenerateCoefficientError, DegenerateMassMatrixError, PositivityViolationError, StepRejectedError,
)
from .galerkin import assemble_system, momentum_step
from .initial import make_profile, read_initial_csv, regularize
from .phase import chemical_potential, chi_step
from .transport import advance_density, backward_flow

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-6


@dataclass(frozen=True)
class SimState:
    t: float
    rho: np.ndarray
    a: np.ndarray
    u: np.ndarray
    chi: np.ndarray
    mu: np.ndarray
    mass0: float


@dataclass
class StepReport:
    picard_iters: int = 0
    picard_residuals: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def contraction_factor(self):
        """Geometric-mean ratio of successive residuals (None with fewer than 2)."""
        r = self.picard_residuals
        if len(r) < 2 or r[0] <= 0:
            return None
        if r[-1] <= 0:
            return 0.0
        return (r[-1] / r[0]) ** (1.0 / (len(r) - 1))


@dataclass(frozen=True)
class Model:
    """Everything a step needs besides the state itself."""
    params: object
    grid: Grid
    basis: object
    integrator: str = "rk4"

    @property
    def N(self):
        return self.basis.N


def make_state(model, t, rho, a, chi, mass0):
    u = synthesize(a, model.basis)
    mu = chemical_potential(chi, rho, model.grid)
    return SimState(t, rho, np.asarray(a, dtype=float), u, chi, mu, mass0)


def picard_step(state, dt, tol, max_iters, model):
    """Advance one step by successive substitution on the end-of-step velocity."""
    if not dt > 0 or not tol > 0 or max_iters < 1:
        raise ValueError("need dt > 0, tol > 0 and max_iters >= 1")
    g, basis, params = model.grid, model.basis, model.params
    report = StepReport()
    u0 = state.u
    sys0 = assemble_system(state.rho, u0, state.chi, basis, params)
    try:
        return _iterate(state, dt, tol, max_iters, model, sys0, report)
    except (PositivityViolationError, DegenerateMassMatrixError, DegenerateCoefficientError) as exc:
        raise StepRejectedError(f"{type(exc).__name__} at t={state.t:g}: {exc}", report, dt / 2) from exc


def _iterate(state, dt, tol, max_iters, model, sys0, report):
    g, basis, params = model.grid, model.basis, model.params
    u0 = state.u
    a_guess = state.a
    u_guess = u0
    for it in range(1, max_iters + 1):
        um = 0.5 * (u0 + u_guess)
        flow = backward_flow((u0, um, u_guess), state.t, dt, g)
        if flow.clamped:
            report.warnings.append(f"{flow.clamped} foot points clamped")
        rho1 = advance_density(state.rho, flow, g)
        if not np.all(np.isfinite(rho1)):
            raise StepRejectedError(f"non-finite density at t={state.t:g}", report, dt / 2)
        rhom = 0.5 * (state.rho + rho1)
        chi1 = chi_step(state.chi, (state.rho, rho1), (u0, u_guess), dt, params, g)
        chim = 0.5 * (state.chi + chi1)
        sysm = assemble_system(rhom, um, chim, basis, params)
        sys1 = assemble_system(rho1, u_guess, chi1, basis, params)
        a_new = momentum_step(state.a, sys0, sysm, sys1, dt, model.integrator)
        u_new = synthesize(a_new, basis)
        res = norm_lp(u_new - u_guess, g, 2)
        report.picard_residuals.append(res)
        report.picard_iters = it
        if not math.isfinite(res):
            raise StepRejectedError(f"non-finite Picard residual at t={state.t}", report, dt / 2)
        a_guess, u_guess = a_new, u_new
        if res <= tol:
            break
    else:
        raise StepRejectedError(
            f"Picard iteration did not reach {tol:g} in {max_iters} iterations at t={state.t:g} "
            f"(last residual {report.picard_residuals[-1]:.3e}); retry with dt={dt / 2:g}",
            report, dt / 2)
    new = SimState(state.t + dt, rho1, a_guess, u_guess, chi1,
                   chemical_potential(chi1, rho1, g), state.mass0)
    return new, report


# -- run loop -----------------------------------------------------------------

EXIT_COMPLETED = "completed"
EXIT_BLOWUP = "blow-up threshold"
EXIT_BOUND = "density lower bound breached"
EXIT_REJECTED = "step rejected"


@dataclass
class RunResult:
    model: Model
    regularized: object
    snapshots: list
    records: list
    reports: list
    exit_reason: str = EXIT_COMPLETED
    steps_done: int = 0


def load_initial(cfg, grid):
    if cfg.initial.lower().endswith(".csv"):
        data = read_initial_csv(cfg.initial)
        if data.grid != grid:
            raise ValueError(f"{cfg.initial} has {data.grid.n} cells, config says n={cfg.n}")
        return data
    return make_profile(cfg.initial, grid)


def setup(cfg):
    grid = Grid(cfg.n)
    params = cfg.params
    basis = build_basis(params, grid, cfg.N)
    model = Model(params, grid, basis, cfg.integrator)
    data = load_initial(cfg, grid)
    reg = regularize(data, cfg.N, basis)
    state = make_state(model, 0.0, reg.rho0N, reg.u0N, reg.chi0N, integrate(reg.rho0N, grid))
    return model, reg, state


def _advance(state, dt, cfg, model):
    """One step, halving up to twice on rejection; returns a list of (state, report)."""
    last_exc = None
    for splits in (1, 2, 4):
        h = dt / splits
        out = []
        cur = state
        try:
            for _ in range(splits):
                cur, rep = picard_step(cur, h, cfg.picard_tol, cfg.picard_max_iters, model)
                out.append((cur, rep))
            if splits > 1:
                log.info("step at t=%g accepted after splitting into %d substeps", state.t, splits)
            return out
        except StepRejectedError as exc:
            last_exc = exc
            log.warning("%s", exc)
    raise last_exc


def run(cfg, observer=None, keep_snapshots=True):
    """March from 0 to T with fixed dt, recording diagnostics after every step.

    ``observer(state, record, report)`` is called for the initial state
    (report None) and after every accepted step, before any stopping check,
    so callers can stream output.
    """
    model, reg, state = setup(cfg)
    g, params = model.grid, model.params
    rec = diagnostics.initial_record(state, params, g, float(np.min(reg.rho0N)))
    result = RunResult(model, reg, [state] if keep_snapshots else [], [rec], [])
    if observer:
        observer(state, rec, None)
    for k in range(cfg.steps):
        try:
            accepted = _advance(state, cfg.dt, cfg, model)
        except StepRejectedError:
            result.exit_reason = EXIT_REJECTED
            break
        stop = None
        # pin the step end time to (k+1)*dt so t does not drift by accumulation
        last_state, last_rep = accepted[-1]
        accepted[-1] = (replace(last_state, t=(k + 1) * cfg.dt), last_rep)
        for new, rep in accepted:
            rec = diagnostics.update(rec, state, new, params, g)
            state = new
            result.records.append(rec)
            result.reports.append(rep)
            if keep_snapshots:
                result.snapshots.append(state)
            if observer:
                observer(state, rec, rep)
            if rec.rho_min < rec.rho_bound * (1.0 - BOUND_SLACK):
                stop = EXIT_BOUND
            elif rec.blowup_functional > cfg.blowup_limit:
                stop = EXIT_BLOWUP
            if stop:
                break
        result.steps_done = k + 1
        if stop:
            result.exit_reason = stop
            break
    return result
