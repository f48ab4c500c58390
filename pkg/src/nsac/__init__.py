"""Vacuum-capable spectral-Galerkin solver for the 1D compressible
Navier-Stokes/Allen-Cahn system on [0, 1].

Density is carried along characteristics, the phase field by an IMEX step,
and the velocity by a Galerkin projection onto the Lame eigenbasis; the
three are coupled by a Picard iteration inside each time step.
"""
__version__ = "0.1.0"

from .core import Grid, Params, derivative, integrate, inner, norm_lp, norm_sobolev, quadrature_weights
from .basis import LameBasis, build_basis, project, synthesize
from .initial import (
    InitialData, RegularizedData, make_profile, mollify, regularize, solve_neumann_poisson,
    validate_initial, PROFILES,
)
from .transport import backward_flow, advance_density, density_lower_bound, fv_oracle_step
from .phase import chi_step, chemical_potential, landau_F, landau_f, potential
from .galerkin import GalerkinSystem, assemble_system, momentum_step
from .diagnostics import DiagnosticsRecord, Snapshot, recompute, smallness_horizon
from .config import RunConfig, load_config, parse_config, serialize
from .solver import SimState, StepReport, picard_step, run
from .errors import *  # noqa: F401,F403
