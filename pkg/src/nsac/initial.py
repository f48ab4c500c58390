"""Initial data: built-in profiles, CSV input, validation and regularization.

Regularization at level N follows the approximation scheme used to build
strong solutions: mollify the density and add a floor 1/N, mollify the
compatibility source h and shift it so that rho0N * h_N has zero mean, correct
the phase field by a Neumann solve so that chi0N'' = rho0N * h_N, and project
the velocity onto the first N Lamé modes.
"""
import csv
from dataclasses import dataclass, field
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.fft import dct, idct

from .basis import project
from .core import Grid, derivative, integrate, norm_lp
from .errors import IncompatibleDataError, MollifierRadiusError, SolvabilityError


@dataclass
class InitialData:
    grid: Grid
    rho0: np.ndarray
    u0: np.ndarray
    chi0: np.ndarray
    h: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        for key in ("rho0", "u0", "chi0", "h"):
            setattr(self, key, self.grid.check(getattr(self, key), key))


@dataclass
class RegularizedData:
    N: int
    rho0N: np.ndarray
    h_N: np.ndarray
    C_N: float
    chi0N: np.ndarray
    u0N: np.ndarray
    psi_N: np.ndarray = field(repr=False)
    #: ||psi_N'' - rhs||_2 of the Neumann correction
    solve_residual: float = 0.0


# -- mollifier ----------------------------------------------------------------

def bump_kernel(z):
    """Unnormalized C^2 bump (1 - z^2)^2 on |z| <= 1."""
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) < 1.0, (1.0 - z * z) ** 2, 0.0)


def mollify(f, grid, radius):
    """Convolve with the normalized bump of the given radius.

    The field is extended by even reflection about both endpoints.  The
    discrete kernel is normalized by its own sum, so constants are
    reproduced exactly and nonnegative input stays nonnegative.
    """
    if radius > 0.25:
        raise MollifierRadiusError(f"radius {radius} exceeds 1/4")
    if radius <= 0:
        raise MollifierRadiusError("radius must be positive")
    f = np.asarray(f, dtype=float)
    n = grid.n
    m = int(math.floor(radius * n))
    if m < 1:
        return f.copy()
    offsets = np.arange(-m, m + 1)
    k = bump_kernel(offsets / (radius * n))
    # mirror without repeating the endpoint: f[m], ..., f[1], f[0], ..., f[n], f[n-1], ..., f[n-m]
    ext = np.concatenate([f[m:0:-1], f, f[n - 1:n - m - 1:-1]])
    acc = np.zeros(n + 1)
    total = np.zeros(n + 1)
    for j, kj in enumerate(k):
        if kj == 0.0:
            continue
        acc += kj * ext[j:j + n + 1]
        total += kj
    return acc / total


# -- elliptic solve -----------------------------------------------------------

def solve_neumann_poisson(rhs, grid, tol=1e-8):
    """Zero-mean psi with psi'' = rhs, psi'(0) = psi'(1) = 0.

    Solved in the discrete cosine basis cos(k pi x) sampled at the nodes
    (DCT-I), dividing mode k by -(k pi)^2.
    """
    rhs = np.asarray(rhs, dtype=float)
    mean = integrate(rhs, grid)
    if abs(mean) > tol:
        raise SolvabilityError(f"Neumann problem needs a zero-mean right-hand side, got {mean:.3e}")
    c = dct(rhs, type=1)
    c[0] = 0.0
    k = np.arange(1, grid.n + 1)
    c[1:] /= -(k * np.pi) ** 2
    psi = idct(c, type=1)
    return psi - integrate(psi, grid)


# -- validation ---------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:<16} {c.value:.6e}  {c.detail}")
        lines.append("all checks passed" if self.passed else "validation FAILED")
        return "\n".join(lines)


def validate_initial(data, tol=1e-3):
    """Check the hypotheses on the initial data against ``tol``."""
    g = data.grid
    mass = integrate(data.rho0, g)
    comp = norm_lp(derivative(data.chi0, g, 2) - data.rho0 * data.h, g, 2)
    dchi = derivative(data.chi0, g, 1)
    checks = [
        Check("rho0_min", float(data.rho0.min()), bool(data.rho0.min() >= 0.0), "min rho0 >= 0"),
        Check("mass", mass, abs(mass - 1.0) <= tol, f"|int rho0 - 1| = {abs(mass - 1.0):.3e}"),
        Check("compatibility", comp, comp <= tol, "||chi0'' - rho0 h||_2"),
        Check("u0_boundary", float(max(abs(data.u0[0]), abs(data.u0[-1]))),
              bool(max(abs(data.u0[0]), abs(data.u0[-1])) <= tol), "u0 at x=0,1"),
        Check("chi0_neumann", float(max(abs(dchi[0]), abs(dchi[-1]))),
              bool(max(abs(dchi[0]), abs(dchi[-1])) <= tol), "chi0' at x=0,1"),
    ]
    return ValidationReport(checks)


# -- regularization -----------------------------------------------------------

def regularize(data, N, basis, tol=1e-8):
    g = data.grid
    r = 1.0 / N
    # the floor is params.rho_floor when set, otherwise the mollifier radius 1/N
    rho0N = mollify(data.rho0, g, r) + basis.params.floor(N)
    h_moll = mollify(data.h, g, r)
    C_N = integrate(rho0N * h_moll, g) / integrate(rho0N, g)
    h_N = h_moll - C_N
    rhs = rho0N * h_N - data.rho0 * data.h
    if abs(integrate(rhs, g)) > tol:
        raise IncompatibleDataError(
            f"int(rho0N h_N - rho0 h) = {integrate(rhs, g):.3e}; is int(rho0 h) = 0?")
    rhs = rhs - integrate(rhs, g)
    psi = solve_neumann_poisson(rhs, g, tol=tol)
    residual = norm_lp(derivative(psi, g, 2) - rhs, g, 2)
    return RegularizedData(
        N=N, rho0N=rho0N, h_N=h_N, C_N=C_N, chi0N=data.chi0 + psi,
        u0N=project(data.u0, basis), psi_N=psi, solve_residual=residual,
    )


def compatibility_residual(reg, grid):
    return norm_lp(derivative(reg.chi0N, grid, 2) - reg.rho0N * reg.h_N, grid, 2)


# -- built-in profiles --------------------------------------------------------

def constant_profile(grid):
    one = np.ones(grid.n + 1)
    return InitialData(grid, one, np.zeros_like(one), one.copy(), np.zeros_like(one), "constant")


def tanh_interface_profile(grid, width=0.15, amplitude=0.2, velocity=0.1):
    """Smooth positive density with a diffuse interface at x = 1/2.

    chi0 = tanh(-cos(pi x) / (pi * width)) behaves like tanh((x - 1/2)/width)
    near the interface and has zero slope at both ends; h = chi0'' / rho0.
    """
    x = grid.nodes
    rho0 = 1.0 + amplitude * np.sin(2 * np.pi * x)
    g = -np.cos(np.pi * x) / (np.pi * width)
    dg = np.sin(np.pi * x) / width
    d2g = np.pi * np.cos(np.pi * x) / width
    th = np.tanh(g)
    sech2 = 1.0 - th * th
    chi0 = th
    d2chi = sech2 * (d2g - 2.0 * th * dg * dg)
    u0 = velocity * np.sin(np.pi * x)
    u0[0] = u0[-1] = 0.0
    return InitialData(grid, rho0, u0, chi0, d2chi / rho0, "tanh-interface")


# rho0 = (35/8)(1 - 16 y^2)^3 on |y| < 1/4, y = x - 1/2; unit mass
_BUMP_C = 35.0 / 8.0
# antiderivative of (1 - 16 s^2)^4 from -1/4; total 64/315
_BUMP_P = Polynomial([1.0, 0.0, -16.0]) ** 4


def vacuum_bump_profile(grid, velocity=0.1):
    """Compactly supported density (vacuum on |x - 1/2| > 1/4).

    chi0 rises from -1 to +1 across the support with chi0'' = rho0 h exactly
    for h = -288 (x - 1/2), and is constant in the vacuum region.  Only rho0 h
    is constrained, so h is set to 0 where rho0 vanishes; extending -288 (x - 1/2)
    there instead would give the regularized data a large chemical potential
    in the vacuum and a needlessly stiff initial transient.
    """
    y = grid.nodes - 0.5
    inside = np.abs(y) < 0.25
    base = np.where(inside, 1.0 - 16.0 * y * y, 0.0)
    rho0 = _BUMP_C * base ** 3
    beta = -1260.0 / _BUMP_C
    h = np.where(inside, beta * y, 0.0)
    P = _BUMP_P.integ(lbnd=-0.25)
    ys = np.clip(y, -0.25, 0.25)
    chi0 = -1.0 + (315.0 / 32.0) * P(ys)
    u0 = velocity * np.sin(np.pi * grid.nodes)
    u0[0] = u0[-1] = 0.0
    return InitialData(grid, rho0, u0, chi0, h, "vacuum-bump")


PROFILES = {
    "constant": constant_profile,
    "tanh-interface": tanh_interface_profile,
    "vacuum-bump": vacuum_bump_profile,
}


def make_profile(name, grid):
    try:
        return PROFILES[name](grid)
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


CSV_COLUMNS = ("x", "rho0", "u0", "chi0", "h")


def read_initial_csv(path):
    """Read x,rho0,u0,chi0,h columns (header required) on uniform nodes of [0, 1]."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = [{k: float(r[k]) for k in CSV_COLUMNS} for r in reader]
    cols = {k: np.array([r[k] for r in rows]) for k in CSV_COLUMNS}
    grid = Grid(len(rows) - 1)
    if np.max(np.abs(cols["x"] - grid.nodes)) > 1e-9:
        raise ValueError(f"{path}: x column is not the uniform grid on [0, 1]")
    return InitialData(grid, cols["rho0"], cols["u0"], cols["chi0"], cols["h"], str(path))


def write_initial_csv(path, data):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in zip(data.grid.nodes, data.rho0, data.u0, data.chi0, data.h):
            w.writerow([repr(float(v)) for v in row])
