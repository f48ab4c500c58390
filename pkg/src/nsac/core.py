"""Uniform grids on [0, 1], finite-difference calculus, quadrature and norms.

Fields are plain float64 arrays holding one value per node; every routine
takes the :class:`Grid` they live on.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
import scipy.sparse as sps

from .errors import InvalidExponentError, InvalidGridError, InvalidParamsError, GridMismatchError

MIN_CELLS = 8


@dataclass(frozen=True)
class Params:
    """Physical and model constants.

    ``rho_floor`` defaults to ``1/N`` once a regularization level is known;
    leave it as ``None`` to get that behaviour.
    """
    A: float = 1.0
    gamma: float = 2.0
    nu: float = 1.0
    lam: float = 0.0
    q: float = 4.0
    eps0: float = 0.5
    rho_floor: float | None = None

    def __post_init__(self):
        problems = []
        if not self.A > 0:
            problems.append("A must be > 0")
        if not self.gamma > 1:
            problems.append("gamma must be > 1")
        if not self.nu > 0:
            problems.append("nu must be > 0")
        if not 2 * self.nu + 3 * self.lam >= 0:
            problems.append("need 2*nu + 3*lambda >= 0")
        if not 3 < self.q < 6:
            problems.append("q must lie in (3, 6)")
        if not 0 < self.eps0 < 1:
            problems.append("eps0 must lie in (0, 1)")
        if self.rho_floor is not None and not self.rho_floor > 0:
            problems.append("rho_floor must be > 0")
        if problems:
            raise InvalidParamsError("; ".join(problems))

    @property
    def lame(self):
        """Coefficient of the 1D Lamé operator, 2*nu + lambda."""
        return 2.0 * self.nu + self.lam

    def floor(self, N):
        return self.rho_floor if self.rho_floor is not None else 1.0 / N

    def pressure(self, rho):
        return self.A * rho ** self.gamma


class Grid:
    """``n`` uniform cells on [0, 1] with ``n + 1`` nodes."""

    def __init__(self, n):
        n = int(n)
        if n < MIN_CELLS:
            raise InvalidGridError(f"need at least {MIN_CELLS} cells, got {n}")
        self.n = n
        self.h = 1.0 / n
        self.nodes = np.arange(n + 1) / n
        self.nodes.flags.writeable = False

    def __repr__(self):
        return f"Grid(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self):
        return hash(("Grid", self.n))

    @property
    def size(self):
        return self.n + 1

    def check(self, f, name="field"):
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n + 1,):
            raise GridMismatchError(f"{name} has shape {f.shape}, expected ({self.n + 1},)")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"{name} contains non-finite values")
        return f

    def sample(self, func):
        return np.asarray(func(self.nodes), dtype=float) * np.ones(self.n + 1)

    @property
    def weights(self):
        return quadrature_weights(self.n)


# -- stencils -----------------------------------------------------------------

_CENTRAL_WIDTH = {1: 5, 2: 5, 3: 7}
_ONESIDED_WIDTH = {1: 5, 2: 6, 3: 7}


def _fd_weights(offsets, order):
    """Weights w with sum_k w_k p(k) = p^(order)(0) for polynomials of degree < len(offsets)."""
    offsets = np.asarray(offsets, dtype=float)
    m = len(offsets)
    V = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


@lru_cache(maxsize=None)
def _diff_matrix(n, order):
    size = n + 1
    c = _CENTRAL_WIDTH[order]
    s = _ONESIDED_WIDTH[order]
    half = c // 2
    rows, cols, vals = [], [], []
    central = _fd_weights(np.arange(-half, half + 1), order)
    for i in range(size):
        if half <= i <= n - half:
            idx = np.arange(i - half, i + half + 1)
            w = central
        else:
            start = min(max(i - s // 2, 0), size - s)
            idx = np.arange(start, start + s)
            w = _fd_weights(idx - i, order)
        rows.extend([i] * len(idx))
        cols.extend(idx)
        vals.extend(w * n ** order)
    return sps.csr_matrix((vals, (rows, cols)), shape=(size, size))


def derivative(f, grid, order=1):
    """Fourth-order finite-difference derivative of a nodal field.

    Central stencils in the interior and one-sided stencils of the same
    accuracy near the ends, so polynomials of degree <= 4 are differentiated
    exactly.  Constants map to exactly zero.
    """
    if order == 0:
        return np.array(f, dtype=float)
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order}")
    if grid.n < MIN_CELLS:
        raise InvalidGridError("grid too small for 4th-order stencils")
    f = np.asarray(f, dtype=float)
    return _diff_matrix(grid.n, order) @ (f - f[0])


# -- quadrature and norms -----------------------------------------------------

@lru_cache(maxsize=None)
def quadrature_weights(n):
    """Composite Simpson weights on n uniform cells.

    For odd n the last three cells use Simpson's 3/8 rule, so the rule stays
    exact for cubics either way.
    """
    h = 1.0 / n
    w = np.zeros(n + 1)
    m = n if n % 2 == 0 else n - 3
    if m > 0:
        w[1:m:2] = 4.0
        w[2:m:2] = 2.0
        w[0] = w[m] = 1.0
        w[:m + 1] *= h / 3.0
    if m != n:
        w[m:] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * h / 8.0
    w.flags.writeable = False
    return w


def integrate(f, grid):
    """Simpson quadrature of a nodal field over [0, 1]."""
    return float(np.dot(quadrature_weights(grid.n), f))


def inner(f, g, grid):
    return integrate(np.asarray(f) * np.asarray(g), grid)


def norm_lp(f, grid, p=2):
    if p == np.inf:
        return float(np.max(np.abs(f)))
    if p < 1:
        raise InvalidExponentError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(np.asarray(f, dtype=float))
    if p == 2:
        return math.sqrt(max(integrate(a * a, grid), 0.0))
    return max(integrate(a ** p, grid), 0.0) ** (1.0 / p)


def norm_sobolev(f, grid, k, p=2):
    """W^{k,p} norm: (sum_{j<=k} ||D^j f||_p^p)^(1/p); p=inf takes the max."""
    if not 0 <= k <= 3:
        raise ValueError(f"k must be in 0..3, got {k}")
    parts = [norm_lp(derivative(f, grid, j), grid, p) for j in range(k + 1)]
    if p == np.inf:
        return max(parts)
    if p < 1:
        raise InvalidExponentError(f"p must be >= 1 or inf, got {p}")
    return sum(x ** p for x in parts) ** (1.0 / p)
