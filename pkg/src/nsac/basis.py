"""Dirichlet eigenbasis of the 1D Lamé operator.

In one dimension the Lamé operator collapses to ``(2 nu + lambda) d^2/dx^2``,
whose Dirichlet eigenpairs on (0, 1) are known in closed form, so nothing is
solved numerically here.
"""
from dataclasses import dataclass

import numpy as np

from .core import Grid, Params, integrate, quadrature_weights
from .errors import GridMismatchError, UnderResolvedModeError


@dataclass(frozen=True, eq=False)
class LameBasis:
    params: Params
    grid: Grid
    N: int
    eigenvalues: np.ndarray
    #: (N, n+1) nodal values of the eigenfunctions; the endpoint columns are exactly zero
    eigenfunctions: np.ndarray
    #: (N, n+1) analytic first derivatives
    derivatives: np.ndarray

    def __len__(self):
        return self.N


def build_basis(params, grid, N):
    """First ``N`` eigenpairs of -L w = lambda w, w(0) = w(1) = 0.

    ``w_k = sqrt(2) sin(k pi x)`` and ``lambda_k = (2 nu + lambda) (k pi)^2``.
    At most ``n/4`` modes are allowed so the highest one keeps four nodes per
    wavelength.
    """
    N = int(N)
    if N < 1:
        raise ValueError("need at least one mode")
    if 4 * N > grid.n:
        raise UnderResolvedModeError(f"N={N} modes need n >= {4 * N} cells, grid has {grid.n}")
    k = np.arange(1, N + 1)
    kx = np.pi * np.outer(k, grid.nodes)
    w = np.sqrt(2.0) * np.sin(kx)
    w[:, 0] = 0.0
    w[:, -1] = 0.0
    dw = np.sqrt(2.0) * (np.pi * k)[:, None] * np.cos(kx)
    lam = params.lame * (np.pi * k) ** 2
    for arr in (w, dw, lam):
        arr.flags.writeable = False
    return LameBasis(params, grid, N, lam, w, dw)


def project(f, basis, grid=None):
    """Coefficients c_k = <f, w_k> (discrete L2 projection onto X_N)."""
    if grid is not None and grid != basis.grid:
        raise GridMismatchError(f"field lives on {grid}, basis on {basis.grid}")
    f = np.asarray(f, dtype=float)
    if f.shape != (basis.grid.n + 1,):
        raise GridMismatchError(f"field of shape {f.shape} does not match {basis.grid}")
    return basis.eigenfunctions @ (quadrature_weights(basis.grid.n) * f)


def synthesize(c, basis):
    """Nodal values of sum_k c_k w_k."""
    c = np.asarray(c, dtype=float)
    if c.shape != (basis.N,):
        raise ValueError(f"expected {basis.N} coefficients, got shape {c.shape}")
    return c @ basis.eigenfunctions


def synthesize_dx(c, basis):
    return np.asarray(c, dtype=float) @ basis.derivatives


def gram(basis):
    """Discrete Gram matrix <w_i, w_j>; the identity up to quadrature error."""
    W = basis.eigenfunctions
    return (W * quadrature_weights(basis.grid.n)) @ W.T


def l2_error_of_projection(f, basis):
    g = synthesize(project(f, basis), basis) - f
    return np.sqrt(integrate(g * g, basis.grid))
