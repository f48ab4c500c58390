"""Hot inner loops with a numba path and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``NSAC_DISABLE_NUMBA=1`` to
force the numpy implementations (useful for debugging and for the benchmark
in ``benchmarks/bench_kernels.py``).  Both paths compute the same quantities;
they are not guaranteed to agree bit-for-bit, so determinism checks always
compare runs made with the same backend.
"""
import os

import numpy as np
from scipy.linalg import solve_banded

_DISABLED = os.environ.get("NSAC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# -- numpy reference implementations -----------------------------------------

def _tridiag_solve_np(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def _cubic_interp_np(values, n, points):
    s = points * n
    start = np.clip(np.floor(s).astype(np.int64) - 1, 0, n - 3)
    r = s - start
    w0 = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0
    w1 = r * (r - 2.0) * (r - 3.0) / 2.0
    w2 = -r * (r - 1.0) * (r - 3.0) / 2.0
    w3 = r * (r - 1.0) * (r - 2.0) / 6.0
    return (w0 * values[start] + w1 * values[start + 1]
            + w2 * values[start + 2] + w3 * values[start + 3])


def _quintic_interp_np(values, n, points):
    s = points * n
    start = np.clip(np.floor(s).astype(np.int64) - 2, 0, n - 5)
    r = s - start
    out = np.zeros(points.shape[0])
    for j in range(6):
        w = np.ones(points.shape[0])
        for m in range(6):
            if m != j:
                w *= (r - m) / (j - m)
        out += w * values[start + j]
    return out


def _fv_update_np(rho, u_face, frac, weights, dt):
    # face k sits between nodes k and k+1, at fraction frac[k] of the spacing;
    # frac = 1/2 gives the classic upwind flux
    jump = rho[1:] - rho[:-1]
    flux = np.zeros(rho.shape[0] + 1)
    flux[1:-1] = u_face * (rho[:-1] + frac * jump) - 0.5 * np.abs(u_face) * jump
    return rho - dt * (flux[1:] - flux[:-1]) / weights


# -- numba kernels ------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _tridiag_solve_nb(lower, diag, upper, rhs):
        n = diag.shape[0]
        c = np.empty(n)
        d = np.empty(n)
        c[0] = upper[0] / diag[0]
        d[0] = rhs[0] / diag[0]
        for i in range(1, n):
            m = diag[i] - lower[i] * c[i - 1]
            c[i] = upper[i] / m
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
        x = np.empty(n)
        x[n - 1] = d[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = d[i] - c[i] * x[i + 1]
        return x

    @njit(cache=True)
    def _cubic_interp_nb(values, n, points):
        out = np.empty(points.shape[0])
        for k in range(points.shape[0]):
            s = points[k] * n
            start = int(np.floor(s)) - 1
            if start < 0:
                start = 0
            elif start > n - 3:
                start = n - 3
            r = s - start
            w0 = -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0
            w1 = r * (r - 2.0) * (r - 3.0) / 2.0
            w2 = -r * (r - 1.0) * (r - 3.0) / 2.0
            w3 = r * (r - 1.0) * (r - 2.0) / 6.0
            out[k] = (w0 * values[start] + w1 * values[start + 1]
                      + w2 * values[start + 2] + w3 * values[start + 3])
        return out

    @njit(cache=True)
    def _quintic_interp_nb(values, n, points):
        out = np.empty(points.shape[0])
        for k in range(points.shape[0]):
            s = points[k] * n
            start = int(np.floor(s)) - 2
            if start < 0:
                start = 0
            elif start > n - 5:
                start = n - 5
            r = s - start
            acc = 0.0
            for j in range(6):
                w = 1.0
                for m in range(6):
                    if m != j:
                        w *= (r - m) / (j - m)
                acc += w * values[start + j]
            out[k] = acc
        return out

    @njit(cache=True)
    def _fv_update_nb(rho, u_face, frac, weights, dt):
        m = rho.shape[0]
        out = np.empty(m)
        left = 0.0
        for i in range(m):
            if i < m - 1:
                uf = u_face[i]
                jump = rho[i + 1] - rho[i]
                right = uf * (rho[i] + frac[i] * jump) - 0.5 * abs(uf) * jump
            else:
                right = 0.0
            out[i] = rho[i] - dt * (right - left) / weights[i]
            left = right
        return out

    tridiag_solve = _tridiag_solve_nb
    cubic_interp = _cubic_interp_nb
    quintic_interp = _quintic_interp_nb
    fv_update = _fv_update_nb
else:
    tridiag_solve = _tridiag_solve_np
    cubic_interp = _cubic_interp_np
    quintic_interp = _quintic_interp_np
    fv_update = _fv_update_np

numpy_kernels = {
    "tridiag_solve": _tridiag_solve_np,
    "cubic_interp": _cubic_interp_np,
    "quintic_interp": _quintic_interp_np,
    "fv_update": _fv_update_np,
}
numba_kernels = {
    "tridiag_solve": _tridiag_solve_nb,
    "cubic_interp": _cubic_interp_nb,
    "quintic_interp": _quintic_interp_nb,
    "fv_update": _fv_update_nb,
} if HAVE_NUMBA else {}
