"""Tridiagonal kernels: Thomas elimination, pivoted LU and Sturm counts.

The inner loops are compiled with numba; everything else is thin numpy glue.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import SolverError


@njit(cache=True)
def _thomas_factor(lower, diag, upper):
    n = diag.shape[0]
    cp = np.empty(n - 1, dtype=diag.dtype)
    piv = np.empty(n, dtype=diag.dtype)
    piv[0] = diag[0]
    if piv[0] == 0:
        return cp, piv, False
    for i in range(n - 1):
        cp[i] = upper[i] / piv[i]
        piv[i + 1] = diag[i + 1] - lower[i] * cp[i]
        if piv[i + 1] == 0:
            return cp, piv, False
    return cp, piv, True


@njit(cache=True)
def _thomas_solve_factored(lower, cp, piv, rhs):
    n = piv.shape[0]
    y = np.empty_like(rhs)
    y[0] = rhs[0] / piv[0]
    for i in range(1, n):
        y[i] = (rhs[i] - lower[i - 1] * y[i - 1]) / piv[i]
    for i in range(n - 2, -1, -1):
        y[i] -= cp[i] * y[i + 1]
    return y


class ThomasFactorization:
    """Thomas elimination of a tridiagonal matrix, reusable across right-hand sides.

    ``lower[i]`` couples row ``i+1`` to column ``i``; ``upper[i]`` couples row ``i``
    to column ``i+1``. No pivoting: intended for diagonally dominant systems
    such as the Crank-Nicolson matrices.
    """

    def __init__(self, lower, diag, upper):
        dtype = np.result_type(lower, diag, upper, 1.0)
        self.lower = np.ascontiguousarray(lower, dtype=dtype)
        diag = np.ascontiguousarray(diag, dtype=dtype)
        upper = np.ascontiguousarray(upper, dtype=dtype)
        if not (self.lower.shape[0] == upper.shape[0] == diag.shape[0] - 1):
            raise ValueError("band lengths are inconsistent")
        self.cp, self.piv, ok = _thomas_factor(self.lower, diag, upper)
        if not ok:
            raise SolverError("zero pivot in tridiagonal elimination")

    def solve(self, rhs) -> np.ndarray:
        rhs = np.ascontiguousarray(rhs, dtype=np.result_type(rhs, self.piv.dtype))
        return _thomas_solve_factored(self.lower, self.cp, self.piv, rhs)


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system once by the Thomas algorithm."""
    return ThomasFactorization(lower, diag, upper).solve(rhs)


class CyclicFactorization:
    """Periodic tridiagonal solve via Sherman-Morrison on top of Thomas.

    ``corner_lo`` sits at (n-1, 0) and ``corner_hi`` at (0, n-1).
    """

    def __init__(self, lower, diag, upper, corner_lo, corner_hi):
        diag = np.array(diag, dtype=np.result_type(lower, diag, upper, corner_lo, 1.0))
        gamma = -diag[0]
        self._u = np.zeros(diag.shape[0], dtype=diag.dtype)
        self._u[0] = gamma
        self._u[-1] = corner_lo
        self._vlast = corner_hi / gamma
        mod = diag.copy()
        mod[0] -= gamma
        mod[-1] -= corner_lo * corner_hi / gamma
        self._inner = ThomasFactorization(lower, mod, upper)
        self._z = self._inner.solve(self._u)
        self._zden = 1.0 + self._z[0] + self._vlast * self._z[-1]

    def solve(self, rhs) -> np.ndarray:
        y = self._inner.solve(rhs)
        fact = (y[0] + self._vlast * y[-1]) / self._zden
        return y - fact * self._z


@njit(cache=True)
def _gttrf(dl, d, du):
    # LU with partial pivoting, LAPACK dgttrf layout
    n = d.shape[0]
    dl = dl.copy()
    d = d.copy()
    du = du.copy()
    du2 = np.zeros(max(n - 2, 0), dtype=d.dtype)
    ipiv = np.arange(n)
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] -= fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            ipiv[i] = i + 1
    return dl, d, du, du2, ipiv


@njit(cache=True)
def _gttrs(dl, d, du, du2, ipiv, b, tiny):
    n = d.shape[0]
    x = b.copy()
    for i in range(n - 1):
        if ipiv[i] == i:
            x[i + 1] -= dl[i] * x[i]
        else:
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - dl[i] * x[i]
    # back substitution; exact zero pivots are nudged (inverse iteration wants a huge, not infinite, answer)
    piv = d[n - 1] if d[n - 1] != 0 else tiny
    x[n - 1] /= piv
    if n > 1:
        piv = d[n - 2] if d[n - 2] != 0 else tiny
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / piv
    for i in range(n - 3, -1, -1):
        piv = d[i] if d[i] != 0 else tiny
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / piv
    return x


def shifted_solve(diag, offdiag, shift, rhs) -> np.ndarray:
    """Solve ``(T - shift I) x = rhs`` for symmetric tridiagonal ``T``, pivoting for stability."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(offdiag, dtype=float)
    scale = max(np.max(np.abs(diag)), np.max(np.abs(off), initial=0.0), 1.0)
    factors = _gttrf(off, diag - shift, off)
    return _gttrs(*factors, np.asarray(rhs, dtype=float), np.finfo(float).eps * scale)


@njit(cache=True)
def sturm_count(diag, offdiag, x):
    """Number of eigenvalues of the symmetric tridiagonal matrix strictly below ``x``."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    tiny = 1e-300
    if q < 0:
        count += 1
    for i in range(1, n):
        if q == 0:
            q = tiny
        q = diag[i] - x - offdiag[i - 1] * offdiag[i - 1] / q
        if q < 0:
            count += 1
    return count


@njit(cache=True)
def _bisect_eigenvalue(diag, offdiag, index, lo, hi):
    eps = 2.220446049250313e-16
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= 2.0 * eps * max(abs(lo), abs(hi)):
            break
        if sturm_count(diag, offdiag, mid) > index:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gershgorin_bounds(diag, offdiag) -> tuple[float, float]:
    diag = np.asarray(diag, dtype=float)
    off = np.abs(np.asarray(offdiag, dtype=float))
    radius = np.zeros_like(diag)
    radius[:-1] += off
    radius[1:] += off
    lo = float(np.min(diag - radius))
    hi = float(np.max(diag + radius))
    pad = 1e-12 * max(abs(lo), abs(hi), 1.0)
    return lo - pad, hi + pad


def bisect_eigenvalues(diag, offdiag, count: int) -> np.ndarray:
    """The ``count`` smallest eigenvalues, ascending, by Sturm-sequence bisection."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.ascontiguousarray(offdiag, dtype=float)
    lo, hi = gershgorin_bounds(diag, off)
    return np.array([_bisect_eigenvalue(diag, off, k, lo, hi) for k in range(count)])
