"""Hot numeric kernels, each with a numba and a numpy/scipy implementation.

Symmetric banded matrices use LAPACK upper storage: ``ab[u + i - j, j] =
A[i, j]`` for ``j - u <= i <= j``. The public names at the bottom dispatch on
``RTI_NUMBA`` (see :mod:`rti._backend`); the ``*_nb`` / ``*_np`` variants
stay importable so tests and the benchmark can compare them directly.
"""
import numpy as np
import scipy.linalg as sla

from ._backend import USE_NUMBA, _HAVE_NUMBA

if _HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# banded symmetric matvec

@njit(cache=True, nogil=True)
def sym_band_matvec_nb(ab, x):
    u = ab.shape[0] - 1
    n = ab.shape[1]
    y = ab[u] * x
    for k in range(1, u + 1):
        for j in range(k, n):
            a = ab[u - k, j]
            y[j - k] += a * x[j]
            y[j] += a * x[j - k]
    return y


def sym_band_matvec_np(ab, x):
    u = ab.shape[0] - 1
    y = ab[u] * x
    for k in range(1, u + 1):
        a = ab[u - k, k:]
        y[:-k] += a * x[k:]
        y[k:] += a * x[:-k]
    return y


# ---------------------------------------------------------------------------
# banded LDL^T without pivoting

@njit(cache=True, nogil=True)
def band_ldl_nb(ab):
    """Return ``(lb, d)`` with ``lb[k, j] = L[j + k, j]`` (``lb[0] = 1``)."""
    u = ab.shape[0] - 1
    n = ab.shape[1]
    lb = np.zeros((u + 1, n))
    d = np.zeros(n)
    for j in range(n):
        lb[0, j] = 1.0
        acc = ab[u, j]
        for k in range(max(0, j - u), j):
            ljk = lb[j - k, k]
            acc -= ljk * ljk * d[k]
        d[j] = acc
        if acc == 0.0:
            return lb, d
        for i in range(j + 1, min(n, j + u + 1)):
            acc = ab[u + j - i, i]
            for k in range(max(0, i - u), j):
                acc -= lb[i - k, k] * lb[j - k, k] * d[k]
            lb[i - j, j] = acc / d[j]
    return lb, d


@njit(cache=True, nogil=True)
def band_ldl_solve_nb(lb, d, b):
    u = lb.shape[0] - 1
    n = lb.shape[1]
    x = b.copy()
    for i in range(n):
        acc = x[i]
        for k in range(max(0, i - u), i):
            acc -= lb[i - k, k] * x[k]
        x[i] = acc
    for i in range(n):
        x[i] = x[i] / d[i]
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for k in range(i + 1, min(n, i + u + 1)):
            acc -= lb[k - i, i] * x[k]
        x[i] = acc
    return x


class _LDLFactor:
    __slots__ = ("lb", "d")

    def __init__(self, lb, d):
        self.lb = lb
        self.d = d

    def solve(self, b):
        return band_ldl_solve_nb(self.lb, self.d, np.ascontiguousarray(b))


class _CholFactor:
    __slots__ = ("cb",)

    def __init__(self, cb):
        self.cb = cb

    def solve(self, b):
        return sla.cho_solve_banded((self.cb, False), b, check_finite=False)


class _LUFactor:
    __slots__ = ("full", "u")

    def __init__(self, ab):
        u = ab.shape[0] - 1
        n = ab.shape[1]
        full = np.zeros((2 * u + 1, n))
        full[: u + 1] = ab
        # lower half of the general band: full[u + i - j, j] = A[i, j], i > j
        for k in range(1, u + 1):
            full[u + k, : n - k] = ab[u - k, k:]
        self.full = full
        self.u = u

    def solve(self, b):
        return sla.solve_banded((self.u, self.u), self.full, b, check_finite=False)


def spd_factor_nb(ab):
    lb, d = band_ldl_nb(ab)
    if not np.all(d > 0.0):
        return None
    return _LDLFactor(lb, d)


def spd_factor_np(ab):
    try:
        cb = sla.cholesky_banded(ab, lower=False, check_finite=False)
    except np.linalg.LinAlgError:
        return None
    return _CholFactor(cb)


def sym_factor_nb(ab):
    lb, d = band_ldl_nb(ab)
    if not np.all(np.isfinite(d)) or np.any(d == 0.0):
        raise np.linalg.LinAlgError("singular banded LDL^T pivot")
    return _LDLFactor(lb, d)


def sym_factor_np(ab):
    return _LUFactor(ab)


# ---------------------------------------------------------------------------
# pencil assembly scatter: local 3x3 blocks on dofs (psi_left, psi_right, phi)

@njit(cache=True, nogil=True)
def scatter_band_nb(local, dofs, n, u):
    ab = np.zeros((u + 1, n))
    for e in range(local.shape[0]):
        for a in range(3):
            i = dofs[e, a]
            if i < 0:
                continue
            for b in range(3):
                j = dofs[e, b]
                if j < i:
                    continue
                ab[u + i - j, j] += local[e, a, b]
    return ab


def scatter_band_np(local, dofs, n, u):
    ab = np.zeros((u + 1, n))
    for a in range(3):
        for b in range(3):
            i = dofs[:, a]
            j = dofs[:, b]
            keep = (i >= 0) & (j >= i)
            np.add.at(ab, (u + i[keep] - j[keep], j[keep]), local[keep, a, b])
    return ab


# ---------------------------------------------------------------------------
# linearized evolution: element forces at fixed horizontal frequency

@njit(cache=True, nogil=True)
def evolve_forces_nb(a3, b1, b2, b3, q, h, W, rho, dp, Nl, Nr, mphi, xi1, xi2, g, omega):
    n_el = h.shape[0]
    zero = 0.0 * b1[0]
    db1 = np.empty_like(b1)
    db2 = np.empty_like(b2)
    F3 = np.zeros_like(b3)
    dq = np.empty_like(q)
    for e in range(n_el):
        inv_h = 1.0 / h[e]
        da3 = (a3[e + 1] - a3[e]) * inv_h
        d3 = (b3[e + 1] - b3[e]) * inv_h
        f1 = zero
        f2 = zero
        fl = zero
        fr = zero
        for k in range(W.shape[1]):
            a3g = a3[e] * Nl[k] + a3[e + 1] * Nr[k]
            dq[e, k] = -rho[e, k] * (xi1 * b1[e] + xi2 * b2[e] + d3)
            pi = dp[e, k] * q[e, k]
            w = W[e, k]
            grav = g * rho[e, k] * a3g
            f1 += w * (xi1 * pi + xi1 * grav)
            f2 += w * (xi2 * pi + xi2 * grav)
            t = w * (-g * q[e, k] - g * rho[e, k] * da3)
            fl += -w * pi * inv_h + t * Nl[k]
            fr += w * pi * inv_h + t * Nr[k]
        F3[e] += fl
        F3[e + 1] += fr
        db1[e] = f1 / mphi[e] + 2.0 * omega * b2[e]
        db2[e] = f2 / mphi[e] - 2.0 * omega * b1[e]
    return db1, db2, F3, dq


def evolve_forces_np(a3, b1, b2, b3, q, h, W, rho, dp, Nl, Nr, mphi, xi1, xi2, g, omega):
    inv_h = 1.0 / h
    da3 = (a3[1:] - a3[:-1]) * inv_h
    d3 = (b3[1:] - b3[:-1]) * inv_h
    a3g = a3[:-1, None] * Nl[None, :] + a3[1:, None] * Nr[None, :]
    dq = -rho * (xi1 * b1 + xi2 * b2 + d3)[:, None]
    pi = dp * q
    grav = g * rho * a3g
    f1 = np.sum(W * (xi1 * pi + xi1 * grav), axis=1)
    f2 = np.sum(W * (xi2 * pi + xi2 * grav), axis=1)
    t = W * (-g * q - g * rho * da3[:, None])
    fl = np.sum(-W * pi, axis=1) * inv_h + t @ Nl
    fr = np.sum(W * pi, axis=1) * inv_h + t @ Nr
    F3 = np.zeros_like(b3)
    F3[:-1] += fl
    F3[1:] += fr
    db1 = f1 / mphi + 2.0 * omega * b2
    db2 = f2 / mphi - 2.0 * omega * b1
    return db1, db2, F3, dq


# ---------------------------------------------------------------------------
# dispatch

if USE_NUMBA:
    sym_band_matvec = sym_band_matvec_nb
    spd_factor = spd_factor_nb
    sym_factor = sym_factor_nb
    scatter_band = scatter_band_nb
    evolve_forces = evolve_forces_nb
else:
    sym_band_matvec = sym_band_matvec_np
    spd_factor = spd_factor_np
    sym_factor = sym_factor_np
    scatter_band = scatter_band_np
    evolve_forces = evolve_forces_np


def band_to_dense(ab):
    """Expand symmetric upper band storage to a dense matrix."""
    u = ab.shape[0] - 1
    n = ab.shape[1]
    A = np.diag(ab[u].copy())
    for k in range(1, u + 1):
        off = ab[u - k, k:]
        A[np.arange(n - k), np.arange(k, n)] = off
        A[np.arange(k, n), np.arange(n - k)] = off
    return A
