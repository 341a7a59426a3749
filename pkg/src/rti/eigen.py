"""Smallest eigenpair of the symmetric-definite pencil (E0 + s E1, J).

The iterative path never forms a dense matrix: inverse iteration with a
shift below the spectrum (E0 >= -g|xi| J holds exactly for the discrete
forms) gets close to the bottom eigenvector, Rayleigh-quotient iteration
polishes it, and a positive-definite factorization of A - (mu - delta) J
certifies that nothing lies below.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _kernels as K
from .errors import ConvergenceFailure
from .forms import test_pair

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
DENSE_CUTOFF = 200


@dataclass(frozen=True, eq=False)
class EigenResult:
    mu: float
    vector: np.ndarray
    residual: float
    iterations: int
    s: float
    pencil: object = field(repr=False)
    method: str = "iterative"
    outside_instability_regime: bool = False

    @property
    def lambda_sq(self):
        return -self.mu

    def split(self):
        return self.pencil.layout.split(self.vector)

    def e1_quotient(self):
        """E1(x) / J(x) for the minimizer."""
        return self.pencil.quad("E1", self.vector) / self.pencil.quad("J", self.vector)


def _normalize(pencil, x):
    nrm = np.sqrt(0.5 * pencil.quad("J", x))
    if not np.isfinite(nrm) or nrm == 0.0:
        raise ConvergenceFailure("iterate collapsed to zero")
    return x / nrm


def _orient(pencil, x):
    grid = pencil.grid
    d = pencil.layout.psi_node_dof(grid.interface_index)
    pivot = x[d] if x[d] != 0.0 else x[np.argmax(np.abs(x))]
    return -x if pivot < 0 else x


def _residual(A, J, x, mu):
    r = K.sym_band_matvec(A, x) - mu * K.sym_band_matvec(J, x)
    return float(np.linalg.norm(r) / np.linalg.norm(x))


def _rq(A, J, x):
    return float(x @ K.sym_band_matvec(A, x)) / float(x @ K.sym_band_matvec(J, x))


def _shifted(A, J, sigma):
    return A - sigma * J


def _dense_min(pencil, A):
    w, v = sla.eigh(K.band_to_dense(A), pencil.dense("J"), subset_by_index=[0, 0])
    return float(w[0]), np.ascontiguousarray(v[:, 0])


def _start_vector(pencil):
    k = pencil.xi_abs
    grid = pencil.grid
    if k >= 2:
        return test_pair(grid, k)
    return test_pair(grid, 2.0)


def min_eigen(pencil, s=0.0, *, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
              method="auto", x0=None):
    """Smallest eigenvalue ``mu`` of ``(E0 + s E1) x = mu J x`` and its vector.

    ``method`` is ``"iterative"``, ``"dense"`` or ``"auto"`` (dense below
    200 dofs). The vector is scaled so ``x.J x = 2`` with a positive
    interface value of psi.
    """
    s = float(s)
    if s < 0:
        raise ValueError("s must be nonnegative")
    A = pencil.energy(s)
    J = pencil.J
    flag = pencil.xi_abs < 2
    if method == "auto":
        method = "dense" if pencil.n < DENSE_CUTOFF else "iterative"
    if method == "dense":
        mu, x = _dense_min(pencil, A)
        x = _orient(pencil, _normalize(pencil, x))
        return EigenResult(mu, x, _residual(A, J, x, mu), 1, s, pencil, "dense", flag)
    if method != "iterative":
        raise ValueError(f"unknown method {method!r}")

    x = _start_vector(pencil) if x0 is None else np.array(x0, dtype=float)
    x = _normalize(pencil, x)
    sigma0 = -(pencil.g * pencil.xi_abs) - 1.0
    safe = K.spd_factor(_shifted(A, J, sigma0))
    if safe is None:
        raise ConvergenceFailure("shifted pencil not positive definite", best=None, s=s)

    it = 0
    mu = _rq(A, J, x)
    res = _residual(A, J, x, mu)
    # phase 1: shift below the spectrum
    while it < min(60, max_iter) and res > tol:
        x = _normalize(pencil, safe.solve(K.sym_band_matvec(J, x)))
        it += 1
        new_mu = _rq(A, J, x)
        res = _residual(A, J, x, new_mu)
        done = abs(new_mu - mu) <= 1e-6 * max(1.0, abs(new_mu))
        mu = new_mu
        if done:
            break
    anchor = (x.copy(), mu, res)

    # phase 2: Rayleigh-quotient iteration
    polished = res <= tol
    for _ in range(20):
        if polished or it >= max_iter:
            break
        try:
            fac = K.sym_factor(_shifted(A, J, mu))
            y = fac.solve(K.sym_band_matvec(J, x))
        except (np.linalg.LinAlgError, ValueError):
            break
        if not np.all(np.isfinite(y)):
            break
        x = _normalize(pencil, y)
        it += 1
        mu = _rq(A, J, x)
        res = _residual(A, J, x, mu)
        polished = res <= tol

    delta = 1e-8 * max(1.0, abs(mu))
    if not (polished and K.spd_factor(_shifted(A, J, mu - delta)) is not None):
        # fall back to plain inverse iteration from the phase-1 iterate
        x, mu, res = anchor
        while res > tol and it < max_iter:
            x = _normalize(pencil, safe.solve(K.sym_band_matvec(J, x)))
            it += 1
            mu = _rq(A, J, x)
            res = _residual(A, J, x, mu)
        if res > tol:
            best = EigenResult(mu, _orient(pencil, x), res, it, s, pencil, "iterative", flag)
            raise ConvergenceFailure(
                f"eigensolver residual {res:.3e} above {tol:.1e} after {it} iterations", best=best, s=s
            )
    x = _orient(pencil, x)
    return EigenResult(mu, x, res, it, s, pencil, "iterative", flag)


@dataclass(frozen=True, eq=False)
class MuCurve:
    points: list
    results: list
    lipschitz: float
    e1_sup: float

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    @property
    def mu(self):
        return np.array([m for _, m in self.points])


def mu_curve(pencil, s_values, **kwargs):
    """mu(s) along ascending ``s_values`` with warm-started solves.

    ``lipschitz`` is the largest observed |dmu/ds| between neighbours;
    ``e1_sup`` the largest E1/J quotient over the computed minimizers, which
    bounds it from above since mu is the infimum of affine functions of s.
    """
    s_values = [float(s) for s in s_values]
    if any(b < a for a, b in zip(s_values, s_values[1:])):
        raise ValueError("s_values must be ascending")
    results = []
    x0 = kwargs.pop("x0", None)
    for s in s_values:
        try:
            r = min_eigen(pencil, s, x0=x0, **kwargs)
        except ConvergenceFailure as exc:
            exc.s = s
            raise
        results.append(r)
        x0 = r.vector
    pts = [(r.s, r.mu) for r in results]
    slopes = [abs(m2 - m1) / (s2 - s1) for (s1, m1), (s2, m2) in zip(pts, pts[1:]) if s2 > s1]
    lip = max(slopes) if slopes else 0.0
    e1 = max((r.e1_quotient() for r in results), default=0.0)
    return MuCurve(pts, results, lip, e1)


def psi_at_interface(result):
    grid = result.pencil.grid
    return float(result.vector[result.pencil.layout.psi_node_dof(grid.interface_index)])
