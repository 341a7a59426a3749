"""Growth rate from the self-consistency condition s = 1 / lambda^2(|xi|, s).

Freezing ``s = 1/lambda^2`` turns the rotation term into a linear-in-s
penalty, so each trial ``s`` is a symmetric eigenproblem and the true rate
is a root of ``F(s) = -s mu(s) - 1``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
import scipy.optimize as so

from ._backend import thread_count
from .eigen import DEFAULT_TOL, min_eigen
from .errors import BracketFailure, ConvergenceFailure, NoGrowingMode
from .forms import assemble_pencil
from .grid import LOWER, UPPER

STABLE_TOL = 1e-12
EXPANSION = 1.25
MAX_EXPANSIONS = 200


class _StableMarker:
    __slots__ = ()

    def __repr__(self):
        return "Stable"

    def __bool__(self):
        return False


Stable = _StableMarker()


@dataclass(frozen=True, eq=False)
class DispersionPoint:
    xi_abs: float
    status: str
    s_star: float = math.nan
    lambda_: float = math.nan
    lambda0: float = math.nan
    fp_residual: float = math.nan
    mu_residual: float = math.nan
    margin: float = math.nan
    detail: str = ""
    eig: object = field(default=None, repr=False)

    @property
    def unstable(self):
        return self.status == "unstable"

    @property
    def mu(self):
        return self.eig.mu if self.eig is not None else math.nan

    def row(self):
        return (self.xi_abs, self.lambda_, self.lambda0, self.s_star, self.fp_residual, self.status)


def _pencil(profile, xi_abs):
    return assemble_pencil(profile, xi_abs)


def _stable_tol(pencil):
    """Roundoff floor for mu: STABLE_TOL times the acoustic stiffness k^2 max p'(rho0)."""
    prof = pencil.profile
    sound = max(float(np.max(prof.law(side).dp(prof.rho_nodes(side)))) for side in (LOWER, UPPER))
    return STABLE_TOL * max(1.0, pencil.xi_abs**2 * sound)


def lambda_no_rotation(profile, xi_abs, *, pencil=None, tol=DEFAULT_TOL):
    """Rotation-free rate sqrt(-mu_0), or ``Stable`` when mu_0 is zero up to roundoff."""
    pencil = _pencil(profile, xi_abs) if pencil is None else pencil
    r = min_eigen(pencil, 0.0, tol=tol)
    if r.mu >= -_stable_tol(pencil):
        return Stable
    return math.sqrt(-r.mu)


class _FEvaluator:
    """F(s) with eigenvector warm starts carried between calls."""

    def __init__(self, pencil, tol):
        self.pencil = pencil
        self.tol = tol
        self.x = None
        self.last = None

    def __call__(self, s):
        r = min_eigen(self.pencil, s, tol=self.tol, x0=self.x)
        self.x = r.vector
        self.last = r
        if r.mu >= 0.0:
            raise NoGrowingMode(f"mu({s!r}) = {r.mu!r} is not negative", s=s, mu=r.mu)
        return -s * r.mu - 1.0


def F_of_s(profile, xi_abs, s, *, pencil=None, tol=DEFAULT_TOL):
    s = float(s)
    if s < 0:
        raise ValueError("s must be nonnegative")
    pencil = _pencil(profile, xi_abs) if pencil is None else pencil
    return _FEvaluator(pencil, tol)(s)


def _point_at(pencil, s_star, lam0, tol):
    r = min_eigen(pencil, s_star, tol=tol)
    if r.mu >= 0.0:
        raise NoGrowingMode("fresh solve at the fixed point is not growing", s=s_star, mu=r.mu)
    fp = abs(s_star * (-r.mu) - 1.0)
    margin = s_star * r.e1_quotient()
    return DispersionPoint(
        xi_abs=pencil.xi_abs,
        status="unstable",
        s_star=s_star,
        lambda_=1.0 / math.sqrt(s_star),
        lambda0=lam0,
        fp_residual=fp,
        mu_residual=r.residual,
        margin=margin,
        eig=r,
    )


def solve_fixed_point(profile, xi_abs, *, rtol=1e-10, tol=DEFAULT_TOL, pencil=None):
    """Smallest root s* of F on the ray s >= 1/lambda0^2.

    Returns a :class:`DispersionPoint` whose ``status`` is ``unstable``,
    ``stable`` or ``no_growing_mode``; a bracket that never closes raises
    :class:`BracketFailure`.
    """
    k = float(xi_abs)
    pencil = _pencil(profile, k) if pencil is None else pencil
    r0 = min_eigen(pencil, 0.0, tol=tol)
    if r0.mu >= -_stable_tol(pencil):
        return DispersionPoint(k, "stable", lambda0=math.nan, eig=r0)
    lam0 = math.sqrt(-r0.mu)
    s0 = 1.0 / lam0**2
    if pencil.omega == 0.0:
        return _point_at(pencil, s0, lam0, tol)

    F = _FEvaluator(pencil, tol)
    F.x = r0.vector
    lo, hi = 0.0, s0
    try:
        f_hi = F(hi)
        n = 0
        while f_hi <= 0.0:
            if n >= MAX_EXPANSIONS:
                raise BracketFailure(
                    "no sign change of F within the expansion budget",
                    {"s_low": lo, "s_high": hi, "F_high": f_hi, "expansions": n},
                )
            lo, hi = hi, hi * EXPANSION
            f_hi = F(hi)
            n += 1
    except NoGrowingMode as exc:
        return DispersionPoint(k, "no_growing_mode", lambda0=lam0,
                               detail=f"mu(s={exc.s:.6g}) = {exc.mu:.3e}", eig=F.last)
    s_star = so.bisect(F, lo, hi, xtol=1e-300, rtol=rtol, maxiter=400)
    return _point_at(pencil, s_star, lam0, tol)


def _safe_point(profile, k, kwargs):
    try:
        return solve_fixed_point(profile, k, **kwargs)
    except BracketFailure as exc:
        return DispersionPoint(float(k), "bracket_failure", detail=str(exc.diagnostics))
    except ConvergenceFailure as exc:
        return DispersionPoint(float(k), "convergence_failure", detail=str(exc))


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    points: list
    slope: float
    intercept: float

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def dispersion_curve(profile, xi_list, *, workers=None, **kwargs):
    """Solve every |xi| in ``xi_list`` (ascending); failures become status markers.

    ``slope``/``intercept`` fit lambda^2 against |xi| over the unstable points
    of the upper half of the list.
    """
    xi_list = [float(k) for k in xi_list]
    if any(b < a for a, b in zip(xi_list, xi_list[1:])):
        raise ValueError("xi_list must be ascending")
    workers = thread_count() if workers is None else workers
    if workers > 1 and len(xi_list) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda k: _safe_point(profile, k, kwargs), xi_list))
    else:
        points = [_safe_point(profile, k, kwargs) for k in xi_list]
    upper = [p for p in points[len(points) // 2:] if p.unstable]
    slope = intercept = math.nan
    if len(upper) >= 2:
        slope, intercept = np.polyfit([p.xi_abs for p in upper], [p.lambda_**2 for p in upper], 1)
    return DispersionCurve(points, float(slope), float(intercept))


def rotation_comparison(point):
    """Check lambda < lambda0 and the lower bound -lambda^2 >= -lambda0^2 + margin."""
    if not point.unstable:
        return {"applicable": False}
    gap = point.lambda0**2 - point.lambda_**2
    return {
        "applicable": True,
        "strict": point.lambda_ < point.lambda0,
        "margin": point.margin,
        "gap": gap,
        "bound_holds": gap >= point.margin * (1.0 - 1e-9) - 1e-12,
    }
