"""Fourier synthesis of growing solutions over an annulus of frequencies.

Each radial quadrature node carries its own solved growth rate and mode; the
integrand of every norm is independent of the angle of xi (modes rotate with
xi), so the frequency integral reduces to ``2 pi int r (...) dr``. The
Parseval factor is ``1 / (4 pi^2)``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline

from ._backend import thread_count
from .dispersion import solve_fixed_point
from .equilibrium import integrate_hydrostatic
from .errors import DerivativeOrderUnavailable, InterfaceSample, NoGrowingMode
from .grid import LOWER, UPPER
from .modes import SIDES, build_mode, derivative_stack, rotate_mode

PARSEVAL = 1.0 / (4.0 * math.pi**2)
COMPONENTS = ("eta", "v", "q")


@dataclass(frozen=True)
class RadialAmplitude:
    R3: float
    R4: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not 0 < self.R3 < self.R4:
            raise ValueError("need 0 < R3 < R4")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r > self.R3) & (r < self.R4)
        out = np.zeros_like(r)
        ri = r[inside]
        out[inside] = self.amplitude * np.exp(-1.0 / ((ri - self.R3) * (self.R4 - ri)))
        return out

    def scaled(self, factor):
        return RadialAmplitude(self.R3, self.R4, self.amplitude * factor)


def _side_integral(values, xs):
    return simpson(values, x=xs)


@dataclass(frozen=True, eq=False)
class SynthesisField:
    """Radial Gauss nodes with a solved mode (and its derivative stack) each.

    ``sq_norms[c][i, j]`` is ``int |d^j (component c of mode i)|^2 dx3`` over
    both sides, without the amplitude factor.
    """
    amplitude: RadialAmplitude
    profile: object = field(repr=False)
    r: np.ndarray
    weights: np.ndarray
    lambdas: np.ndarray
    modes: list = field(repr=False)
    sq_norms: dict = field(repr=False)
    n_theta: int
    k_max: int

    @property
    def lambda_min(self):
        return float(self.lambdas.min())

    @property
    def lambda_max(self):
        return float(self.lambdas.max())

    def with_amplitude(self, amplitude):
        return SynthesisField(amplitude, self.profile, self.r, self.weights, self.lambdas,
                              self.modes, self.sq_norms, self.n_theta, self.k_max)

    def coefficient(self, which):
        f = self.amplitude(self.r)
        return f * self.lambdas if which == "v" else f


def _mode_sq_norms(mode, k_max):
    grid = mode.profile.grid
    out = {c: np.zeros(k_max + 1) for c in COMPONENTS}
    for side in SIDES:
        xs = grid.side_nodes(side)
        phi = mode.derivatives(side, "phi", k_max)
        theta = mode.derivatives(side, "theta", k_max)
        psi = mode.derivatives(side, "psi", k_max)
        q = mode.derivatives(side, "q", k_max)
        for j in range(k_max + 1):
            vec = _side_integral(phi[j] ** 2 + theta[j] ** 2 + psi[j] ** 2, xs)
            out["eta"][j] += vec
            out["v"][j] += vec
            out["q"][j] += _side_integral(q[j] ** 2, xs)
    return out


def _solve_node(profile, r, k_max):
    point = solve_fixed_point(profile, r)
    if not point.unstable:
        raise NoGrowingMode(f"no growing mode at |xi| = {r!r} (status {point.status})", s=point.s_star)
    return derivative_stack(build_mode(point), k_max=k_max)


def build_field(profile, amplitude, *, n_r=64, n_theta=64, k_max=3, workers=None):
    """Solve the dispersion relation and mode at every radial Gauss node."""
    if n_theta % 2:
        raise ValueError("n_theta must be even (pairs xi with -xi)")
    t, w = np.polynomial.legendre.leggauss(n_r)
    half = 0.5 * (amplitude.R4 - amplitude.R3)
    r = amplitude.R3 + half * (t + 1.0)
    weights = half * w
    workers = thread_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            modes = list(pool.map(lambda ri: _solve_node(profile, ri, k_max), r))
    else:
        modes = [_solve_node(profile, ri, k_max) for ri in r]
    norms = [_mode_sq_norms(m, k_max) for m in modes]
    sq = {c: np.array([nm[c] for nm in norms]) for c in COMPONENTS}
    lambdas = np.array([m.lambda_ for m in modes])
    return SynthesisField(amplitude, profile, r, weights, lambdas, modes, sq, n_theta, k_max)


def _hk_weights(field, k):
    if k > field.k_max:
        raise DerivativeOrderUnavailable(f"H^{k} needs derivatives to order {k}, built {field.k_max}")
    j = np.arange(k + 1)
    return (1.0 + field.r[:, None] ** 2) ** (k - j)[None, :]


def hk_norm(field, which, k, t=0.0, *, method="radial"):
    """Piecewise H^k norm of eta, v or q at time t.

    ``method="polar"`` sums the integrand over the full (r, angle) grid using
    modes rotated to each angle instead of the angle-free reduction.
    """
    if which not in COMPONENTS:
        raise ValueError(f"unknown field {which!r}")
    wts = _hk_weights(field, k)
    coef2 = (field.coefficient(which) * np.exp(field.lambdas * t)) ** 2
    if method == "radial":
        inner = np.sum(wts * field.sq_norms[which][:, : k + 1], axis=1)
        total = 2.0 * math.pi * np.sum(field.weights * field.r * coef2 * inner)
    elif method == "polar":
        total = 0.0
        dth = 2.0 * math.pi / field.n_theta
        for i, mode in enumerate(field.modes):
            acc = 0.0
            for a in range(field.n_theta):
                rot = rotate_mode(mode, a * dth)
                sq = _mode_sq_norms(rot, k)[which]
                acc += np.sum(wts[i] * sq)
            total += field.weights[i] * field.r[i] * coef2[i] * acc * dth
    else:
        raise ValueError(f"unknown method {method!r}")
    return math.sqrt(PARSEVAL * total)


@dataclass(frozen=True)
class Sandwich:
    lower_ok: bool
    upper_ok: bool
    norm0: float
    norm_t: float
    lower_bound: float
    upper_bound: float


def growth_sandwich(field, which, k, t, *, slack=1e-6):
    """e^{t lambda_min} ||.(0)|| <= ||.(t)|| <= e^{t lambda_max} ||.(0)||, with relative slack."""
    n0 = hk_norm(field, which, k, 0.0)
    nt = hk_norm(field, which, k, t)
    lo = math.exp(t * field.lambda_min) * n0
    hi = math.exp(t * field.lambda_max) * n0
    return Sandwich(lo <= nt * (1.0 + slack), nt <= hi * (1.0 + slack), n0, nt, lo, hi)


def _hermite(xs, table):
    return CubicHermiteSpline(xs, table[0], table[1])


@dataclass(frozen=True)
class FieldSample:
    eta: np.ndarray
    v: np.ndarray
    q: float
    imag_residue: float


def evaluate_field(field, t, x, side=None):
    """Real (eta, v, q) at time t and point x = (x1, x2, x3).

    The frequency integral runs over every (radial node, angle) pair; since
    the angles come in +-xi pairs the imaginary parts cancel, and the
    leftover relative to the real magnitude is reported as ``imag_residue``.
    """
    x1, x2, x3 = (float(c) for c in x)
    grid = field.profile.grid
    if x3 == 0.0 and side is None:
        raise InterfaceSample("x3 = 0 lies on the interface; pass side=LOWER or UPPER")
    if not -grid.m <= x3 <= grid.l:
        raise ValueError("x3 outside (-m, l)")
    if side is None:
        side = UPPER if x3 > 0 else LOWER
    if field.k_max < 1:
        raise DerivativeOrderUnavailable("pointwise evaluation needs first derivatives")
    xs = grid.side_nodes(side)
    dth = 2.0 * math.pi / field.n_theta
    angles = np.arange(field.n_theta) * dth
    eta = np.zeros(3, dtype=complex)
    v = np.zeros(3, dtype=complex)
    q = 0j
    f = field.amplitude(field.r)
    for i, mode in enumerate(field.modes):
        tables = {
            "phi": mode.stack[side][:2, 0],
            "psi": mode.stack[side][:2, 1],
            "q": mode.stack[f"q{side}"][:2],
        }
        vals = {name: float(_hermite(xs, tab)(x3)) for name, tab in tables.items()}
        fphi = vals["phi"]
        ftheta = -2.0 * mode.omega * fphi / mode.lambda_**2
        c, s = np.cos(angles), np.sin(angles)
        phi_r = c * fphi - s * ftheta
        theta_r = s * fphi + c * ftheta
        r = field.r[i]
        phase = np.exp(1j * r * (x1 * c + x2 * s))
        base = field.weights[i] * r * dth * f[i] * math.exp(mode.lambda_ * t) * phase
        comp = np.array([np.sum(-1j * phi_r * base), np.sum(-1j * theta_r * base), np.sum(vals["psi"] * base)])
        eta += comp
        v += mode.lambda_ * comp
        q += np.sum(vals["q"] * base)
    eta *= PARSEVAL
    v *= PARSEVAL
    q *= PARSEVAL
    allv = np.concatenate([eta, v, [q]])
    scale = max(np.max(np.abs(allv.real)), np.finfo(float).tiny)
    residue = float(np.max(np.abs(allv.imag)) / scale)
    return FieldSample(eta.real.copy(), v.real.copy(), float(q.real), residue)


# ---------------------------------------------------------------------------
# ill-posedness sequence


def grid_for_frequency(R, base=128, per_unit=4.0):
    """Elements per side keeping |xi| h roughly fixed as frequencies grow."""
    n = max(base, int(math.ceil(per_unit * R)))
    return n + (n % 2)


def initial_norm(field, j):
    return math.sqrt(sum(hk_norm(field, c, j, 0.0) ** 2 for c in COMPONENTS))


@dataclass(frozen=True)
class SequenceEntry:
    n: int
    R: float
    init_norm: float
    grown_norm: float
    min_grown: float
    v_dominates: bool
    lambda_min: float
    status: str


def illposed_sequence(profile, j=2, k=1, alpha=1.0, T0=1.0, n_max=4, *, R_start=4.0,
                      ladder=1.25, R_limit=2000.0, n_r=16, n_theta=16, t_samples=5,
                      workers=None, per_unit=4.0):
    """Small-data, large-growth sequence for n = 1..n_max.

    For each rung R of a geometric ladder the field with unit bump on
    (R, R + 1) is solved once; its amplitude is then scaled so the H^j norm
    of (eta, v, q) at t = 0 is just below 1/n, and the rung is accepted when
    ||eta(t)||_{H^k} >= alpha at every sample of [T0, 2 T0].
    """
    if j < k or k < 0:
        raise ValueError("need j >= k >= 0")
    cfg = profile.config
    cache = {}

    def rung(R):
        if R not in cache:
            prof = integrate_hydrostatic(cfg, grid_for_frequency(R + 1.0, per_unit=per_unit))
            try:
                fld = build_field(prof, RadialAmplitude(R, R + 1.0), n_r=n_r, n_theta=n_theta,
                                  k_max=j, workers=workers)
            except NoGrowingMode:
                cache[R] = None
            else:
                cache[R] = (fld, initial_norm(fld, j))
        return cache[R]

    ts = np.linspace(T0, 2.0 * T0, t_samples)
    entries = []
    R = R_start
    for n in range(1, n_max + 1):
        found = None
        while R <= R_limit:
            solved = rung(R)
            if solved is None:
                R *= ladder
                continue
            fld, init = solved
            scale = (1.0 - 1e-9) / (n * init)
            scaled = fld.with_amplitude(fld.amplitude.scaled(scale))
            grown = [hk_norm(scaled, "eta", k, t) for t in ts]
            if min(grown) >= alpha:
                v_ok = all(hk_norm(scaled, "v", k, t) >= hk_norm(scaled, "eta", k, t) for t in ts) \
                    if scaled.lambda_min >= 1.0 else True
                found = SequenceEntry(n, R, initial_norm(scaled, j), grown[0], min(grown), v_ok,
                                      scaled.lambda_min, "found")
                break
            R *= ladder
        if found is None:
            # an exhausted ladder cannot succeed for larger n either
            for m in range(n, n_max + 1):
                entries.append(SequenceEntry(m, math.nan, math.nan, math.nan, math.nan, False,
                                             math.nan, f"search_exhausted(R_limit={R_limit:g})"))
            break
        entries.append(found)
    return entries
