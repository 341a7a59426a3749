"""Time-domain integration of the linearized equations at one horizontal frequency.

Unknowns are kept real: ``a = (i eta_1, i eta_2, eta_3)``, ``b`` likewise for
the velocity and ``q`` as is. Horizontal components are piecewise constant,
vertical ones continuous piecewise linear with zero wall values, and ``q``
lives at the Gauss points, so the spatial operator is the one behind the
variational pencil (with omega = 0 its normal modes are exactly the pencil's
eigenvectors).
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels as K
from .errors import BlowupDetected, InsufficientHistory, NonGrowingSeries
from .forms import element_quadrature


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Real-packed state; ``eta_hat``/``v_hat``/``q_hat`` give the complex view."""
    xi: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    q: np.ndarray
    time: float = 0.0

    @property
    def eta_hat(self):
        return (-1j * self.a1, -1j * self.a2, self.a3.astype(complex))

    @property
    def v_hat(self):
        return (-1j * self.b1, -1j * self.b2, self.b3.astype(complex))

    @property
    def q_hat(self):
        return self.q.astype(complex)


class EvolutionOperator:
    """Semi-discrete right-hand side for a fixed profile and xi."""

    def __init__(self, profile, xi):
        self.profile = profile
        self.xi = np.asarray(xi, dtype=float)
        grid = profile.grid
        self.grid = grid
        self.n_el = grid.n_elements
        self.n_nodes = grid.n_nodes
        quad = element_quadrature(profile)
        self.quad = quad
        self.h = quad.h
        self.W = np.ascontiguousarray(quad.W)
        self.rho = np.ascontiguousarray(quad.rho)
        self.dp = np.ascontiguousarray(quad.dp)
        self.Nl = np.ascontiguousarray(quad.Nl)
        self.Nr = np.ascontiguousarray(quad.Nr)
        self.mphi = np.sum(self.W * self.rho, axis=1)
        rl = self.W * self.rho * self.Nl
        rr = self.W * self.rho * self.Nr
        diag = np.zeros(self.n_nodes)
        diag[:-1] += np.sum(rl * self.Nl, axis=1)
        diag[1:] += np.sum(rr * self.Nr, axis=1)
        off = np.sum(rl * self.Nr, axis=1)
        # interior-node mass in upper band storage (bandwidth 1)
        band = np.zeros((2, self.n_nodes - 2))
        band[1] = diag[1:-1]
        band[0, 1:] = off[1:-1]
        self.mass3_band = band
        self.mass3 = K.spd_factor(band)
        self.g = profile.g
        self.omega = profile.config.omega
        self.rho_jump = profile.rho_jump
        i0 = grid.interface_index
        self.interface_index = i0
        n, m = self.n_el, self.n_nodes
        self.slices = {
            "a1": slice(0, n), "a2": slice(n, 2 * n), "a3": slice(2 * n, 2 * n + m),
            "b1": slice(2 * n + m, 3 * n + m), "b2": slice(3 * n + m, 4 * n + m),
            "b3": slice(4 * n + m, 4 * n + 2 * m), "q": slice(4 * n + 2 * m, 7 * n + 2 * m),
        }
        self.size = 7 * n + 2 * m

    # packing ---------------------------------------------------------------
    def pack(self, state):
        y = np.empty(self.size)
        for name, sl in self.slices.items():
            y[sl] = np.ravel(getattr(state, name))
        return y

    def unpack(self, y, time=0.0):
        parts = {name: y[sl].copy() for name, sl in self.slices.items()}
        parts["q"] = parts["q"].reshape(self.n_el, 3)
        return SpectralState(self.xi.copy(), time=time, **parts)

    def view(self, y, name):
        v = y[self.slices[name]]
        return v.reshape(self.n_el, 3) if name == "q" else v

    # dynamics --------------------------------------------------------------
    def forces(self, y):
        a3, b1, b2, b3 = (self.view(y, n) for n in ("a3", "b1", "b2", "b3"))
        q = self.view(y, "q")
        return K.evolve_forces(
            np.ascontiguousarray(a3), np.ascontiguousarray(b1), np.ascontiguousarray(b2),
            np.ascontiguousarray(b3), np.ascontiguousarray(q), self.h, self.W, self.rho,
            self.dp, self.Nl, self.Nr, self.mphi, self.xi[0], self.xi[1], self.g, self.omega,
        )

    def rhs_packed(self, y):
        db1, db2, F3, dq = self.forces(y)
        dy = np.empty_like(y)
        dy[self.slices["a1"]] = self.view(y, "b1")
        dy[self.slices["a2"]] = self.view(y, "b2")
        dy[self.slices["a3"]] = self.view(y, "b3")
        dy[self.slices["b1"]] = db1
        dy[self.slices["b2"]] = db2
        db3 = np.zeros(self.n_nodes)
        db3[1:-1] = self.mass3.solve(F3[1:-1])
        dy[self.slices["b3"]] = db3
        dy[self.slices["q"]] = dq.ravel()
        return dy

    def coriolis_matrix(self):
        """Mass-weighted Coriolis block acting on (b1, b2); antisymmetric by construction."""
        n = self.n_el
        C = np.zeros((2 * n, 2 * n))
        idx = np.arange(n)
        C[idx, n + idx] = 2.0 * self.omega * self.mphi
        C[n + idx, idx] = -2.0 * self.omega * self.mphi
        return C

    # diagnostics -----------------------------------------------------------
    def at_gauss(self, nodal):
        return nodal[:-1, None] * self.Nl + nodal[1:, None] * self.Nr

    def norms(self, y):
        a1, a2, a3 = (self.view(y, n) for n in ("a1", "a2", "a3"))
        b1, b2, b3 = (self.view(y, n) for n in ("b1", "b2", "b3"))
        q = self.view(y, "q")
        hs = self.h
        eta = np.sum(hs * (a1**2 + a2**2)) + np.sum(self.W * self.at_gauss(a3) ** 2)
        v = np.sum(hs * (b1**2 + b2**2)) + np.sum(self.W * self.at_gauss(b3) ** 2)
        return math.sqrt(eta), math.sqrt(v), math.sqrt(np.sum(self.W * q**2))

    def pressure_jump(self, y):
        """|[p' q]| at the interface from flux recovery on the two neighbouring elements."""
        dy = self.rhs_packed(y)
        u3 = self.view(dy, "b3")
        a3 = self.view(y, "a3")
        q = self.view(y, "q")
        i0 = self.interface_index
        vals = []
        for e, basis, sign in ((i0 - 1, self.Nr, -1.0), (i0, self.Nl, 1.0)):
            pi = self.dp[e] * q[e]
            mean = np.sum(self.W[e] * pi) / self.h[e]
            u3g = u3[e] * self.Nl + u3[e + 1] * self.Nr
            da3 = (a3[e + 1] - a3[e]) / self.h[e]
            src = self.rho[e] * u3g + self.g * q[e] + self.g * self.rho[e] * da3
            vals.append(mean + sign * np.sum(self.W[e] * src * basis))
        return abs(vals[1] - vals[0]), max(abs(vals[0]), abs(vals[1]))


def rhs(state, profile, operator=None):
    op = EvolutionOperator(profile, state.xi) if operator is None else operator
    return op.unpack(op.rhs_packed(op.pack(state)), state.time)


# ---------------------------------------------------------------------------
# initial data


def mode_state(profile, xi, lam, phi_e, psi_nodes, theta_e=None):
    """State of a normal mode with rate ``lam`` from frame profiles.

    ``phi_e``/``theta_e`` are element values in the frame xi = (|xi|, 0); the
    pair is rotated onto ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    k = math.hypot(*xi)
    theta_e = np.zeros_like(phi_e) if theta_e is None else theta_e
    c, s = (xi / k) if k > 0 else (1.0, 0.0)
    a1 = c * phi_e - s * theta_e
    a2 = s * phi_e + c * theta_e
    a3 = np.asarray(psi_nodes, dtype=float).copy()
    op = EvolutionOperator(profile, xi)
    da3 = np.diff(a3) / op.h
    q = -op.rho * (xi[0] * a1 + xi[1] * a2 + da3)[:, None]
    return SpectralState(xi, a1, a2, a3, lam * a1, lam * a2, lam * a3, q, 0.0)


def rotating_mode_rate(pencil):
    """Growth rate and frame profiles of the time-domain normal mode.

    Substituting e^{lambda t} into the rotating momentum equations gives
    (lambda^2 + 4 omega^2) rho phi on the horizontal line, i.e. the pencil at
    s = 1, with theta = -2 omega phi / lambda.
    """
    from .eigen import min_eigen
    r = min_eigen(pencil, 1.0)
    if r.mu >= 0:
        raise NonGrowingSeries("no growing time-domain mode at this frequency")
    lam = math.sqrt(-r.mu)
    phi_e, psi = pencil.layout.split(r.vector)
    return lam, phi_e, psi, -2.0 * pencil.omega * phi_e / lam


def random_state(profile, xi, seed=0, n_terms=8):
    """Smooth random displacement (short sine series) with zero velocity and q.

    q is independent initial data; leaving it at zero keeps most of the
    energy out of the fast acoustic modes.
    """
    rng = np.random.default_rng(seed)
    grid = profile.grid
    span = grid.m + grid.l
    order = np.arange(1, n_terms + 1)
    coef = rng.standard_normal((3, n_terms)) / order

    def series(x, c):
        return np.sin(np.pi * np.outer(x + grid.m, order) / span) @ c

    mid = 0.5 * (grid.nodes[1:] + grid.nodes[:-1])
    a1 = series(mid, coef[0])
    a2 = series(mid, coef[1])
    a3 = series(grid.nodes, coef[2])
    a3[[0, -1]] = 0.0
    z = np.zeros
    n = grid.n_elements
    return SpectralState(np.asarray(xi, dtype=float), a1, a2, a3, z(n), z(n), z(grid.n_nodes),
                         z((n, 3)), 0.0)


# ---------------------------------------------------------------------------
# time stepping


@dataclass(frozen=True, eq=False)
class EvolutionSeries:
    times: np.ndarray
    states: np.ndarray = field(repr=False)
    norm_eta: np.ndarray = field(repr=False)
    norm_v: np.ndarray = field(repr=False)
    norm_q: np.ndarray = field(repr=False)
    operator: EvolutionOperator = field(repr=False)
    dt: float = 0.0

    def state(self, i):
        return self.operator.unpack(self.states[i], float(self.times[i]))


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(state0, profile, dt, T, *, operator=None, blowup=1e12):
    """Classical RK4 from t = 0 to T, recording every step."""
    op = EvolutionOperator(profile, state0.xi) if operator is None else operator
    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a positive multiple of dt")
    y = op.pack(state0)
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    norms = np.empty((n_steps + 1, 3))
    norms[0] = op.norms(y)
    scale0 = max(norms[0].max(), np.finfo(float).tiny)
    for i in range(1, n_steps + 1):
        y = _rk4(op.rhs_packed, y, dt)
        states[i] = y
        norms[i] = op.norms(y)
        if not np.all(np.isfinite(norms[i])) or norms[i].max() > blowup * scale0:
            raise BlowupDetected(f"norms exceeded {blowup:g} x initial at t = {i * dt:g}")
    times = state0.time + dt * np.arange(n_steps + 1)
    return EvolutionSeries(times, states, norms[:, 0], norms[:, 1], norms[:, 2], op, dt)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class GrowthFit:
    lambda_hat: float
    stderr: float
    n_samples: int

    @property
    def band(self):
        return (self.lambda_hat - 2.0 * self.stderr, self.lambda_hat + 2.0 * self.stderr)


def growth_fit(series, t_min=0.0, which="v"):
    """Least-squares slope of log ||v(t)|| over samples with t >= t_min."""
    if isinstance(series, EvolutionSeries):
        t = series.times
        y = {"v": series.norm_v, "eta": series.norm_eta, "q": series.norm_q}[which]
    else:
        t, y = (np.asarray(a, dtype=float) for a in series)
    keep = t >= t_min
    t, y = t[keep], y[keep]
    if t.size < 20:
        raise InsufficientHistory(f"{t.size} samples after t_min, need 20")
    logy = np.log(y)
    A = np.vstack([t, np.ones_like(t)]).T
    coef, res, *_ = np.linalg.lstsq(A, logy, rcond=None)
    slope = float(coef[0])
    resid = logy - A @ coef
    dof = max(t.size - 2, 1)
    var = float(resid @ resid) / dof
    stderr = math.sqrt(var / float(np.sum((t - t.mean()) ** 2)))
    if slope <= 0:
        raise NonGrowingSeries(f"fitted slope {slope:g} is not positive")
    return GrowthFit(slope, stderr, int(t.size))


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    drift: float


def energy_trace(series):
    """Both sides of the energy identity at interior samples.

    ``lhs`` is int rho0 |d_t v|^2 / 2 + p'(rho0) rho0 / 2 |div v - g v3 / p'(rho0)|^2
    and ``rhs`` the interface term g [rho0] |v3(0)|^2 / 2; d_t v comes from
    centred differences of the stored velocities. ``drift`` is the largest
    change of lhs - rhs divided by the time span and the largest lhs + rhs.
    """
    op = series.operator
    S = series.states
    if S.shape[0] < 3:
        raise InsufficientHistory("need at least three stored states")
    dt = series.dt
    names = ("b1", "b2", "b3")
    B = {n: S[:, op.slices[n]] for n in names}
    U = {n: (B[n][2:] - B[n][:-2]) / (2.0 * dt) for n in names}
    band = op.mass3_band
    u3 = U["b3"][:, 1:-1]
    m3 = band[1] * u3**2
    m3[:, 1:] += 2.0 * band[0, 1:] * u3[:, 1:] * u3[:, :-1]
    kinetic = 0.5 * (np.sum(op.mphi * (U["b1"] ** 2 + U["b2"] ** 2), axis=1) + np.sum(m3, axis=1))
    b3 = B["b3"][1:-1]
    b3g = b3[:, :-1, None] * op.Nl + b3[:, 1:, None] * op.Nr
    div = op.xi[0] * B["b1"][1:-1] + op.xi[1] * B["b2"][1:-1] + np.diff(b3, axis=1) / op.h
    P = op.dp * op.rho
    inner = div[:, :, None] - op.g * b3g / op.dp
    potential = 0.5 * np.sum(op.W * P * inner**2, axis=(1, 2))
    lhs = kinetic + potential
    rhs_ = 0.5 * op.g * op.rho_jump * b3[:, op.interface_index] ** 2
    diff = lhs - rhs_
    span = series.times[-2] - series.times[1]
    scale = np.max(lhs + rhs_)
    drift = float(np.max(np.abs(diff - diff[0])) / (span * scale)) if scale > 0 and span > 0 else 0.0
    return EnergyTrace(series.times[1:-1], lhs, rhs_, drift)


def energy_identity_drift(series, profile=None):
    return energy_trace(series).drift
