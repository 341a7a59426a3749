"""Normal modes (phi, theta, psi) at a horizontal frequency xi.

A mode is built in the frame ``xi = (|xi|, 0)`` from the discrete minimizer
and then rotated. Nodal profiles are post-processed from the P1/P0 vector:
``w = p'(rho0) rho0 (|xi| phi + psi')`` by flux recovery from the element
equations (so its interface jump equals the eigen residual) and ``phi`` by
differentiating a spline of its primitive.
"""
from dataclasses import dataclass, field, replace
import json
import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import comb

from .errors import DerivativeOrderUnavailable, FrameMismatch, SingularCoefficient
from .forms import element_quadrature
from .grid import LOWER, UPPER

SIDES = (LOWER, UPPER)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class NormalMode:
    """Per-side nodal profiles; dict keys are ``LOWER``/``UPPER``.

    ``phi``/``theta`` are the horizontal components oriented for ``xi``;
    ``stack[side]`` holds frame derivatives with shape (order + 1, 3, n)
    for (phi, psi, w) and ``k_max`` is the highest order usable by norms.
    """
    xi: np.ndarray
    lambda_: float
    mu: float
    omega: float
    s_star: float
    profile: object = field(repr=False)
    phi: dict = field(repr=False)
    theta: dict = field(repr=False)
    psi: dict = field(repr=False)
    w: dict = field(repr=False)
    vector: np.ndarray = field(repr=False)
    stack: dict = field(default=None, repr=False)
    k_max: int = -1

    @property
    def xi_abs(self):
        return float(math.hypot(*self.xi))

    @property
    def angle(self):
        return math.atan2(self.xi[1], self.xi[0])

    def frame(self, side):
        """(phi, theta) rotated back to xi = (|xi|, 0)."""
        R = rotation(-self.angle)
        return R @ np.stack([self.phi[side], self.theta[side]])

    def derivatives(self, side, name, order=None):
        """d^j/dx3^j of a component for j = 0..order, oriented for ``xi``.

        ``name`` is one of ``phi``, ``theta``, ``psi``, ``w``, ``q``.
        """
        if self.stack is None:
            raise DerivativeOrderUnavailable("derivative stack not built")
        order = self.k_max if order is None else order
        if order > self.k_max:
            raise DerivativeOrderUnavailable(f"order {order} above built {self.k_max}")
        st = self.stack[side][: order + 1]
        if name in ("phi", "theta"):
            fphi = st[:, 0]
            ftheta = -2.0 * self.omega * fphi / self.lambda_**2
            c, s = math.cos(self.angle), math.sin(self.angle)
            return c * fphi - s * ftheta if name == "phi" else s * fphi + c * ftheta
        if name == "psi":
            return st[:, 1]
        if name == "w":
            return st[:, 2]
        if name == "q":
            return self.stack[f"q{side}"][: order + 1]
        raise KeyError(name)

    def l2_norm(self):
        """||sqrt(phi^2 + psi^2)||_{L^2} of the discrete minimizer."""
        q = element_quadrature(self.profile)
        phi_e, psi_n = self.profile_grid_split()
        psi_g = psi_n[:-1, None] * q.Nl + psi_n[1:, None] * q.Nr
        return float(np.sqrt(np.sum(q.W * (phi_e[:, None] ** 2 + psi_g**2))))

    def profile_grid_split(self):
        from .forms import DofLayout
        return DofLayout(self.profile.grid.n_elements).split(self.vector)

    def to_json(self):
        grid = self.profile.grid
        side_name = {LOWER: "lower", UPPER: "upper"}

        def per_side(d):
            return {side_name[s]: [float(v) for v in d[s]] for s in SIDES}

        doc = {
            "xi": [float(v) for v in self.xi],
            "lambda": float(self.lambda_),
            "grid": {side_name[s]: [float(v) for v in grid.side_nodes(s)] for s in SIDES},
            "phi": per_side(self.phi),
            "theta": per_side(self.theta),
            "psi": per_side(self.psi),
        }
        if self.stack is not None:
            doc["derivatives"] = {
                name: {side_name[s]: self.derivatives(s, name).tolist() for s in SIDES}
                for name in ("phi", "theta", "psi")
            }
        return json.dumps(doc, sort_keys=True)


def _recover_w(profile, vector, k, mu, quad):
    """Two-sided nodal w from the element equations of the psi rows."""
    from .forms import DofLayout
    phi, psi = DofLayout(profile.grid.n_elements).split(vector)
    h = quad.h
    P = np.sum(quad.W * quad.prho, axis=1)
    wbar = P / h * ((psi[1:] - psi[:-1]) / h + k * phi)
    psi_g = psi[:-1, None] * quad.Nl + psi[1:, None] * quad.Nr
    f = mu * quad.rho * psi_g + profile.g * k * quad.rho * phi[:, None]
    at_left = wbar + np.sum(quad.W * f * quad.Nl, axis=1)
    at_right = wbar - np.sum(quad.W * f * quad.Nr, axis=1)
    return at_left, at_right


def _side_nodal(values_left, values_right, els):
    """Nodal values on one side from element end values (averaged inside)."""
    out = np.empty(els.size + 1)
    out[0] = values_left[els[0]]
    out[-1] = values_right[els[-1]]
    out[1:-1] = 0.5 * (values_right[els[:-1]] + values_left[els[1:]])
    return out


def _phi_nodal(grid, phi_e, els):
    """Nodal phi as the derivative of a cubic spline of the primitive of phi.

    The primitive is exact at nodes for a piecewise-constant function, so this
    treats element values as cell averages.
    """
    xs = grid.nodes[els[0]: els[-1] + 2]
    primitive = np.concatenate([[0.0], np.cumsum(np.diff(xs) * phi_e[els])])
    return CubicSpline(xs, primitive)(xs, 1)


def build_mode(point, eig=None, xi=None, omega=None):
    """Assemble the normal mode for ``point`` at horizontal frequency ``xi``.

    ``eig`` defaults to the eigen result stored on the point and ``xi`` to
    ``(|xi|, 0)``. The frame solution gets ``theta = -2 omega phi / lambda^2``
    and the horizontal pair is rotated onto ``xi``.
    """
    eig = point.eig if eig is None else eig
    k = point.xi_abs
    xi = np.array([k, 0.0] if xi is None else xi, dtype=float)
    if abs(math.hypot(*xi) - k) > 1e-12 * max(1.0, k):
        raise FrameMismatch(f"|xi| = {math.hypot(*xi)!r} but the dispersion point has {k!r}")
    if not point.unstable:
        raise ValueError(f"no growing mode at |xi| = {k!r} (status {point.status})")
    profile = eig.pencil.profile
    omega = profile.config.omega if omega is None else float(omega)
    lam = point.lambda_
    grid = profile.grid
    quad = element_quadrature(profile)
    phi_e, psi_n = eig.pencil.layout.split(eig.vector)
    wl, wr = _recover_w(profile, eig.vector, k, eig.mu, quad)

    R = rotation(math.atan2(xi[1], xi[0]))
    phi, theta, psi, w = {}, {}, {}, {}
    for side in SIDES:
        els = grid.side_elements(side)
        fphi = _phi_nodal(grid, phi_e, els)
        ftheta = -2.0 * omega * fphi / lam**2
        rot = R @ np.stack([fphi, ftheta])
        phi[side], theta[side] = rot[0], rot[1]
        psi[side] = psi_n[els[0]: els[-1] + 2].copy()
        w[side] = _side_nodal(wl, wr, els)
    return NormalMode(xi, lam, eig.mu, omega, point.s_star, profile, phi, theta, psi, w,
                      eig.vector.copy())


def rotate_mode(mode, angle):
    """Same mode for xi rotated by ``angle`` (psi and lambda unchanged)."""
    R = rotation(angle)
    phi, theta = {}, {}
    for side in SIDES:
        rot = R @ np.stack([mode.phi[side], mode.theta[side]])
        phi[side], theta[side] = rot[0], rot[1]
    return replace(mode, xi=R @ mode.xi, phi=phi, theta=theta)


@dataclass(frozen=True)
class OdeResidual:
    r1: float
    r2: float
    r3: float
    jump_res: float
    bc_res: float

    def as_tuple(self):
        return (self.r1, self.r2, self.r3, self.jump_res, self.bc_res)

    @property
    def worst_equation(self):
        return max(self.r1, self.r2, self.r3)


def ode_residual(mode, profile=None):
    """Strong-form residuals of the normal-mode ODEs on the nodal profiles.

    Profiles are interpolated per side by cubic splines and the three
    equations are evaluated at the Gauss points in the frame xi_2 = 0. All
    values are divided by ``sqrt(int rho0 (phi^2 + psi^2))``.
    """
    profile = mode.profile if profile is None else profile
    grid = profile.grid
    quad = element_quadrature(profile)
    k = mode.xi_abs
    lam2 = mode.lambda_**2
    g = profile.g
    om = mode.omega
    sq = np.zeros(3)
    norm2 = 0.0
    for side in SIDES:
        xs = grid.side_nodes(side)
        els = grid.side_elements(side)
        xg = quad.x[els].ravel()
        W = quad.W[els].ravel()
        rho = quad.rho[els].ravel()
        law = profile.law(side)
        P = law.dp(rho) * rho
        dP = profile.power_derivatives(rho, side, law.gamma, 1)[1] * law.K * law.gamma
        fphi_n, ftheta_n = mode.frame(side)
        sp_phi = CubicSpline(xs, fphi_n)
        sp_psi = CubicSpline(xs, mode.psi[side])
        phi = sp_phi(xg)
        theta_frame = -2.0 * om * phi / lam2
        theta = CubicSpline(xs, ftheta_n)(xg)
        psi = sp_psi(xg)
        dpsi = sp_psi(xg, 1)
        bracket = P * (k * phi + dpsi)
        dbracket = dP * (k * phi + dpsi) + P * (k * sp_phi(xg, 1) + sp_psi(xg, 2))
        r1 = lam2 * rho * phi + k * bracket - k * g * rho * psi - 2.0 * rho * om * theta
        # theta is defined by this identity, so the difference is exact
        r2 = lam2 * rho * (theta_frame - (-2.0 * om * phi / lam2))
        r3 = lam2 * rho * psi - dbracket - g * rho * k * phi
        sq += [np.sum(W * r1**2), np.sum(W * r2**2), np.sum(W * r3**2)]
        norm2 += np.sum(W * rho * (phi**2 + psi**2))
    scale = math.sqrt(norm2)
    r = np.sqrt(sq) / scale
    jump = abs(mode.w[UPPER][0] - mode.w[LOWER][-1]) + abs(mode.psi[UPPER][0] - mode.psi[LOWER][-1])
    bc = abs(mode.psi[LOWER][0]) + abs(mode.psi[UPPER][-1])
    return OdeResidual(float(r[0]), float(r[1]), float(r[2]), jump / scale, bc / scale)


def _leibniz(a, b, n):
    """n-th derivative of a*b from stacks a[0..n], b[0..n]."""
    return sum(comb(n, i, exact=True) * a[i] * b[n - i] for i in range(n + 1))


def derivative_stack(mode, profile=None, k_max=2):
    """Attach analytic x3-derivatives up to ``k_max`` (q needs psi one order higher).

    Uses the first-order system in (psi, w): phi = c (w / rho0 - g psi) with
    c = |xi| / (mu + 4 omega^2 / mu), psi' = w / (p' rho0) - |xi| phi,
    w' = -mu rho0 psi - g |xi| rho0 phi, differentiated with Leibniz' rule.
    """
    profile = mode.profile if profile is None else profile
    if k_max + 1 > profile.deriv_order:
        raise DerivativeOrderUnavailable(
            f"profile tables reach order {profile.deriv_order}, need {k_max + 1}")
    mu = mode.mu
    k = mode.xi_abs
    g = profile.g
    if mu >= 0 or k <= 0:
        raise ValueError("derivative stack needs mu < 0 and |xi| > 0")
    denom = mu + 4.0 * mode.omega**2 / mu
    if denom == 0.0:
        raise SingularCoefficient("mu + 4 omega^2 / mu vanishes")
    c = k / denom
    n = k_max + 1
    stack = {}
    for side in SIDES:
        law = profile.law(side)
        rho_n = profile.rho_nodes(side)
        rho = profile.power_derivatives(rho_n, side, 1.0, n)
        inv_rho = profile.power_derivatives(rho_n, side, -1.0, n)
        inv_P = profile.power_derivatives(rho_n, side, -law.gamma, n) / (law.K * law.gamma)
        inv_dp = profile.power_derivatives(rho_n, side, 1.0 - law.gamma, n) / (law.K * law.gamma)
        psi = [mode.psi[side].astype(float)]
        w = [mode.w[side].astype(float)]
        phi = []
        for j in range(n + 1):
            phi.append(c * (_leibniz(w, inv_rho, j) - g * psi[j]))
            if j == n:
                break
            psi.append(_leibniz(w, inv_P, j) - k * phi[j])
            w.append(-mu * _leibniz(rho, psi, j) - g * k * _leibniz(rho, phi, j))
        stack[side] = np.stack([np.array(phi), np.array(psi), np.array(w)], axis=1)
        q = [-_leibniz(w, inv_dp, j) for j in range(n + 1)]
        stack[f"q{side}"] = np.array(q)
    return replace(mode, stack=stack, k_max=k_max)
