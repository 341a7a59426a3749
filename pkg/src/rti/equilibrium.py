"""Hydrostatic two-layer density profile.

Each layer obeys a barotropic law ``p = K rho**gamma``; the steady density
solves ``d p(rho)/dx3 = -g rho`` on each side and the two sides are glued by
pressure continuity at ``x3 = 0``.
"""
from dataclasses import dataclass
import csv
import io
import math

import numpy as np

from .errors import ConfigRejected, DepthTooLarge
from .grid import Grid1D, LOWER, UPPER


@dataclass(frozen=True)
class PressureLaw:
    kind: str
    K: float
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("affine", "power"):
            raise ValueError(f"unknown pressure law kind {self.kind!r}")
        if not self.K > 0:
            raise ValueError("stiffness K must be positive")
        if self.kind == "affine" and self.gamma != 1.0:
            raise ValueError("affine law requires gamma = 1")
        if not self.gamma >= 1.0:
            raise ValueError("gamma must be >= 1")

    @classmethod
    def affine(cls, K):
        return cls("affine", float(K), 1.0)

    @classmethod
    def power(cls, K, gamma):
        gamma = float(gamma)
        return cls("affine" if gamma == 1.0 else "power", float(K), gamma)

    def p(self, rho):
        return self.K * np.power(rho, self.gamma)

    def dp(self, rho):
        return self.K * self.gamma * np.power(rho, self.gamma - 1.0)

    def d2p(self, rho):
        return self.K * self.gamma * (self.gamma - 1.0) * np.power(rho, self.gamma - 2.0)

    def inverse(self, pressure):
        return np.power(np.asarray(pressure, dtype=float) / self.K, 1.0 / self.gamma)

    def enthalpy(self, z):
        """h(z) = int_1^z p'(r)/r dr."""
        z = np.asarray(z, dtype=float)
        if self.gamma == 1.0:
            return self.K * np.log(z)
        c = self.K * self.gamma / (self.gamma - 1.0)
        return c * (np.power(z, self.gamma - 1.0) - 1.0)

    def denthalpy(self, z):
        return self.dp(z) / z

    def d2enthalpy(self, z):
        return self.K * self.gamma * (self.gamma - 2.0) * np.power(z, self.gamma - 3.0)


@dataclass(frozen=True)
class FluidConfig:
    upper_law: PressureLaw
    lower_law: PressureLaw
    g: float
    omega: float
    m: float
    l: float
    interface_pressure: float

    def law(self, side):
        return self.upper_law if side == UPPER else self.lower_law

    def with_omega(self, omega):
        return FluidConfig(self.upper_law, self.lower_law, self.g, float(omega),
                           self.m, self.l, self.interface_pressure)


def solve_interface_densities(config):
    """Densities on both sides of the interface at the prescribed pressure P*.

    Returns ``(rho_minus0, rho_plus0)``; raises :class:`ConfigRejected`
    unless the upper fluid is strictly heavier there.
    """
    P = config.interface_pressure
    if not P > 0:
        raise ConfigRejected("interface pressure must be positive")
    if config.upper_law == config.lower_law:
        raise ConfigRejected("the pressure laws must be distinct")
    rho_minus0 = float(config.lower_law.inverse(P))
    rho_plus0 = float(config.upper_law.inverse(P))
    if not rho_plus0 > rho_minus0:
        raise ConfigRejected(
            f"upper density {rho_plus0!r} does not exceed lower density {rho_minus0!r} at P*={P!r}"
        )
    return rho_minus0, rho_plus0


def _slope(law, g, rho):
    return -g * rho / law.dp(rho)


def _rk4_step(law, g, rho, h):
    k1 = _slope(law, g, rho)
    k2 = _slope(law, g, rho + 0.5 * h * k1)
    k3 = _slope(law, g, rho + 0.5 * h * k2)
    k4 = _slope(law, g, rho + h * k3)
    return rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _critical_height(law, g, rho0):
    # rho**(gamma-1) falls linearly with height for gamma > 1
    if g == 0.0 or law.gamma == 1.0:
        return math.inf
    return rho0 ** (law.gamma - 1.0) * law.K * law.gamma / (g * (law.gamma - 1.0))


def _integrate_side(law, g, rho_start, xs, substeps):
    rho = np.empty_like(xs)
    rho[0] = rho_start
    for i in range(1, xs.size):
        h = (xs[i] - xs[i - 1]) / substeps
        r = rho[i - 1]
        for _ in range(substeps):
            r = _rk4_step(law, g, r, h)
        if not (np.isfinite(r) and r > 0.0):
            raise DepthTooLarge(f"density left the admissible range near x3={xs[i]!r}")
        rho[i] = r
    return rho


@dataclass(frozen=True, eq=False)
class EquilibriumProfile:
    """Steady density sampled at grid nodes, stored per side.

    ``rho_lower`` runs over the nodes of [-m, 0] and ``rho_upper`` over
    [0, l], so the interface carries two values.
    """
    config: FluidConfig
    grid: Grid1D
    rho_lower: np.ndarray
    rho_upper: np.ndarray
    deriv_order: int = 8

    @property
    def rho_jump(self):
        return float(self.rho_upper[0] - self.rho_lower[-1])

    @property
    def g(self):
        return self.config.g

    def law(self, side):
        return self.config.law(side)

    def rho_nodes(self, side):
        return self.rho_lower if side == LOWER else self.rho_upper

    def rho_at(self, x, side):
        """Density at arbitrary points of one side (one RK4 step from the nearest node)."""
        x = np.asarray(x, dtype=float)
        xs = self.grid.side_nodes(side)
        rs = self.rho_nodes(side)
        idx = np.clip(np.searchsorted(xs, x), 1, xs.size - 1)
        left = x - xs[idx - 1] <= xs[idx] - x
        near = np.where(left, idx - 1, idx)
        return _rk4_step(self.law(side), self.g, rs[near], x - xs[near])

    def power_derivatives(self, rho, side, exponent, order):
        """Table of d^j/dx3^j rho0**exponent, j = 0..order, at densities ``rho``.

        Uses rho0' = -g rho0 / p'(rho0) differentiated in closed form; exact on
        each side for power laws.
        """
        law = self.law(side)
        rho = np.asarray(rho, dtype=float)
        a = self.g / (law.K * law.gamma)
        step = 1.0 - law.gamma
        out = np.empty((order + 1,) + rho.shape)
        coef = 1.0
        for j in range(order + 1):
            e = exponent + j * step
            out[j] = coef * np.power(rho, e)
            coef *= -a * e
        return out

    def rho_table(self, side, order=None):
        order = self.deriv_order if order is None else order
        return self.power_derivatives(self.rho_nodes(side), side, 1.0, order)

    def prho_table(self, side, order=None):
        """Derivatives of p'(rho0) rho0 = K gamma rho0**gamma at the side's nodes."""
        order = self.deriv_order if order is None else order
        law = self.law(side)
        return law.K * law.gamma * self.power_derivatives(self.rho_nodes(side), side, law.gamma, order)

    @property
    def rho_min(self):
        return float(min(self.rho_lower.min(), self.rho_upper.min()))

    @property
    def rho_max(self):
        return float(max(self.rho_lower.max(), self.rho_upper.max()))

    def with_omega(self, omega):
        return EquilibriumProfile(self.config.with_omega(omega), self.grid,
                                  self.rho_lower, self.rho_upper, self.deriv_order)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x3", "rho0", "p_rho0", "dp_drho", "side"])
        for side, tag in ((LOWER, "-"), (UPPER, "+")):
            law = self.law(side)
            for x, r in zip(self.grid.side_nodes(side), self.rho_nodes(side)):
                w.writerow([f"{x:.17g}", f"{r:.17g}", f"{law.p(r):.17g}", f"{law.dp(r):.17g}", tag])
        return buf.getvalue()


def integrate_hydrostatic(config, n_elements, substeps=4, deriv_order=8):
    """Integrate the hydrostatic ODE on a uniform grid with ``n_elements`` per side.

    Classical RK4 on rho with ``substeps`` internal steps per element. Raises
    :class:`DepthTooLarge` when the upper layer would run out of mass below
    ``x3 = l``.
    """
    if int(n_elements) < 4:
        raise ValueError("need at least 4 elements per side")
    rho_minus0, rho_plus0 = solve_interface_densities(config)
    for name, value in (("m", config.m), ("l", config.l)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    if config.g < 0:
        raise ValueError("g must be nonnegative")
    if _critical_height(config.upper_law, config.g, rho_plus0) <= config.l:
        raise DepthTooLarge("upper layer density reaches zero below x3 = l")

    grid = Grid1D.uniform(config.m, config.l, n_elements)
    xs_low = grid.side_nodes(LOWER)
    # integrate downward from the interface
    rho_low = _integrate_side(config.lower_law, config.g, rho_minus0, xs_low[::-1], substeps)[::-1]
    rho_up = _integrate_side(config.upper_law, config.g, rho_plus0, grid.side_nodes(UPPER), substeps)
    return EquilibriumProfile(config, grid, np.ascontiguousarray(rho_low), rho_up, deriv_order)


def hydrostatic_residual(profile):
    """Max over elements of |mean of (d p(rho0)/dx3 + g rho0)| on the element.

    The element mean is ``[p(rho_b) - p(rho_a) + g * int rho0] / h`` with the
    integral by Simpson's rule on the profile's dense output.
    """
    worst = 0.0
    for side in (LOWER, UPPER):
        xs = profile.grid.side_nodes(side)
        rs = profile.rho_nodes(side)
        law = profile.law(side)
        h = np.diff(xs)
        mid = profile.rho_at(0.5 * (xs[1:] + xs[:-1]), side)
        integral = h / 6.0 * (rs[:-1] + 4.0 * mid + rs[1:])
        r = (law.p(rs[1:]) - law.p(rs[:-1]) + profile.g * integral) / h
        worst = max(worst, float(np.max(np.abs(r))))
    return worst
