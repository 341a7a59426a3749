"""Shooting oracle for growth rates on the affine reference configuration.

Independent of the finite-element path: analytic densities, an adaptive ODE
integrator on the first-order (psi, w) system and a scalar root find in
lambda. Run as a script to print the values frozen in the tests.
"""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

K_LOWER, K_UPPER, P_STAR, G, M, L = 2.0, 1.0, 2.0, 1.0, 1.0, 1.0


def density(x):
    if x < 0:
        return P_STAR / K_LOWER * math.exp(-G * x / K_LOWER), K_LOWER
    return P_STAR / K_UPPER * math.exp(-G * x / K_UPPER), K_UPPER


def _rhs(k, mu, c):
    def f(x, y):
        psi, w = y
        rho, K = density(x)
        phi = c * (w / rho - G * psi)
        return [w / (K * rho) - k * phi, -mu * rho * psi - G * k * rho * phi]
    return f


def psi_at_top(lam, k, omega):
    mu = -lam * lam
    c = k / (mu + 4.0 * omega**2 / mu)
    f = _rhs(k, mu, c)
    opts = dict(method="DOP853", rtol=1e-13, atol=1e-300)
    lo = solve_ivp(f, (-M, 0.0), [0.0, 1.0], **opts)
    hi = solve_ivp(f, (0.0, L), lo.y[:, -1], **opts)
    return hi.y[0, -1] / np.max(np.abs(hi.y[0]))


def growth_rate(k, omega, lam_hi=None):
    """Largest lambda in (0.3, 1) x sqrt(g k) with psi(l) = 0, scanning down from the top."""
    top = math.sqrt(G * k) if lam_hi is None else lam_hi
    grid = np.linspace(top * (1 - 1e-9), 0.3 * top, 40)
    vals = [psi_at_top(l, k, omega) for l in grid]
    for (a, fa), (b, fb) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if fa * fb < 0:
            return brentq(psi_at_top, b, a, args=(k, omega), xtol=1e-15, rtol=1e-14)
    return math.nan


if __name__ == "__main__":
    for omega in (0.0, 1.0):
        for k in (5.0, 10.0, 20.0, 40.0):
            print(f"omega={omega} xi={k} lambda={growth_rate(k, omega)!r}")
