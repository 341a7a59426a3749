"""Finite-element pencil (E0, E1, J) at fixed horizontal wavenumber |xi|.

Unknowns are a continuous piecewise-linear ``psi`` (zero at both walls,
one shared value at the interface) and a piecewise-constant ``phi`` that is
free to jump at 0. Dofs are interleaved by position,
``[phi_0, psi_1, phi_1, psi_2, ..., psi_{n-1}, phi_{n-1}]``, which keeps every
matrix banded with half-bandwidth 2.

Quadratic forms follow ``E(x) = x.A x / 2`` so that ``J(x) = 1`` is the same as
``x.J x = 2``.
"""
from dataclasses import dataclass

import numpy as np

from ._kernels import band_to_dense, scatter_band, sym_band_matvec
from .errors import ZeroVector
from .grid import LOWER, UPPER

BANDWIDTH = 2

_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True, eq=False)
class DofLayout:
    n_elements: int

    @property
    def n_nodes(self):
        return self.n_elements + 1

    @property
    def n_dofs(self):
        return (self.n_nodes - 2) + self.n_elements

    @property
    def phi_dofs(self):
        return 2 * np.arange(self.n_elements)

    @property
    def psi_dofs(self):
        """Dof index per interior node 1..n_nodes-2."""
        return 2 * np.arange(1, self.n_nodes - 1) - 1

    def psi_node_dof(self, node):
        if node <= 0 or node >= self.n_nodes - 1:
            return -1
        return 2 * node - 1

    def element_dofs(self):
        """(n_elements, 3) array of (psi_left, psi_right, phi); -1 marks a wall."""
        e = np.arange(self.n_elements)
        dofs = np.stack([2 * e - 1, 2 * e + 1, 2 * e], axis=1)
        dofs[-1, 1] = -1
        return dofs

    def split(self, x):
        """Return ``(phi, psi)`` with psi at all nodes including the zero walls."""
        x = np.asarray(x)
        psi = np.zeros(self.n_nodes, dtype=x.dtype)
        psi[1:-1] = x[self.psi_dofs]
        return x[self.phi_dofs], psi

    def join(self, phi, psi):
        x = np.empty(self.n_dofs, dtype=np.result_type(phi, psi))
        x[self.phi_dofs] = phi
        x[self.psi_dofs] = np.asarray(psi)[1:-1]
        return x


@dataclass(frozen=True, eq=False)
class ElementQuadrature:
    """Three-point Gauss data per element, with profile values at the points."""
    x: np.ndarray
    W: np.ndarray
    rho: np.ndarray
    dp: np.ndarray
    Nl: np.ndarray
    Nr: np.ndarray
    h: np.ndarray

    @property
    def prho(self):
        return self.dp * self.rho


def element_quadrature(profile):
    grid = profile.grid
    a = grid.nodes[:-1]
    h = grid.widths
    x = a[:, None] + 0.5 * h[:, None] * (_GAUSS_T[None, :] + 1.0)
    W = 0.5 * h[:, None] * _GAUSS_W[None, :]
    rho = np.empty_like(x)
    dp = np.empty_like(x)
    for side in (LOWER, UPPER):
        els = grid.side_elements(side)
        rho[els] = profile.rho_at(x[els], side)
        dp[els] = profile.law(side).dp(rho[els])
    Nr = 0.5 * (_GAUSS_T + 1.0)
    return ElementQuadrature(x, W, rho, dp, 1.0 - Nr, Nr, h)


@dataclass(frozen=True, eq=False)
class FormPencil:
    """E0, E1 and J in symmetric upper band storage (see :mod:`rti._kernels`)."""
    xi_abs: float
    omega: float
    g: float
    profile: object
    layout: DofLayout
    E0: np.ndarray
    E1: np.ndarray
    J: np.ndarray

    @property
    def grid(self):
        return self.profile.grid

    @property
    def n(self):
        return self.layout.n_dofs

    def energy(self, s):
        return self.E0 + s * self.E1 if s else self.E0.copy()

    def dense(self, which):
        return band_to_dense(getattr(self, which))

    def apply(self, which, x):
        return sym_band_matvec(getattr(self, which), np.ascontiguousarray(x, dtype=float))

    def quad(self, which, x):
        return float(x @ self.apply(which, x))

    def dump(self, path):
        """Write the three matrices as coordinate-format text blocks."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"% pencil xi_abs={self.xi_abs:.17g} omega={self.omega:.17g} g={self.g:.17g}\n")
            for name in ("E0", "E1", "J"):
                A = self.dense(name)
                i, j = np.nonzero(np.triu(A))
                fh.write(f"%%MatrixMarket matrix coordinate real symmetric\n% {name}\n")
                fh.write(f"{self.n} {self.n} {i.size}\n")
                for r, c in zip(i, j):
                    # symmetric format stores the lower triangle
                    fh.write(f"{c + 1} {r + 1} {A[r, c]:.17g}\n")


def assemble_pencil(profile, xi_abs, quad=None):
    """Assemble the banded pencil at ``|xi| = xi_abs`` for ``profile``."""
    k = float(xi_abs)
    if k < 0:
        raise ValueError("xi_abs must be nonnegative")
    grid = profile.grid
    g = profile.g
    omega = profile.config.omega
    q = element_quadrature(profile) if quad is None else quad
    layout = DofLayout(grid.n_elements)
    dofs = layout.element_dofs()
    n = layout.n_dofs
    n_el = grid.n_elements
    h = q.h

    P = np.sum(q.W * q.prho, axis=1)
    M = np.sum(q.W * q.rho, axis=1)
    rl = q.W * q.rho * q.Nl
    rr = q.W * q.rho * q.Nr
    Ml, Mr = rl.sum(axis=1), rr.sum(axis=1)
    Mll = np.sum(rl * q.Nl, axis=1)
    Mlr = np.sum(rl * q.Nr, axis=1)
    Mrr = np.sum(rr * q.Nr, axis=1)

    e0 = np.zeros((n_el, 3, 3))
    stiff = P / h**2
    e0[:, 0, 0] = stiff
    e0[:, 1, 1] = stiff
    e0[:, 0, 1] = e0[:, 1, 0] = -stiff
    e0[:, 0, 2] = e0[:, 2, 0] = -k * P / h - g * k * Ml
    e0[:, 1, 2] = e0[:, 2, 1] = k * P / h - g * k * Mr
    e0[:, 2, 2] = k * k * P

    e1 = np.zeros((n_el, 3, 3))
    e1[:, 2, 2] = 4.0 * omega * omega * M

    jm = np.zeros((n_el, 3, 3))
    jm[:, 0, 0] = Mll
    jm[:, 1, 1] = Mrr
    jm[:, 0, 1] = jm[:, 1, 0] = Mlr
    jm[:, 2, 2] = M

    return FormPencil(
        xi_abs=k,
        omega=float(omega),
        g=float(g),
        profile=profile,
        layout=layout,
        E0=scatter_band(e0, dofs, n, BANDWIDTH),
        E1=scatter_band(e1, dofs, n, BANDWIDTH),
        J=scatter_band(jm, dofs, n, BANDWIDTH),
    )


def test_pair_profiles(grid, xi_abs):
    """Nodal psi and element-mean phi of the interface-peaked test function."""
    k = float(xi_abs)
    if k < 2:
        raise ValueError("test pair needs xi_abs >= 2")
    x = grid.nodes
    psi = np.where(x >= 0, np.clip(1.0 - x / grid.l, 0.0, None), np.clip(1.0 + x / grid.m, 0.0, None)) ** (k / 2)
    psi[grid.interface_index] = 1.0
    phi = -np.diff(psi) / (grid.widths * k)
    return phi, psi


def test_pair(grid, xi_abs):
    phi, psi = test_pair_profiles(grid, xi_abs)
    return DofLayout(grid.n_elements).join(phi, psi)


test_pair.__test__ = False
test_pair_profiles.__test__ = False


def rayleigh_quotient(pencil, s, x):
    x = np.asarray(x, dtype=float)
    den = pencil.quad("J", x)
    if not np.any(x) or den == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    num = pencil.quad("E0", x)
    if s:
        num += s * pencil.quad("E1", x)
    return num / den
