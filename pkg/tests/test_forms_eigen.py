import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings, strategies as st

from rti.eigen import min_eigen, mu_curve, psi_at_interface
from rti.equilibrium import integrate_hydrostatic
from rti.errors import ZeroVector
from rti.forms import DofLayout, assemble_pencil, rayleigh_quotient, test_pair

from conftest import reference_fluid


def exact_rho(x):
    return np.where(x < 0, 1.0 * np.exp(-x / 2.0), 2.0 * np.exp(-x))


def exact_prho(x):
    # p'(rho) rho = K rho for affine laws
    return np.where(x < 0, 2.0, 1.0) * exact_rho(x)


def continuous_forms(grid, k, omega, phi_e, psi_n, n_gauss=10):
    """Integrals of the three quadratic forms with an independent quadrature."""
    t, w = np.polynomial.legendre.leggauss(n_gauss)
    e0 = e1 = j = 0.0
    for e in range(grid.n_elements):
        a, b = grid.nodes[e], grid.nodes[e + 1]
        h = b - a
        x = a + 0.5 * h * (t + 1)
        wx = 0.5 * h * w
        psi = psi_n[e] + (psi_n[e + 1] - psi_n[e]) * (x - a) / h
        dpsi = (psi_n[e + 1] - psi_n[e]) / h
        rho, prho = exact_rho(x), exact_prho(x)
        phi = phi_e[e]
        e0 += np.sum(wx * (prho * (dpsi + k * phi) ** 2 - 2.0 * k * rho * phi * psi))
        e1 += np.sum(wx * 4.0 * omega**2 * rho * phi**2)
        j += np.sum(wx * rho * (phi**2 + psi**2))
    return e0, e1, j


@pytest.mark.parametrize("k", [0.5, 3.0, 17.0])
def test_forms_match_independent_quadrature(k):
    prof = integrate_hydrostatic(reference_fluid(0.7), 16)
    pen = assemble_pencil(prof, k)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(pen.n)
    phi, psi = pen.layout.split(x)
    e0, e1, j = continuous_forms(prof.grid, k, 0.7, phi, psi)
    assert pen.quad("E0", x) == pytest.approx(e0, rel=1e-9)
    assert pen.quad("E1", x) == pytest.approx(e1, rel=1e-9)
    assert pen.quad("J", x) == pytest.approx(j, rel=1e-9)


def test_band_apply_matches_dense(profile):
    pen = assemble_pencil(profile, 12.0)
    x = np.random.default_rng(0).standard_normal(pen.n)
    for which in ("E0", "E1", "J"):
        A = pen.dense(which)
        np.testing.assert_allclose(pen.apply(which, x), A @ x, rtol=1e-13, atol=1e-12)
        assert np.array_equal(A, A.T)


def test_layout_round_trip():
    lay = DofLayout(6)
    x = np.arange(lay.n_dofs, dtype=float)
    phi, psi = lay.split(x)
    assert psi[0] == psi[-1] == 0.0 and psi.size == 7 and phi.size == 6
    np.testing.assert_array_equal(lay.join(phi, psi), x)


def test_zero_vector_rejected(profile):
    pen = assemble_pencil(profile, 5.0)
    with pytest.raises(ZeroVector):
        rayleigh_quotient(pen, 0.0, np.zeros(pen.n))


@settings(max_examples=12, deadline=None)
@given(k=st.floats(0.5, 60.0), s=st.floats(0.0, 0.5), n=st.sampled_from([8, 16, 40]))
def test_iterative_matches_dense_generalized_eigh(k, s, n):
    pen = assemble_pencil(integrate_hydrostatic(reference_fluid(), n), k)
    it = min_eigen(pen, s, method="iterative")
    ref = sl.eigh(pen.dense("E0") + s * pen.dense("E1"), pen.dense("J"), eigvals_only=True)[0]
    assert it.mu == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_eigenvector_normalization_and_sign(profile):
    pen = assemble_pencil(profile, 10.0)
    r = min_eigen(pen, 0.05)
    assert pen.quad("J", r.vector) == pytest.approx(2.0, rel=1e-12)
    assert psi_at_interface(r) > 0
    assert r.residual <= 1e-8
    assert rayleigh_quotient(pen, 0.05, r.vector) == pytest.approx(r.mu, rel=1e-12)


@pytest.mark.parametrize("k", [2.0, 5.0, 10.0, 20.0, 40.0])
def test_variational_bounds(profile, k):
    pen = assemble_pencil(profile, k)
    pair = test_pair(profile.grid, k)
    for s in (0.0, 0.01, 0.1):
        mu = min_eigen(pen, s).mu
        assert mu >= -profile.g * k - 1e-9
        assert mu <= rayleigh_quotient(pen, s, pair) + 1e-12


def test_mu_curve_monotone_and_lipschitz(profile):
    curve = mu_curve(assemble_pencil(profile, 20.0), np.linspace(0.0, 0.3, 20))
    assert np.all(np.diff(curve.mu) >= -1e-12)
    assert curve.lipschitz <= curve.e1_sup * (1 + 1e-9)


def test_small_frequency_is_flagged(profile):
    r = min_eigen(assemble_pencil(profile, 1.0), 0.0)
    assert r.outside_instability_regime


def test_eigenvalue_converges_second_order(fluid0):
    mus = [min_eigen(assemble_pencil(integrate_hydrostatic(fluid0, n), 10.0)).mu for n in (32, 64, 128)]
    order = math.log2((mus[0] - mus[1]) / (mus[1] - mus[2]))
    assert order == pytest.approx(2.0, abs=0.15)
