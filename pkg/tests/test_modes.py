import json
import math

import numpy as np
import pytest

from rti.dispersion import solve_fixed_point
from rti.equilibrium import integrate_hydrostatic
from rti.errors import DerivativeOrderUnavailable, FrameMismatch
from rti.grid import LOWER, UPPER
from rti.modes import build_mode, derivative_stack, ode_residual, rotate_mode


@pytest.fixture(scope="module")
def mode(profile):
    return derivative_stack(build_mode(solve_fixed_point(profile, 10.0), xi=(6.0, 8.0)), k_max=3)


def test_frame_mismatch(profile):
    with pytest.raises(FrameMismatch):
        build_mode(solve_fixed_point(profile, 10.0), xi=(6.0, 7.0))


def test_theta_follows_phi_in_frame(mode):
    for side in (LOWER, UPPER):
        fphi, ftheta = mode.frame(side)
        np.testing.assert_allclose(ftheta, -2.0 * mode.omega * fphi / mode.lambda_**2, rtol=1e-13)


def test_psi_continuous_and_positive_at_interface(mode):
    assert mode.psi[LOWER][-1] == mode.psi[UPPER][0] > 0
    peak = max(np.max(np.abs(mode.psi[s])) for s in (LOWER, UPPER))
    assert mode.psi[UPPER][0] >= 1e-6 * peak


def test_residuals_shrink_under_refinement(fluid0):
    res = []
    for n in (64, 128, 256):
        prof = integrate_hydrostatic(fluid0, n)
        res.append(ode_residual(build_mode(solve_fixed_point(prof, 5.0))))
    for a, b in zip(res, res[1:]):
        assert b.r1 < a.r1 and b.r3 < a.r3
    assert res[-1].worst_equation <= 1e-3
    assert res[-1].r2 == 0.0
    assert res[-1].jump_res <= 1e-6


def test_rotation_round_trip_and_norms(mode):
    rot = rotate_mode(mode, 1.1)
    back = rotate_mode(rot, -1.1)
    for s in (LOWER, UPPER):
        np.testing.assert_allclose(back.phi[s], mode.phi[s], atol=1e-14)
        np.testing.assert_allclose(rot.phi[s] ** 2 + rot.theta[s] ** 2,
                                   mode.phi[s] ** 2 + mode.theta[s] ** 2, rtol=1e-13)
    assert rot.xi_abs == pytest.approx(mode.xi_abs, rel=1e-15)


def test_derivative_stack_consistent_with_nodal_profiles(mode):
    for side in (LOWER, UPPER):
        x = mode.profile.grid.side_nodes(side)
        psi = mode.derivatives(side, "psi", 1)
        np.testing.assert_allclose(psi[0], mode.psi[side], rtol=0, atol=1e-14)
        fd = np.gradient(psi[0], x, edge_order=2)
        scale = np.max(np.abs(psi[1]))
        assert np.max(np.abs(fd - psi[1])[2:-2]) <= 5e-3 * scale
        # each level is the derivative of the one below
        d1 = mode.derivatives(side, "phi", 2)
        fd2 = np.gradient(d1[1], x, edge_order=2)
        assert np.max(np.abs(fd2 - d1[2])[2:-2]) <= 5e-3 * np.max(np.abs(d1[2]))


def test_derivative_order_limit(mode):
    with pytest.raises(DerivativeOrderUnavailable):
        derivative_stack(mode, k_max=mode.profile.deriv_order)
    with pytest.raises(DerivativeOrderUnavailable):
        mode.derivatives(LOWER, "psi", 4)


def test_json_export(mode):
    doc = json.loads(mode.to_json())
    assert doc["xi"] == [6.0, 8.0]
    assert math.isclose(doc["lambda"], mode.lambda_)
    assert len(doc["psi"]["lower"]) == mode.profile.grid.side_nodes(LOWER).size
    assert len(doc["derivatives"]["phi"]["upper"]) == 4
