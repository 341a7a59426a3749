import math

import numpy as np
import pytest

from rti import dispersion as D
from rti.dispersion import (F_of_s, Stable, dispersion_curve, lambda_no_rotation, rotation_comparison,
                            solve_fixed_point)
from rti.eigen import min_eigen
from rti.equilibrium import FluidConfig, PressureLaw, integrate_hydrostatic
from rti.forms import assemble_pencil

# Growth rates of the affine reference configuration from the shooting oracle
# in tests/oracles/shooting.py (adaptive ODE integration, analytic densities).
SHOOTING = {
    (0.0, 5.0): 1.2758105339500583,
    (0.0, 10.0): 1.8153032062314989,
    (0.0, 20.0): 2.5747096805127883,
    (1.0, 10.0): 1.6143603010236662,
    (1.0, 20.0): 2.513619498423814,
}


def test_F_at_zero_is_minus_one(profile):
    assert F_of_s(profile, 12.0, 0.0) == -1.0


def test_no_rotation_reduces_to_lambda0(profile0):
    p = solve_fixed_point(profile0, 15.0)
    assert p.unstable
    assert p.lambda_ == pytest.approx(p.lambda0, rel=1e-14)
    assert p.s_star == pytest.approx(1.0 / p.lambda0**2, rel=1e-14)


def test_fixed_point_residuals(profile):
    p = solve_fixed_point(profile, 20.0)
    assert p.unstable
    assert p.fp_residual <= 1e-8
    mu = min_eigen(assemble_pencil(profile, 20.0), p.s_star).mu
    assert mu == pytest.approx(p.mu, rel=1e-8)
    assert p.lambda_ <= math.sqrt(profile.g * 20.0)


def test_root_is_the_smallest_sign_change(profile):
    p = solve_fixed_point(profile, 20.0)
    s = np.linspace(1.0 / p.lambda0**2, p.s_star * (1 - 1e-6), 12)
    assert all(F_of_s(profile, 20.0, v) < 0 for v in s)


@pytest.mark.parametrize("key", sorted(SHOOTING))
def test_against_shooting_oracle(fluid, key):
    omega, k = key
    prof = integrate_hydrostatic(fluid.with_omega(omega), 256)
    # second-order FEM: |error| <= C (k h)^2 with C measured well below 0.05
    assert solve_fixed_point(prof, k).lambda_ == pytest.approx(SHOOTING[key], rel=0.05 * (k / 256) ** 2)


def test_stable_without_gravity():
    cfg = FluidConfig(PressureLaw.affine(1.0), PressureLaw.affine(2.0), 0.0, 1.0, 1.0, 1.0, 2.0)
    prof = integrate_hydrostatic(cfg, 32)
    assert lambda_no_rotation(prof, 10.0) is Stable
    assert solve_fixed_point(prof, 10.0).status == "stable"


def test_rotation_suppresses_long_waves(profile):
    p = solve_fixed_point(profile, 2.0)
    assert p.status == "no_growing_mode"
    assert math.isnan(p.lambda_)


def test_bracket_failure_is_reported(profile, monkeypatch):
    monkeypatch.setattr(D, "MAX_EXPANSIONS", 0)
    (pt,) = dispersion_curve(profile, [20.0], workers=1).points
    assert pt.status == "bracket_failure"
    assert "s_high" in pt.detail


def test_curve_is_ordered_and_thread_independent(profile):
    xs = [6.0, 12.0, 24.0, 36.0, 48.0]
    a = dispersion_curve(profile, xs, workers=1)
    b = dispersion_curve(profile, xs, workers=4)
    assert [p.xi_abs for p in b] == xs
    assert [p.row() for p in a] == [p.row() for p in b]
    assert b.slope > 0


def test_descending_input_rejected(profile):
    with pytest.raises(ValueError):
        dispersion_curve(profile, [5.0, 4.0])


@pytest.mark.parametrize("k", [10.0, 20.0, 40.0])
def test_rotation_lowers_rate_with_margin(profile, profile0, k):
    p = solve_fixed_point(profile, k)
    p0 = solve_fixed_point(profile0, k)
    assert p.lambda_ < p0.lambda_
    cmp = rotation_comparison(p)
    assert cmp["strict"] and cmp["margin"] > 0 and cmp["bound_holds"]
