import math

import numpy as np
import pytest

from rti.errors import DerivativeOrderUnavailable, InterfaceSample
from rti.grid import LOWER, UPPER
from rti.synthesis import (RadialAmplitude, build_field, evaluate_field, grid_for_frequency,
                           growth_sandwich, hk_norm)


@pytest.fixture(scope="module")
def field(profile):
    return build_field(profile, RadialAmplitude(10.0, 14.0), n_r=16, n_theta=8, k_max=3)


def test_bump_support_and_validation():
    f = RadialAmplitude(1.0, 2.0)
    assert np.all(f(np.array([0.5, 1.0, 2.0, 3.0])) == 0.0)
    assert f(1.5) == pytest.approx(math.exp(-4.0))
    with pytest.raises(ValueError):
        RadialAmplitude(2.0, 1.0)


@pytest.mark.parametrize("which", ["eta", "v", "q"])
def test_radial_reduction_matches_polar_sum(field, which):
    for k in range(4):
        a = hk_norm(field, which, k, 1.0)
        b = hk_norm(field, which, k, 1.0, method="polar")
        assert a == pytest.approx(b, rel=1e-10)


def test_radial_quadrature_converged(profile):
    amp = RadialAmplitude(10.0, 14.0)
    coarse, fine = (build_field(profile, amp, n_r=n, n_theta=8, k_max=1) for n in (32, 64))
    assert hk_norm(fine, "eta", 1, 0.5) == pytest.approx(hk_norm(coarse, "eta", 1, 0.5), rel=1e-6)


def test_norms_increase_with_order(field):
    vals = [hk_norm(field, "eta", k, 0.0) for k in range(4)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_amplitude_scales_norm_linearly(field):
    doubled = field.with_amplitude(field.amplitude.scaled(2.0))
    assert hk_norm(doubled, "q", 2, 0.3) == pytest.approx(2.0 * hk_norm(field, "q", 2, 0.3), rel=1e-14)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_growth_sandwich(field, t):
    for which in ("eta", "v", "q"):
        for k in range(4):
            sw = growth_sandwich(field, which, k, t)
            assert sw.lower_ok and sw.upper_ok


def test_velocity_carries_the_rate(field):
    assert field.lambda_min >= 1.0
    for t in (0.0, 1.0):
        assert hk_norm(field, "v", 1, t) >= hk_norm(field, "eta", 1, t)


def test_pointwise_values_are_real(field):
    for x in ((0.0, 0.0, 0.3), (0.4, -1.3, -0.7), (2.0, 0.1, 0.95)):
        assert evaluate_field(field, 0.7, x).imag_residue <= 1e-10


def test_pointwise_growth_factor(field):
    # a single radial node grows exactly like exp(lambda t)
    one = build_field(field.profile, RadialAmplitude(11.0, 11.5), n_r=1, n_theta=8, k_max=1)
    a = evaluate_field(one, 0.0, (0.2, 0.1, 0.4))
    b = evaluate_field(one, 1.5, (0.2, 0.1, 0.4))
    np.testing.assert_allclose(b.eta, a.eta * math.exp(1.5 * one.lambdas[0]), rtol=1e-12)


def test_interface_needs_side(field):
    with pytest.raises(InterfaceSample):
        evaluate_field(field, 0.0, (0.0, 0.0, 0.0))
    lo = evaluate_field(field, 0.0, (0.1, 0.0, 0.0), side=LOWER)
    hi = evaluate_field(field, 0.0, (0.1, 0.0, 0.0), side=UPPER)
    assert lo.eta[2] == pytest.approx(hi.eta[2], rel=1e-12)


def test_order_limit(field):
    with pytest.raises(DerivativeOrderUnavailable):
        hk_norm(field, "eta", 4)


def test_grid_for_frequency_even_and_monotone():
    ns = [grid_for_frequency(R) for R in (1.0, 40.0, 101.0, 300.0)]
    assert ns == sorted(ns) and all(n % 2 == 0 for n in ns) and ns[0] == 128
