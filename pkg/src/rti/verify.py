"""Invariant suite behind ``rti verify``.

Every check returns a :class:`Check` with the measured value, the threshold it
is compared against and the verdict. All inputs are derived from the run
configuration, so the report is a deterministic function of it.
"""
from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg as sl

from .dispersion import F_of_s, dispersion_curve, rotation_comparison, solve_fixed_point
from .eigen import min_eigen, mu_curve, psi_at_interface
from .equilibrium import hydrostatic_residual, integrate_hydrostatic, solve_interface_densities
from .evolve import (EvolutionOperator, energy_identity_drift, evolve, growth_fit, mode_state,
                     rotating_mode_rate)
from .forms import assemble_pencil, rayleigh_quotient, test_pair
from .grid import LOWER, UPPER
from .modes import build_mode, ode_residual, rotate_mode
from .synthesis import RadialAmplitude, build_field, evaluate_field, growth_sandwich, hk_norm


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool

    def row(self):
        return (self.name, self.value, self.threshold, "pass" if self.passed else "FAIL")


def _le(name, value, threshold):
    return Check(name, float(value), float(threshold), bool(value <= threshold))


def _ge(name, value, threshold):
    return Check(name, float(value), float(threshold), bool(value >= threshold))


def _exact_density(law, g, rho0, x):
    if law.gamma == 1.0:
        return rho0 * np.exp(-g * x / law.K)
    gm = law.gamma - 1.0
    return (rho0**gm - gm * g * x / (law.K * law.gamma)) ** (1.0 / gm)


def _equilibrium_checks(fluid, n_ref):
    out = []
    rho_m, rho_p = solve_interface_densities(fluid)
    out.append(_le("interface_pressure_match",
                   abs(fluid.upper_law.p(rho_p) - fluid.lower_law.p(rho_m)) / fluid.interface_pressure,
                   1e-14))
    prof = integrate_hydrostatic(fluid, 64)
    out.append(_ge("density_jump_positive", prof.rho_jump, 0.0 + 1e-300))
    err = 0.0
    for side, r0 in ((LOWER, rho_m), (UPPER, rho_p)):
        x = prof.grid.side_nodes(side)
        exact = _exact_density(fluid.law(side), fluid.g, r0, x)
        err = max(err, float(np.max(np.abs(prof.rho_nodes(side) / exact - 1.0))))
    out.append(_le("closed_form_density_N64", err, 1e-10))
    r16 = hydrostatic_residual(integrate_hydrostatic(fluid, 8))
    r32 = hydrostatic_residual(integrate_hydrostatic(fluid, 16))
    out.append(_ge("hydrostatic_residual_order", math.log2(r16 / r32), 3.5))
    ref = integrate_hydrostatic(fluid, n_ref)
    diffs = np.concatenate([np.diff(ref.rho_nodes(s)) for s in (LOWER, UPPER)])
    out.append(_le("density_nonincreasing", float(np.max(diffs)), 0.0))
    out.append(_ge("density_positive", ref.rho_min, 1e-300))
    return out


def _pencil_checks(profile):
    out = []
    pen = assemble_pencil(profile, 10.0)
    asym = max(float(np.max(np.abs(pen.dense(w) - pen.dense(w).T))) for w in ("E0", "E1", "J"))
    out.append(_le("pencil_symmetry", asym, 0.0))
    out.append(_ge("J_min_eigenvalue", float(np.linalg.eigvalsh(pen.dense("J"))[0]), 1e-300))
    out.append(_ge("E1_min_eigenvalue", float(np.linalg.eigvalsh(pen.dense("E1"))[0]), -1e-12))
    rng = np.random.default_rng(12345)
    worst = math.inf
    for _ in range(20):
        x = rng.standard_normal(pen.n)
        worst = min(worst, rayleigh_quotient(pen, 0.0, x) + profile.g * pen.xi_abs)
    out.append(_ge("quotient_lower_bound_random", worst, -1e-9))
    return out


def _eigen_checks(fluid, profile):
    out = []
    small = integrate_hydrostatic(fluid, 8)
    rel = 0.0
    for k, s in ((2.0, 0.0), (5.0, 0.0), (10.0, 0.01), (20.0, 0.1), (40.0, 0.0)):
        pen = assemble_pencil(small, k)
        it = min_eigen(pen, s, method="iterative").mu
        dense = float(sl.eigh(_dense_energy(pen, s), pen.dense("J"), eigvals_only=True)[0])
        rel = max(rel, abs(it - dense) / abs(dense))
    out.append(_le("eigen_iterative_vs_dense_N8", rel, 1e-10))

    upper_gap = -math.inf
    lower_gap = math.inf
    psi_ratio = math.inf
    for k in (5.0, 10.0, 20.0, 40.0):
        pen = assemble_pencil(profile, k)
        pair = test_pair(profile.grid, k)
        for s in (0.0, 0.01, 0.1):
            r = min_eigen(pen, s)
            upper_gap = max(upper_gap, r.mu - rayleigh_quotient(pen, s, pair))
            lower_gap = min(lower_gap, r.mu + profile.g * k)
            if r.mu < 0:
                _, psi = pen.layout.split(r.vector)
                psi_ratio = min(psi_ratio, abs(psi_at_interface(r)) / np.max(np.abs(psi)))
    out.append(_le("mu_below_test_pair_quotient", upper_gap, 1e-12))
    out.append(_ge("mu_above_minus_g_xi", lower_gap, -1e-9))
    out.append(_ge("psi_interface_ratio", psi_ratio, 1e-6))

    pen = assemble_pencil(profile, 10.0)
    curve = mu_curve(pen, np.linspace(0.0, 0.2, 20))
    mus = curve.mu
    out.append(_ge("mu_nondecreasing_in_s", float(np.min(np.diff(mus))), -1e-12))
    out.append(_le("mu_lipschitz_vs_e1_sup", curve.lipschitz - curve.e1_sup, 1e-9 * max(1.0, curve.e1_sup)))

    mus_n = [min_eigen(assemble_pencil(integrate_hydrostatic(fluid, n), 5.0), 0.0).mu
             for n in (32, 64, 128)]
    order = math.log2(abs(mus_n[0] - mus_n[1]) / abs(mus_n[1] - mus_n[2]))
    out.append(_ge("eigen_convergence_order", order, 1.8))
    return out


def _dense_energy(pen, s):
    return pen.dense("E0") + s * pen.dense("E1")


def _dispersion_checks(profile, profile0, sweep):
    out = []
    out.append(_le("F_at_zero_is_minus_one", abs(F_of_s(profile, 10.0, 0.0) + 1.0), 0.0))
    xs = np.linspace(sweep.xi_min, sweep.xi_max, sweep.xi_steps)
    curve = dispersion_curve(profile, xs)
    unstable = [p for p in curve if p.unstable]
    out.append(_ge("unstable_points", len(unstable), 1))
    fp = max((p.fp_residual for p in unstable), default=math.inf)
    out.append(_le("fixed_point_residual", fp, 1e-8))
    resolve = 0.0
    for p in unstable[:: max(1, len(unstable) // 4)]:
        mu = min_eigen(assemble_pencil(profile, p.xi_abs), p.s_star).mu
        resolve = max(resolve, abs(mu - p.mu) / abs(p.mu))
    out.append(_le("fixed_point_resolve_mu", resolve, 1e-8))
    ratio = max((p.lambda_ / math.sqrt(profile.g * p.xi_abs) for p in unstable), default=math.inf)
    out.append(_le("lambda_below_sqrt_g_xi", ratio, 1.0 + 1e-8))
    fit_pts = [p for p in unstable if 20.0 <= p.xi_abs <= 60.0]
    slope = np.polyfit([p.xi_abs for p in fit_pts], [p.lambda_**2 for p in fit_pts], 1)[0] \
        if len(fit_pts) >= 2 else -math.inf
    out.append(_ge("lambda_sq_slope", float(slope), 1e-300))

    gap = math.inf
    margin = math.inf
    bound = True
    for k in (10.0, 20.0, 40.0):
        p = solve_fixed_point(profile, k)
        p0 = solve_fixed_point(profile0, k)
        if not (p.unstable and p0.unstable):
            gap = -math.inf
            continue
        gap = min(gap, p0.lambda_ - p.lambda_)
        cmp = rotation_comparison(p)
        margin = min(margin, cmp["margin"])
        bound &= cmp["bound_holds"]
    out.append(_ge("rotation_lowers_lambda", gap, 1e-300))
    out.append(_ge("rotation_margin_positive", margin, 1e-300))
    out.append(_ge("rotation_lower_bound_holds", float(bound), 1.0))
    return out


def _mode_checks(fluid0):
    out = []
    res = {}
    for n in (64, 256):
        prof = integrate_hydrostatic(fluid0, n)
        mode = build_mode(solve_fixed_point(prof, 5.0), xi=(3.0, 4.0))
        res[n] = (ode_residual(mode), mode)
    r64, _ = res[64]
    r256, mode = res[256]
    out.append(_le("mode_residual_N256", max(r256.r1, r256.r3), 1e-3))
    out.append(_le("mode_residual_refines", max(r256.r1, r256.r3) - max(r64.r1, r64.r3), 0.0))
    out.append(_le("w_jump_residual", r256.jump_res, 1e-6))
    out.append(_le("theta_equation_residual", r256.r2, 0.0))
    back = rotate_mode(rotate_mode(mode, 0.7), -0.7)
    err = max(float(np.max(np.abs(back.phi[s] - mode.phi[s]))) for s in (LOWER, UPPER))
    out.append(_le("rotation_round_trip", err, 1e-12))
    return out


def _evolve_checks(fluid0, n_elements):
    out = []
    prof = integrate_hydrostatic(fluid0, n_elements)
    k = 10.0
    p = solve_fixed_point(prof, k)
    lam, phi_e, psi, theta = rotating_mode_rate(assemble_pencil(prof, k))
    st = mode_state(prof, (k, 0.0), lam, phi_e, psi, theta)
    dt = 1e-3
    T = dt * math.ceil(2.0 / p.lambda_ / dt)
    op = EvolutionOperator(prof, st.xi)
    ser = evolve(st, prof, dt, T, operator=op)
    fit = growth_fit(ser, t_min=0.0)
    out.append(_le("time_domain_rate_rel_error", abs(fit.lambda_hat - p.lambda_) / p.lambda_, 0.02))
    out.append(_le("energy_identity_drift", energy_identity_drift(ser), 1e-6))
    C = op.coriolis_matrix()
    out.append(_le("coriolis_antisymmetry", float(np.max(np.abs(C + C.T))), 0.0))
    jump, scale = op.pressure_jump(ser.states[-1])
    out.append(_le("pressure_jump_relative", abs(jump) / scale, 1e-10))
    return out


def _synthesis_checks(profile, synth):
    out = []
    fld = build_field(profile, RadialAmplitude(synth.r3, synth.r4), n_r=16, n_theta=8, k_max=3)
    rel = 0.0
    for c in ("eta", "v", "q"):
        for kk in range(4):
            a = hk_norm(fld, c, kk, 0.5)
            b = hk_norm(fld, c, kk, 0.5, method="polar")
            rel = max(rel, abs(a - b) / a)
    out.append(_le("radial_vs_polar_norms", rel, 1e-6))
    ok = True
    for c in ("eta", "v", "q"):
        for kk in range(4):
            for t in synth.t_list:
                sw = growth_sandwich(fld, c, kk, t)
                ok &= sw.lower_ok and sw.upper_ok
    out.append(_ge("growth_sandwich", float(ok), 1.0))
    residue = 0.0
    for x in ((0.3, -0.2, 0.4), (1.1, 0.5, -0.6)):
        residue = max(residue, evaluate_field(fld, 0.5, x).imag_residue)
    out.append(_le("field_imaginary_residue", residue, 1e-10))
    if fld.lambda_min >= 1.0:
        dom = min(hk_norm(fld, "v", 1, t) - hk_norm(fld, "eta", 1, t) for t in synth.t_list)
    else:
        dom = 0.0
    out.append(_ge("velocity_dominates_displacement", dom, 0.0))
    return out


def run_checks(cfg):
    """Run the full invariant suite for a :class:`~rti.config.RunConfig`."""
    fluid = cfg.fluid_config()
    omega_rot = fluid.omega if fluid.omega > 0 else 1.0
    fluid_rot = fluid.with_omega(omega_rot)
    fluid0 = fluid.with_omega(0.0)
    n = cfg.fluid.n_elements
    profile = integrate_hydrostatic(fluid_rot, n)
    profile0 = profile.with_omega(0.0)

    checks = []
    checks += _equilibrium_checks(fluid, n)
    checks += _pencil_checks(profile)
    checks += _eigen_checks(fluid_rot, profile)
    checks += _dispersion_checks(profile, profile0, cfg.sweep)
    checks += _mode_checks(fluid0)
    checks += _evolve_checks(fluid0, n)
    checks += _synthesis_checks(profile, cfg.synth)
    return checks
