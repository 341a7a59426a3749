"""Command-line entry point: ``rti [--config FILE] [--out DIR] <subcommand> [flags]``."""
import argparse
import csv
import json
import math
import platform
import sys
import time
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np

from . import errors
from ._backend import backend_name
from .config import RunConfig, config_hash, parse_config, serialize_config
from .dispersion import dispersion_curve, solve_fixed_point
from .equilibrium import integrate_hydrostatic
from .evolve import energy_trace, evolve, mode_state, random_state, rotating_mode_rate
from .forms import assemble_pencil
from .modes import build_mode, derivative_stack
from .synthesis import RadialAmplitude, build_field, growth_sandwich, illposed_sequence

FLOAT_FMT = "%.17g"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_table(ctx, stem, header, rows):
    """CSV or JSON depending on ``[output] format``; returns the file name."""
    rows = list(rows)
    if ctx.cfg.output.format == "json":
        name = f"{stem}.json"
        doc = [{h: (v if not isinstance(v, np.generic) else v.item()) for h, v in zip(header, r)}
               for r in rows]
        doc = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}
               for d in doc]
        _write_json(ctx.out / name, doc)
    else:
        name = f"{stem}.csv"
        _write_csv(ctx.out / name, header, rows)
    return name


def _versions():
    out = {"python": platform.python_version()}
    for pkg in ("numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    try:
        out["rti"] = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        out["rti"] = None
    return out


class _Context:
    def __init__(self, cfg, out, args):
        self.cfg = cfg
        self.out = out
        self.args = args
        self.fluid = cfg.fluid_config()

    def profile(self, omega=None, n=None):
        fluid = self.fluid if omega is None else self.fluid.with_omega(omega)
        return integrate_hydrostatic(fluid, self.cfg.fluid.n_elements if n is None else n)


# ---------------------------------------------------------------------------
# subcommands


def cmd_equilibrium(ctx):
    name = "equilibrium.csv"
    (ctx.out / name).write_text(ctx.profile().to_csv(), encoding="utf-8")
    return [name], 0


def cmd_dispersion(ctx):
    a, sw = ctx.args, ctx.cfg.sweep
    lo = sw.xi_min if a.xi_min is None else a.xi_min
    hi = sw.xi_max if a.xi_max is None else a.xi_max
    steps = sw.xi_steps if a.xi_steps is None else a.xi_steps
    curve = dispersion_curve(ctx.profile(omega=a.omega), np.linspace(lo, hi, steps))
    name = _write_table(ctx, "dispersion",
                        ["xi_abs", "lambda", "lambda0", "s_star", "fp_residual", "status"],
                        (p.row() for p in curve))
    return [name], 0


def cmd_mode(ctx):
    a = ctx.args
    xi = np.array([a.xi1, a.xi2], dtype=float)
    profile = ctx.profile()
    point = solve_fixed_point(profile, math.hypot(*xi))
    if not point.unstable:
        raise errors.NoGrowingMode(f"no growing mode at |xi| = {point.xi_abs:g} ({point.status})")
    mode = derivative_stack(build_mode(point, xi=xi), k_max=a.k_max)
    name = "mode.json"
    (ctx.out / name).write_text(mode.to_json() + "\n", encoding="utf-8")
    names = [name]
    if a.dump_pencil:
        point.eig.pencil.dump(ctx.out / "pencil.mtx")
        names.append("pencil.mtx")
    return names, 0


def cmd_synth(ctx):
    a, sy = ctx.args, ctx.cfg.synth
    amp = RadialAmplitude(sy.r3 if a.r3 is None else a.r3, sy.r4 if a.r4 is None else a.r4)
    k = sy.k if a.k is None else a.k
    ts = sy.t_list if a.t_list is None else tuple(float(t) for t in a.t_list.split(","))
    field = build_field(ctx.profile(), amp, n_r=sy.n_r if a.nr is None else a.nr,
                        n_theta=sy.n_theta if a.ntheta is None else a.ntheta, k_max=k)
    rows = []
    for t in ts:
        sw = {c: growth_sandwich(field, c, k, t) for c in ("eta", "v", "q")}
        rows.append((t, k, sw["eta"].norm_t, sw["v"].norm_t, sw["q"].norm_t,
                     sw["eta"].lower_bound, sw["eta"].upper_bound))
    name = _write_table(ctx, "synth",
                        ["t", "k", "norm_eta", "norm_v", "norm_q", "lower_bound", "upper_bound"], rows)
    return [name], 0


def cmd_evolve(ctx):
    a, ev = ctx.args, ctx.cfg.evolve
    xi = (ev.xi1 if a.xi1 is None else a.xi1, ev.xi2 if a.xi2 is None else a.xi2)
    dt = ev.dt if a.dt is None else a.dt
    T = ev.T if a.T is None else a.T
    init = ev.init if a.init is None else a.init
    profile = ctx.profile()
    if init == "mode":
        lam, phi_e, psi, theta = rotating_mode_rate(assemble_pencil(profile, math.hypot(*xi)))
        st = mode_state(profile, xi, lam, phi_e, psi, theta)
    else:
        st = random_state(profile, xi, seed=ev.seed)
    ser = evolve(st, profile, dt, T)
    trace = energy_trace(ser)
    lhs = np.full(ser.times.size, math.nan)
    rhs = np.full(ser.times.size, math.nan)
    lhs[1:-1], rhs[1:-1] = trace.lhs, trace.rhs
    rows = zip(ser.times, ser.norm_eta, ser.norm_v, ser.norm_q, lhs, rhs)
    name = _write_table(ctx, "evolve",
                        ["t", "norm_eta", "norm_v", "norm_q", "energy_lhs", "energy_rhs"], rows)
    return [name], 0


def cmd_illposed(ctx):
    a, ip = ctx.args, ctx.cfg.illposed
    entries = illposed_sequence(
        ctx.profile(),
        j=ip.j if a.j is None else a.j, k=ip.k if a.k is None else a.k,
        alpha=ip.alpha if a.alpha is None else a.alpha, T0=ip.t0 if a.t0 is None else a.t0,
        n_max=ip.n_max if a.nmax is None else a.nmax)
    rows = [(e.n, e.R, e.init_norm, e.grown_norm, e.status) for e in entries]
    name = _write_table(ctx, "illposed", ["n", "R_n", "init_Hj", "grown_Hk", "status"], rows)
    status = 0 if all(e.status == "found" for e in entries) else 1
    return [name], status


def cmd_verify(ctx):
    from .verify import run_checks
    checks = run_checks(ctx.cfg)
    name = _write_table(ctx, "verify", ["check", "value", "threshold", "result"],
                        (c.row() for c in checks))
    failed = [c.name for c in checks if not c.passed]
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} value={FLOAT_FMT % c.value} "
              f"threshold={FLOAT_FMT % c.threshold}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return [name], 1 if failed else 0


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "dispersion": cmd_dispersion,
    "mode": cmd_mode,
    "synth": cmd_synth,
    "evolve": cmd_evolve,
    "illposed": cmd_illposed,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="rti", description="Rayleigh-Taylor growth-rate toolkit")
    p.add_argument("--config", help="INI configuration file (default: built-in reference)")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.add_argument("--timings", action="store_true", help="also write wall-clock timings.json")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    sub.add_parser("equilibrium", help="hydrostatic profile CSV")

    d = sub.add_parser("dispersion", help="growth rate versus |xi|")
    d.add_argument("--xi-min", type=float)
    d.add_argument("--xi-max", type=float)
    d.add_argument("--xi-steps", type=int)
    d.add_argument("--omega", type=float)

    m = sub.add_parser("mode", help="normal-mode profiles as JSON")
    m.add_argument("--xi1", type=float, default=10.0)
    m.add_argument("--xi2", type=float, default=0.0)
    m.add_argument("--k-max", type=int, default=2)
    m.add_argument("--dump-pencil", action="store_true")

    s = sub.add_parser("synth", help="norms of a synthesized growing solution")
    s.add_argument("--r3", type=float)
    s.add_argument("--r4", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--t-list", help="comma-separated times")
    s.add_argument("--nr", type=int)
    s.add_argument("--ntheta", type=int)

    e = sub.add_parser("evolve", help="time integration of one Fourier mode")
    e.add_argument("--xi1", type=float)
    e.add_argument("--xi2", type=float)
    e.add_argument("--T", type=float)
    e.add_argument("--dt", type=float)
    e.add_argument("--init", choices=("mode", "random"))

    i = sub.add_parser("illposed", help="small-data large-growth sequence")
    i.add_argument("--j", type=int)
    i.add_argument("--k", type=int)
    i.add_argument("--alpha", type=float)
    i.add_argument("--t0", type=float)
    i.add_argument("--nmax", type=int)

    sub.add_parser("verify", help="run the invariant suite")
    return p


def _load_config(path):
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out) if args.out else None
    try:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
        cfg = _load_config(args.config)
        out = Path(args.out if args.out else cfg.output.directory)
        cfg = cfg.with_output_dir(out)
        out.mkdir(parents=True, exist_ok=True)
        ctx = _Context(cfg, out, args)
        t0 = time.perf_counter()
        names, status = COMMANDS[args.command](ctx)
        elapsed = time.perf_counter() - t0
    except (errors.RTIError, ValueError, OSError) as exc:
        record = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, errors.ValidationErrors):
            record["violations"] = list(exc.errors)
        if isinstance(exc, errors.ParseError):
            record["line"], record["column"] = exc.line, exc.column
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        if out is not None and out.is_dir():
            _write_json(out / "error.json", record)
        return 1

    meta = {
        "command": args.command,
        "config_hash": config_hash(cfg),
        "config": serialize_config(replace(cfg, output=replace(cfg.output, directory="."))),
        "backend": backend_name(),
        "versions": _versions(),
        "artifacts": names,
        "exit_status": status,
    }
    _write_json(out / "run_meta.json", meta)
    if args.timings:
        _write_json(out / "timings.json", {"command": args.command, "seconds": elapsed})
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
