"""Compare the numba kernels against their numpy/scipy counterparts.

    python3 benchmarks/bench_kernels.py [--n-elements 256] [--repeat 5] [--json out.json]

Each kernel is called once before timing so JIT compilation is excluded.
Reported numbers are the best of ``--repeat`` runs of ``timeit`` loops.
"""
import argparse
import json
import timeit

import numpy as np

from rti import _kernels as K
from rti.equilibrium import FluidConfig, PressureLaw, integrate_hydrostatic
from rti.evolve import EvolutionOperator, random_state
from rti.forms import assemble_pencil


def _cases(n_elements):
    cfg = FluidConfig(PressureLaw.affine(1.0), PressureLaw.affine(2.0), g=1.0, omega=1.0,
                      m=1.0, l=1.0, interface_pressure=2.0)
    prof = integrate_hydrostatic(cfg, n_elements)
    pen = assemble_pencil(prof, 20.0)
    A = np.ascontiguousarray(pen.energy(0.1))
    J = np.ascontiguousarray(pen.J)
    x = np.random.default_rng(0).standard_normal(pen.n)
    shifted = np.ascontiguousarray(A + 50.0 * J)

    op = EvolutionOperator(prof, (12.0, 16.0))
    y = op.pack(random_state(prof, (12.0, 16.0), seed=1))
    args = (op.view(y, "a3"), op.view(y, "b1"), op.view(y, "b2"), op.view(y, "b3"),
            op.view(y, "q"), op.h, op.W, op.rho, op.dp, op.Nl, op.Nr, op.mphi,
            12.0, 16.0, op.g, op.omega)
    return {
        "sym_band_matvec": (lambda: K.sym_band_matvec_nb(A, x), lambda: K.sym_band_matvec_np(A, x)),
        "spd_factor+solve": (lambda: K.spd_factor_nb(shifted).solve(x),
                             lambda: K.spd_factor_np(shifted).solve(x)),
        "sym_factor+solve": (lambda: K.sym_factor_nb(A).solve(x), lambda: K.sym_factor_np(A).solve(x)),
        "evolve_forces": (lambda: K.evolve_forces_nb(*args), lambda: K.evolve_forces_np(*args)),
    }


def _best(fn, repeat):
    fn()
    timer = timeit.Timer(fn)
    loops, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=loops)) / loops


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-elements", type=int, default=256, help="elements per side")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="write results to this file")
    a = p.parse_args(argv)

    rows = []
    print(f"{'kernel':<20}{'numba [us]':>14}{'numpy [us]':>14}{'speedup':>10}")
    for name, (nb, np_) in _cases(a.n_elements).items():
        t_nb = _best(nb, a.repeat)
        t_np = _best(np_, a.repeat)
        rows.append({"kernel": name, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb})
        print(f"{name:<20}{t_nb * 1e6:>14.2f}{t_np * 1e6:>14.2f}{t_np / t_nb:>10.2f}")
    if a.json:
        with open(a.json, "w", encoding="utf-8") as fh:
            json.dump({"n_elements": a.n_elements, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
