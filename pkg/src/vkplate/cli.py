"""Command-line entry point: ``vkplate {run,verify,refine}``."""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .benchmarks import build_problem
from .config import ConfigError, load_config
from .gradient_flow import NumericalFailure, energy_dissipation_report, run_evolution
from .output import write_steps_csv, write_vtk
from .verification import (fd_gradient_check, metric_axioms_sample, refinement_study,
                           weak_residual)

log = logging.getLogger("vkplate")

_QUAD = {"paper": "paper", "gauss2": "gauss2", "gauss3": "gauss3"}


def run(config):
    """Run an evolution and write ``steps.csv`` plus VTK snapshots.

    Returns a process exit status.
    """
    try:
        os.makedirs(config.out, exist_ok=True)
        prob = build_problem(config)
        write_vtk(prob.initial, config.mag, os.path.join(config.out, "initial.vtk"))

        def snapshot(n, x, rec):
            write_vtk(prob.model.state(x), config.mag,
                      os.path.join(config.out, f"step_{n:04d}.vtk"))

        trace = run_evolution(prob.model, prob.x0, prob.evolution, callback=snapshot)
        write_steps_csv(trace, config.tau, os.path.join(config.out, "steps.csv"))
    except NumericalFailure as exc:
        log.error("solver failure: %s", exc)
        return 2
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return 3
    return 0


def verify(config, n_triples=100, seed=0):
    prob = build_problem(config)
    model = prob.model
    rng = np.random.default_rng(seed)
    z = 0.3 * rng.standard_normal(model.dim)
    w = 0.3 * rng.standard_normal(model.dim)
    results = []
    err = fd_gradient_check(model, z)
    results.append(("energy gradient vs finite differences", err <= 1e-6, f"rel err {err:.2e}"))
    err = fd_gradient_check(model, z, prev=w)
    results.append(("D^2 gradient vs finite differences", err <= 1e-6, f"rel err {err:.2e}"))
    rep = metric_axioms_sample(model, n_triples, seed)
    results.append(("metric axioms", rep.ok,
                    f"{rep.n_violations} violations, worst slack {rep.worst_triangle_slack:.2e}"))
    trace = run_evolution(model, prob.x0, prob.evolution)
    worst_gap, ok = 0.0, True
    for prev, cur, rec in zip(trace.all_states, trace.states, trace.records):
        r = weak_residual(model.state(prev), model.state(cur), config.tau, prob.params,
                          model.constraints, model.mode)
        worst_gap = max(worst_gap, r.identity_gap / (1 + r.grad_norm))
        ok &= r.identity_ok and r.norm_inf <= rec.tol
    results.append(("weak residual identity", ok, f"worst scaled gap {worst_gap:.2e}"))
    slack = min((row[3] for row in energy_dissipation_report(trace)), default=0.0)
    results.append(("energy-dissipation descent", slack >= -1e-9, f"min slack {slack:.3e}"))
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return 0 if all(p for _, p, _ in results) else 1


def refine(config, levels=3):
    ladder = [(config.nx * 2**l, config.tau / 2**l) for l in range(levels)]
    rep = refinement_study(config, ladder, horizon=config.n_max * config.tau)
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, "refinement.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "nx", "tau", "t", "phi", "dist_to_next"])
        for row in rep.rows():
            w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    for row in rep.rows():
        print("level %d nx=%d tau=%g t=%g phi=%.10g D_next=%.6g" % row)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="vkplate", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "verify", "refine"):
        s = sub.add_parser(name)
        s.add_argument("--config", metavar="PATH")
        s.add_argument("--preset", choices=("benchmark1", "benchmark2", "custom"))
        s.add_argument("--nx", type=int)
        s.add_argument("--ny", type=int)
        s.add_argument("--tau", type=float)
        s.add_argument("--steps", type=int, dest="n_max")
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--quadrature", choices=sorted(_QUAD))
        s.add_argument("--mag", type=float, metavar="FACTOR")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "refine":
            s.add_argument("--levels", type=int, default=3)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in
                 ("preset", "nx", "ny", "tau", "n_max", "out", "quadrature", "mag")}
    if args.nx is not None and args.ny is None:
        overrides["ny"] = args.nx
    try:
        config = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        return run(config)
    if args.command == "verify":
        return verify(config)
    return refine(config, args.levels)


if __name__ == "__main__":
    sys.exit(main())
