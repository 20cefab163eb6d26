"""Command-line orchestration.

Subcommands: probe | validate | solve | certify | asymptotics.  Inputs are
either a space JSON file or a built-in grid; radii come from a CSV or a
boundary-distance scaling; every JSON output embeds the run manifest
(command, argv, seed, threads) so a run can be reproduced byte for byte
from its own output.  Exit codes: 0 pass/converged, 1 hypothesis or
certificate failure, 2 input error, 3 non-convergence.  --threads is
recorded but never changes numeric output (sweeps are synchronous and
reductions use a fixed order).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, operators, radius, regularity, solver
from .errors import (AdmissibilityError, CertificateResidualError,
                     CertificateScopeError, ConfigurationError,
                     DisconnectedSpaceError, SpaceFormatError)
from .space import (disk_grid, interval_grid, lattice_graph, load_space,
                    path_graph, square_grid)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3

BOUNDARY_FUNCTIONS = {
    "zero": lambda c: np.zeros(len(c)),
    "one": lambda c: np.ones(len(c)),
    "linear": lambda c: c[:, 0],
    "saddle": lambda c: c[:, 0] ** 2 - c[:, 1] ** 2,
}


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1,
                   help="recorded in the manifest; numerically inert")
    p.add_argument("--out", type=Path, default=Path("."))


def _add_space_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--space", type=Path, help="space JSON file")
    g.add_argument("--grid", choices=["1d", "2d", "disk", "path", "lattice"])
    p.add_argument("--n", type=int, default=65, help="grid points per side")


def _add_rho_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=Path, help="radius CSV (id,rho)")
    g.add_argument("--rho-factor", type=float,
                   help="rho = factor * dist(., boundary)^power")
    p.add_argument("--rho-power", type=float, default=1.0)


def _build_space(args):
    if args.space is not None:
        return load_space(args.space)
    n = args.n
    return {"1d": interval_grid, "2d": square_grid, "disk": disk_grid,
            "path": path_graph,
            "lattice": lambda k: lattice_graph(k, k)}[args.grid](n)


def _build_rho(args, space):
    if args.rho is not None:
        return radius.read_radius_csv(space, args.rho)
    return radius.RadiusField.scaled_boundary_distance(
        space, args.rho_factor, args.rho_power)


def _boundary_values(args, space):
    if args.boundary is not None:
        values = operators.read_field_csv(space, args.boundary)
        return values[space.boundary_indices]
    if space.coords is None:
        raise SpaceFormatError("--boundary-fn needs a space with coordinates")
    fn = BOUNDARY_FUNCTIONS[args.boundary_fn]
    coords = space.coords[space.boundary_indices]
    if coords.shape[1] < 2 and args.boundary_fn == "saddle":
        raise SpaceFormatError("the saddle boundary function is two-dimensional")
    return fn(coords)


def _manifest(args):
    return {
        "command": args.command,
        "argv": args._argv,
        "seed": args.seed,
        "threads": args.threads,
        "version": __version__,
    }


def _write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# -- subcommands -----------------------------------------------------------------


def cmd_probe(args):
    space = _build_space(args)
    report = space.probe_report(samples=args.samples, seed=args.seed,
                                deltas=tuple(args.delta))
    doc = {"manifest": _manifest(args), "probe": report.to_dict(),
           "n_points": len(space)}
    _write_json(args.out / "probe.json", doc)
    print(json.dumps(doc["probe"], indent=2))
    return EXIT_OK


def cmd_validate(args):
    space = _build_space(args)
    rho = _build_rho(args, space)
    adm = radius.validate_admissible(space, rho)
    bounds = radius.check_radius_bounds(space, rho, args.lam, args.beta,
                                        args.epsilon)
    L = args.L if args.L is not None else radius.fit_lipschitz(space, rho,
                                                               seed=args.seed)
    gate = radius.validate_parameters(args.alpha, L, args.epsilon, args.beta,
                                      args.lam, space.ell(), args.delta)
    ok = adm.ok and bounds.ok and gate.passed
    doc = {"manifest": _manifest(args),
           "admissible": adm.to_dict(),
           "radius_bounds": bounds.to_dict(),
           "gate": gate.to_dict(),
           "pass": ok}
    _write_json(args.out / "validate.json", doc)
    print(f"admissible={adm.ok} bounds={bounds.ok} gate={gate.passed}")
    if not gate.passed:
        print("failed conditions: " + ", ".join(gate.failed_conditions))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args):
    # precedence: explicit flag > config file > built-in default
    cfg = {}
    if args.config is not None:
        with open(args.config) as fh:
            cfg = json.load(fh)
    args.alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if args.alpha is None:
        raise SpaceFormatError("alpha missing: pass --alpha or put it in --config")
    args.tol = args.tol if args.tol is not None else cfg.get("tolerance", 1e-8)
    args.max_iter = args.max_iter if args.max_iter is not None \
        else cfg.get("max_iterations", 100_000)
    args.record_every = args.record_every if args.record_every is not None \
        else cfg.get("record_every", 0)

    space = _build_space(args)
    rho = _build_rho(args, space)
    bvals = _boundary_values(args, space)
    if args.epsilon is not None and not args.force:
        bounds = radius.check_radius_bounds(space, rho, args.lam, args.beta,
                                            args.epsilon)
        L = radius.fit_lipschitz(space, rho, seed=args.seed)
        gate = radius.validate_parameters(args.alpha, L, args.epsilon,
                                          args.beta, args.lam, space.ell(),
                                          args.delta)
        if not (bounds.ok and gate.passed):
            print("validation failed (rerun with --force to solve anyway): "
                  + ", ".join(gate.failed_conditions
                              + (["radius_bounds"] if not bounds.ok else [])))
            return EXIT_FAIL
    initial = None
    if args.init_fn is not None:
        if space.coords is None:
            raise SpaceFormatError("--init-fn needs a space with coordinates")
        initial = BOUNDARY_FUNCTIONS[args.init_fn](space.coords)
    config = solver.SolveConfig(alpha=args.alpha, tolerance=args.tol,
                                max_iterations=args.max_iter,
                                record_every=args.record_every,
                                initial=initial)
    report = solver.solve_dirichlet(space, rho, args.alpha, bvals, config)
    args.out.mkdir(parents=True, exist_ok=True)
    operators.write_field_csv(space, report.field, args.out / "field.csv")
    doc = {"manifest": _manifest(args), **report.to_dict()}
    _write_json(args.out / "solve_report.json", doc)
    print(f"converged={report.converged} iterations={report.iterations_used} "
          f"residual={report.final_residual:.3e}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_certify(args):
    space = _build_space(args)
    rho = _build_rho(args, space)
    u = operators.read_field_csv(space, args.field)
    cert = regularity.certify(
        space, rho, u, args.alpha, args.m, epsilon=args.epsilon,
        beta=args.beta, lam=args.lam, delta=args.delta, gamma=args.gamma,
        residual_tolerance=args.residual_tol, seed=args.seed)
    doc = {"manifest": _manifest(args), **cert.to_dict()}
    _write_json(args.out / "certificate.json", doc)
    print(f"pass={cert.passed} empirical={cert.empirical_constant:.6g} "
          f"theoretical={cert.theoretical_constant:.6g}")
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_asymptotics(args):
    x = np.array([float(v) for v in args.x.split(",")])
    radii = [float(v) for v in args.radii.split(",")]
    f = asymptotics.test_function(args.fn, args.n)
    if args.mode == "mean":
        result = asymptotics.expansion_mean(f, x, radii,
                                            h_divisor=args.h_divisor)
    elif args.mode == "midrange":
        result = asymptotics.expansion_midrange(f, x, radii,
                                                h_divisor=args.h_divisor)
    else:
        result = asymptotics.expansion_p(f, x, args.p, args.n, radii,
                                         h_divisor=args.h_divisor)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "asymptotics.csv", "w") as fh:
        fh.write("radius,quotient\n")
        for r, q in zip(result.radii, result.quotients):
            fh.write(f"{r!r},{q!r}\n")
    doc = {"manifest": _manifest(args), **result.to_dict()}
    _write_json(args.out / "asymptotics.json", doc)
    print(f"mode={result.mode} extrapolated={result.extrapolated:.6g} "
          f"predicted={result.predicted:.6g} rel_err={result.relative_error:.3g}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pharmonious",
        description="Ball-averaging operators, p-harmonious fixed points, and "
                    "regularity certificates on finite metric measure spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe", help="estimate structural constants of a space")
    _add_common(p)
    _add_space_args(p)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--delta", type=float, action="append", default=None)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("validate", help="admissibility, radius bounds, parameter gate")
    _add_common(p)
    _add_space_args(p)
    _add_rho_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--L", type=float, default=None,
                   help="override the fitted Lipschitz constant")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="fixed-point iteration with Dirichlet data")
    _add_common(p)
    _add_space_args(p)
    _add_rho_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--boundary", type=Path, help="boundary CSV (id,value)")
    g.add_argument("--boundary-fn", choices=sorted(BOUNDARY_FUNCTIONS))
    p.add_argument("--config", type=Path, default=None,
                   help="JSON with alpha/tolerance/max_iterations/record_every")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--init-fn", choices=sorted(BOUNDARY_FUNCTIONS), default=None)
    p.add_argument("--epsilon", type=float, default=None,
                   help="run the parameter gate before solving")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--force", action="store_true",
                   help="skip the gate (admissibility is never skipped)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="regularity certificate for a solved field")
    _add_common(p)
    _add_space_args(p)
    _add_rho_args(p)
    p.add_argument("--field", type=Path, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--residual-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("asymptotics", help="small-radius expansion checks")
    _add_common(p)
    p.add_argument("--fn", required=True)
    p.add_argument("--x", required=True, help="comma-separated coordinates")
    p.add_argument("--n", type=int, required=True, help="ambient dimension")
    p.add_argument("--mode", choices=["mean", "midrange", "p"], default="mean")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--radii", default="0.4,0.2,0.1,0.05")
    p.add_argument("--h-divisor", type=int, default=asymptotics.GRID_FINENESS)
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    if args.command == "probe" and args.delta is None:
        args.delta = [0.5, 1.0]
    try:
        return args.func(args)
    except (SpaceFormatError, ConfigurationError, DisconnectedSpaceError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AdmissibilityError, CertificateScopeError,
            CertificateResidualError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
