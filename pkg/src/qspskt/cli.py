"""Command line: qspskt {eval, fit, synthesize, verify}.

Exit codes: 0 success, 2 precondition, 3 convergence, 4 parse.
"""

import argparse
import json
import sys

import numpy as np

from . import su2
from .errors import (ConvergenceError, DomainError, NormalizationError, ParseError, PreconditionError,
                     RefinementError, StructureError, UnitarityError)
from .protocol import ChebSeries, chebyshev_nodes, evaluate, loads, project_pi, protocol_to_json

EXIT_OK, EXIT_PRECONDITION, EXIT_CONVERGENCE, EXIT_PARSE = 0, 2, 3, 4


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _read_series(path):
    text = _read(path)
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ParseError(f"{path}: expected a ChebSeries object")
    return ChebSeries.from_json(d)


def _emit(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _mat(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


# ---------------------------------------------------------------- commands


def cmd_eval(args):
    p = loads(_read(args.protocol))
    xs = np.array([args.x]) if args.x is not None else chebyshev_nodes(args.grid)
    U = evaluate(p, xs)
    nodes = []
    for x, M in zip(xs, U):
        pf = su2.pauli_form(M)
        nodes.append({"x": float(x), "unitary": _mat(M), "re_p": float(M[0, 0].real),
                      "pauli": {"theta": pf.theta, "axis": list(pf.axis)},
                      "pi_top_left": float(project_pi(M)), "pi_top_right": float(project_pi(M, "top-right"))})
    _emit({"oracle_length": p.oracle_length, "nodes": nodes}, args.json_out)
    return EXIT_OK


def cmd_fit(args):
    from .phases import fit_phases

    target = _read_series(args.target)
    try:
        res = fit_phases(target, args.degree, symmetric=not args.asymmetric, seed=args.seed, tol=args.tolerance)
    except ConvergenceError as exc:
        _emit({"protocol": protocol_to_json(exc.best.protocol), "residual": exc.best.residual,
               "converged": False}, args.json_out)
        raise
    _emit({"protocol": protocol_to_json(res.protocol), "residual": res.residual, "converged": True},
          args.json_out)
    return EXIT_OK


def cmd_synthesize(args):
    from .driver import synthesize

    target = _read_series(args.target)
    try:
        r = synthesize(target, args.epsilon, eps0=args.epsilon0, builder=args.builder, max_level=args.depth,
                       seed=args.seed, min_level=args.min_level)
    except ConvergenceError as exc:
        b = exc.best
        if b is not None and hasattr(b, "ledger"):
            _emit({"protocol": protocol_to_json(b.protocol), "residual": b.residual, "level": b.level,
                   "ledger": [x.to_json() for x in b.ledger], "converged": False}, args.json_out)
        raise
    _emit({"protocol": protocol_to_json(r.protocol), "residual": r.residual, "level": r.level,
           "ledger": [x.to_json() for x in r.ledger], "converged": True}, args.json_out)
    return EXIT_OK


# ---------------------------------------------------------------- verify suites


def suite_nested_commutator_scaling(args):
    from .commutator import nested_scaling

    slope, res, dev = nested_scaling()
    return [("slope in [4.7, 5.3]", f"{slope:.3f}", 4.7 <= slope <= 5.3),
            ("planarity <= 1e-9", f"{max(dev):.2e}", max(dev) <= 1e-9)]


def suite_planarity(args):
    from .identity import identity_perturbation
    from .protocol import Protocol, check_structure

    rng = np.random.default_rng(args.seed)
    worst_id, worst_sym = 0.0, 0.0
    g = chebyshev_nodes(33)
    for _ in range(50):
        h = rng.normal(size=rng.integers(1, 6))
        psi = Protocol.standard(np.concatenate([h, h[::-1][1:]]))
        worst_sym = max(worst_sym, check_structure(psi, g)[1])
        worst_id = max(worst_id, float(np.max(su2.op_norm(evaluate(identity_perturbation(psi, 0.0), g) - su2.I2))))
    return [("symmetric protocols XZ-planar (<= 1e-9)", f"{worst_sym:.2e}", worst_sym <= 1e-9),
            ("unperturbed identity product (<= 1e-10)", f"{worst_id:.2e}", worst_id <= 1e-10)]


def suite_gj_counts(args):
    from .words import count_table

    rows = count_table(10, 6)
    bad = [(r, e) for r, e, a, b in rows if a != b]
    return [(f"r={r} eta={e}", f"{a} / {b}", a == b) for r, e, a, b in rows] + \
        [("all counts match", f"{len(rows) - len(bad)}/{len(rows)}", not bad)]


def suite_schedule(args):
    from .driver import length_exponent, length_schedule

    n, l = length_schedule(0.1, 1, 1e-3)
    return [("length_schedule(0.1, 1, 1e-3) = (5, 17^5)", f"({n}, {l})", (n, l) == (5, 17 ** 5)),
            ("exponent 12.70 +- 0.01", f"{length_exponent():.3f}", abs(length_exponent() - 12.70) <= 0.01)]


SUITES = {
    "nested-commutator-scaling": suite_nested_commutator_scaling,
    "planarity": suite_planarity,
    "gj-counts": suite_gj_counts,
    "schedule": suite_schedule,
}


def cmd_verify(args):
    if args.suite not in SUITES:
        raise PreconditionError(f"unknown suite {args.suite!r}; available: {', '.join(sorted(SUITES))}")
    rows = SUITES[args.suite](args)
    width = max(len(r[0]) for r in rows)
    for name, value, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {value}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump([{"check": n, "value": v, "pass": bool(o)} for n, v, o in rows], fh, indent=2)
    return EXIT_OK if all(r[2] for r in rows) else EXIT_CONVERGENCE


# ---------------------------------------------------------------- entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="qspskt", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json-out", metavar="PATH")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a protocol file")
    e.add_argument("protocol")
    e.add_argument("--x", type=float)
    e.add_argument("--grid", type=int, default=9, help="number of Chebyshev nodes")
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("fit", help="fit phases to a ChebSeries target")
    f.add_argument("target")
    f.add_argument("--degree", type=int, required=True)
    f.add_argument("--tolerance", type=float, default=1e-6)
    f.add_argument("--asymmetric", action="store_true")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("synthesize", help="level-0 fit plus nested-commutator refinement")
    s.add_argument("target")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--epsilon0", type=float, default=0.2)
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--min-level", type=int, default=0)
    s.add_argument("--builder", choices=["phase-finder", "fourier-lcu"], default="phase-finder")
    s.set_defaults(func=cmd_synthesize)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite")
    v.set_defaults(func=cmd_verify)

    # allow the shared flags after the subcommand too
    for p in (e, f, s, v):
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--json-out", metavar="PATH", default=argparse.SUPPRESS)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UnitarityError) as exc:
        kind = "unitarity error" if isinstance(exc, UnitarityError) else "parse error"
        print(f"{kind}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, DomainError, NormalizationError, StructureError) as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConvergenceError, RefinementError) as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
