"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or unmet precondition, 3 failed
internal certification, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import enum
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from . import classify as fc
from . import keepaway as ka
from . import lie
from . import minimal_sets as ms
from . import rational as rq
from . import torus as tc

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_CERTIFICATION = 3
EXIT_USAGE = 64

PRECISION_ENV = "HOMFLOW_PRECISION"

NAMED_CONSTANTS = {
    "phi": lambda: (1 + math.sqrt(5)) / 2,
    "golden": lambda: (1 + math.sqrt(5)) / 2,
    "sqrt2": lambda: math.sqrt(2),
    "sqrt3": lambda: math.sqrt(3),
    "pi": lambda: math.pi,
    "e": lambda: math.e,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# parsing helpers

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return rq.fraction_str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, mpmath.mpf):
        return str(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, default=_jsonable, sort_keys=True, indent=2)


def parse_matrix(text: str) -> list[list[int]]:
    try:
        return [[int(v) for v in row.split(",")] for row in text.split(";")]
    except ValueError as exc:
        raise ValueError(f"matrix must be integer rows like '2,1;1,1': {exc}") from None


def parse_omega(text: str) -> tc.TorusFlow:
    """Rational entries give an exact flow; any decimal or named constant makes it numeric."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty frequency vector")
    exact = all(p.lower() not in NAMED_CONSTANTS and "." not in p and "e" not in p.lower() for p in parts)
    if exact:
        return tc.TorusFlow.rational(Fraction(p) for p in parts)
    vals = []
    for p in parts:
        key = p.lower()
        vals.append(NAMED_CONSTANTS[key]() if key in NAMED_CONSTANTS else float(Fraction(p)))
    return tc.TorusFlow.numeric(vals)


def parse_point(values: Sequence) -> tuple[float, ...]:
    return tuple(float(Fraction(str(v))) for v in values)


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def load_targets(path: str) -> list[tuple[float, ...]]:
    doc = load_json(path)
    if isinstance(doc, dict):
        doc = doc.get("targets", [])
    return [parse_point(p) for p in doc]


def resolve_precision(flag: str | None) -> str:
    value = flag or os.environ.get(PRECISION_ENV) or "extended"
    if value not in ("double", "extended"):
        raise ValueError(f"precision must be 'double' or 'extended', got {value!r}")
    return value


# --------------------------------------------------------------------------
# subcommands; each returns (report, summary lines)

def cmd_validate(args) -> tuple[dict, list[str], int]:
    alg = lie.load_algebra(args.algebra)
    rep = lie.validate(alg)
    report = {"algebra": lie.algebra_to_json(alg), **rep.to_dict()}
    summary = [f"dim {alg.dim}: {'valid Lie algebra' if rep.valid else f'{len(rep.jacobi)} Jacobi violation(s)'}"]
    return report, summary, EXIT_OK if rep.valid else EXIT_PRECONDITION


def cmd_classify(args):
    alg = lie.load_algebra(args.algebra)
    x = lie.parse_element(alg, args.element)
    cls = fc.classify_flow(alg, x)
    report = cls.to_dict()
    if args.splitting:
        report["splitting"] = fc.spectral_splitting(alg, x).to_dict()
    n0, nm, np_ = cls.counts
    return report, [f"{cls.tag.value}: {n0} imaginary-axis, {nm} left, {np_} right eigenvalues of ad X"], EXIT_OK


def cmd_jordan(args):
    alg = lie.load_algebra(args.algebra)
    pair = fc.jordan_chevalley(alg, lie.parse_element(alg, args.element))
    report = pair.to_dict(alg)
    return report, [f"s = {report['s_label']}", f"n = {report['n_label']}"], EXIT_OK


def cmd_sl2(args):
    alg = lie.load_algebra(args.algebra)
    s = lie.parse_element(alg, args.commuting_with) if args.commuting_with else None
    triple = fc.sl2_embed(alg, lie.parse_element(alg, args.nilpotent), s)
    report = triple.to_dict(alg)
    return report, [f"{k} = {v}" for k, v in report["labels"].items()], EXIT_OK


def _system(args) -> ka.ToralHyperbolicSystem:
    mode = ka.Mode.SUSPENSION if args.mode == "suspension" else ka.Mode.DISCRETE
    return ka.build_system(parse_matrix(args.matrix), mode)


def cmd_keepaway(args):
    system = _system(args)
    targets = load_targets(args.targets)
    window = ka.Window.parse(args.window)
    if len(window.center) != system.d or any(len(p) != system.d for p in targets):
        raise ValueError("window and targets must match the torus dimension")
    params = ka.KeepAwayParams(
        r=args.r,
        delta=args.delta,
        x0=window.center if args.r is not None else None,
        h=args.h,
        t_max=args.tmax,
        max_stages=args.stages,
        precision=args.precision,
    )
    try:
        result = ka.run_keepaway(system, targets, window, params)
    except ka.KeepAwayError as exc:
        trace = exc.details.get("trace")
        report = {"error": str(exc), "validation": exc.details.get("validation")}
        if trace is not None:
            report["trace"] = trace.to_dict()
        return report, [str(exc)], EXIT_CERTIFICATION
    report = result.to_dict()
    csv_path = args.csv or (str(Path(args.output).with_suffix(".csv")) if args.output else "keepaway_orbit.csv")
    write_orbit_csv(csv_path, system, result.trace.q, targets, args.tmax, args.h, result.trace.ctx)
    report["orbit_csv"] = csv_path
    tr = result.trace
    summary = [
        f"x0 = {[float(c) for c in tr.x0]}, r = {tr.r:.6g}, delta = {tr.delta:.6g}",
        f"{len(tr.stages) - 1} correction stage(s), stopped by {tr.terminated_by}",
        f"q = {result.q.tolist()}, epsilon = {result.epsilon:.6g}",
        f"min sampled target distance over [0, {args.tmax:g}] = {tr.validation['min_distance']:.6g}",
        f"orbit samples written to {csv_path}",
    ]
    return report, summary, EXIT_OK


def write_orbit_csv(path: str, system, q, targets, t_max: float, h: float, ctx) -> None:
    times, pts, heights = ka.orbit_samples(system, q, t_max, h, ctx)
    dist = ka.target_distances(system, pts, heights, targets)
    suspension = system.mode is ka.Mode.SUSPENSION
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t"] + [f"x{i}" for i in range(system.d)] + (["s"] if suspension else []) + ["min_target_distance"]
        w.writerow(header)
        for i in range(len(times)):
            row = [f"{times[i]:.10g}"] + [repr(float(c)) for c in pts[i]]
            if suspension:
                row.append(repr(float(heights[i])))
            row.append(repr(float(dist[i])))
            w.writerow(row)


def cmd_minimal_sets(args):
    system = _system(args)
    params = ms.CatalogParams(
        eta=args.eta,
        separation=args.separation,
        t_keepaway=args.tkeep,
        budget=args.budget,
        seed=args.seed,
        precision=args.precision,
    )
    cat = ms.enumerate_minimal_sets(system, args.count, params)
    report = cat.to_dict()
    report["oracle"] = [ms.check_against_oracle(system.A, s) for s in cat.sets]
    summary = [f"{len(cat.sets)} of {args.count} minimal set(s){'' if cat.complete else ' (partial: budget exhausted)'}"]
    summary += [f"  period {s.period}, residual {s.residual:.2e}" for s in cat.sets]
    return report, summary, EXIT_OK


def cmd_torus_distributions(args):
    flow = parse_omega(args.omega)
    basis = tc.invariant_distributions(flow, args.cutoff, args.atol)
    report = basis.to_dict()
    report["omega"] = flow.to_dict()
    return report, [f"{basis.count} invariant distribution(s) with |k| <= {args.cutoff}"], EXIT_OK


def cmd_torus_solve(args):
    flow = parse_omega(args.omega)
    f = tc.FourierFunction.from_json(load_json(args.f))
    sol = tc.solve_cohomological(flow, f, args.cutoff)
    report = sol.to_dict()
    report["omega"] = flow.to_dict()
    return report, [f"{len(sol.u.coeffs)} solved mode(s), {len(sol.obstructions)} obstruction(s)"], EXIT_OK


def cmd_torus_diophantine(args):
    flow = parse_omega(args.omega)
    est = tc.diophantine_type(list(flow.omega), args.depth)
    report = est.to_dict()
    line = f"resonant along {list(est.resonance)}" if est.resonance else f"C = {est.C}, tau = {est.tau}"
    return report, [line], EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--precision", choices=["double", "extended"], default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--output", "-o", default=argparse.SUPPRESS)

    p = _Parser(prog="homflow", description="Homogeneous-flow computations.")
    p.add_argument("--precision", choices=["double", "extended"], default=None, help=f"default from ${PRECISION_ENV}, else extended")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", default=None, help="write the JSON report here and a summary to stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub_add = sub.add_parser
    sub.add_parser = lambda *a, **k: sub_add(*a, parents=[common], **k)

    s = sub.add_parser("validate", help="check antisymmetry and the Jacobi identity")
    s.add_argument("--algebra", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("classify", help="quasi-unipotent or partially hyperbolic")
    s.add_argument("--algebra", required=True)
    s.add_argument("--element", required=True)
    s.add_argument("--splitting", action="store_true", help="also report the numeric spectral splitting")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("jordan", help="Jordan-Chevalley decomposition of an element")
    s.add_argument("--algebra", required=True)
    s.add_argument("--element", required=True)
    s.set_defaults(func=cmd_jordan)

    s = sub.add_parser("sl2", help="complete a nilpotent element to an sl2-triple")
    s.add_argument("--algebra", required=True)
    s.add_argument("--nilpotent", required=True)
    s.add_argument("--commuting-with", default=None)
    s.set_defaults(func=cmd_sl2)

    for name, func in (("keepaway", cmd_keepaway), ("minimal-sets", cmd_minimal_sets)):
        s = sub.add_parser(name)
        s.add_argument("--matrix", required=True, help="integer rows, e.g. '2,1;1,1'")
        s.add_argument("--mode", choices=["map", "suspension"], default="map")
        if name == "keepaway":
            s.add_argument("--targets", required=True, help="JSON list of points")
            s.add_argument("--window", required=True, help="center coordinates then radius, e.g. '0.3,0.7,0.1'")
            s.add_argument("--stages", type=int, default=20)
            s.add_argument("--tmax", type=float, default=1000.0)
            s.add_argument("--h", type=float, default=1e-2)
            s.add_argument("--r", type=float, default=None)
            s.add_argument("--delta", type=float, default=None)
            s.add_argument("--csv", default=None)
        else:
            s.add_argument("--count", type=int, required=True)
            s.add_argument("--budget", type=int, default=60)
            s.add_argument("--tkeep", type=float, default=200.0)
            s.add_argument("--eta", type=float, default=1e-3)
            s.add_argument("--separation", type=float, default=1e-2)
        s.set_defaults(func=func)

    t = sub.add_parser("torus", help="linear flows on tori")
    tsub = t.add_subparsers(dest="torus_command", required=True, parser_class=_Parser)
    tsub_add = tsub.add_parser
    tsub.add_parser = lambda *a, **k: tsub_add(*a, parents=[common], **k)
    s = tsub.add_parser("distributions")
    s.add_argument("--omega", required=True)
    s.add_argument("--cutoff", type=int, required=True)
    s.add_argument("--atol", type=float, default=1e-9)
    s.set_defaults(func=cmd_torus_distributions)
    s = tsub.add_parser("solve")
    s.add_argument("--omega", required=True)
    s.add_argument("--f", required=True, help="Fourier coefficients as JSON")
    s.add_argument("--cutoff", type=int, required=True)
    s.set_defaults(func=cmd_torus_solve)
    s = tsub.add_parser("diophantine")
    s.add_argument("--omega", required=True)
    s.add_argument("--depth", type=int, default=1000)
    s.set_defaults(func=cmd_torus_diophantine)
    return p


PRECONDITION_ERRORS = (ValueError, OSError, KeyError, TypeError)
CERTIFICATION_ERRORS = (fc.CertificationError, fc.SplittingError, ka.KeepAwayError)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        args.precision = resolve_precision(args.precision)
        report, summary, code = args.func(args)
    except CERTIFICATION_ERRORS as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except PRECONDITION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    command = args.command if args.command != "torus" else f"torus {args.torus_command}"
    report = {"command": command, "precision": args.precision, "seed": args.seed, **report}
    text = dumps(report)
    if args.output:
        Path(args.output).write_text(text + "\n")
        print("\n".join(summary))
    else:
        print(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
