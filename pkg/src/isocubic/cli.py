"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 arithmetic/numerical failure,
4 verification exceeded its tolerance.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction
from importlib import resources
from typing import List, Optional

from .cyclesim import (
    PhaseState,
    SimParams,
    SimulationError,
    default_h_range,
    integrate_orbit,
    locate_cycles,
    reports_to_json,
    scan,
    scan_to_csv,
    section_point,
)
from .engine import (
    DEFAULT_LEVEL,
    LevelExceeded,
    abelian_report,
    assemble_abelian,
    check_lambda,
    synthesize_detailed,
    table_for,
)
from .exactmath import count_positive_roots, is_exact, parse_lambda
from .perturbation import CMVParameters, Perturbation, load_perturbation, normalize_cmv
from .quadrature import CSV_HEADER, oval_points, quad_abelian, quad_Iij_detailed

EXIT_USAGE, EXIT_MATH, EXIT_VERIFY = 2, 3, 4
BUILTIN = {"sys31": "sys31.json"}


class UsageError(ValueError):
    pass


def _lam_str(lam) -> str:
    return str(lam) if is_exact(lam) else repr(float(lam))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, args) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _list(text: str) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_pert(args):
    if not args.pert:
        raise UsageError("--pert FILE is required")
    path = args.pert
    if path in BUILTIN and not os.path.exists(path):
        with resources.as_file(resources.files("isocubic.data") / BUILTIN[path]) as p:
            pert, lam = load_perturbation(p)
    else:
        pert, lam = load_perturbation(path)
    if args.lam is not None:
        lam = parse_lambda(args.lam)
    if lam is None:
        raise UsageError("lambda missing: give --lambda or put it in the perturbation file")
    return pert, check_lambda(lam)


def _lambda(args, default: Optional[str] = None):
    text = args.lam if args.lam is not None else default
    if text is None:
        raise UsageError("--lambda is required")
    return check_lambda(parse_lambda(text))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_normalize(args) -> int:
    nf = normalize_cmv(CMVParameters(args.k1, args.k2, args.k3, args.k4))
    _emit(_dump({"lambda": str(nf.lam), "time_scale": str(nf.time_scale),
                 "x_scale": str(nf.x_scale), "y_scale": str(nf.y_scale)}), args)
    return 0


def cmd_reduce(args) -> int:
    lam = _lambda(args, "1/2")
    if args.i is None or args.j is None or args.i < 0 or args.j < 0:
        raise UsageError("--i and --j must be nonnegative integers")
    level = args.n if args.n is not None else DEFAULT_LEVEL
    if args.j and args.i + args.j > level:
        raise LevelExceeded(f"I_{{{args.i},{args.j}}} beyond the level budget {level}")
    table = table_for(lam, args.i + args.j if args.j else 3)
    poly = table.reduce(args.i, args.j)
    _emit(_dump({"lambda": _lam_str(lam), "i": args.i, "j": args.j, "poly": poly.to_json()}), args)
    return 0


def cmd_abelian(args) -> int:
    pert, lam = _load_pert(args)
    report = abelian_report(pert, lam)
    if args.format == "csv":
        _emit(_csv([(k + 1, a.to_str(), repr(float(a))) for k, a in enumerate(report.alpha)],
                   ("k", "alpha", "value")), args)
    else:
        _emit(_dump(report.to_json()), args)
    return 0


def cmd_zeros(args) -> int:
    pert, lam = _load_pert(args)
    p = assemble_abelian(pert, lam)
    if p.is_zero():
        raise ArithmeticError("I(h) vanishes identically; zeros are not isolated")
    roots = count_positive_roots(p)
    if args.format == "csv":
        rows = [(str(lo), str(hi), m, "" if e is None else str(e))
                for (lo, hi), m, e in zip(roots.intervals, roots.multiplicities, roots.exact)]
        _emit(_csv(rows, ("lo", "hi", "multiplicity", "exact")), args)
    else:
        _emit(_dump({"lambda": _lam_str(lam), **roots.to_json()}), args)
    return 0


def synth_payload(result, lam) -> dict:
    obj = result.perturbation.to_json(lam)
    obj["pivots"] = [list(p) for p in result.pivots]
    return obj


def cmd_synth(args) -> int:
    lam = _lambda(args, "1/2")
    if not is_exact(lam):
        raise UsageError("synth needs an exact rational --lambda")
    if not args.zeros:
        raise UsageError("--zeros z1,z2,... is required")
    zeros = [Fraction(z) for z in _list(args.zeros)]
    _emit(_dump(synth_payload(synthesize_detailed(zeros, lam), lam)), args)
    return 0


def _rel(q: float, e: float) -> float:
    return abs(q - e) / abs(e) if e else abs(q)


def verify_grid(lams, hs, n: int, tol_quad: float, seed: int, random_perts: int):
    """Symbolic entries and random perturbations against quadrature."""
    rng = random.Random(seed)
    rows, worst = [], 0.0
    for lam in lams:
        table = table_for(lam, max(n, 3))
        for h in hs:
            for total in range(1, n + 1):
                for i in range(total + 1):
                    j = total - i
                    r = quad_Iij_detailed(float(lam), h, (i, j), tol_quad)
                    e = table.reduce(i, j).evaluate(h) if j else 0.0
                    worst = max(worst, _rel(r.value, e))
                    rows.append((_lam_str(lam), repr(h), i, j, repr(r.value), repr(r.error)))
        for _ in range(random_perts):
            pert = random_perturbation(rng, n)
            sym = assemble_abelian(pert, lam)
            for h in hs:
                # cancellation between terms: measure against the size of the terms
                scale = abelian_scale(pert, table, h)
                q = quad_abelian(float(lam), h, pert, tol_quad)
                worst = max(worst, abs(q - sym.evaluate(h)) / scale if scale else abs(q))
    return worst, rows


def abelian_scale(pert: Perturbation, table, h: float) -> float:
    """Sum of |coefficient * integral| over the terms of I(h)."""
    tot = 0.0
    for (i, j), c in pert.b.items():
        if j:
            tot += abs(float(c) * table.reduce(i, j).evaluate(h))
    for (i, j), c in pert.a.items():
        if i:
            tot += abs(float(c) * i / (j + 1) * table.reduce(i - 1, j + 1).evaluate(h))
    return tot


def random_perturbation(rng: random.Random, n: int, span: int = 9, dens: int = 4) -> Perturbation:
    def coef():
        return Fraction(rng.randint(-span, span), rng.randint(1, dens))

    idx = [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]
    return Perturbation(n, {k: coef() for k in idx}, {k: coef() for k in idx})


def cmd_verify(args) -> int:
    lams = [check_lambda(parse_lambda(t)) for t in _list(args.lam or "1/4,1/2,3/4")]
    hs = [float(Fraction(t)) for t in _list(args.h or "1/10,1,5")]
    n = args.n if args.n is not None else 6
    tol = args.tol if args.tol is not None else 1e-8
    worst, rows = verify_grid(lams, hs, n, min(1e-10, max(tol / 100, 1e-13)),
                              args.seed, args.random)
    passed = worst <= tol
    if args.format == "csv":
        _emit(_csv(rows, CSV_HEADER), args)
    else:
        _emit(_dump({"max_rel_error": worst, "tolerance": tol, "cases": len(rows),
                     "passed": passed}), args)
    print(f"max relative error {worst:.3e} (tolerance {tol:.1e})", file=sys.stderr)
    return 0 if passed else EXIT_VERIFY


def cmd_simulate(args) -> int:
    pert, lam = _load_pert(args)
    eps = args.eps if args.eps is not None else 1e-4
    params = SimParams(float(lam), eps, pert, rtol=args.tol or 1e-10,
                       atol=(args.tol or 1e-10) * 1e-2)
    if args.orbit is not None:
        traj = integrate_orbit(PhaseState(section_point(params.lam, args.orbit), 0.0), params,
                               crossings=1)
        _emit(traj.to_csv(), args)
        return 0
    h_min, h_max = args.h_min, args.h_max
    if h_min is None or h_max is None:
        p = assemble_abelian(pert, lam)
        zeros = count_positive_roots(p).approximations if not p.is_zero() else []
        lo, hi = default_h_range(zeros)
        h_min = lo if h_min is None else h_min
        h_max = hi if h_max is None else h_max
    grid = args.grid or 200
    if grid < 16:
        raise UsageError("--grid must be at least 16")
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    points = scan(params, (h_min, h_max), grid, threads)
    if args.format == "csv":
        _emit(scan_to_csv(points), args)
        return 0
    reports = locate_cycles(params, (h_min, h_max), grid, threads, points=points)
    _emit(json.dumps(json.loads(reports_to_json(reports)), indent=2) + "\n", args)
    return 0


def cmd_oval(args) -> int:
    lam = _lambda(args, "1/2")
    if args.h_value is None or args.h_value <= 0:
        raise UsageError("--h must be positive")
    pts = oval_points(float(lam), args.h_value, args.grid or 200)
    if args.format == "json":
        _emit(_dump([[x, y] for x, y in pts]), args)
    else:
        _emit(_csv([(repr(x), repr(y)) for x, y in pts], ("x", "y")), args)
    return 0


COMMANDS = {
    "normalize": cmd_normalize, "reduce": cmd_reduce, "abelian": cmd_abelian,
    "zeros": cmd_zeros, "synth": cmd_synth, "verify": cmd_verify,
    "simulate": cmd_simulate, "oval": cmd_oval,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--lambda", dest="lam", help="exact p/q or a decimal")
    shared.add_argument("--n", type=int, help="degree or level budget")
    shared.add_argument("--pert", help="perturbation JSON file (or the builtin name sys31)")
    shared.add_argument("--tol", type=float)
    shared.add_argument("--out", help="output path (default stdout)")
    shared.add_argument("--format", choices=("json", "csv"), default="json")
    shared.add_argument("--eps", type=float)
    shared.add_argument("--h-min", type=float)
    shared.add_argument("--h-max", type=float)
    shared.add_argument("--grid", type=int)
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--threads", type=int)

    parser = _Parser(prog="isocubic", description="Abelian integrals of the isochronous cubic center")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("normalize", parents=[shared])
    for k in ("k1", "k2", "k3", "k4"):
        p.add_argument(f"--{k}", required=True)
    p = sub.add_parser("reduce", parents=[shared])
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    sub.add_parser("abelian", parents=[shared])
    sub.add_parser("zeros", parents=[shared])
    p = sub.add_parser("synth", parents=[shared])
    p.add_argument("--zeros", help="comma-separated positive rationals")
    p = sub.add_parser("verify", parents=[shared])
    p.add_argument("--h", help="comma-separated energies (default 1/10,1,5)")
    p.add_argument("--random", type=int, default=3, help="random perturbations per lambda")
    p = sub.add_parser("simulate", parents=[shared])
    p.add_argument("--orbit", type=float, help="dump one revolution t,x,y at this energy")
    p = sub.add_parser("oval", parents=[shared])
    p.add_argument("--h", dest="h_value", type=float, required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is not None and args.tol <= 0:
            raise UsageError("--tol must be positive")
        return COMMANDS[args.command](args)
    except (ArithmeticError, SimulationError) as exc:
        print(f"isocubic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"isocubic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
