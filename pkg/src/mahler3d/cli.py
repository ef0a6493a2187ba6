"""Command-line entry point: ``mahler3d {product,verify,descend,sweep}``.

Exit codes: 0 success, 1 verification failure or other error, 2 unreadable or
invalid input, 3 Santalo solver non-convergence, 4 inadmissible speed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .descent import descend, random_polytope
from .errors import DegenerateInput, InvalidPolytope, MahlerError, NonConvergence, NotAdmissible, OffParseError
from .offio import read_off
from .polar import DEFAULT_TOL, product_report, santalo_point
from .polytope import SHAPES, Polytope, shape
from .shadow import CONVEXITY_SAMPLES, persistence_interval, sweep
from .speeds import SpeedAssignment, bound_direction, nontrivial_speed
from .suites import default_instances, run_suite

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_ADMISSIBLE = 4


class InputError(Exception):
    """Bad command-line input (missing source, unreadable sidecar, ...)."""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mahler3d", description="Volume products of 3-polytopes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, source_required=True):
        src = sp.add_mutually_exclusive_group(required=source_required)
        src.add_argument("--in", dest="input_path", metavar="PATH", help="OFF file")
        src.add_argument("--shape", choices=SHAPES + ("tetrahedron",), help="built-in polytope")
        src.add_argument("--random", type=int, metavar="N", help="hull of N random points on the sphere")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Santalo residual tolerance")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("product", help="Santalo point and volume product as JSON")
    common(sp)

    sp = sub.add_parser("verify", help="run the invariant suites")
    common(sp, source_required=False)
    sp.add_argument("--count", type=int, default=20, help="random instances when no source is given")
    sp.add_argument("--samples", type=int, default=CONVEXITY_SAMPLES)
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")

    sp = sub.add_parser("descend", help="volume-product descent; writes a trace directory")
    common(sp)
    sp.add_argument("--cap-iter", type=int, default=50)
    sp.add_argument("--out", metavar="DIR", default="descent-run")

    sp = sub.add_parser("sweep", help="CSV of volume and polar volume along a shadow system")
    common(sp)
    sp.add_argument("--samples", type=int, default=CONVEXITY_SAMPLES)
    sp.add_argument("--speed", metavar="JSON", help="sidecar {theta: [3], alpha: [V]}; default: automatic")
    sp.add_argument("--theta", type=float, nargs=3, metavar=("X", "Y", "Z"),
                    help="direction for the automatic speed (default: an edge of a largest facet)")
    sp.add_argument("--cap", type=float, default=0.5, help="largest |t| considered")
    sp.add_argument("--out", metavar="DIR", help="write sweep.csv there instead of stdout")
    return p


def _load(args) -> Polytope:
    if args.input_path is not None:
        try:
            return read_off(args.input_path)
        except OSError as exc:
            raise InputError(f"cannot read {args.input_path}: {exc.strerror or exc}") from None
    if args.shape is not None:
        return shape(args.shape)
    if args.random is not None:
        if args.random < 4:
            raise InputError("--random needs N >= 4")
        return random_polytope(args.random, args.seed)
    raise InputError("one of --in, --shape, --random is required")


def _speed(args, P: Polytope) -> SpeedAssignment:
    if args.speed is not None:
        try:
            data = json.loads(Path(args.speed).read_text())
            theta, alpha = data["theta"], data["alpha"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"bad speed sidecar {args.speed}: {exc}") from None
        if len(theta) != 3 or len(alpha) != P.V:
            raise InputError(f"speed sidecar needs 3 theta entries and {P.V} alpha entries")
        # alpha follows the OFF vertex order, which is the row order of P
        return SpeedAssignment(np.asarray(theta, dtype=float), np.asarray(alpha, dtype=float))
    theta = np.asarray(args.theta, dtype=float) if args.theta is not None else bound_direction(P)[1]
    s = nontrivial_speed(P, theta)
    if s is None:
        raise InputError("no non-affine admissible speed for this direction; pass --speed")
    return s


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_product(args) -> int:
    P = _load(args)
    _emit(product_report(P, santalo_point(P, args.tol)))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.input_path is not None:
        instances = [("off", args.input_path)]
    elif args.shape is not None:
        instances = [("shape", args.shape)]
    elif args.random is not None:
        instances = [("random", args.random, args.seed)]
    else:
        instances = default_instances(args.count, args.seed)
    report = run_suite(instances, tol=args.tol, samples=args.samples, jobs=args.jobs)
    _emit(report)
    return EXIT_OK if report["summary"]["pass"] else EXIT_FAIL


def cmd_descend(args) -> int:
    P = _load(args)
    trace = descend(P, cap_iter=args.cap_iter, solver_tol=args.tol)
    path = trace.write(args.out)
    _emit({
        "final_product": trace.final_product,
        "terminated": trace.terminated.value,
        "steps": len(trace.steps) - 1,
        "products": trace.products.tolist(),
        "anomalies": trace.anomalies,
        "trace": str(path),
    })
    return EXIT_OK


def cmd_sweep(args) -> int:
    P = _load(args)
    s = _speed(args, P)
    try:
        c = persistence_interval(P, s, cap=args.cap)
    except NotAdmissible as exc:
        rows = P.vertex_row
        named = "; ".join(f"facet {k} (vertices {[rows[i] for i in P.cycles[k]]})" for k in exc.facets)
        print(f"error: speed is not admissible on {named}", file=sys.stderr)
        return EXIT_ADMISSIBLE
    tr = sweep(P, s, c, n=args.samples, tol=args.tol)
    text = tr.to_csv()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
        print(str(out / "sweep.csv"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"product": cmd_product, "verify": cmd_verify, "descend": cmd_descend, "sweep": cmd_sweep}


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OffParseError, InvalidPolytope, DegenerateInput, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergence as exc:
        print(f"error: Santalo solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except NotAdmissible as exc:
        print(f"error: speed is not admissible on facets {exc.facets}", file=sys.stderr)
        return EXIT_ADMISSIBLE
    except MahlerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
