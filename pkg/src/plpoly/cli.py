"""Command-line entry point: ``plpoly <command> ...``.

Results go to stdout (or ``--output``) in the polyhedron text format;
diagnostics go to stderr.  Exit codes: 0 success, 1 usage or parse error,
2 empty (or flat) input polyhedron, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import functools
import logging
import sys

from . import __version__
from .checkers import audit
from .core import FORMAT_VERSION, Polyhedron, format_polyhedron, read_polyhedron
from .errors import (ConsistencyError, EmptyPolyhedron, FormatError, NoInterior, OracleLimit,
                     PlpolyError)
from .lp import FEASIBILITY_THRESHOLD, float_simplex
from .minimize import minimize
from .oracle import GeneratorParams, bench, contains, fourier_motzkin, generate, poly_equal
from .plp import PlpConfig, convex_hull, project

EXIT_OK, EXIT_USAGE, EXIT_EMPTY, EXIT_CONSISTENCY = 0, 1, 2, 3

log = logging.getLogger("plpoly")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this tool reserves 2 for empty input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _index_list(text: str) -> list:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad index list {text!r}") from exc
    if not out or any(i < 1 for i in out):
        raise argparse.ArgumentTypeError("indices are 1-based and nonempty")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plpoly", description="Exact polyhedral projection and convex hull.")
    p.add_argument("--version", action="version",
                   version=f"plpoly {__version__} (polyhedron format {FORMAT_VERSION})")
    p.add_argument("--threshold", type=_positive_float, default=FEASIBILITY_THRESHOLD,
                   help="float simplex feasibility threshold (default 1e-7)")
    p.add_argument("--threads", type=int, default=1, help="reserved; ignored")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("project", help="eliminate variables")
    pr.add_argument("--input", required=True)
    pr.add_argument("--eliminate", required=True, type=_index_list,
                    help="comma-separated 1-based variable indices")
    pr.add_argument("--initial-points", type=int, default=1)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--check-oracle", action="store_true",
                    help="compare with Fourier-Motzkin elimination")
    pr.add_argument("--dump-regions")
    pr.add_argument("--audit", action="store_true",
                    help="recompute every region in rationals and report discrepancies")
    pr.add_argument("--output")

    hu = sub.add_parser("hull", help="convex hull of two polyhedra")
    hu.add_argument("--a", required=True)
    hu.add_argument("--b", required=True)
    hu.add_argument("--seed", type=int, default=0)
    hu.add_argument("--check-oracle", action="store_true",
                    help="check that the hull contains both inputs")
    hu.add_argument("--dump-regions")
    hu.add_argument("--output")

    mi = sub.add_parser("minimize", help="drop redundant constraints")
    mi.add_argument("file")
    mi.add_argument("--output")

    be = sub.add_parser("bench", help="time the engine on random instances")
    _gen_args(be)
    be.add_argument("--instances", type=int, default=10)
    be.add_argument("--repeats", type=int, default=5)
    be.add_argument("--oracle", action="store_true")
    be.add_argument("--output")

    ge = sub.add_parser("gen", help="emit a random instance")
    _gen_args(ge)
    ge.add_argument("--output")
    return p


def _gen_args(p):
    p.add_argument("--cn", type=int, required=True, help="constraint count")
    p.add_argument("--vn", type=int, required=True, help="variable count")
    p.add_argument("--pr", type=float, default=0.5, help="projection ratio")
    p.add_argument("--d", type=float, default=0.0, help="density of zero coefficients")
    p.add_argument("--seed", type=int, default=0)


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> PlpConfig:
    solver = float_simplex
    if args.threshold != FEASIBILITY_THRESHOLD:
        solver = functools.partial(float_simplex, tol=args.threshold)
    return PlpConfig(n_initial=getattr(args, "initial_points", 1), seed=args.seed,
                     tol=args.threshold, float_solver=solver)


def format_regions(solution) -> str:
    """One block per region: a comment header, its constraints, then its optimum."""
    blocks = []
    for r in solution.regions:
        basis = ",".join(str(j) for j in r.basis.basic)
        blocks.append(f"# region {r.id} group {r.group} basis {basis}\n"
                      + format_polyhedron(r.constraints())
                      + "# optimum\n"
                      + _optimum_text(r))
    return "\n".join(blocks)


def _optimum_text(region) -> str:
    row = region.optimum.as_constraint()
    return f"{region.dimension} 1\n{row.to_text()}\n"


def _cmd_project(args) -> int:
    poly = read_polyhedron(args.input)
    if any(i > poly.dimension for i in args.eliminate):
        raise _UsageError(f"--eliminate index beyond dimension {poly.dimension}")
    eliminate = sorted({i - 1 for i in args.eliminate})
    sol = project(poly, eliminate, _config(args))
    _emit(format_polyhedron(sol.polyhedron), args.output)
    if args.dump_regions:
        _emit(format_regions(sol), args.dump_regions)
    log.info("regions=%d faces=%d", len(sol.regions), len(sol.polyhedron))
    status = EXIT_OK
    if args.audit and sol.solver is not None:
        problems = audit(sol.solver)
        for msg in problems:
            print(f"audit: {msg}", file=sys.stderr)
        print(f"audit: {len(problems)} discrepancies", file=sys.stderr)
        if problems:
            status = EXIT_CONSISTENCY
    if args.check_oracle:
        ref = fourier_motzkin(poly, eliminate)
        verdict = poly_equal(sol.polyhedron, ref)
        print(f"oracle: {'equal' if verdict.equal else 'DIFFERENT'}", file=sys.stderr)
        if not verdict.equal:
            print(f"oracle: witness {verdict.witness} inside {verdict.inside}", file=sys.stderr)
            status = EXIT_CONSISTENCY
    return status


def _cmd_hull(args) -> int:
    a, b = read_polyhedron(args.a), read_polyhedron(args.b)
    if a.dimension != b.dimension:
        raise _UsageError("inputs have different dimensions")
    sol = convex_hull(a, b, _config(args))
    _emit(format_polyhedron(sol.polyhedron), args.output)
    if args.dump_regions:
        _emit(format_regions(sol), args.dump_regions)
    if args.check_oracle:
        ok = contains(sol.polyhedron, a) and contains(sol.polyhedron, b)
        print(f"oracle: {'contains both inputs' if ok else 'MISSES AN INPUT'}", file=sys.stderr)
        if not ok:
            return EXIT_CONSISTENCY
    return EXIT_OK


def _cmd_minimize(args) -> int:
    poly = read_polyhedron(args.file)
    _emit(format_polyhedron(minimize(poly)), args.output)
    return EXIT_OK


def _params(args) -> GeneratorParams:
    if args.cn < 1 or args.vn < 1 or not 0 < args.pr <= 1 or not 0 <= args.d < 1:
        raise _UsageError("need cn >= 1, vn >= 1, 0 < pr <= 1 and 0 <= d < 1")
    return GeneratorParams(args.cn, args.vn, args.pr, args.d, seed=args.seed)


def _cmd_bench(args) -> int:
    report = bench(_params(args), instances=args.instances, repeats=args.repeats,
                   oracle=args.oracle, config=_config(args))
    _emit("\n".join(report.lines()) + "\n", args.output)
    return EXIT_OK


def _cmd_gen(args) -> int:
    _emit(format_polyhedron(generate(_params(args))), args.output)
    return EXIT_OK


_COMMANDS = {"project": _cmd_project, "hull": _cmd_hull, "minimize": _cmd_minimize,
             "bench": _cmd_bench, "gen": _cmd_gen}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"plpoly: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"plpoly: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"plpoly: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EmptyPolyhedron, NoInterior) as exc:
        print(f"plpoly: input polyhedron is empty or flat: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ConsistencyError as exc:
        print(f"plpoly: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except OracleLimit as exc:
        print(f"plpoly: oracle gave up: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PlpolyError as exc:
        print(f"plpoly: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


def main() -> None:
    sys.exit(run())
