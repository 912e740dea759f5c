"""Command-line driver.

    wqcm validate  SOURCE [options]        assert the weak-structure axioms
    wqcm classify  SOURCE [options]        report class membership (informational)
    wqcm check {identity|curvature|theorems|all} SOURCE [options]
    wqcm fbasis    SOURCE --at x,y,z       adapted basis at a point
    wqcm cone      SOURCE --at x,y,z --t T almost-Hermitian cone data
    wqcm list                              built-in structure keys

SOURCE is either a JSON structure-definition file or "builtin:<key>[?n=..,s=..]".

Exit codes: 0 all asserted checks pass (skipped checks never count),
1 at least one failure, 2 input or usage error.  JSON reports go to stdout
(or --output); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import catalog as cat
from .classify import Tolerances, class_residuals
from .exprdsl import ExprSyntaxError, SchemaError, load_structure_def
from .structure import WeakACM, build_cone
from .suites import (
    SamplePlan,
    emit_report,
    report_from_axioms,
    report_from_classification,
    run_all,
    run_curvature_suite,
    run_identity_suite,
    run_theorem_suite,
    sample_points,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _load_source(source: str) -> WeakACM:
    if source.startswith("builtin:"):
        spec = source.removeprefix("builtin:")
        key, _, query = spec.partition("?")
        params: dict[str, str] = {}
        if query:
            for item in query.replace("&", ",").split(","):
                k, _, v = item.partition("=")
                if not v:
                    raise CliError(f"bad builtin parameter {item!r}")
                params[k.strip()] = v.strip()
        try:
            n = int(params.get("n", "1"))
            s = float(params["s"]) if "s" in params else None
            sdef = cat.catalog(key, n=n, s=s)
        except (cat.UnknownCatalogKey, ValueError, KeyError) as exc:
            raise CliError(f"cannot build builtin structure {spec!r}: {exc}") from exc
        return WeakACM(sdef)
    path = Path(source)
    if not path.is_file():
        raise CliError(f"no such structure file: {source}")
    try:
        return WeakACM(load_structure_def(path.read_bytes()))
    except (SchemaError, ExprSyntaxError) as exc:
        raise CliError(f"cannot load {source}: {exc}") from exc


def _parse_point(text: str, dim: int) -> np.ndarray:
    try:
        coords = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise CliError(f"bad point {text!r}") from exc
    if len(coords) != dim:
        raise CliError(f"point {text!r} has {len(coords)} coordinates, chart needs {dim}")
    return np.array(coords)


def _add_common(p: _Parser) -> None:
    p.add_argument("source", help="structure file or builtin:<key>[?n=..,s=..]")
    p.add_argument("--points", type=int, default=32)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strategy", choices=("halton", "grid"), default="halton")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--tol-algebraic", type=float, default=None)
    p.add_argument("--tol-deriv", type=float, default=None)
    p.add_argument("--tol-curv", type=float, default=None)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wqcm", description="weak contact-structure verification")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("validate"))
    _add_common(sub.add_parser("classify"))
    check = sub.add_parser("check")
    check.add_argument("suite", choices=("identity", "curvature", "theorems", "all"))
    _add_common(check)
    fb = sub.add_parser("fbasis")
    _add_common(fb)
    fb.add_argument("--at", required=True, help="comma-separated chart coordinates")
    cone = sub.add_parser("cone")
    _add_common(cone)
    cone.add_argument("--at", required=True, help="comma-separated chart coordinates")
    cone.add_argument("--t", type=float, default=0.0)
    sub.add_parser("list")
    return parser


def _tolerances(args) -> Tolerances:
    base = Tolerances()
    return Tolerances(
        algebraic=args.tol_algebraic if args.tol_algebraic is not None else base.algebraic,
        deriv=args.tol_deriv if args.tol_deriv is not None else base.deriv,
        curv=args.tol_curv if args.tol_curv is not None else base.curv,
    )


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("WQCM_SEED")
    return int(env) if env else 7


def _write(payload: bytes, args, stdout) -> None:
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        stdout.write(payload.decode())


def run_cli(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        stderr.write(f"error: {exc}\n")
        parser.print_usage(stderr)
        return EXIT_USAGE

    try:
        if args.command == "list":
            for key in cat.keys():
                stdout.write(key + "\n")
            return EXIT_OK

        acm = _load_source(args.source)
        tolerances = _tolerances(args)
        plan = SamplePlan(count=args.points, seed=_seed(args), strategy=args.strategy)
        timestamp = not args.no_timestamp

        if args.command == "validate":
            report = report_from_axioms(acm, plan, tolerances, timestamp=timestamp)
            _write(emit_report(report, args.format), args, stdout)
            return EXIT_FAIL if report.failed else EXIT_OK

        if args.command == "classify":
            points = sample_points(plan, acm.sdef.domain)
            cr = class_residuals(acm, points, tolerances, seed=plan.seed)
            report = report_from_classification(cr, plan, tolerances, timestamp=timestamp)
            _write(emit_report(report, args.format), args, stdout)
            return EXIT_OK  # classification is reporting, not assertion

        if args.command == "check":
            runner = {
                "identity": run_identity_suite,
                "curvature": run_curvature_suite,
                "theorems": run_theorem_suite,
                "all": run_all,
            }[args.suite]
            report = runner(acm, plan, tolerances, timestamp=timestamp)
            _write(emit_report(report, args.format), args, stdout)
            return EXIT_FAIL if report.failed else EXIT_OK

        if args.command == "fbasis":
            from .classify import f_basis

            point = _parse_point(args.at, acm.dim)
            fb = f_basis(acm, point)
            st = acm.at(point)
            lines = [f"f-basis of {acm.name} at ({args.at})"]
            lines.append(f"  xi = {fb.xi.tolist()}")
            ok = True
            for i, (e, fe, lam) in enumerate(zip(fb.e, fb.fe, fb.lam), start=1):
                lines.append(f"  lambda_{i} = {lam!r}")
                lines.append(f"  e_{i}  = {e.tolist()}")
                lines.append(f"  fe_{i} = {fe.tolist()}")
                ok = ok and abs(st.gdot(fe, fe) - lam) < 1e-9
            vecs = fb.vectors()
            ortho = max(
                abs(st.gdot(u, v)) for a, u in enumerate(vecs) for v in vecs[a + 1 :]
            )
            ok = ok and ortho < 1e-9
            lines.append(f"  max pairwise g-product = {ortho:.3e}")
            lines.append(f"  verdict = {'pass' if ok else 'fail'}")
            stdout.write("\n".join(lines) + "\n")
            return EXIT_OK if ok else EXIT_FAIL

        if args.command == "cone":
            point = _parse_point(args.at, acm.dim)
            ce = build_cone(acm, point, args.t)
            ok = ce.j2_plus_p_residual < 1e-12
            stdout.write(
                f"cone of {acm.name} at ({args.at}), t={args.t}\n"
                f"  |J^2 + P| = {ce.j2_plus_p_residual:.3e}\n"
                f"  gbar(dt, dt) = {ce.gbar[-1, -1]!r}\n"
                f"  verdict = {'pass' if ok else 'fail'}\n"
            )
            return EXIT_OK if ok else EXIT_FAIL

        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (SchemaError, ExprSyntaxError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
