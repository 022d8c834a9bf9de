"""Command-line interface.

    warpcurv check (--manifest PATH | --catalog NAME) --suite {lemmas,ssnm,einstein,all}
                   [--points N] [--seed S] [--tol T] [--report PATH]
    warpcurv catalog --list
    warpcurv catalog --show NAME
    warpcurv curvature (--manifest PATH | --catalog NAME) --at c1,c2,...

Exit status: 0 all checks passed, 1 a check failed, 2 invalid input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import catalog as catalog_mod
from .expr import ExpressionError
from .geometry import GeometryError, LocalGeometry, contract
from .manifest import ManifestError, dump, load_manifest
from .ssnm import ConnectionSpec
from .suite import SUITES, run_suite
from .warped import lift

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _add_source(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="path to a YAML manifest")
    src.add_argument("--catalog", help="name of a built-in manifest (see `catalog --list`)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warpcurv", description=__doc__.split("\n\n")[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)

    chk = sub.add_parser("check", help="run verification suites on a manifest")
    _add_source(chk)
    chk.add_argument("--suite", choices=SUITES + ("all",), default="all")
    chk.add_argument("--points", type=int, help="number of sample points (overrides the manifest)")
    chk.add_argument("--seed", type=int, help="PCG64 seed (overrides the manifest)")
    chk.add_argument("--tol", type=float, help="identity tolerance (overrides the manifest)")
    chk.add_argument("--report", help="write the structured JSON report here")

    cat = sub.add_parser("catalog", help="list or show built-in manifests")
    grp = cat.add_mutually_exclusive_group(required=True)
    grp.add_argument("--list", action="store_true", help="list entry names")
    grp.add_argument("--show", metavar="NAME", help="print an entry as YAML")

    cur = sub.add_parser("curvature", help="print metric, connection and curvature at a point")
    _add_source(cur)
    cur.add_argument("--at", required=True, help="comma-separated ambient coordinates")
    return parser


def _load(args):
    if args.manifest is not None:
        return load_manifest(args.manifest)
    return catalog_mod.catalog(args.catalog)


def _cmd_check(args, out) -> int:
    if args.points is not None and args.points < 2:
        raise ManifestError("--points", "need at least 2 sample points")
    if args.seed is not None and args.seed < 0:
        raise ManifestError("--seed", "seed must be non-negative")
    m = _load(args)
    report = run_suite(m, args.suite, points=args.points, seed=args.seed, tol=args.tol)
    out.write(report.table())
    if args.report:
        Path(args.report).write_text(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_catalog(args, out) -> int:
    if args.list:
        for name in catalog_mod.names():
            out.write(name + "\n")
        out.write("random-<seed>\n")
        return EXIT_OK
    out.write(dump(catalog_mod.entry(args.show)))
    return EXIT_OK


def _fmt(name: str, arr) -> str:
    with np.printoptions(precision=10, suppress=True, linewidth=120):
        return f"{name}:\n{np.array2string(np.asarray(arr))}\n"


def _cmd_curvature(args, out) -> int:
    m = _load(args)
    try:
        point = np.array([float(x) for x in args.at.split(",")])
    except ValueError as exc:
        raise ManifestError("--at", f"not a comma-separated list of numbers: {args.at!r}") from exc
    n = m.wp.n
    if point.shape != (n,):
        raise ManifestError("--at", f"need {n} coordinates ({', '.join(m.wp.ambient.coords)}), got {point.size}")
    local = LocalGeometry(m.wp.ambient, point[None, :])
    spec = ConnectionSpec.ssnm(lift(m.wp, m.P)) if m.P is not None else ConnectionSpec.levi_civita()
    gamma_bar, _ = spec.coefficients(local)
    ric, ric_bar = local.ricci(), local.ricci(spec)
    out.write(f"point ({', '.join(m.wp.ambient.coords)}) = {point.tolist()}\n")
    out.write(_fmt("g", local.g[0]))
    out.write(_fmt("Gamma[k,i,j]", local.gamma[0]))
    out.write(_fmt("Gammabar[k,i,j]", gamma_bar[0]))
    out.write(_fmt("Ric", ric[0]))
    out.write(_fmt("Ricbar", ric_bar[0]))
    out.write(f"S: {float(contract(local.g_inv, ric)[0])!r}\n")
    out.write(f"Sbar: {float(contract(local.g_inv, ric_bar)[0])!r}\n")
    return EXIT_OK


COMMANDS = {"check": _cmd_check, "catalog": _cmd_catalog, "curvature": _cmd_curvature}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except (ManifestError, ExpressionError, GeometryError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
