"""Command-line interface: a thin client over the core package.

Subcommands:
  induce   run the full induction pipeline on a spec file and write a report
  verify   run module certificate suites on a spec/preset or the whole catalog
  oracle   print the classically induced character for (group, subgroup, rep)
  catalog  list the named presets
  serve    start the HTTP service
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .algebra import AlgebraError
from .catalog import classical_induction_oracle, group_preset, rep_preset, subgroup_preset
from .induction import InductionError
from .specfile import SpecError, parse_spec, report_to_json, run_induce, serialize_spec
from .suites import (
    CATALOG,
    QG_FIXTURES,
    catalog_spec,
    build_from_spec,
    oracle_reconciliation,
    run_qg_fixture_suite,
    run_suite,
)


def _load_spec(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_spec(fh.read())
    except FileNotFoundError:
        print(f"error: spec file not found: {path}", file=sys.stderr)
        raise SystemExit(2)


def cmd_induce(args) -> int:
    if args.spec in CATALOG:
        spec = catalog_spec(args.spec)
    else:
        spec = _load_spec(args.spec)
    if args.tol is not None:
        spec.tol = float(args.tol)
        spec.raw["tol"] = spec.tol
    if args.seed is not None:
        spec.seed = int(args.seed)
        spec.raw["seed"] = spec.seed
    try:
        report = run_induce(spec)
    except (SpecError, AlgebraError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = report_to_json(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not report["passed"]:
        print("FAIL: residuals exceeded thresholds:", file=sys.stderr)
        for k, v in report["residuals"].items():
            print(f"  {k}: {v}", file=sys.stderr)
        return 1
    print(f"PASS dim_carrier={report['dim_carrier']} "
          f"wall_time_ms={report['wall_time_ms']:.0f}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    names = []
    if args.spec:
        specs = [(args.spec, _load_spec(args.spec))]
    elif args.preset:
        specs = [(args.preset, catalog_spec(args.preset))]
    else:
        specs = [(name, catalog_spec(name)) for name in CATALOG]
    any_fail = False
    for name, spec in specs:
        try:
            built = build_from_spec(spec)
            checks = run_suite(built, args.suite)
        except (SpecError, AlgebraError) as e:
            print(f"{name}: error: {e}", file=sys.stderr)
            return 1
        fails = [c for c in checks if not c.passed]
        print(f"== {name}: {len(checks)} checks, {len(fails)} failed")
        for c in checks:
            if args.verbose or not c.passed:
                print("  " + c.row())
        any_fail = any_fail or bool(fails)
    if not args.spec and not args.preset and args.suite in ("all", "qgroup"):
        for fx in QG_FIXTURES:
            checks = run_qg_fixture_suite(fx)
            fails = [c for c in checks if not c.passed]
            print(f"== {fx}: {len(checks)} checks, {len(fails)} failed")
            for c in checks:
                if args.verbose or not c.passed:
                    print("  " + c.row())
            any_fail = any_fail or bool(fails)
    return 1 if any_fail else 0


def cmd_oracle(args) -> int:
    try:
        G = group_preset(args.group)
        sub = subgroup_preset(G, args.subgroup)
        mats = rep_preset(G, args.rep, sub)
        chi = classical_induction_oracle(G, sub, mats)
    except AlgebraError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    dim = (G.order // len(sub)) * mats[0].shape[0]
    print(json.dumps({
        "group": G.name,
        "subgroup_order": len(sub),
        "induced_dimension": dim,
        "elements": G.labels,
        "character": [[float(z.real), float(z.imag)] for z in chi],
    }, indent=2))
    return 0


def cmd_catalog(args) -> int:
    if args.action != "list":
        print("usage: qinduce catalog list", file=sys.stderr)
        return 2
    for name, spec in CATALOG.items():
        a = spec["alpha"]
        print(f"{name}: {a['preset_action']} action, group {a['group']}"
              + (f", subgroup {a['subgroup']}" if "subgroup" in a else "")
              + (f", quotient {a['quotient']}" if "quotient" in a else "")
              + f", U = {spec['U']['preset_rep']}")
    for fx in QG_FIXTURES:
        print(f"{fx}: quantum-group fixture (no action preset)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qinduce",
        description="Induced corepresentations of finite quantum groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("induce", help="run the induction pipeline")
    p.add_argument("--spec", required=True,
                   help="spec file path or catalog preset name")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("verify", help="run certificate suites")
    p.add_argument("--spec", help="spec file path")
    p.add_argument("--preset", help="catalog preset name")
    p.add_argument("--suite", default="all",
                   choices=["weights", "qgroup", "action", "induction",
                            "correspondence", "all"])
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="classical Frobenius induction characters")
    p.add_argument("--group", required=True)
    p.add_argument("--subgroup", required=True)
    p.add_argument("--rep", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("catalog", help="catalog operations")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
