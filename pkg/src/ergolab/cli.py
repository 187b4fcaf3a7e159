"""Command line entry point.

Exit codes: 0 all executed checks passed (diagnostics allowed), 1 at
least one FAIL record, 2 configuration problems.
"""

import argparse
import glob
import os
import sys

from .config import ConfigError, parse_config
from .runner import CHECK_NAMES, VERSION, run_scenario

FAST_SUITE = ("golden_hat1_dec", "step_z8", "product_z8x2")


def scenario_dir():
    return os.path.join(os.path.dirname(__file__), "scenarios")


def shipped_scenarios(suite):
    paths = sorted(glob.glob(os.path.join(scenario_dir(), "*.cfg")))
    if suite == "fast":
        keep = {name: os.path.join(scenario_dir(), name + ".cfg")
                for name in FAST_SUITE}
        paths = [keep[name] for name in FAST_SUITE]
    return paths


def _print_report(report):
    for rec in report.records:
        value = "" if rec.value is None else f" value={rec.value:.6g}"
        bound = "" if rec.bound is None else f" bound={rec.bound:.6g}"
        note = f"  ({rec.note})" if rec.note else ""
        print(f"{report.scenario:18s} {rec.name:24s} {rec.status:10s}"
              f"{value}{bound}  [{rec.wall_time:.2f}s]{note}")


def _run_one(path, out_dir, seed):
    cfg = parse_config(path)
    report = run_scenario(cfg, out_dir=out_dir, seed=seed)
    _print_report(report)
    return report


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ergolab",
        description="finite-scale checks for averaged flows, conditionings, "
                    "and their composed processes")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single scenario file")
    p_run.add_argument("--config", required=True, help="scenario file path")
    p_run.add_argument("--out", required=True, help="artifact directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")

    p_verify = sub.add_parser("verify", help="run the shipped scenario corpus")
    p_verify.add_argument("--suite", choices=("all", "fast"), default="all")
    p_verify.add_argument("--out", default="ergolab_out",
                          help="artifact directory")
    p_verify.add_argument("--seed", type=int, default=None,
                          help="override every scenario seed")

    sub.add_parser("list", help="print known checks and builtin functions")

    args = parser.parse_args(argv)

    if args.command == "list":
        from .config import _FUNCTION_KINDS
        print("checks:")
        for name in CHECK_NAMES:
            print(f"  {name}")
        print("function kinds:")
        for name in _FUNCTION_KINDS:
            print(f"  {name}")
        return 0

    try:
        if args.command == "run":
            reports = [_run_one(args.config, args.out, args.seed)]
        else:
            reports = [_run_one(path, args.out, args.seed)
                       for path in shipped_scenarios(args.suite)]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    n_checks = sum(len(r.records) for r in reports)
    n_fail = sum(1 for r in reports for rec in r.records
                 if rec.status == "FAIL")
    verdict = "PASS" if n_fail == 0 else "FAIL"
    print(f"{verdict}: {n_checks} checks, {n_fail} failures")
    return 0 if n_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
