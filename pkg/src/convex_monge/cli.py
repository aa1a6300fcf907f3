"""Command-line entry point.

Subcommands::

    convex-monge solve <config>             transport cost, gap and support size
    convex-monge analyze <config>           full text report on stdout
    convex-monge report <config> --out DIR  write report.json, report.txt, timings.json
    convex-monge preset <name> --out DIR    same as report for a built-in preset

The exit status is 1 when a hard invariant fails and 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import PRESETS, ConfigError, parse_config, preset
from .experiment import emit_profiles, emit_report, report_text, run_experiment
from .pipeline import solve_instance
from .transport import TransportError


def _parser():
    p = argparse.ArgumentParser(prog="convex-monge", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--resolution", type=int, help="override the sample count K")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized property checks")
        sp.add_argument("--plots", action="store_true", help="also write SVG figures")

    sp = sub.add_parser("solve", help="solve the transport problem only")
    sp.add_argument("config")
    sp.add_argument("--resolution", type=int)
    sp = sub.add_parser("analyze", help="run all checks and print the text report")
    sp.add_argument("config")
    common(sp)
    sp = sub.add_parser("report", help="run all checks and write report files")
    sp.add_argument("config")
    sp.add_argument("--out", required=True)
    common(sp)
    sp = sub.add_parser("preset", help="run a built-in preset and write report files")
    sp.add_argument("name", choices=sorted(PRESETS))
    sp.add_argument("--out", required=True)
    common(sp)
    return p


def _load(args):
    cfg = preset(args.name) if args.command == "preset" else parse_config(args.config)
    if getattr(args, "resolution", None):
        cfg = cfg.replace(resolution=args.resolution)
    return cfg


def _write(report, cfg, args):
    emit_report(report, args.out)
    if cfg.outputs["profiles"] and "coarse" in report.artifacts:
        emit_profiles(report, args.out)
    if (args.plots or cfg.outputs["plots"]) and "coarse" in report.artifacts:
        from .plotting import emit_plots

        emit_plots(report, args.out)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "solve":
        try:
            inst = solve_instance(cfg.curve_m, cfg.curve_n, cfg.density_m, cfg.density_n, cfg.resolution)
        except TransportError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        r = inst.report
        print(json.dumps({"primal": r.primal_value, "dual": r.dual_value, "gap": r.gap,
                          "iterations": r.iterations, "support_size": len(r.support)}, indent=2))
        return 0

    report = run_experiment(cfg, seed=args.seed)
    if args.command == "analyze":
        sys.stdout.write(report_text(report))
        if args.plots:
            print("note: --plots needs an output directory; use 'report --out'", file=sys.stderr)
    else:
        _write(report, cfg, args)
        sys.stdout.write(report_text(report))
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
