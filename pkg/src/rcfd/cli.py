"""Command-line front end.

    rcfd [--config FILE] [--seed N] [--out PATH] [--jobs N] COMMAND [key=value ...]

Commands: ``analytic`` (saturation table), ``simulate`` (one topology, every
configured protocol, n_s repetitions), ``sweep FIGURE`` and ``verify``.
Exit codes: 0 ok, 1 configuration error, 2 runtime failure, 3 failed check.
"""
from __future__ import annotations

import argparse
import sys

from .errors import CapacityExceeded, ConfigError, RcfdError
from .sweeps import (CURVE_COLUMNS, FIGURES, NOTE, RUN_COLUMNS, SIM_CASES, SWEEP_COLUMNS,
                     TABLE_COLUMNS, RunSpec, metadata, run_many, run_table_analysis, throughput_vs_length,
                     throughput_vs_n, aggregate, sim_specs, write_csv)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcfd", description="RCFD and baseline MAC analysis and simulation")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="base seed (overrides the config)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--jobs", type=int, help="maximum concurrent simulation runs")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analytic", help="saturation throughput table")
    a.add_argument("overrides", nargs="*", metavar="key=value")
    s = sub.add_parser("simulate", help="simulate every configured protocol on one topology")
    s.add_argument("overrides", nargs="*", metavar="key=value")
    w = sub.add_parser("sweep", help="regenerate one figure's data")
    w.add_argument("figure", choices=FIGURES)
    w.add_argument("overrides", nargs="*", metavar="key=value")
    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", help="comma separated criterion numbers")
    v.add_argument("overrides", nargs="*", metavar="key=value")
    return p


def _config(args):
    from .config import parse_config

    overrides = list(args.overrides)
    for flag in ("seed", "out", "jobs"):
        val = getattr(args, flag)
        if val is not None:
            overrides.append((flag, str(val)))
    if args.command == "simulate":
        overrides.insert(0, ("mode", "simulate"))
    elif args.command == "analytic" or (args.command == "sweep" and args.figure not in SIM_CASES):
        overrides.insert(0, ("mode", "analytic"))
    return parse_config(args.config, overrides)


def _simulate(cfg, command):
    scenario = cfg.scenario
    size = cfg.g if scenario == "grid" else cfg.nodes
    specs = [RunSpec(p, scenario, size, rep, cfg.payload, cfg.rate, cfg)
             for p in cfg.protocols for rep in range(cfg.n_s)]
    rows = run_many(specs, cfg.jobs)
    write_csv(rows, RUN_COLUMNS, metadata(cfg, command, [f"note: {NOTE}"]), cfg.out)
    return rows


def _sweep(cfg, figure, command):
    if figure == "throughput-vs-n":
        write_csv(throughput_vs_n(cfg), CURVE_COLUMNS, metadata(cfg, command), cfg.out)
        return []
    if figure == "throughput-vs-length":
        write_csv(throughput_vs_length(cfg), CURVE_COLUMNS, metadata(cfg, command), cfg.out)
        return []
    specs = sim_specs(figure, cfg)
    runs = run_many(specs, cfg.jobs)
    seeds = sorted({(s.size, s.rep, s.seed) for s in specs})
    extra = [f"note: {NOTE}"] + [f"seed size={sz} rep={r}: {sd}" for sz, r, sd in seeds]
    rows = aggregate(figure, runs)
    write_csv(rows, SWEEP_COLUMNS, metadata(cfg, command, extra), cfg.out)
    return rows


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = " ".join(["rcfd"] + list(argv if argv is not None else sys.argv[1:]))
    try:
        if args.command == "verify":
            from .acceptance import run_all

            only = [int(x) for x in args.only.split(",")] if args.only else None
            results = run_all(only)
            return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
        cfg = _config(args)
        if args.command == "analytic":
            write_csv(run_table_analysis(cfg), TABLE_COLUMNS, metadata(cfg, command), cfg.out)
            return EXIT_OK
        rows = _simulate(cfg, command) if args.command == "simulate" else _sweep(cfg, args.figure, command)
    except ConfigError as e:
        print("rcfd: configuration error:\n  " + "\n  ".join(e.violations), file=sys.stderr)
        return EXIT_CONFIG
    except CapacityExceeded as e:
        print(f"rcfd: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RcfdError as e:
        print(f"rcfd: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, RuntimeError, ValueError) as e:
        print(f"rcfd: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    failed = [r for r in rows if r.get("error")]
    if failed:
        print(f"rcfd: {len(failed)} of {len(rows)} rows carry errors", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
