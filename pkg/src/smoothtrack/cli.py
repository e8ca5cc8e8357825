"""Command-line harness.

Subcommands:
    run <config.json>        single experiment (config must have no sweep)
    sweep <config.json>      parameter sweep (config must have a sweep)
    bounds <config.json>     bound-validation fuzzing batch
    gen <generator> <out>    write a synthetic trace (generators: demo-trace)
    plot <results.csv> <dir> render sweep charts

Exit codes: 0 success, 2 config error, 3 bound violation, 4 solver failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, SolverError, TraceFormatError
from .experiments import parse_config, run_experiment_report, validate_bounds
from .instances import gen_demo_trace, write_trace_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUND = 3
EXIT_SOLVER = 4


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    if args.command == "run" and config.sweep is not None:
        raise ConfigError("config has a sweep; use the 'sweep' subcommand")
    if args.command == "sweep" and config.sweep is None:
        raise ConfigError("config has no sweep; use the 'run' subcommand")
    path, failed = run_experiment_report(config)
    print(f"results written to {path}")
    if failed:
        print(f"{failed} row(s) failed (solver); see {path}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_bounds(args) -> int:
    config = parse_config(args.config)
    violations, checked, failures = validate_bounds(config, verbose=True)
    for v in violations:
        print(f"VIOLATION seed={v.seed} family={v.family} check={v.name}: "
              f"{v.detail}", file=sys.stderr)
    if failures:
        return EXIT_SOLVER
    if violations:
        return EXIT_BOUND
    print(f"all bounds hold on {checked} instances")
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.generator != "demo-trace":
        raise ConfigError(f"unknown generator {args.generator!r} "
                          "(available: demo-trace)")
    records = gen_demo_trace(days=args.days, seed=args.seed,
                             noise_sigma=args.noise)
    write_trace_csv(records, args.out)
    print(f"wrote {len(records)} slots to {args.out}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plotting import render_plots
    written = render_plots(args.results, args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothtrack",
        description="Smoothed online target tracking experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="experiment config JSON")
        p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bounds")
    p.add_argument("config", help="experiment config JSON")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("gen")
    p.add_argument("generator", help="generator name (demo-trace)")
    p.add_argument("out", help="output CSV path")
    p.add_argument("--days", type=int, default=7)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.005)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("plot")
    p.add_argument("results", help="results CSV from run/sweep")
    p.add_argument("out_dir", help="directory for chart files")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
