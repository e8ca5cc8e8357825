"""Command line: train online on a trace, write the predictions CSV.

    forecast-trace --trace data/demo_trace.csv --out preds.csv \
        [--window 10] [--hidden 32] [--lr 1e-2] [--seed 0]
"""

from __future__ import annotations

import argparse
import sys

from .online import LstmConfig, forecast_trace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forecast-trace",
        description="Online LSTM forecaster for hidden-target traces")
    parser.add_argument("--trace", required=True, help="input trace CSV")
    parser.add_argument("--out", required=True, help="output predictions CSV")
    parser.add_argument("--window", type=int, default=10)
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--lr", type=float, default=1e-2)
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = LstmConfig(window=args.window, hidden_size=args.hidden,
                            learning_rate=args.lr, seed=args.seed)
        preds = forecast_trace(args.trace, args.out, config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
