"""Command-line entry point.

Subcommands::

    cohsnr estimate --config cfg.json --out results/   # analytic path only
    cohsnr simulate --config cfg.json --out results/   # time-domain path only
    cohsnr compare  --config cfg.json --out results/   # both + delta report

Fatal configuration problems exit nonzero after printing one JSON error
line to stderr; per-run problems are recorded in the report rows instead.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .experiment import emit_csv, emit_plot_data, load_config, run_comparison


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohsnr",
        description="Analytic vs time-domain SNR estimation for PM-QAM coherent links",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("estimate", "run the analytic path only"),
        ("simulate", "run the time-domain simulator only"),
        ("compare", "run both paths and report the differences"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--runs", type=int, default=None, help="override n_realizations")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument(
            "--unbias",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="report unbiased (default) or biased analytic SNR",
        )
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit timestamps and wall-clock fields for byte-reproducible outputs",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.runs is not None:
            overrides["n_realizations"] = args.runs
        if args.unbias is not None:
            overrides["unbias"] = args.unbias
        if overrides:
            from dataclasses import replace

            cfg = replace(cfg, **overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return 2

    reports, summary = run_comparison(cfg, mode=args.command, workers=args.workers)

    emit_csv(reports, out_dir / "report.csv", cfg, no_timestamp=args.no_timestamp)
    emit_plot_data(reports, out_dir / "plot_data.csv", cfg, no_timestamp=args.no_timestamp)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for key in (
        "n_runs", "n_converged", "snr_model_min_db", "snr_model_max_db",
        "snr_sim_min_db", "snr_sim_max_db", "max_abs_delta_db",
        "share_within_0p2_db", "conservative_rate", "speed_ratio_sim_over_model",
    ):
        value = summary.get(key)
        if value is not None:
            if isinstance(value, float):
                print(f"{key}: {value:.4g}")
            else:
                print(f"{key}: {value}")
    return 0


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
