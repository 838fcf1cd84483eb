"""Command-line entry point.

Subcommands mirror the experiment kinds:

    coverlab simulate {srw-cover,sausage-cover,iid-cover,coupling,torus-cover}
    coverlab estimate {hitting,exit-time}
    coverlab calc series-scan
    coverlab report lil
    coverlab verify all

Every experiment reads a flat key=value config (--config) which the
command-line flags override.  Exit codes: 0 success, 1 configuration
error, 2 acceptance failure (verify all).
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import ExperimentConfig, lil_statistic_report, run_experiment

_SIMULATE = ("srw-cover", "sausage-cover", "iid-cover", "coupling", "torus-cover")
_ESTIMATE = ("hitting", "exit-time")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="64-bit master seed")
    parser.add_argument("--workers", type=int, help="parallel worker count")
    parser.add_argument("--out", help="JSONL record output path")
    parser.add_argument("--budget-steps", type=int, dest="budget_steps",
                        help="per-run step budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coverlab",
        description="Monte Carlo laboratory for disk cover times of planar "
                    "walks and the Wiener sausage.",
        epilog="Config keys: experiment=<kind>, seed=N, workers=N, out=PATH, "
               "and dotted parameters such as srw.r=30,60 srw.samples=200 "
               "srw.engine=excursion srw.budget=N; sausage.R, sausage.dt, "
               "sausage.h; hitting.rho/r/P; exit.r, exit.walk=srw|brownian, "
               "exit.dt; iid.r, iid.k; coupling.r, coupling.c1; "
               "torus.epsilon, torus.dt; scan.lam (list), scan.alpha, "
               "scan.eps1, scan.eps2; lil.alpha, lil.budget, lil.samples.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a stochastic experiment")
    p_sim.add_argument("kind", choices=_SIMULATE)
    _add_common(p_sim)

    p_est = sub.add_parser("estimate", help="Monte Carlo estimators")
    p_est.add_argument("kind", choices=_ESTIMATE)
    _add_common(p_est)

    p_calc = sub.add_parser("calc", help="exact series arithmetic")
    p_calc.add_argument("kind", choices=("series-scan",))
    _add_common(p_calc)

    p_rep = sub.add_parser("report", help="trend exhibits")
    p_rep.add_argument("kind", choices=("lil",))
    _add_common(p_rep)

    p_ver = sub.add_parser("verify", help="acceptance suite")
    p_ver.add_argument("kind", choices=("all",))
    p_ver.add_argument("--full", action="store_true",
                       help="run the full-scale (slow) criterion variants")
    _add_common(p_ver)
    return parser


def _config_from_args(args, experiment: str) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        if config.experiment != experiment:
            raise ValueError(
                f"config is for {config.experiment!r}, command asked for "
                f"{experiment!r}")
    else:
        config = ExperimentConfig(experiment)
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
    if args.out is not None:
        config.output_path = args.out
    if args.budget_steps is not None:
        config.parameters["budget"] = args.budget_steps
    return config


def _print_summary(summary) -> None:
    for row in summary:
        print(json.dumps(row, sort_keys=True))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            from .acceptance import run_all

            ok = run_all(full=args.full, seed=args.seed if args.seed is not None
                         else 20260823)
            return 0 if ok else 2
        experiment = "lil-statistic" if args.command == "report" else args.kind
        config = _config_from_args(args, experiment)
        records, summary = run_experiment(config)
        if args.command == "report":
            for row in lil_statistic_report(records):
                print(json.dumps(row, sort_keys=True))
        else:
            _print_summary(summary)
        return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
