"""Command line entry point.

Subcommands: ``generate`` (scenario JSON), ``run`` (solve one scenario),
``sweep`` (experiment grids to tidy CSV), ``oracle`` (exhaustive optimum on a
small scenario). Exit codes: 0 success, 2 configuration error, 3 enumeration
guard refusal.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .baselines import InstanceTooLarge, brute_force_optimal
from .experiments import EXPERIMENTS, SweepSpec, run_sweep
from .market import MarketPrices
from .matching import Matching, run_matching
from .scenario import (
    ConfigError,
    GenConfig,
    MarketParams,
    ScenarioFormatError,
    generate_scenario,
    load_scenario,
    save_scenario,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3


def _matching_dict(matching: Matching) -> dict:
    return {
        "assignments": {
            str(su_id): dataclasses.asdict(a) for su_id, a in sorted(matching.assignments.items())
        },
        "unmatched": sorted(matching.unmatched),
    }


def _prices_dict(prices: MarketPrices) -> dict:
    return {
        "pi_eur_gb": {str(k): v for k, v in sorted(prices.pi_eur_gb.items())},
        "overage_price_eur_gb": prices.overage_price_eur_gb,
    }


def cmd_generate(args: argparse.Namespace) -> int:
    market = MarketParams(exceed_prob=args.exceed_prob, overage_price_eur_gb=args.overage_price)
    config = GenConfig(
        n_pus=args.pus,
        n_sus=args.sus,
        n_channels=args.channels,
        area_side_m=args.area,
        sharing_mode=args.sharing_mode,
        market=market,
    )
    scenario = generate_scenario(config, args.seed)
    save_scenario(scenario, args.out)
    print(f"wrote scenario with {args.pus} PUs / {args.sus} SUs / {args.channels} channels to {args.out}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    trace_handle = None
    trace = None
    if args.trace:
        trace_handle = open(args.trace, "w")

        def trace(event: dict) -> None:
            trace_handle.write(json.dumps(event, sort_keys=True) + "\n")

    try:
        matching, prices, stats = run_matching(
            scenario,
            max_link_distance_m=args.max_link_distance,
            backend=args.backend,
            trace=trace,
        )
    finally:
        if trace_handle:
            trace_handle.close()
    result = {
        "matching": _matching_dict(matching),
        "prices": _prices_dict(prices),
        "stats": dataclasses.asdict(stats),
    }
    payload = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n")
        print(f"wrote matching to {args.out}")
    else:
        print(payload)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec(
        experiment=args.experiment,
        seeds=_parse_seeds(args.seeds),
        out_path=args.out,
        backend=args.backend,
    )
    if args.n_sus:
        spec.n_sus_grid = [int(x) for x in args.n_sus.split(",")]
    if args.ranges:
        spec.range_grid_m = [float(x) for x in args.ranges.split(",")]
    rows = run_sweep(spec)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    prices = MarketPrices.from_scenario(scenario)
    matching, welfare = brute_force_optimal(
        scenario, prices, enumeration_bound=args.bound, backend=args.backend
    )
    print(
        json.dumps(
            {"welfare_eur": welfare, "matching": _matching_dict(matching)},
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdna-market", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a random scenario JSON")
    gen.add_argument("--out", required=True)
    gen.add_argument("--pus", type=int, default=10)
    gen.add_argument("--sus", type=int, default=20)
    gen.add_argument("--channels", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--exceed-prob", type=float, default=0.8)
    gen.add_argument("--overage-price", type=float, default=1.0)
    gen.add_argument("--area", type=float, default=250.0)
    gen.add_argument("--sharing-mode", choices=("orthogonal", "concurrent"), default="orthogonal")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="solve one scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--out")
    run.add_argument("--trace", help="write NDJSON protocol events here")
    run.add_argument("--max-link-distance", type=float, default=None)
    run.add_argument("--backend", choices=("compiled", "python"), default=None)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run an experiment grid")
    sweep.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--seeds", default="0..29", help="A..B inclusive or comma list")
    sweep.add_argument("--n-sus", default=None, help="comma list for population/convergence grids")
    sweep.add_argument("--ranges", default=None, help="comma list of ranges in metres")
    sweep.add_argument("--backend", choices=("compiled", "python"), default=None)
    sweep.set_defaults(func=cmd_sweep)

    oracle = sub.add_parser("oracle", help="exhaustive welfare optimum (small instances)")
    oracle.add_argument("--scenario", required=True)
    oracle.add_argument("--bound", type=int, default=10**7)
    oracle.add_argument("--backend", choices=("compiled", "python"), default=None)
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ScenarioFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
