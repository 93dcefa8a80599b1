"""Seeded scenario sweeps reproducing the case-study figures, as tidy CSV.

Four experiments:

  range        average SU utility vs transmission range for the proposed
               matching, random matching, and the worst-case baseline; the
               range axis couples a maximum link distance with a uniform SINR
               requirement, interpolated between (20 m, 20 dB) and
               (200 m, 1 dB);
  population   number of SUs routed to the secondary base station as the SU
               population grows, for exceed-probability and overage-price
               variants;
  revenue      operator revenue through trading vs overage fees on the same
               range grid;
  convergence  rounds, swaps and message counts vs population size.

Every row carries the seed, a build id and the scenario content hash so any
number can be traced back to the exact inputs. Wall-clock timings go to a
sidecar JSON (never into the CSV, which must be byte-stable across re-runs).
"""
from __future__ import annotations

import csv
import dataclasses
import json
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from . import __version__, market
from .baselines import random_matching, worst_case_matching
from .market import Choice, MarketPrices, operator_revenue, sbs_or_cdna
from .matching import Matching, run_matching
from .scenario import GenConfig, Scenario, generate_scenario

CSV_COLUMNS = [
    "experiment",
    "grid_param",
    "grid_value",
    "variant",
    "seed",
    "method",
    "metric",
    "value",
    "scenario_hash",
    "build_id",
]

RANGE_ENDPOINTS = ((20.0, 20.0), (200.0, 1.0))  # (distance m, min SINR dB)

EXPERIMENTS = ("range", "population", "revenue", "convergence")

# Exact worst-case enumeration is priced per sweep cell, so cap it well below
# the standalone oracle guard; larger cells fall back to the labeled heuristic.
SWEEP_WORST_CASE_BOUND = 100_000


@dataclass
class SweepSpec:
    experiment: str
    seeds: list[int] = field(default_factory=lambda: list(range(30)))
    out_path: str | Path | None = None
    range_grid_m: list[float] = field(default_factory=lambda: [20.0 + 20.0 * k for k in range(10)])
    n_sus_grid: list[int] = field(default_factory=lambda: [10, 20, 30, 50, 75, 100])
    exceed_probs: list[float] = field(default_factory=lambda: [0.4, 0.8])
    overage_multipliers: list[float] = field(default_factory=lambda: [1.0, 2.0])
    base_config: GenConfig = field(default_factory=GenConfig)
    backend: str | None = None

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.experiment in ("range", "revenue") and not self.range_grid_m:
            raise ValueError("range_grid_m must be non-empty")
        if self.experiment in ("population", "convergence") and not self.n_sus_grid:
            raise ValueError("n_sus_grid must be non-empty")


def coupled_min_sinr_db(distance_m: float) -> float:
    """Linear interpolation of the (range, SINR requirement) sweep pair."""
    (d0, s0), (d1, s1) = RANGE_ENDPOINTS
    return s0 + (distance_m - d0) * (s1 - s0) / (d1 - d0)


def build_id() -> str:
    try:
        sha = (
            subprocess.run(
                ["git", "rev-parse", "--short", "HEAD"],
                cwd=Path(__file__).resolve().parent,
                capture_output=True,
                text=True,
                timeout=5,
            ).stdout.strip()
        )
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"v{__version__}+g{sha}" if sha else f"v{__version__}"


def _with_uniform_sinr(scenario: Scenario, sinr_db: float) -> Scenario:
    sus = tuple(dataclasses.replace(su, min_sinr_db=sinr_db) for su in scenario.sus)
    return dataclasses.replace(scenario, sus=sus)


def _with_overage(prices: MarketPrices, multiplier: float) -> MarketPrices:
    return dataclasses.replace(
        prices, overage_price_eur_gb=prices.overage_price_eur_gb * multiplier
    )


def _choices(scenario: Scenario, matching: Matching, prices: MarketPrices) -> dict[int, Choice]:
    """Per-SU routing choice given the solved matching."""
    out: dict[int, Choice] = {}
    for su in scenario.sus:
        a = matching.assignments.get(su.id)
        if a is None:
            best = 0.0
        else:
            best = (su.valuation_eur_gb - a.pi_eur_gb) * a.q_mb / 1000.0
            if a.q_mb > 0:
                best += su.reward_eur
        out[su.id] = sbs_or_cdna(su, best, prices, scenario)
    return out


def _restrict_to_cdna(matching: Matching, choices: dict[int, Choice]) -> Matching:
    """Drop trades of SUs that route elsewhere, keeping choices consistent."""
    kept = {su_id: a for su_id, a in matching.assignments.items() if choices[su_id] is Choice.CDNA}
    dropped = set(matching.assignments) - set(kept)
    return Matching(assignments=kept, unmatched=set(matching.unmatched) | dropped)


class _Emitter:
    def __init__(self, experiment: str):
        self.experiment = experiment
        self.build = build_id()
        self.rows: list[dict] = []

    def emit(self, grid_param, grid_value, variant, seed, method, metric, value, scenario_hash):
        self.rows.append(
            {
                "experiment": self.experiment,
                "grid_param": grid_param,
                "grid_value": grid_value,
                "variant": variant,
                "seed": seed,
                "method": method,
                "metric": metric,
                "value": value,
                "scenario_hash": scenario_hash,
                "build_id": self.build,
            }
        )

    def finish(self) -> list[dict]:
        """Append mean and Student-t 95% CI rows across seeds, then sort."""
        groups: dict[tuple, list[float]] = {}
        for row in self.rows:
            if row["seed"] == "":
                continue
            key = (
                row["grid_param"],
                row["grid_value"],
                row["variant"],
                row["method"],
                row["metric"],
            )
            groups.setdefault(key, []).append(row["value"])
        for key in sorted(groups):
            values = np.array(groups[key], dtype=float)
            finite = values[np.isfinite(values)]
            if finite.size == 0:
                continue
            mean = float(finite.mean())
            if finite.size > 1:
                half = float(
                    scipy_stats.t.ppf(0.975, finite.size - 1)
                    * finite.std(ddof=1)
                    / np.sqrt(finite.size)
                )
            else:
                half = 0.0
            grid_param, grid_value, variant, method, metric = key
            self.emit(grid_param, grid_value, variant, "", method, f"{metric}_mean", mean, "")
            self.emit(grid_param, grid_value, variant, "", method, f"{metric}_ci95", half, "")
        self.rows.sort(
            key=lambda r: (
                r["grid_param"],
                r["grid_value"],
                str(r["variant"]),
                str(r["seed"]),
                r["method"],
                r["metric"],
            )
        )
        return self.rows


def sweep_range_utility(spec: SweepSpec) -> list[dict]:
    """Average SU utility per method across the (range, SINR) grid."""
    em = _Emitter("range")
    for d in spec.range_grid_m:
        sinr_db = coupled_min_sinr_db(d)
        for seed in spec.seeds:
            base = generate_scenario(spec.base_config, seed)
            scenario = _with_uniform_sinr(base, sinr_db)
            digest = scenario.content_hash()
            participants = scenario.participants()
            matched, prices, _ = run_matching(
                scenario, max_link_distance_m=d, backend=spec.backend
            )
            rnd = random_matching(
                scenario, prices, seed, max_link_distance_m=d, backend=spec.backend
            )
            worst, kind = worst_case_matching(
                scenario,
                prices,
                max_link_distance_m=d,
                backend=spec.backend,
                enumeration_bound=SWEEP_WORST_CASE_BOUND,
            )
            rows = [
                ("proposed", market.avg_su_utility(matched, scenario, participants)),
                ("random", market.avg_su_utility(rnd, scenario, participants)),
                (f"worst_case_{kind}", market.avg_su_utility(worst, scenario, participants)),
            ]
            for method, value in rows:
                em.emit("range_m", d, "e=default", seed, method, "avg_su_utility_eur", value, digest)
            em.emit(
                "range_m", d, "e=default", seed, "proposed", "matched_count",
                float(len(matched.assignments)), digest,
            )
    return em.finish()


def sweep_population_sbs(spec: SweepSpec) -> list[dict]:
    """SUs routed to the SBS as the population grows, per (e, overage) variant."""
    em = _Emitter("population")
    for e in spec.exceed_probs:
        cfg_market = dataclasses.replace(spec.base_config.market, exceed_prob=e)
        for n in spec.n_sus_grid:
            cfg = dataclasses.replace(spec.base_config, n_sus=n, market=cfg_market)
            for seed in spec.seeds:
                scenario = generate_scenario(cfg, seed)
                digest = scenario.content_hash()
                matched, prices, _ = run_matching(scenario, backend=spec.backend)
                for mult in spec.overage_multipliers:
                    variant = f"e={e:g},p=x{mult:g}"
                    priced = _with_overage(prices, mult)
                    choices = _choices(scenario, matched, priced)
                    sbs_count = sum(1 for c in choices.values() if c is Choice.SBS)
                    cdna_count = sum(1 for c in choices.values() if c is Choice.CDNA)
                    em.emit("n_sus", n, variant, seed, "proposed", "sbs_count", float(sbs_count), digest)
                    em.emit("n_sus", n, variant, seed, "proposed", "cdna_count", float(cdna_count), digest)
    return em.finish()


def sweep_revenue(spec: SweepSpec) -> list[dict]:
    """Operator revenue via trading vs overage fees across the range grid."""
    em = _Emitter("revenue")
    for d in spec.range_grid_m:
        sinr_db = coupled_min_sinr_db(d)
        for seed in spec.seeds:
            base = generate_scenario(spec.base_config, seed)
            scenario = _with_uniform_sinr(base, sinr_db)
            digest = scenario.content_hash()
            matched, prices, _ = run_matching(
                scenario, max_link_distance_m=d, backend=spec.backend
            )
            for mult in spec.overage_multipliers:
                variant = f"p=x{mult:g}"
                priced = _with_overage(prices, mult)
                choices = _choices(scenario, matched, priced)
                consistent = _restrict_to_cdna(matched, choices)
                cdna_rev, sbs_rev = operator_revenue(consistent, choices, priced, scenario)
                ratio = cdna_rev / sbs_rev if sbs_rev > 0 else float("nan")
                em.emit("range_m", d, variant, seed, "proposed", "cdna_revenue_eur", cdna_rev, digest)
                em.emit("range_m", d, variant, seed, "proposed", "sbs_revenue_eur", sbs_rev, digest)
                em.emit("range_m", d, variant, seed, "proposed", "revenue_ratio", ratio, digest)
    return em.finish()


def sweep_convergence(spec: SweepSpec) -> tuple[list[dict], dict[str, float]]:
    """Algorithm effort vs population size; wall-clock goes to the sidecar."""
    em = _Emitter("convergence")
    timings: dict[str, float] = {}
    for n in spec.n_sus_grid:
        cfg = dataclasses.replace(spec.base_config, n_sus=n)
        for seed in spec.seeds:
            scenario = generate_scenario(cfg, seed)
            digest = scenario.content_hash()
            t0 = time.perf_counter()
            _, _, stats = run_matching(scenario, backend=spec.backend)
            timings[f"n={n},seed={seed}"] = time.perf_counter() - t0
            metrics = {
                "rounds": stats.rounds,
                "swap_count": stats.swap_count,
                "entry_count": stats.entry_count,
                "proposal_msgs": stats.proposal_msgs,
                "broadcast_msgs": stats.broadcast_msgs,
                "price_rounds": stats.price_rounds,
                "price_converged": int(stats.price_converged),
                "stable": int(stats.stable),
            }
            for metric, value in metrics.items():
                em.emit("n_sus", n, "e=default", seed, "proposed", metric, float(value), digest)
    return em.finish(), timings


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Dispatch one sweep; write CSV (and timing sidecar) when out_path set."""
    spec.validate()
    timings: dict[str, float] | None = None
    if spec.experiment == "range":
        rows = sweep_range_utility(spec)
    elif spec.experiment == "population":
        rows = sweep_population_sbs(spec)
    elif spec.experiment == "revenue":
        rows = sweep_revenue(spec)
    else:
        rows, timings = sweep_convergence(spec)
    if spec.out_path is not None:
        write_rows(rows, spec.out_path)
        if timings is not None:
            sidecar = Path(spec.out_path).with_suffix(".timing.json")
            sidecar.write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    return rows


def write_rows(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in CSV_COLUMNS})


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
