"""Data and spectrum trading simulator for user-provided cognitive networks.

Primary users resell leftover data quota over licensed channels; secondary
users that outgrew their plans buy connectivity through them. The package
models the radio layer (SINR under channel reuse), solves the SU-PU
association as a many-to-one matching game with externalities and swap-based
stability, adjusts per-PU prices by excess demand, and ships an experiment
harness with random / worst-case / exhaustive-optimal baselines.
"""

__version__ = "0.1.0"

from .market import Choice, MarketPrices, operator_revenue, price_update, sbs_or_cdna
from .matching import Matching, RunStats, is_stable, run_matching
from .scenario import (
    GenConfig,
    Scenario,
    generate_scenario,
    load_scenario,
    save_scenario,
)

__all__ = [
    "__version__",
    "Choice",
    "MarketPrices",
    "operator_revenue",
    "price_update",
    "sbs_or_cdna",
    "Matching",
    "RunStats",
    "is_stable",
    "run_matching",
    "GenConfig",
    "Scenario",
    "generate_scenario",
    "load_scenario",
    "save_scenario",
]
