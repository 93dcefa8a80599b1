"""Monetary side of the market: utilities, participation choice, pricing.

All utilities are quasi-linear in EUR. Volumes are carried in MB and prices
per GB, so every money term is ``price * q_mb / 1000``. SU-side value is the
private valuation of delivered data net of the trading price; PU-side value
is the trading price net of the energy cost of forwarding.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable

from . import radio
from .scenario import PrimaryUser, Scenario, SecondaryUser

if TYPE_CHECKING:  # pragma: no cover
    from .matching import Matching

NEG_INF = float("-inf")


class QuotaViolation(RuntimeError):
    """A PU was handed more volume than its remaining quota."""


class Choice(enum.Enum):
    SBS = "sbs"
    CDNA = "cdna"
    IDLE = "idle"


@dataclass(frozen=True)
class MarketPrices:
    """Per-PU trading prices plus the tatonnement knobs."""

    pi_eur_gb: dict[int, float]
    overage_price_eur_gb: float
    trade_price_min_eur_gb: float = 0.1
    trade_price_max_eur_gb: float = 1.0
    eta: float = 0.05
    tolerance: float = 0.1
    max_rounds: int = 200

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        lo, hi = self.trade_price_min_eur_gb, self.trade_price_max_eur_gb
        for pu_id, pi in self.pi_eur_gb.items():
            if not lo <= pi <= hi:
                raise ValueError(f"pi[{pu_id}]={pi} outside [{lo}, {hi}]")

    @classmethod
    def from_scenario(cls, scenario: Scenario, **knobs) -> "MarketPrices":
        """Initial prices: each PU opens at its own ask."""
        return cls(
            pi_eur_gb={pu.id: pu.ask_price_eur_gb for pu in scenario.pus},
            overage_price_eur_gb=scenario.market.overage_price_eur_gb,
            trade_price_min_eur_gb=scenario.market.trade_price_min_eur_gb,
            trade_price_max_eur_gb=scenario.market.trade_price_max_eur_gb,
            **knobs,
        )

    def with_pi(self, pi_eur_gb: dict[int, float]) -> "MarketPrices":
        return replace(self, pi_eur_gb=pi_eur_gb)


def su_utility(
    su: SecondaryUser,
    pu: PrimaryUser,
    channel_id: int,
    q_mb: float,
    pi_eur_gb: float,
    matching: "Matching",
    scenario: Scenario,
) -> float:
    """SU surplus for trading q_mb with this PU at price pi; -inf if the link
    cannot meet the SU's SINR requirement under the matching's interference."""
    sinr_linear = radio.sinr(su.id, pu.id, channel_id, matching, scenario)
    if sinr_linear < radio.db_to_linear(su.min_sinr_db):
        return NEG_INF
    value = (su.valuation_eur_gb - pi_eur_gb) * q_mb / 1000.0
    if q_mb > 0:
        value += su.reward_eur
    return value


def pu_utility(
    pu: PrimaryUser,
    assigned: Iterable[tuple[SecondaryUser, float]],
    pi_eur_gb: float,
    scenario: Scenario,
) -> float:
    """PU surplus over its accepted set: (price - energy cost) per GB sold."""
    total_mb = 0.0
    for _, q_mb in assigned:
        total_mb += q_mb
    if total_mb > pu.quota_remaining_mb + 1e-9:
        raise QuotaViolation(
            f"PU {pu.id}: committed {total_mb} MB exceeds quota {pu.quota_remaining_mb} MB"
        )
    return (pi_eur_gb - scenario.market.energy_cost_eur_gb) * total_mb / 1000.0


def sbs_utility(su: SecondaryUser, prices: MarketPrices) -> float:
    """Surplus of pushing the full demand through the SBS at the overage price."""
    return (su.valuation_eur_gb - prices.overage_price_eur_gb) * su.demand_mb / 1000.0


def sbs_or_cdna(
    su: SecondaryUser,
    best_cdna_utility: float,
    prices: MarketPrices,
    scenario: Scenario,
) -> Choice:
    """Route choice for one SU given its best achievable CDNA surplus.

    Within-plan SUs stay on the SBS (no marginal cost). Exceeded-plan SUs
    compare the overage path against the best CDNA trade and idle when both
    lose money.
    """
    if not su.plan_exceeded:
        if su.reward_eur > 0 and best_cdna_utility > 0:
            return Choice.CDNA
        return Choice.SBS
    at_sbs = sbs_utility(su, prices)
    if best_cdna_utility > at_sbs and best_cdna_utility > 0:
        return Choice.CDNA
    if su.valuation_eur_gb - prices.overage_price_eur_gb > 0:
        return Choice.SBS
    return Choice.IDLE


def operator_revenue(
    matching: "Matching",
    choices: dict[int, Choice],
    prices: MarketPrices,
    scenario: Scenario,
) -> tuple[float, float]:
    """(CDNA revenue, SBS revenue) for the operator.

    CDNA: the operator keeps the configured share of every executed trade.
    SBS: exceeded-plan SUs that stay pay the overage price on their demand.
    """
    cdna_gross = 0.0
    for su_id in sorted(matching.assignments):
        if choices.get(su_id, Choice.CDNA) is not Choice.CDNA:
            continue
        a = matching.assignments[su_id]
        cdna_gross += a.pi_eur_gb * a.q_mb / 1000.0
    cdna_rev = scenario.market.operator_share * cdna_gross
    sbs_rev = 0.0
    for su in scenario.sus:
        if su.plan_exceeded and choices.get(su.id) is Choice.SBS:
            sbs_rev += prices.overage_price_eur_gb * su.demand_mb / 1000.0
    return cdna_rev, sbs_rev


def price_update(
    prices: MarketPrices,
    demand_mb: dict[int, float],
    supply_mb: dict[int, float],
) -> tuple[MarketPrices, bool]:
    """One tatonnement step: scale each PU price by relative excess demand.

    Returns the clamped prices and a convergence flag: every PU is either
    within tolerance of clearing or pinned at the band edge consistent with
    its excess (max with excess demand, min with excess supply).
    """
    lo, hi = prices.trade_price_min_eur_gb, prices.trade_price_max_eur_gb
    new_pi: dict[int, float] = {}
    converged = True
    for pu_id, pi in prices.pi_eur_gb.items():
        d = demand_mb.get(pu_id, 0.0)
        s = supply_mb.get(pu_id, 0.0)
        if s < 0:
            raise ValueError(f"supply_mb[{pu_id}] must be >= 0")
        rel_excess = (d - s) / max(s, 1.0)
        new_pi[pu_id] = min(hi, max(lo, pi * (1.0 + prices.eta * rel_excess)))
        if abs(rel_excess) <= prices.tolerance:
            continue
        at_consistent_bound = (pi >= hi and rel_excess > 0) or (pi <= lo and rel_excess < 0)
        if not at_consistent_bound:
            converged = False
    return prices.with_pi(new_pi), converged


def price_converged(
    prices: MarketPrices,
    demand_mb: dict[int, float],
    supply_mb: dict[int, float],
) -> bool:
    """Convergence check at the current prices, without stepping them."""
    return price_update(prices, demand_mb, supply_mb)[1]


def welfare(matching: "Matching", scenario: Scenario, prices: MarketPrices) -> float:
    """Canonical social welfare: SU surplus plus PU surplus over all trades.

    Summed in ascending SU id order so that equal matchings always produce
    bit-identical totals.
    """
    total = 0.0
    per_pu: dict[int, float] = {pu.id: 0.0 for pu in scenario.pus}
    for su_id in sorted(matching.assignments):
        a = matching.assignments[su_id]
        su = scenario.su_by_id(su_id)
        value = (su.valuation_eur_gb - prices.pi_eur_gb[a.pu_id]) * a.q_mb / 1000.0
        if a.q_mb > 0:
            value += su.reward_eur
        total += value
        per_pu[a.pu_id] += a.q_mb
    for pu_id in sorted(per_pu):
        total += (prices.pi_eur_gb[pu_id] - scenario.market.energy_cost_eur_gb) * per_pu[pu_id] / 1000.0
    return total


def avg_su_utility(matching: "Matching", scenario: Scenario, participants: list[int]) -> float:
    """Average matched surplus across the given SUs, unmatched counting zero."""
    if not participants:
        return 0.0
    total = 0.0
    for su_id in participants:
        a = matching.assignments.get(su_id)
        if a is None:
            continue
        su = scenario.su_by_id(su_id)
        value = (su.valuation_eur_gb - a.pi_eur_gb) * a.q_mb / 1000.0
        if a.q_mb > 0:
            value += su.reward_eur
        total += value
    return total / len(participants)
