"""Distributed many-to-one matching with pricing under externalities.

One run solves the association for a single traffic snapshot:

  1. proposal phase: unmatched SUs propose down their preference lists, PUs
     hold the best quota-feasible set (deferred acceptance within a price
     round), links broken by new interference are evicted;
  2. swap phase: local deviations (SU relocation, pairwise SU exchange,
     channel change, entry of an unmatched SU) are applied while every
     involved agent weakly gains, someone strictly gains, and total welfare
     rises by at least EPS_WELFARE -- the welfare ratchet is what guarantees
     termination under externalities;
  3. pricing: per-PU excess demand moves the trading price between the band
     edges until the market clears within tolerance or pins at a bound.

Utilities are evaluated through the kernels package; preference lists are
rebuilt from scratch whenever the matching changes (the compiled evaluator
makes a full rebuild cheaper than bookkeeping which agents were affected).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import radio
from .kernels import UNASSIGNED, ScenarioArrays, make_evaluator
from .market import MarketPrices, price_converged, price_update
from .scenario import Scenario

EPS_WELFARE = 1e-9

Trace = Callable[[dict], None]


@dataclass(frozen=True)
class Assignment:
    pu_id: int
    channel_id: int
    q_mb: float
    pi_eur_gb: float


@dataclass
class Matching:
    """Assignment of participant SUs to (PU, channel, volume, price) slots."""

    assignments: dict[int, Assignment] = field(default_factory=dict)
    unmatched: set[int] = field(default_factory=set)

    def participants(self) -> list[int]:
        return sorted(set(self.assignments) | self.unmatched)

    def committed_mb(self, pu_id: int) -> float:
        return sum(a.q_mb for a in self.assignments.values() if a.pu_id == pu_id)

    def validate(self, scenario: Scenario) -> None:
        """Check the structural invariants against the scenario."""
        overlap = set(self.assignments) & self.unmatched
        if overlap:
            raise AssertionError(f"SUs both matched and unmatched: {sorted(overlap)}")
        for pu in scenario.pus:
            committed = self.committed_mb(pu.id)
            if committed > pu.quota_remaining_mb + 1e-9:
                raise AssertionError(
                    f"PU {pu.id} quota exceeded: {committed} > {pu.quota_remaining_mb}"
                )
        for su_id, a in self.assignments.items():
            su = scenario.su_by_id(su_id)
            sinr = radio.sinr(su_id, a.pu_id, a.channel_id, self, scenario)
            if sinr < radio.db_to_linear(su.min_sinr_db) * (1 - 1e-12):
                raise AssertionError(
                    f"SU {su_id} infeasible under its own matching: sinr {sinr}"
                )


@dataclass(frozen=True)
class PrefEntry:
    pu_id: int
    channel_id: int
    utility_eur: float
    q_mb: float


@dataclass(frozen=True)
class PuPrefEntry:
    su_id: int
    channel_id: int
    marginal_utility_eur: float
    q_mb: float


@dataclass(frozen=True)
class PreferenceList:
    owner: int
    entries: tuple


@dataclass
class RunStats:
    proposal_msgs: int = 0
    broadcast_msgs: int = 0
    swap_count: int = 0  # applied exchanges, relocations and channel changes
    entry_count: int = 0  # unmatched SUs admitted during swap phases
    rounds: int = 0
    price_rounds: int = 0
    stable: bool = False
    price_converged: bool = False


@dataclass(frozen=True)
class SwapAction:
    kind: str  # "entry" | "channel" | "relocate" | "exchange"
    su_id: int
    pu_id: int | None = None
    channel_id: int | None = None
    su_id_b: int | None = None
    dw: float = 0.0


class _Workspace:
    """Scenario + prices + evaluator bound together with id<->index maps."""

    def __init__(
        self,
        scenario: Scenario,
        prices: MarketPrices,
        participants: list[int] | None = None,
        max_link_distance_m: float | None = None,
        backend: str | None = None,
    ):
        self.scenario = scenario
        ids = scenario.participants() if participants is None else list(participants)
        self.arrays = ScenarioArrays.from_scenario(scenario, ids, max_link_distance_m)
        self.ev = make_evaluator(self.arrays, backend)
        self.su_ids = self.arrays.su_ids
        self.pu_ids = self.arrays.pu_ids
        self.ch_ids = self.arrays.channel_ids
        self.su_index = {su_id: k for k, su_id in enumerate(self.su_ids)}
        self.pu_index = {pu_id: j for j, pu_id in enumerate(self.pu_ids)}
        self.ch_index = {ch_id: c for c, ch_id in enumerate(self.ch_ids)}
        # deterministic scan orders follow the public ids
        self.pu_scan = sorted(range(len(self.pu_ids)), key=lambda j: self.pu_ids[j])
        self.ch_scan = sorted(range(len(self.ch_ids)), key=lambda c: self.ch_ids[c])
        self.prices = prices
        self.set_prices(prices)

    def set_prices(self, prices: MarketPrices) -> None:
        self.prices = prices
        self.ev.set_prices([prices.pi_eur_gb[pu_id] for pu_id in self.pu_ids])

    def load_matching(self, matching: Matching) -> None:
        n = len(self.su_ids)
        ap = np.full(n, UNASSIGNED, dtype=np.int64)
        ac = np.full(n, UNASSIGNED, dtype=np.int64)
        for su_id, a in matching.assignments.items():
            if su_id not in self.su_index:
                raise ValueError(f"SU {su_id} in matching is not a participant")
            i = self.su_index[su_id]
            ap[i] = self.pu_index[a.pu_id]
            ac[i] = self.ch_index[a.channel_id]
        self.ev.load(ap, ac)

    def to_matching(self) -> Matching:
        assignments: dict[int, Assignment] = {}
        unmatched: set[int] = set()
        ap, ac, q = self.ev.assign_pu, self.ev.assign_ch, self.ev.q_mb
        for i, su_id in enumerate(self.su_ids):
            if ap[i] == UNASSIGNED:
                unmatched.add(su_id)
                continue
            pu_id = self.pu_ids[int(ap[i])]
            assignments[su_id] = Assignment(
                pu_id=pu_id,
                channel_id=self.ch_ids[int(ac[i])],
                q_mb=float(q[i]),
                pi_eur_gb=self.prices.pi_eur_gb[pu_id],
            )
        return Matching(assignments=assignments, unmatched=unmatched)

    # ---- preference machinery ----

    def su_entries(self, i: int) -> list[tuple[float, int, int, int, int, float, float]]:
        """Admissible slots for SU index i, best first.

        Entry admissibility is the SU's own view: its link would meet its
        SINR threshold under the current matching, a positive volume is
        available, and the trade does not lose money. Returns tuples
        (utility, pu_id, ch_id, j, c, q_mb, ucap_mb) sorted by utility
        descending with (pu id, channel id) ascending tie-breaks.
        """
        out = []
        for j in self.pu_scan:
            if not self.arrays.allowed[i, j]:
                continue
            for c in self.ch_scan:
                mv = self.ev.try_move(i, j, c)
                if mv.q_mb <= 0 or mv.su_util < 0:
                    continue
                out.append(
                    (mv.su_util, self.pu_ids[j], self.ch_ids[c], j, c, mv.q_mb, mv.ucap_mb)
                )
        out.sort(key=lambda e: (-e[0], e[1], e[2]))
        return out


def _cleanup(ws: _Workspace, stats: RunStats, trace: Trace | None) -> int:
    """Evict assigned links that are infeasible or carry no volume."""
    evicted = 0
    while True:
        ap = ws.ev.assign_pu
        feasible = ws.ev.feasible
        q = ws.ev.q_mb
        victim = -1
        for i in range(len(ws.su_ids)):
            if ap[i] != UNASSIGNED and (not feasible[i] or q[i] <= 0):
                victim = i
                break
        if victim < 0:
            return evicted
        if trace:
            trace(
                {
                    "event": "reject",
                    "reason": "evicted",
                    "su": ws.su_ids[victim],
                    "pu": ws.pu_ids[int(ap[victim])],
                    "channel": ws.ch_ids[int(ws.ev.assign_ch[victim])],
                }
            )
        ws.ev.apply_move(victim, UNASSIGNED, UNASSIGNED)
        evicted += 1


def _propose_phase(
    ws: _Workspace,
    proposed: set[tuple[int, int, int]],
    exhausted: set[int],
    stats: RunStats,
    trace: Trace | None,
) -> bool:
    """Deferred-acceptance rounds until no unmatched SU has a pending offer."""
    n = len(ws.su_ids)
    any_proposal = False
    while True:
        ap = ws.ev.assign_pu
        offers: dict[int, list[tuple[int, int, float, float]]] = {}
        made = 0
        for i in range(n):
            if ap[i] != UNASSIGNED or i in exhausted:
                continue
            pick = None
            for entry in ws.su_entries(i):
                if (i, entry[3], entry[4]) not in proposed:
                    pick = entry
                    break
            if pick is None:
                exhausted.add(i)
                continue
            _, pu_id, ch_id, j, c, q_mb, ucap = pick
            proposed.add((i, j, c))
            offers.setdefault(j, []).append((i, c, ucap, q_mb))
            made += 1
            stats.proposal_msgs += 1
            if trace:
                trace({"event": "propose", "su": ws.su_ids[i], "pu": pu_id, "channel": ch_id})
        if made == 0:
            return any_proposal
        any_proposal = True
        stats.rounds += 1

        holders_before = _holder_sets(ws)
        mutations: dict[int, tuple[int, int]] = {}
        for j in ws.pu_scan:
            if j not in offers:
                continue
            _pu_accept(ws, j, offers[j], mutations, trace)
        if mutations:
            new_ap = ws.ev.assign_pu.copy()
            new_ac = ws.ev.assign_ch.copy()
            for i, (j, c) in mutations.items():
                new_ap[i] = j
                new_ac[i] = c
            ws.ev.load(new_ap, new_ac)
        _cleanup(ws, stats, trace)
        holders_after = _holder_sets(ws)
        for j in range(len(ws.pu_ids)):
            if holders_before[j] != holders_after[j]:
                stats.broadcast_msgs += 1


def _holder_sets(ws: _Workspace) -> list[frozenset]:
    ap = ws.ev.assign_pu
    ac = ws.ev.assign_ch
    holders: list[set] = [set() for _ in ws.pu_ids]
    for i in range(len(ws.su_ids)):
        if ap[i] != UNASSIGNED:
            holders[int(ap[i])].add((i, int(ac[i])))
    return [frozenset(h) for h in holders]


def _pu_accept(
    ws: _Workspace,
    j: int,
    incoming: list[tuple[int, int, float, float]],
    mutations: dict[int, tuple[int, int]],
    trace: Trace | None,
) -> None:
    """Greedy re-selection at PU j: holders plus proposers, ranked by volume.

    Marginal PU utility is (pi_j - energy cost) * q, so with a common price
    the PU ranking is by deliverable volume, ties by SU id.
    """
    ap = ws.ev.assign_pu
    ac = ws.ev.assign_ch
    ucap_now = ws.ev.ucap_mb
    candidates: list[tuple[float, int, int]] = []  # (ucap, i, c)
    for i in range(len(ws.su_ids)):
        if ap[i] == j:
            candidates.append((float(ucap_now[i]), i, int(ac[i])))
    for i, c, ucap, _ in incoming:
        candidates.append((float(ucap), i, c))
    candidates.sort(key=lambda t: (-t[0], ws.su_ids[t[1]]))

    residual = float(ws.arrays.quota_mb[j])
    accepted: dict[int, int] = {}
    for ucap, i, c in candidates:
        grant = min(ucap, residual)
        if grant <= 0:
            if trace:
                trace(
                    {
                        "event": "reject",
                        "reason": "quota",
                        "su": ws.su_ids[i],
                        "pu": ws.pu_ids[j],
                        "channel": ws.ch_ids[c],
                    }
                )
            continue
        accepted[i] = c
        residual -= grant

    for i in range(len(ws.su_ids)):
        if ap[i] == j and i not in accepted:
            mutations[i] = (UNASSIGNED, UNASSIGNED)
    for i, c, _, _ in incoming:
        if i in accepted:
            mutations[i] = (j, accepted[i])
            if trace:
                trace(
                    {
                        "event": "accept",
                        "su": ws.su_ids[i],
                        "pu": ws.pu_ids[j],
                        "channel": ws.ch_ids[accepted[i]],
                    }
                )


def _swap_search_ws(ws: _Workspace) -> SwapAction | None:
    """First approved deviation in deterministic scan order, or None."""
    ev = ws.ev
    n = len(ws.su_ids)
    ap = ev.assign_pu
    ac = ev.assign_ch
    su_util = ev.su_util
    pu_util = ev.pu_util

    for i in range(n):
        if ap[i] == UNASSIGNED:
            for j in ws.pu_scan:
                if not ws.arrays.allowed[i, j] or ev.residual_quota_mb(j) <= 0:
                    continue
                for c in ws.ch_scan:
                    mv = ev.try_move(i, j, c)
                    if (
                        mv.ok
                        and mv.q_mb > 0
                        and mv.su_util > 0
                        and mv.pu_util_dst - pu_util[j] > 0
                        and mv.dw >= EPS_WELFARE
                    ):
                        return SwapAction(
                            "entry", ws.su_ids[i], ws.pu_ids[j], ws.ch_ids[c], dw=mv.dw
                        )
            continue

        j0 = int(ap[i])
        c0 = int(ac[i])
        u0 = float(su_util[i])
        for c in ws.ch_scan:
            if c == c0:
                continue
            mv = ev.try_move(i, j0, c)
            if not mv.ok or mv.dw < EPS_WELFARE:
                continue
            gain_su = mv.su_util - u0
            gain_pu = mv.pu_util_dst - pu_util[j0]
            if gain_su >= 0 and gain_pu >= 0 and (gain_su > 0 or gain_pu > 0):
                return SwapAction("channel", ws.su_ids[i], ws.pu_ids[j0], ws.ch_ids[c], dw=mv.dw)
        for j in ws.pu_scan:
            if j == j0 or not ws.arrays.allowed[i, j] or ev.residual_quota_mb(j) <= 0:
                continue
            for c in ws.ch_scan:
                mv = ev.try_move(i, j, c)
                if not mv.ok or mv.dw < EPS_WELFARE or mv.q_mb <= 0:
                    continue
                gain_su = mv.su_util - u0
                gain_pu = mv.pu_util_dst - pu_util[j]
                if gain_su >= 0 and gain_pu >= 0 and (gain_su > 0 or gain_pu > 0):
                    return SwapAction("relocate", ws.su_ids[i], ws.pu_ids[j], ws.ch_ids[c], dw=mv.dw)
        for k in range(i + 1, n):
            if ap[k] == UNASSIGNED:
                continue
            jk = int(ap[k])
            if not ws.arrays.allowed[i, jk] or not ws.arrays.allowed[k, j0]:
                continue
            ex = ev.try_exchange(i, k)
            if not ex.ok or ex.dw < EPS_WELFARE:
                continue
            gains = [
                ex.su_util_a - float(su_util[i]),
                ex.su_util_b - float(su_util[k]),
                ex.pu_util_ja - float(pu_util[j0]),
                ex.pu_util_jb - float(pu_util[jk]),
            ]
            if all(g >= 0 for g in gains) and any(g > 0 for g in gains):
                return SwapAction("exchange", ws.su_ids[i], su_id_b=ws.su_ids[k], dw=ex.dw)
    return None


def _apply_action(ws: _Workspace, action: SwapAction) -> None:
    if action.kind == "exchange":
        ws.ev.apply_exchange(ws.su_index[action.su_id], ws.su_index[action.su_id_b])
    else:
        ws.ev.apply_move(
            ws.su_index[action.su_id],
            ws.pu_index[action.pu_id],
            ws.ch_index[action.channel_id],
        )


def _swap_phase(ws: _Workspace, stats: RunStats, trace: Trace | None) -> int:
    applied = 0
    while True:
        action = _swap_search_ws(ws)
        if action is None:
            return applied
        _apply_action(ws, action)
        applied += 1
        if action.kind == "entry":
            stats.entry_count += 1
        else:
            stats.swap_count += 1
        if trace:
            event = {"event": "swap", "kind": action.kind, "su": action.su_id, "dw": action.dw}
            if action.kind == "exchange":
                event["su_b"] = action.su_id_b
            else:
                event["pu"] = action.pu_id
                event["channel"] = action.channel_id
            trace(event)
        if applied > 1_000_000:
            raise RuntimeError("swap phase failed to terminate; welfare ratchet broken")


def _match_phase(ws: _Workspace, stats: RunStats, trace: Trace | None) -> None:
    proposed: set[tuple[int, int, int]] = set()
    exhausted: set[int] = set()
    while True:
        proposals = _propose_phase(ws, proposed, exhausted, stats, trace)
        swaps = _swap_phase(ws, stats, trace)
        evictions = _cleanup(ws, stats, trace)
        if not proposals and swaps == 0 and evictions == 0:
            return


def _measure_demand_supply(ws: _Workspace) -> tuple[dict[int, float], dict[int, float]]:
    """First-choice demand per PU vs the quota each PU offers."""
    demand = {pu_id: 0.0 for pu_id in ws.pu_ids}
    supply = {
        pu_id: float(ws.arrays.quota_mb[ws.pu_index[pu_id]]) for pu_id in ws.pu_ids
    }
    for i in range(len(ws.su_ids)):
        entries = ws.su_entries(i)
        if entries:
            top = entries[0]
            demand[top[1]] += top[5]
    return demand, supply


def _ir_evictions(ws: _Workspace, trace: Trace | None) -> None:
    """Unmatch SUs whose trade turned loss-making after a price move."""
    while True:
        ap = ws.ev.assign_pu
        su_util = ws.ev.su_util
        victim = -1
        for i in range(len(ws.su_ids)):
            if ap[i] != UNASSIGNED and su_util[i] < 0:
                victim = i
                break
        if victim < 0:
            return
        if trace:
            trace(
                {
                    "event": "reject",
                    "reason": "price",
                    "su": ws.su_ids[victim],
                    "pu": ws.pu_ids[int(ap[victim])],
                    "channel": ws.ch_ids[int(ws.ev.assign_ch[victim])],
                }
            )
        ws.ev.apply_move(victim, UNASSIGNED, UNASSIGNED)


def run_matching(
    scenario: Scenario,
    prices: MarketPrices | None = None,
    participants: list[int] | None = None,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
    trace: Trace | None = None,
) -> tuple[Matching, MarketPrices, RunStats]:
    """Solve one snapshot: propose/swap to stability, adjust prices, repeat.

    Returns the final matching (certified stable at the returned prices),
    the final prices, and the run statistics. Price adjustment stops when
    every PU clears within tolerance or pins at a band edge; hitting
    max_rounds leaves price_converged False but the matching is still stable
    at the last prices.
    """
    if prices is None:
        prices = MarketPrices.from_scenario(scenario)
    ws = _Workspace(scenario, prices, participants, max_link_distance_m, backend)
    stats = RunStats()
    for round_no in range(1, prices.max_rounds + 1):
        stats.price_rounds = round_no
        _match_phase(ws, stats, trace)
        demand, supply = _measure_demand_supply(ws)
        if trace:
            trace(
                {
                    "event": "price_update",
                    "round": round_no,
                    "pi": dict(sorted(ws.prices.pi_eur_gb.items())),
                    "demand_mb": {k: demand[k] for k in sorted(demand)},
                }
            )
        if price_converged(ws.prices, demand, supply):
            stats.price_converged = True
            break
        if round_no == prices.max_rounds:
            break
        new_prices, _ = price_update(ws.prices, demand, supply)
        ws.set_prices(new_prices)
        _ir_evictions(ws, trace)
    stats.stable = _swap_search_ws(ws) is None
    return ws.to_matching(), ws.prices, stats


# ---- public single-shot operations (spec surface) ----


def build_preferences(
    scenario: Scenario,
    matching: Matching,
    prices: MarketPrices,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
) -> tuple[dict[int, PreferenceList], dict[int, PreferenceList]]:
    """Current preference lists on both sides under the matching's externalities."""
    ws = _Workspace(
        scenario, prices, matching.participants() or None, max_link_distance_m, backend
    )
    ws.load_matching(matching)
    su_prefs: dict[int, PreferenceList] = {}
    for i, su_id in enumerate(ws.su_ids):
        entries = tuple(
            PrefEntry(pu_id=e[1], channel_id=e[2], utility_eur=e[0], q_mb=e[5])
            for e in ws.su_entries(i)
        )
        su_prefs[su_id] = PreferenceList(owner=su_id, entries=entries)
    pu_prefs: dict[int, PreferenceList] = {}
    energy = scenario.market.energy_cost_eur_gb
    for j, pu_id in enumerate(ws.pu_ids):
        rows = []
        pi = prices.pi_eur_gb[pu_id]
        for i, su_id in enumerate(ws.su_ids):
            if not ws.arrays.allowed[i, j]:
                continue
            for c in ws.ch_scan:
                mv = ws.ev.try_move(i, j, c)
                if mv.ucap_mb <= 0:
                    continue
                marginal = (pi - energy) * mv.ucap_mb / 1000.0
                if marginal <= 0:
                    continue
                rows.append(
                    PuPrefEntry(
                        su_id=su_id,
                        channel_id=ws.ch_ids[c],
                        marginal_utility_eur=marginal,
                        q_mb=mv.ucap_mb,
                    )
                )
        rows.sort(key=lambda r: (-r.marginal_utility_eur, r.su_id, r.channel_id))
        pu_prefs[pu_id] = PreferenceList(owner=pu_id, entries=tuple(rows))
    return su_prefs, pu_prefs


def swap_search(
    scenario: Scenario,
    matching: Matching,
    prices: MarketPrices,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
) -> SwapAction | None:
    """First approved local deviation from the matching, if any."""
    ws = _Workspace(
        scenario, prices, matching.participants() or None, max_link_distance_m, backend
    )
    ws.load_matching(matching)
    return _swap_search_ws(ws)


def is_stable(
    scenario: Scenario,
    matching: Matching,
    prices: MarketPrices,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
) -> tuple[bool, SwapAction | None]:
    """Certify swap-stability: no approvable deviation, including entries of
    unmatched SUs into free profitable slots."""
    action = swap_search(scenario, matching, prices, max_link_distance_m, backend)
    return action is None, action


def propose_round(
    scenario: Scenario,
    matching: Matching,
    prices: MarketPrices,
    proposed: set[tuple[int, int, int]] | None = None,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
) -> tuple[Matching, RunStats]:
    """One proposal round from the given matching (mainly a testing surface).

    ``proposed`` carries (su_id, pu_id, channel_id) triples already used this
    price round; it is updated in place when provided.
    """
    ws = _Workspace(
        scenario, prices, matching.participants() or None, max_link_distance_m, backend
    )
    ws.load_matching(matching)
    stats = RunStats()
    external = proposed if proposed is not None else set()
    internal = {
        (ws.su_index[s], ws.pu_index[p], ws.ch_index[c]) for s, p, c in external
    }
    before = set(internal)
    _propose_single_round(ws, internal, stats)
    for i, j, c in internal - before:
        external.add((ws.su_ids[i], ws.pu_ids[j], ws.ch_ids[c]))
    return ws.to_matching(), stats


def _propose_single_round(
    ws: _Workspace, proposed: set[tuple[int, int, int]], stats: RunStats
) -> None:
    exhausted: set[int] = set()
    n = len(ws.su_ids)
    ap = ws.ev.assign_pu
    offers: dict[int, list[tuple[int, int, float, float]]] = {}
    holders_before = _holder_sets(ws)
    for i in range(n):
        if ap[i] != UNASSIGNED:
            continue
        pick = None
        for entry in ws.su_entries(i):
            if (i, entry[3], entry[4]) not in proposed:
                pick = entry
                break
        if pick is None:
            exhausted.add(i)
            continue
        proposed.add((i, pick[3], pick[4]))
        offers.setdefault(pick[3], []).append((i, pick[4], pick[6], pick[5]))
        stats.proposal_msgs += 1
    if not offers:
        return
    stats.rounds += 1
    mutations: dict[int, tuple[int, int]] = {}
    for j in ws.pu_scan:
        if j in offers:
            _pu_accept(ws, j, offers[j], mutations, None)
    if mutations:
        new_ap = ws.ev.assign_pu.copy()
        new_ac = ws.ev.assign_ch.copy()
        for i, (j, c) in mutations.items():
            new_ap[i] = j
            new_ac[i] = c
        ws.ev.load(new_ap, new_ac)
    _cleanup(ws, stats, None)
    holders_after = _holder_sets(ws)
    for j in range(len(ws.pu_ids)):
        if holders_before[j] != holders_after[j]:
            stats.broadcast_msgs += 1
