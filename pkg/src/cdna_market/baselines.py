"""Comparison matchings: uniform random, worst-case, exhaustive optimal.

The exhaustive enumerations double as the independent oracle for the matching
algorithm: every SU is assigned one of the M*B slots or left out, the same
volume-rationing rules as the market apply, and candidates violating
feasibility or individual rationality are discarded.
"""
from __future__ import annotations

import numpy as np

from . import market
from .kernels import UNASSIGNED
from .market import MarketPrices
from .matching import EPS_WELFARE, Matching, _Workspace
from .scenario import Scenario

ENUMERATION_BOUND = 10**7


class InstanceTooLarge(RuntimeError):
    """Enumeration would exceed the configured candidate bound."""

    def __init__(self, candidates: int, bound: int):
        super().__init__(
            f"exhaustive search over {candidates} candidate assignments exceeds "
            f"the bound of {bound}; reduce the instance or raise the bound"
        )
        self.candidates = candidates
        self.bound = bound


def random_matching(
    scenario: Scenario,
    prices: MarketPrices,
    seed: int,
    participants: list[int] | None = None,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
) -> Matching:
    """SUs in random order take a uniformly random admissible slot.

    A slot is admissible when taking it keeps every placed link feasible,
    moves positive volume, and neither side loses money. Deterministic for a
    fixed seed.
    """
    ws = _Workspace(scenario, prices, participants, max_link_distance_m, backend)
    rng = np.random.default_rng(seed)
    n = len(ws.su_ids)
    for i in rng.permutation(n):
        slots = []
        for j in ws.pu_scan:
            if not ws.arrays.allowed[i, j]:
                continue
            for c in ws.ch_scan:
                mv = ws.ev.try_move(int(i), j, c)
                if mv.ok and mv.q_mb > 0 and mv.su_util >= 0 and mv.pu_util_dst - ws.ev.pu_util[j] >= 0:
                    slots.append((j, c))
        if slots:
            j, c = slots[int(rng.integers(len(slots)))]
            ws.ev.apply_move(int(i), j, c)
    return ws.to_matching()


def worst_case_matching(
    scenario: Scenario,
    prices: MarketPrices,
    participants: list[int] | None = None,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
    enumeration_bound: int = ENUMERATION_BOUND,
) -> tuple[Matching, str]:
    """Matching with the lowest average SU utility; returns (matching, method).

    Small instances are solved exactly: the minimizer of average SU utility
    over all feasible, individually-rational, non-wasteful matchings
    (non-wasteful keeps the adversary from simply benching everyone). Larger
    instances fall back to a greedy heuristic, each SU taking its worst
    positive-utility slot, and are labeled "heuristic".
    """
    ws = _Workspace(scenario, prices, participants, max_link_distance_m, backend)
    n = len(ws.su_ids)
    slots = ws.arrays.n_pu * ws.arrays.n_ch + 1
    if n == 0:
        return ws.to_matching(), "exact"
    if slots**n <= enumeration_bound:
        return _worst_exact(ws, enumeration_bound), "exact"
    return _worst_heuristic(ws), "heuristic"


def _worst_heuristic(ws: _Workspace) -> Matching:
    for i in range(len(ws.su_ids)):
        worst = None
        for j in ws.pu_scan:
            if not ws.arrays.allowed[i, j]:
                continue
            for c in ws.ch_scan:
                mv = ws.ev.try_move(i, j, c)
                if not (mv.ok and mv.q_mb > 0 and mv.su_util > 0 and mv.pu_util_dst - ws.ev.pu_util[j] >= 0):
                    continue
                if worst is None or mv.su_util < worst[0]:
                    worst = (mv.su_util, j, c)
        if worst is not None:
            ws.ev.apply_move(i, worst[1], worst[2])
    return ws.to_matching()


def _decode(ws: _Workspace, key: int) -> tuple[np.ndarray, np.ndarray]:
    """Candidate key -> assignment arrays; digit 0 is unmatched, then slots in
    (pu id, channel id) lexicographic order."""
    n = len(ws.su_ids)
    n_ch = ws.arrays.n_ch
    slots = ws.arrays.n_pu * n_ch + 1
    ap = np.full(n, UNASSIGNED, dtype=np.int64)
    ac = np.full(n, UNASSIGNED, dtype=np.int64)
    for i in range(n):
        key, digit = divmod(key, slots)
        if digit:
            ap[i] = ws.pu_scan[(digit - 1) // n_ch]
            ac[i] = ws.ch_scan[(digit - 1) % n_ch]
    return ap, ac


def _admissible_state(ws: _Workspace) -> bool:
    """Loaded candidate passes feasibility, positive volumes and IR."""
    ev = ws.ev
    ap = ev.assign_pu
    assigned = ap != UNASSIGNED
    if not np.any(assigned):
        return True
    if ev.welfare == float("-inf"):
        return False
    q = ev.q_mb
    su_util = ev.su_util
    if np.any(q[assigned] <= 0) or np.any(su_util[assigned] < 0):
        return False
    return not np.any(ev.pu_util < -1e-12)


def _iter_candidates(ws: _Workspace, enumeration_bound: int):
    n = len(ws.su_ids)
    slots = ws.arrays.n_pu * ws.arrays.n_ch + 1
    total = slots**n
    if total > enumeration_bound:
        raise InstanceTooLarge(total, enumeration_bound)
    for key in range(total):
        ap, ac = _decode(ws, key)
        ws.ev.load(ap, ac)
        if _admissible_state(ws):
            yield key


def brute_force_optimal(
    scenario: Scenario,
    prices: MarketPrices,
    participants: list[int] | None = None,
    max_link_distance_m: float | None = None,
    backend: str | None = None,
    enumeration_bound: int = ENUMERATION_BOUND,
) -> tuple[Matching, float]:
    """Exact social-welfare maximizer over all admissible assignments.

    Near-ties (within 1e-9 of the running maximum) are re-scored through the
    canonical welfare sum so the reported optimum never ranks below any other
    method evaluated the same way. Ties break on the lexicographically
    smallest assignment.
    """
    ws = _Workspace(scenario, prices, participants, max_link_distance_m, backend)
    best_w = float("-inf")
    near: list[tuple[float, int]] = []
    for key in _iter_candidates(ws, enumeration_bound):
        w = float(ws.ev.welfare)
        if w > best_w:
            best_w = w
            near = [(w, k) for w, k in near if w >= best_w - EPS_WELFARE]
        if w >= best_w - EPS_WELFARE:
            near.append((w, key))
    if not near:
        empty = Matching(unmatched=set(ws.su_ids))
        return empty, 0.0
    scored = []
    for _, key in near:
        ws.ev.load(*_decode(ws, key))
        m = ws.to_matching()
        scored.append((market.welfare(m, scenario, prices), key, m))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return scored[0][2], scored[0][0]


def _worst_exact_scan(
    ws: _Workspace, enumeration_bound: int
) -> tuple[Matching, float] | None:
    avgs: list[float] = []
    keys: list[int] = []
    n_participants = len(ws.su_ids)
    for key in _iter_candidates(ws, enumeration_bound):
        su_util = ws.ev.su_util
        ap = ws.ev.assign_pu
        total = float(su_util[ap != UNASSIGNED].sum()) if np.any(ap != UNASSIGNED) else 0.0
        avgs.append(total / n_participants)
        keys.append(key)
    if not keys:
        return None
    order = np.lexsort((np.array(keys), np.array(avgs)))
    for pos in order:
        key = keys[int(pos)]
        ws.ev.load(*_decode(ws, key))
        if _nonwasteful(ws):
            m = ws.to_matching()
            return m, market.avg_su_utility(m, ws.scenario, list(ws.su_ids))
    return None


def _nonwasteful(ws: _Workspace) -> bool:
    """No unmatched SU has an approvable entry into a free profitable slot."""
    ev = ws.ev
    ap = ev.assign_pu
    for i in range(len(ws.su_ids)):
        if ap[i] != UNASSIGNED:
            continue
        for j in ws.pu_scan:
            if not ws.arrays.allowed[i, j] or ev.residual_quota_mb(j) <= 0:
                continue
            for c in ws.ch_scan:
                mv = ev.try_move(i, j, c)
                if (
                    mv.ok
                    and mv.q_mb > 0
                    and mv.su_util > 0
                    and mv.pu_util_dst - ev.pu_util[j] > 0
                    and mv.dw >= EPS_WELFARE
                ):
                    return False
    return True


def _worst_exact(ws: _Workspace, enumeration_bound: int) -> Matching:
    result = _worst_exact_scan(ws, enumeration_bound)
    if result is None:
        return Matching(unmatched=set(ws.su_ids))
    return result[0]
