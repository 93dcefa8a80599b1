"""Pure numpy evaluator backend.

This is the reference semantics for matching-state evaluation. A state is the
structural assignment (participant index -> PU index, channel index); volumes,
SINRs, utilities and welfare are all derived from it:

  - interference: received power at each link's PU from every co-channel SU;
  - a link is feasible when its SINR meets the SU threshold and the link is
    within the allowed distance;
  - granted volume: per PU, members are served greedily in order of their
    unconstrained volume (demand and rate capped), ties by index, until the
    quota runs out;
  - SU utility (valuation - price) * q, PU utility (price - energy cost) * q,
    both in EUR with q in GB; welfare is their sum, -inf if any assigned link
    is infeasible.

The compiled backend in _engine.pyx reimplements exactly these rules.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import UNASSIGNED, ScenarioArrays

NEG_INF = float("-inf")


@dataclass(frozen=True)
class MoveEval:
    ok: bool
    dw: float
    su_util: float
    q_mb: float
    ucap_mb: float
    pu_util_src: float
    pu_util_dst: float


@dataclass(frozen=True)
class ExchangeEval:
    ok: bool
    dw: float
    su_util_a: float
    su_util_b: float
    q_a_mb: float
    q_b_mb: float
    pu_util_ja: float
    pu_util_jb: float


@dataclass
class State:
    assign_pu: np.ndarray
    assign_ch: np.ndarray
    sinr: np.ndarray
    feasible: np.ndarray
    ucap_mb: np.ndarray
    q_mb: np.ndarray
    su_util: np.ndarray
    pu_util: np.ndarray
    quota_used_mb: np.ndarray
    welfare: float


def full_state(arrays: ScenarioArrays, pi: np.ndarray, assign_pu: np.ndarray, assign_ch: np.ndarray) -> State:
    n, m = arrays.n_su, arrays.n_pu
    sinr = np.zeros(n)
    feasible = np.zeros(n, dtype=bool)
    ucap = np.zeros(n)
    q = np.zeros(n)
    su_util = np.zeros(n)
    pu_util = np.zeros(m)
    used = np.zeros(m)

    assigned = assign_pu != UNASSIGNED
    p = arrays.tx_power_w
    for c in range(arrays.n_ch):
        members = np.flatnonzero(assigned & (assign_ch == c))
        if members.size == 0:
            continue
        pus = assign_pu[members]
        # cross[a, b] = gain from SU members[b] into the PU serving members[a]
        cross = arrays.gains[np.ix_(members, pus)].T
        own = np.diag(cross)
        interference = p * (cross.sum(axis=1) - own) + arrays.interference_floor_w
        sinr_c = p * own / (arrays.noise_w + interference)
        sinr[members] = sinr_c
        feasible[members] = (sinr_c >= arrays.thr_linear[members]) & arrays.allowed[members, pus]

    idx = np.flatnonzero(assigned)
    if idx.size:
        rate = arrays.bandwidth_hz * np.log2(1.0 + sinr[idx] / arrays.shannon_gap)
        volcap = rate * arrays.window_s[idx] / 8e6
        ucap[idx] = np.where(feasible[idx], np.minimum(arrays.demand_mb[idx], volcap), 0.0)
        for j in range(m):
            group = [int(i) for i in idx if assign_pu[i] == j]
            if not group:
                continue
            group.sort(key=lambda i: (-ucap[i], i))
            left = arrays.quota_mb[j]
            for i in group:
                grant = min(ucap[i], left)
                q[i] = grant
                left -= grant
            used[j] = arrays.quota_mb[j] - left

    n_infeasible = int(np.count_nonzero(assigned & ~feasible))
    for i in idx:
        j = assign_pu[i]
        if not feasible[i]:
            su_util[i] = NEG_INF
            continue
        su_util[i] = (arrays.valuation[i] - pi[j]) * q[i] / 1000.0
        if q[i] > 0:
            su_util[i] += arrays.reward[i]
    for j in range(m):
        pu_util[j] = (pi[j] - arrays.energy_cost_eur_gb) * used[j] / 1000.0

    if n_infeasible > 0:
        welfare = NEG_INF
    else:
        welfare = float(su_util[idx].sum() + pu_util.sum()) if idx.size else float(pu_util.sum())
    return State(
        assign_pu=assign_pu,
        assign_ch=assign_ch,
        sinr=sinr,
        feasible=feasible,
        ucap_mb=ucap,
        q_mb=q,
        su_util=su_util,
        pu_util=pu_util,
        quota_used_mb=used,
        welfare=welfare,
    )


class PureEvaluator:
    backend_name = "python"

    def __init__(self, arrays: ScenarioArrays):
        self.arrays = arrays
        self.pi = np.zeros(arrays.n_pu)
        self._assign_pu = np.full(arrays.n_su, UNASSIGNED, dtype=np.int64)
        self._assign_ch = np.full(arrays.n_su, UNASSIGNED, dtype=np.int64)
        self.state = full_state(arrays, self.pi, self._assign_pu, self._assign_ch)

    def set_prices(self, pi) -> None:
        self.pi = np.asarray(pi, dtype=float).copy()
        self._refresh()

    def load(self, assign_pu, assign_ch) -> None:
        self._assign_pu = np.asarray(assign_pu, dtype=np.int64).copy()
        self._assign_ch = np.asarray(assign_ch, dtype=np.int64).copy()
        self._refresh()

    def _refresh(self) -> None:
        self.state = full_state(self.arrays, self.pi, self._assign_pu, self._assign_ch)

    @property
    def assign_pu(self) -> np.ndarray:
        return self._assign_pu

    @property
    def assign_ch(self) -> np.ndarray:
        return self._assign_ch

    @property
    def sinr(self) -> np.ndarray:
        return self.state.sinr

    @property
    def feasible(self) -> np.ndarray:
        return self.state.feasible

    @property
    def ucap_mb(self) -> np.ndarray:
        return self.state.ucap_mb

    @property
    def q_mb(self) -> np.ndarray:
        return self.state.q_mb

    @property
    def su_util(self) -> np.ndarray:
        return self.state.su_util

    @property
    def pu_util(self) -> np.ndarray:
        return self.state.pu_util

    @property
    def quota_used_mb(self) -> np.ndarray:
        return self.state.quota_used_mb

    @property
    def welfare(self) -> float:
        return self.state.welfare

    def residual_quota_mb(self, j: int) -> float:
        return float(self.arrays.quota_mb[j] - self.state.quota_used_mb[j])

    def _candidate(self, assign_pu, assign_ch) -> State:
        return full_state(self.arrays, self.pi, assign_pu, assign_ch)

    def _delta(self, cand: State) -> float:
        if cand.welfare == NEG_INF:
            return NEG_INF
        if self.state.welfare == NEG_INF:
            return float("inf")
        return cand.welfare - self.state.welfare

    def try_move(self, i: int, pu: int, ch: int) -> MoveEval:
        src = int(self._assign_pu[i])
        ap = self._assign_pu.copy()
        ac = self._assign_ch.copy()
        ap[i] = pu
        ac[i] = ch if pu != UNASSIGNED else UNASSIGNED
        cand = self._candidate(ap, ac)
        ok = cand.welfare != NEG_INF
        return MoveEval(
            ok=ok,
            dw=self._delta(cand),
            su_util=float(cand.su_util[i]) if pu != UNASSIGNED else 0.0,
            q_mb=float(cand.q_mb[i]),
            ucap_mb=float(cand.ucap_mb[i]),
            pu_util_src=float(cand.pu_util[src]) if src != UNASSIGNED else float("nan"),
            pu_util_dst=float(cand.pu_util[pu]) if pu != UNASSIGNED else float("nan"),
        )

    def try_exchange(self, a: int, b: int) -> ExchangeEval:
        ja, jb = int(self._assign_pu[a]), int(self._assign_pu[b])
        ba, bb = int(self._assign_ch[a]), int(self._assign_ch[b])
        ap = self._assign_pu.copy()
        ac = self._assign_ch.copy()
        ap[a], ac[a] = jb, bb
        ap[b], ac[b] = ja, ba
        cand = self._candidate(ap, ac)
        return ExchangeEval(
            ok=cand.welfare != NEG_INF,
            dw=self._delta(cand),
            su_util_a=float(cand.su_util[a]),
            su_util_b=float(cand.su_util[b]),
            q_a_mb=float(cand.q_mb[a]),
            q_b_mb=float(cand.q_mb[b]),
            pu_util_ja=float(cand.pu_util[ja]),
            pu_util_jb=float(cand.pu_util[jb]),
        )

    def apply_move(self, i: int, pu: int, ch: int) -> None:
        self._assign_pu[i] = pu
        self._assign_ch[i] = ch if pu != UNASSIGNED else UNASSIGNED
        self._refresh()

    def apply_exchange(self, a: int, b: int) -> None:
        ja, jb = int(self._assign_pu[a]), int(self._assign_pu[b])
        ba, bb = int(self._assign_ch[a]), int(self._assign_ch[b])
        self._assign_pu[a], self._assign_ch[a] = jb, bb
        self._assign_pu[b], self._assign_ch[b] = ja, ba
        self._refresh()
