# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluator backend: identical rules to kernels.pure, C loops.

Candidate probes (try_move / try_exchange) dominate the matching runtime, so
each one re-evaluates the structure in tight loops instead of allocating
intermediate numpy arrays.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log2

from .arrays import UNASSIGNED
from .pure import ExchangeEval, MoveEval

cnp.import_array()


cdef class CEvaluator:
    cdef readonly object arrays
    cdef public str backend_name

    cdef int n_su, n_pu, n_ch
    cdef double tx_power, noise, bandwidth, gap, floor_w, energy_cost

    cdef double[:, ::1] gains
    cdef unsigned char[:, ::1] allowed
    cdef double[::1] demand, thr, window, valuation, reward, quota, pi

    # committed structure + derived state
    cdef long[::1] assign_pu_v, assign_ch_v
    cdef double[::1] sinr_v, ucap_v, q_v, su_util_v, pu_util_v, used_v
    cdef unsigned char[::1] feasible_v
    cdef double welfare_val

    # candidate scratch
    cdef long[::1] cap, cac
    cdef double[::1] csinr, cucap, cq, csu, cpu, cused
    cdef unsigned char[::1] cfeas
    cdef long[::1] members

    # numpy owners for exported views
    cdef object _np

    def __init__(self, arrays):
        self.arrays = arrays
        self.backend_name = "compiled"
        self.n_su = arrays.n_su
        self.n_pu = arrays.n_pu
        self.n_ch = arrays.n_ch
        self.tx_power = arrays.tx_power_w
        self.noise = arrays.noise_w
        self.bandwidth = arrays.bandwidth_hz
        self.gap = arrays.shannon_gap
        self.floor_w = arrays.interference_floor_w
        self.energy_cost = arrays.energy_cost_eur_gb

        self.gains = np.ascontiguousarray(arrays.gains, dtype=np.float64)
        self.allowed = np.ascontiguousarray(arrays.allowed, dtype=np.uint8)
        self.demand = np.ascontiguousarray(arrays.demand_mb, dtype=np.float64)
        self.thr = np.ascontiguousarray(arrays.thr_linear, dtype=np.float64)
        self.window = np.ascontiguousarray(arrays.window_s, dtype=np.float64)
        self.valuation = np.ascontiguousarray(arrays.valuation, dtype=np.float64)
        self.reward = np.ascontiguousarray(arrays.reward, dtype=np.float64)
        self.quota = np.ascontiguousarray(arrays.quota_mb, dtype=np.float64)

        n, m = self.n_su, self.n_pu
        self._np = {
            "assign_pu": np.full(n, UNASSIGNED, dtype=np.int64),
            "assign_ch": np.full(n, UNASSIGNED, dtype=np.int64),
            "sinr": np.zeros(n),
            "ucap": np.zeros(n),
            "q": np.zeros(n),
            "su_util": np.zeros(n),
            "feasible": np.zeros(n, dtype=np.uint8),
            "pu_util": np.zeros(m),
            "used": np.zeros(m),
        }
        self.assign_pu_v = self._np["assign_pu"]
        self.assign_ch_v = self._np["assign_ch"]
        self.sinr_v = self._np["sinr"]
        self.ucap_v = self._np["ucap"]
        self.q_v = self._np["q"]
        self.su_util_v = self._np["su_util"]
        self.feasible_v = self._np["feasible"]
        self.pu_util_v = self._np["pu_util"]
        self.used_v = self._np["used"]

        self.pi = np.zeros(m)
        self.cap = np.empty(n, dtype=np.int64)
        self.cac = np.empty(n, dtype=np.int64)
        self.csinr = np.empty(n)
        self.cucap = np.empty(n)
        self.cq = np.empty(n)
        self.csu = np.empty(n)
        self.cfeas = np.empty(n, dtype=np.uint8)
        self.cpu = np.empty(m)
        self.cused = np.empty(m)
        self.members = np.empty(n, dtype=np.int64)
        self.welfare_val = self._eval(
            self.assign_pu_v, self.assign_ch_v, self.sinr_v, self.feasible_v,
            self.ucap_v, self.q_v, self.su_util_v, self.pu_util_v, self.used_v)

    cdef double _eval(self, long[::1] ap, long[::1] ac,
                      double[::1] sinr, unsigned char[::1] feas, double[::1] ucap,
                      double[::1] q, double[::1] su_util, double[::1] pu_util,
                      double[::1] used):
        cdef int i, k, j, c, n_bad = 0, count, pos, best
        cdef double interf, s, rate, vol, left, grant, welfare, key
        cdef long tmp

        for i in range(self.n_su):
            sinr[i] = 0.0
            feas[i] = 0
            ucap[i] = 0.0
            q[i] = 0.0
            su_util[i] = 0.0

        for i in range(self.n_su):
            if ap[i] < 0:
                continue
            j = <int> ap[i]
            c = <int> ac[i]
            interf = self.floor_w
            for k in range(self.n_su):
                if k != i and ap[k] >= 0 and ac[k] == c:
                    interf += self.tx_power * self.gains[k, j]
            s = self.tx_power * self.gains[i, j] / (self.noise + interf)
            sinr[i] = s
            if s >= self.thr[i] and self.allowed[i, j]:
                feas[i] = 1
                rate = self.bandwidth * log2(1.0 + s / self.gap)
                vol = rate * self.window[i] / 8e6
                ucap[i] = self.demand[i] if self.demand[i] < vol else vol
            else:
                n_bad += 1

        for j in range(self.n_pu):
            count = 0
            for i in range(self.n_su):
                if ap[i] == j:
                    self.members[count] = i
                    count += 1
            left = self.quota[j]
            if count > 0:
                # insertion sort by (ucap desc, index asc); members start index-ascending
                for k in range(1, count):
                    tmp = self.members[k]
                    key = ucap[tmp]
                    pos = k - 1
                    while pos >= 0 and ucap[self.members[pos]] < key:
                        self.members[pos + 1] = self.members[pos]
                        pos -= 1
                    self.members[pos + 1] = tmp
                for k in range(count):
                    i = <int> self.members[k]
                    grant = ucap[i] if ucap[i] < left else left
                    q[i] = grant
                    left -= grant
            used[j] = self.quota[j] - left

        welfare = 0.0
        for i in range(self.n_su):
            if ap[i] < 0:
                continue
            if not feas[i]:
                su_util[i] = -INFINITY
                continue
            su_util[i] = (self.valuation[i] - self.pi[ap[i]]) * q[i] / 1000.0
            if q[i] > 0:
                su_util[i] += self.reward[i]
            welfare += su_util[i]
        for j in range(self.n_pu):
            pu_util[j] = (self.pi[j] - self.energy_cost) * used[j] / 1000.0
            welfare += pu_util[j]
        if n_bad > 0:
            return -INFINITY
        return welfare

    cdef void _copy_assign(self):
        cdef int i
        for i in range(self.n_su):
            self.cap[i] = self.assign_pu_v[i]
            self.cac[i] = self.assign_ch_v[i]

    cdef double _cand_eval(self):
        return self._eval(self.cap, self.cac, self.csinr, self.cfeas, self.cucap,
                          self.cq, self.csu, self.cpu, self.cused)

    cdef double _delta(self, double cand_welfare):
        if cand_welfare == -INFINITY:
            return -INFINITY
        if self.welfare_val == -INFINITY:
            return INFINITY
        return cand_welfare - self.welfare_val

    # ---- public API (mirrors PureEvaluator) ----

    def set_prices(self, pi):
        self.pi = np.ascontiguousarray(pi, dtype=np.float64).copy()
        self._refresh()

    def load(self, assign_pu, assign_ch):
        cdef cnp.ndarray[cnp.int64_t, ndim=1] ap = np.ascontiguousarray(assign_pu, dtype=np.int64)
        cdef cnp.ndarray[cnp.int64_t, ndim=1] ac = np.ascontiguousarray(assign_ch, dtype=np.int64)
        self._np["assign_pu"][:] = ap
        self._np["assign_ch"][:] = ac
        self._refresh()

    def _refresh(self):
        self.welfare_val = self._eval(
            self.assign_pu_v, self.assign_ch_v, self.sinr_v, self.feasible_v,
            self.ucap_v, self.q_v, self.su_util_v, self.pu_util_v, self.used_v)

    @property
    def assign_pu(self):
        return self._np["assign_pu"]

    @property
    def assign_ch(self):
        return self._np["assign_ch"]

    @property
    def sinr(self):
        return self._np["sinr"]

    @property
    def feasible(self):
        return self._np["feasible"].astype(bool)

    @property
    def ucap_mb(self):
        return self._np["ucap"]

    @property
    def q_mb(self):
        return self._np["q"]

    @property
    def su_util(self):
        return self._np["su_util"]

    @property
    def pu_util(self):
        return self._np["pu_util"]

    @property
    def quota_used_mb(self):
        return self._np["used"]

    @property
    def welfare(self):
        return self.welfare_val

    def residual_quota_mb(self, j):
        return float(self.quota[j] - self.used_v[j])

    def try_move(self, int i, int pu, int ch):
        cdef long src = self.assign_pu_v[i]
        self._copy_assign()
        self.cap[i] = pu
        self.cac[i] = ch if pu != UNASSIGNED else UNASSIGNED
        cdef double w = self._cand_eval()
        return MoveEval(
            ok=w != -INFINITY,
            dw=self._delta(w),
            su_util=float(self.csu[i]) if pu != UNASSIGNED else 0.0,
            q_mb=float(self.cq[i]),
            ucap_mb=float(self.cucap[i]),
            pu_util_src=float(self.cpu[src]) if src != UNASSIGNED else float("nan"),
            pu_util_dst=float(self.cpu[pu]) if pu != UNASSIGNED else float("nan"),
        )

    def try_exchange(self, int a, int b):
        cdef long ja = self.assign_pu_v[a]
        cdef long jb = self.assign_pu_v[b]
        cdef long ba = self.assign_ch_v[a]
        cdef long bb = self.assign_ch_v[b]
        self._copy_assign()
        self.cap[a] = jb
        self.cac[a] = bb
        self.cap[b] = ja
        self.cac[b] = ba
        cdef double w = self._cand_eval()
        return ExchangeEval(
            ok=w != -INFINITY,
            dw=self._delta(w),
            su_util_a=float(self.csu[a]),
            su_util_b=float(self.csu[b]),
            q_a_mb=float(self.cq[a]),
            q_b_mb=float(self.cq[b]),
            pu_util_ja=float(self.cpu[ja]),
            pu_util_jb=float(self.cpu[jb]),
        )

    def apply_move(self, int i, int pu, int ch):
        self.assign_pu_v[i] = pu
        self.assign_ch_v[i] = ch if pu != UNASSIGNED else UNASSIGNED
        self._refresh()

    def apply_exchange(self, int a, int b):
        cdef long ja = self.assign_pu_v[a]
        cdef long jb = self.assign_pu_v[b]
        cdef long ba = self.assign_ch_v[a]
        cdef long bb = self.assign_ch_v[b]
        self.assign_pu_v[a] = jb
        self.assign_ch_v[a] = bb
        self.assign_pu_v[b] = ja
        self.assign_ch_v[b] = ba
        self._refresh()
