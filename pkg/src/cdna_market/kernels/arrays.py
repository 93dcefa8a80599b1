"""Flat array view of a scenario, shared by both evaluator backends."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..radio import BITS_PER_MB, MIN_PATH_DISTANCE_M, db_to_linear
from ..scenario import Scenario

UNASSIGNED = -1


@dataclass
class ScenarioArrays:
    su_ids: list[int]
    pu_ids: list[int]
    channel_ids: list[int]
    demand_mb: np.ndarray
    thr_linear: np.ndarray
    window_s: np.ndarray
    valuation: np.ndarray
    reward: np.ndarray
    quota_mb: np.ndarray
    gains: np.ndarray
    allowed: np.ndarray
    tx_power_w: float
    noise_w: float
    bandwidth_hz: float
    shannon_gap: float
    interference_floor_w: float
    energy_cost_eur_gb: float

    @property
    def n_su(self) -> int:
        return len(self.su_ids)

    @property
    def n_pu(self) -> int:
        return len(self.pu_ids)

    @property
    def n_ch(self) -> int:
        return len(self.channel_ids)

    @classmethod
    def from_scenario(
        cls,
        scenario: Scenario,
        participants: list[int] | None = None,
        max_link_distance_m: float | None = None,
    ) -> "ScenarioArrays":
        if participants is None:
            participants = scenario.participants()
        su_ids = sorted(participants)
        sus = [scenario.su_by_id(i) for i in su_ids]
        pus = list(scenario.pus)
        radio = scenario.radio

        su_xy = np.array([su.position for su in sus], dtype=float).reshape(len(sus), 2)
        pu_xy = np.array([pu.position for pu in pus], dtype=float).reshape(len(pus), 2)
        dist = np.hypot(
            su_xy[:, None, 0] - pu_xy[None, :, 0],
            su_xy[:, None, 1] - pu_xy[None, :, 1],
        )
        gains = np.maximum(dist, MIN_PATH_DISTANCE_M) ** (-radio.path_loss_exponent)
        if max_link_distance_m is None:
            allowed = np.ones_like(dist, dtype=bool)
        else:
            allowed = dist <= max_link_distance_m

        floor = radio.concurrent_interference_floor_watts if scenario.sharing_mode == "concurrent" else 0.0
        t = scenario.market.snapshot_duration_s
        return cls(
            su_ids=su_ids,
            pu_ids=[pu.id for pu in pus],
            channel_ids=[ch.id for ch in scenario.channels],
            demand_mb=np.array([su.demand_mb for su in sus], dtype=float),
            thr_linear=np.array([db_to_linear(su.min_sinr_db) for su in sus], dtype=float),
            window_s=np.array([min(su.duration_s, t) for su in sus], dtype=float),
            valuation=np.array([su.valuation_eur_gb for su in sus], dtype=float),
            reward=np.array([su.reward_eur for su in sus], dtype=float),
            quota_mb=np.array([pu.quota_remaining_mb for pu in pus], dtype=float),
            gains=gains,
            allowed=allowed,
            tx_power_w=radio.tx_power_watts,
            noise_w=radio.noise_power_watts,
            bandwidth_hz=radio.channel_bandwidth_hz,
            shannon_gap=radio.shannon_gap,
            interference_floor_w=floor,
            energy_cost_eur_gb=scenario.market.energy_cost_eur_gb,
        )

    def volume_cap_mb(self, i: int, sinr_linear: float) -> float:
        """Volume the SU at index i can push through a link with this SINR."""
        rate = self.bandwidth_hz * np.log2(1.0 + sinr_linear / self.shannon_gap)
        return float(rate * self.window_s[i] / BITS_PER_MB)
