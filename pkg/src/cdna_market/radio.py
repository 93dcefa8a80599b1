"""SU-to-PU link physics: path gain, SINR under co-channel reuse, rate, volume.

The modeled link is the SU uplink into its serving PU; interference is the
aggregate received power at that PU from every other SU transmitting on the
same channel in the current matching. These are the scalar reference
implementations; the kernels package provides the equivalent vectorized /
compiled evaluation used inside the matching loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .scenario import PrimaryUser, RadioParams, Scenario, SecondaryUser

if TYPE_CHECKING:  # pragma: no cover - import cycle avoidance, types only
    from .matching import Matching

MIN_PATH_DISTANCE_M = 1.0
BITS_PER_MB = 8e6


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    return 10.0 * math.log10(linear)


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def path_gain(distance_m: float, alpha: float, min_distance_m: float = MIN_PATH_DISTANCE_M) -> float:
    """Power-law gain d^-alpha with a near-field clamp at min_distance_m."""
    if distance_m <= 0:
        raise ValueError(f"distance_m must be > 0, got {distance_m}")
    return max(distance_m, min_distance_m) ** (-alpha)


def sinr(su_id: int, pu_id: int, channel_id: int, matching: "Matching", scenario: Scenario) -> float:
    """Linear SINR of the candidate link su->pu on the given channel.

    Interference is measured at the receiving PU from every other SU
    currently assigned to that channel; the candidate SU's own (possibly
    different) assignment never contributes.
    """
    su = scenario.su_by_id(su_id)
    pu = scenario.pu_by_id(pu_id)
    radio = scenario.radio
    p = radio.tx_power_watts
    signal = p * path_gain(distance(su.position, pu.position), radio.path_loss_exponent)
    interference = 0.0
    for other_id, assignment in matching.assignments.items():
        if other_id == su_id or assignment.channel_id != channel_id:
            continue
        other = scenario.su_by_id(other_id)
        interference += p * path_gain(distance(other.position, pu.position), radio.path_loss_exponent)
    if scenario.sharing_mode == "concurrent":
        interference += radio.concurrent_interference_floor_watts
    return signal / (radio.noise_power_watts + interference)


def rate(sinr_linear: float, radio: RadioParams) -> float:
    """Shannon rate in bit/s over the full channel bandwidth."""
    if sinr_linear < 0:
        raise ValueError(f"sinr_linear must be >= 0, got {sinr_linear}")
    return radio.channel_bandwidth_hz * math.log2(1.0 + sinr_linear / radio.shannon_gap)


def deliverable_mb(
    su: SecondaryUser,
    rate_bps: float,
    pu: PrimaryUser,
    matching: "Matching",
    scenario: Scenario,
) -> float:
    """Tradeable volume: demand, rate x connect time, and residual PU quota."""
    if rate_bps < 0:
        raise ValueError(f"rate_bps must be >= 0, got {rate_bps}")
    window_s = min(su.duration_s, scenario.market.snapshot_duration_s)
    by_rate = rate_bps * window_s / BITS_PER_MB
    committed = sum(
        a.q_mb
        for other_id, a in matching.assignments.items()
        if a.pu_id == pu.id and other_id != su.id
    )
    return max(0.0, min(su.demand_mb, by_rate, pu.quota_remaining_mb - committed))


@dataclass(frozen=True)
class LinkStats:
    distance_m: float
    sinr_linear: float
    rate_bps: float
    feasible: bool


def link_stats(su_id: int, pu_id: int, channel_id: int, matching: "Matching", scenario: Scenario) -> LinkStats:
    su = scenario.su_by_id(su_id)
    pu = scenario.pu_by_id(pu_id)
    d = distance(su.position, pu.position)
    s = sinr(su_id, pu_id, channel_id, matching, scenario)
    return LinkStats(
        distance_m=d,
        sinr_linear=s,
        rate_bps=rate(s, scenario.radio),
        feasible=s >= db_to_linear(su.min_sinr_db),
    )
