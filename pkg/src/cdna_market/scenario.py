"""Domain entities, seeded scenario generation and JSON persistence.

A Scenario is an immutable snapshot of one trading interval: primary users
(PUs) offering leftover data quota over licensed channels, secondary users
(SUs) seeking connectivity, and the radio/market constants that govern the
trades. Everything downstream (radio model, matching, experiments) is a pure
function of a Scenario, so scenarios are frozen dataclasses and generation is
fully determined by the seed.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

SHARING_MODES = ("orthogonal", "concurrent")


class ConfigError(ValueError):
    """Invalid generation configuration (e.g. a range with min > max)."""


class ScenarioFormatError(ValueError):
    """A scenario file that is missing fields or violates an invariant."""


@dataclass(frozen=True)
class RadioParams:
    tx_power_watts: float = 0.020
    noise_power_watts: float = 1e-7  # total per-channel noise power
    path_loss_exponent: float = 3.0
    channel_bandwidth_hz: float = 1e6
    shannon_gap: float = 1.0
    concurrent_interference_floor_watts: float = 0.0

    def validate(self, path: str = "radio") -> None:
        _require(self.tx_power_watts > 0, f"{path}.tx_power_watts", "must be > 0")
        _require(self.noise_power_watts > 0, f"{path}.noise_power_watts", "must be > 0")
        _require(self.path_loss_exponent >= 2, f"{path}.path_loss_exponent", "must be >= 2")
        _require(self.channel_bandwidth_hz > 0, f"{path}.channel_bandwidth_hz", "must be > 0")
        _require(self.shannon_gap >= 1, f"{path}.shannon_gap", "must be >= 1")
        _require(
            self.concurrent_interference_floor_watts >= 0,
            f"{path}.concurrent_interference_floor_watts",
            "must be >= 0",
        )


@dataclass(frozen=True)
class MarketParams:
    plan_volume_gb: float = 10.0
    plan_price_eur: float = 10.0
    trade_price_min_eur_gb: float = 0.1
    trade_price_max_eur_gb: float = 1.0
    overage_price_eur_gb: float = 1.0
    exceed_prob: float = 0.8
    energy_per_mb_joule: float = 0.257
    energy_price_eur_joule: float = 1e-4
    operator_share: float = 0.3
    snapshot_duration_s: float = 900.0

    @property
    def energy_cost_eur_gb(self) -> float:
        """Per-GB energy cost a PU incurs when forwarding traffic."""
        return self.energy_per_mb_joule * 1000.0 * self.energy_price_eur_joule

    def validate(self, path: str = "market") -> None:
        _require(0 <= self.exceed_prob <= 1, f"{path}.exceed_prob", "must be in [0, 1]")
        _require(
            self.trade_price_min_eur_gb < self.trade_price_max_eur_gb,
            f"{path}.trade_price_min_eur_gb",
            "must be < trade_price_max_eur_gb",
        )
        for name in (
            "plan_volume_gb",
            "plan_price_eur",
            "trade_price_min_eur_gb",
            "overage_price_eur_gb",
            "energy_per_mb_joule",
            "energy_price_eur_joule",
            "snapshot_duration_s",
        ):
            _require(getattr(self, name) >= 0, f"{path}.{name}", "must be >= 0")
        _require(0 <= self.operator_share <= 1, f"{path}.operator_share", "must be in [0, 1]")


@dataclass(frozen=True)
class PrimaryUser:
    id: int
    position: tuple[float, float]
    quota_remaining_mb: float
    ask_price_eur_gb: float

    def validate(self, market: MarketParams, path: str) -> None:
        _require(self.quota_remaining_mb >= 0, f"{path}.quota_remaining_mb", "must be >= 0")
        _require(
            market.trade_price_min_eur_gb <= self.ask_price_eur_gb <= market.trade_price_max_eur_gb,
            f"{path}.ask_price_eur_gb",
            "must lie within the configured trade price band",
        )


@dataclass(frozen=True)
class SecondaryUser:
    id: int
    position: tuple[float, float]
    demand_mb: float
    min_sinr_db: float
    duration_s: float
    valuation_eur_gb: float
    plan_exceeded: bool
    reward_eur: float = 0.0

    def validate(self, market: MarketParams, path: str) -> None:
        _require(self.demand_mb > 0, f"{path}.demand_mb", "must be > 0")
        _require(1 <= self.min_sinr_db <= 20, f"{path}.min_sinr_db", "must be in [1, 20] dB")
        _require(
            0 <= self.duration_s <= market.snapshot_duration_s,
            f"{path}.duration_s",
            "must be in [0, snapshot_duration_s]",
        )
        _require(self.valuation_eur_gb >= 0, f"{path}.valuation_eur_gb", "must be >= 0")
        _require(self.reward_eur >= 0, f"{path}.reward_eur", "must be >= 0")


@dataclass(frozen=True)
class Channel:
    id: int
    sharing_mode: str = "orthogonal"

    def validate(self, path: str) -> None:
        _require(self.sharing_mode in SHARING_MODES, f"{path}.sharing_mode", f"must be one of {SHARING_MODES}")


@dataclass(frozen=True)
class Scenario:
    pus: tuple[PrimaryUser, ...]
    sus: tuple[SecondaryUser, ...]
    channels: tuple[Channel, ...]
    radio: RadioParams
    market: MarketParams
    area_side_m: float
    seed: int

    def validate(self) -> None:
        _require(len(self.pus) >= 1, "pus", "need at least one PU")
        _require(len(self.sus) >= 1, "sus", "need at least one SU")
        _require(len(self.channels) >= 1, "channels", "need at least one channel")
        self.radio.validate()
        self.market.validate()
        _require(self.area_side_m > 0, "area_side_m", "must be > 0")
        for collection, name in ((self.pus, "pus"), (self.sus, "sus"), (self.channels, "channels")):
            ids = [item.id for item in collection]
            _require(len(set(ids)) == len(ids), name, "ids must be unique")
        modes = {ch.sharing_mode for ch in self.channels}
        _require(len(modes) == 1, "channels", "sharing_mode must be uniform across channels")
        for i, pu in enumerate(self.pus):
            pu.validate(self.market, f"pus[{i}]")
            _check_position(pu.position, self.area_side_m, f"pus[{i}].position")
        for i, su in enumerate(self.sus):
            su.validate(self.market, f"sus[{i}]")
            _check_position(su.position, self.area_side_m, f"sus[{i}].position")
        for i, ch in enumerate(self.channels):
            ch.validate(f"channels[{i}]")

    @property
    def sharing_mode(self) -> str:
        return self.channels[0].sharing_mode

    def pu_by_id(self, pu_id: int) -> PrimaryUser:
        return self._pu_index[pu_id]

    def su_by_id(self, su_id: int) -> SecondaryUser:
        return self._su_index[su_id]

    @property
    def _pu_index(self) -> dict[int, PrimaryUser]:
        return {pu.id: pu for pu in self.pus}

    @property
    def _su_index(self) -> dict[int, SecondaryUser]:
        return {su.id: su for su in self.sus}

    def participants(self) -> list[int]:
        """SU ids that seek a trade: plan exhausted or congestion-rewarded."""
        return [su.id for su in self.sus if su.plan_exceeded or su.reward_eur > 0]

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "seed": self.seed,
            "area_side_m": self.area_side_m,
            "radio": dataclasses.asdict(self.radio),
            "market": dataclasses.asdict(self.market),
            "pus": [
                {
                    "id": pu.id,
                    "position": list(pu.position),
                    "quota_remaining_mb": pu.quota_remaining_mb,
                    "ask_price_eur_gb": pu.ask_price_eur_gb,
                }
                for pu in self.pus
            ],
            "sus": [
                {
                    "id": su.id,
                    "position": list(su.position),
                    "demand_mb": su.demand_mb,
                    "min_sinr_db": su.min_sinr_db,
                    "duration_s": su.duration_s,
                    "valuation_eur_gb": su.valuation_eur_gb,
                    "plan_exceeded": su.plan_exceeded,
                    "reward_eur": su.reward_eur,
                }
                for su in self.sus
            ],
            "channels": [{"id": ch.id, "sharing_mode": ch.sharing_mode} for ch in self.channels],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        if not isinstance(data, dict):
            raise ScenarioFormatError("scenario document must be a JSON object")
        version = _take(data, "version")
        if version != SCHEMA_VERSION:
            raise ScenarioFormatError(f"version: expected {SCHEMA_VERSION}, got {version!r}")
        try:
            radio = RadioParams(**_take(data, "radio"))
            market = MarketParams(**_take(data, "market"))
            pus = tuple(
                PrimaryUser(
                    id=rec["id"],
                    position=_as_position(rec["position"], f"pus[{i}].position"),
                    quota_remaining_mb=rec["quota_remaining_mb"],
                    ask_price_eur_gb=rec["ask_price_eur_gb"],
                )
                for i, rec in enumerate(_take(data, "pus"))
            )
            sus = tuple(
                SecondaryUser(
                    id=rec["id"],
                    position=_as_position(rec["position"], f"sus[{i}].position"),
                    demand_mb=rec["demand_mb"],
                    min_sinr_db=rec["min_sinr_db"],
                    duration_s=rec["duration_s"],
                    valuation_eur_gb=rec["valuation_eur_gb"],
                    plan_exceeded=rec["plan_exceeded"],
                    reward_eur=rec.get("reward_eur", 0.0),
                )
                for i, rec in enumerate(_take(data, "sus"))
            )
            channels = tuple(
                Channel(id=rec["id"], sharing_mode=rec["sharing_mode"])
                for rec in _take(data, "channels")
            )
            scenario = cls(
                pus=pus,
                sus=sus,
                channels=channels,
                radio=radio,
                market=market,
                area_side_m=_take(data, "area_side_m"),
                seed=_take(data, "seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ScenarioFormatError(f"malformed scenario document: {exc}") from exc
        scenario.validate()
        return scenario

    def content_hash(self) -> str:
        """Stable digest of the scenario content, used in experiment CSVs."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class GenConfig:
    """Counts and uniform draw ranges for random scenario generation.

    Each two-tuple is an inclusive-exclusive uniform range; collapse it to a
    point by setting low == high.
    """

    n_pus: int = 10
    n_sus: int = 20
    n_channels: int = 5
    area_side_m: float = 250.0
    quota_mb: tuple[float, float] = (500.0, 5000.0)
    ask_price_eur_gb: tuple[float, float] = (0.1, 1.0)
    demand_mb: tuple[float, float] = (100.0, 2000.0)
    min_sinr_db: tuple[float, float] = (1.0, 20.0)
    duration_s: tuple[float, float] = (0.0, 900.0)
    valuation_eur_gb: tuple[float, float] = (0.5, 1.5)
    sharing_mode: str = "orthogonal"
    radio: RadioParams = field(default_factory=RadioParams)
    market: MarketParams = field(default_factory=MarketParams)

    def validate(self) -> None:
        for name in ("n_pus", "n_sus", "n_channels"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if self.area_side_m <= 0:
            raise ConfigError("area_side_m: must be > 0")
        for name in (
            "quota_mb",
            "ask_price_eur_gb",
            "demand_mb",
            "min_sinr_db",
            "duration_s",
            "valuation_eur_gb",
        ):
            low, high = getattr(self, name)
            if low > high:
                raise ConfigError(f"{name}: range min {low} exceeds max {high}")
        if self.sharing_mode not in SHARING_MODES:
            raise ConfigError(f"sharing_mode: must be one of {SHARING_MODES}")
        try:
            self.radio.validate()
            self.market.validate()
        except ScenarioFormatError as exc:
            raise ConfigError(str(exc)) from exc


def generate_scenario(config: GenConfig, seed: int) -> Scenario:
    """Draw a Scenario from the configured ranges; same seed, same scenario."""
    config.validate()
    rng = np.random.default_rng(seed)

    def draw(bounds: tuple[float, float], n: int) -> np.ndarray:
        low, high = bounds
        if low == high:
            return np.full(n, float(low))
        return rng.uniform(low, high, size=n)

    m, n = config.n_pus, config.n_sus
    pu_xy = rng.uniform(0.0, config.area_side_m, size=(m, 2))
    quota = draw(config.quota_mb, m)
    ask = draw(config.ask_price_eur_gb, m)
    su_xy = rng.uniform(0.0, config.area_side_m, size=(n, 2))
    demand = draw(config.demand_mb, n)
    min_sinr = draw(config.min_sinr_db, n)
    duration = draw(config.duration_s, n)
    valuation = draw(config.valuation_eur_gb, n)
    exceeded = rng.random(n) < config.market.exceed_prob

    pus = tuple(
        PrimaryUser(
            id=j,
            position=(float(pu_xy[j, 0]), float(pu_xy[j, 1])),
            quota_remaining_mb=float(quota[j]),
            ask_price_eur_gb=float(ask[j]),
        )
        for j in range(m)
    )
    sus = tuple(
        SecondaryUser(
            id=i,
            position=(float(su_xy[i, 0]), float(su_xy[i, 1])),
            demand_mb=float(demand[i]),
            min_sinr_db=float(min_sinr[i]),
            duration_s=float(duration[i]),
            valuation_eur_gb=float(valuation[i]),
            plan_exceeded=bool(exceeded[i]),
        )
        for i in range(n)
    )
    channels = tuple(Channel(id=b, sharing_mode=config.sharing_mode) for b in range(config.n_channels))
    scenario = Scenario(
        pus=pus,
        sus=sus,
        channels=channels,
        radio=config.radio,
        market=config.market,
        area_side_m=config.area_side_m,
        seed=seed,
    )
    scenario.validate()
    return scenario


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"not valid JSON: {exc}") from exc
    return Scenario.from_dict(data)


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise ScenarioFormatError(f"{path}: {message}")


def _check_position(position: tuple[float, float], side: float, path: str) -> None:
    _require(len(position) == 2, path, "must be a 2-D coordinate")
    x, y = position
    _require(0 <= x <= side and 0 <= y <= side, path, f"must lie within [0, {side}]^2")


def _as_position(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioFormatError(f"{path}: must be a 2-element array")
    return (float(value[0]), float(value[1]))


def _take(data: dict, key: str):
    if key not in data:
        raise ScenarioFormatError(f"{key}: required field is missing")
    return data[key]
