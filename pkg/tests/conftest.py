import pytest

from cdna_market.scenario import (
    Channel,
    MarketParams,
    PrimaryUser,
    RadioParams,
    Scenario,
    SecondaryUser,
)


def make_scenario(pus, sus, n_channels=1, market=None, radio=None, area_side_m=500.0, seed=0):
    """Hand-built scenario from (position, quota, ask) and SU spec tuples."""
    market = market or MarketParams()
    radio = radio or RadioParams()
    pu_objs = tuple(
        PrimaryUser(id=i, position=pos, quota_remaining_mb=quota, ask_price_eur_gb=ask)
        for i, (pos, quota, ask) in enumerate(pus)
    )
    su_objs = tuple(
        SecondaryUser(
            id=i,
            position=spec["position"],
            demand_mb=spec.get("demand_mb", 500.0),
            min_sinr_db=spec.get("min_sinr_db", 3.0),
            duration_s=spec.get("duration_s", 900.0),
            valuation_eur_gb=spec.get("valuation_eur_gb", 1.0),
            plan_exceeded=spec.get("plan_exceeded", True),
            reward_eur=spec.get("reward_eur", 0.0),
        )
        for i, spec in enumerate(sus)
    )
    channels = tuple(Channel(id=b) for b in range(n_channels))
    scenario = Scenario(
        pus=pu_objs,
        sus=su_objs,
        channels=channels,
        radio=radio,
        market=market,
        area_side_m=area_side_m,
        seed=seed,
    )
    scenario.validate()
    return scenario


@pytest.fixture
def singleton_scenario():
    """One PU, one SU 10 m apart: SNR 200 (23 dB), clearly feasible."""
    return make_scenario(
        pus=[((0.0, 0.0), 10000.0, 0.4)],
        sus=[{"position": (10.0, 0.0), "demand_mb": 500.0, "valuation_eur_gb": 1.0}],
    )
