import pytest

from cdna_market import market
from cdna_market.baselines import (
    InstanceTooLarge,
    brute_force_optimal,
    random_matching,
    worst_case_matching,
)
from cdna_market.market import MarketPrices
from cdna_market.matching import run_matching
from cdna_market.scenario import GenConfig, MarketParams, generate_scenario

from conftest import make_scenario

SMALL = GenConfig(
    n_pus=2,
    n_sus=4,
    n_channels=2,
    area_side_m=120.0,
    min_sinr_db=(1.0, 8.0),
    duration_s=(300.0, 900.0),
    market=MarketParams(exceed_prob=1.0),
)


def _prices(s):
    return MarketPrices.from_scenario(s)


def test_random_matching_deterministic():
    s = generate_scenario(SMALL, seed=2)
    p = _prices(s)
    assert random_matching(s, p, seed=5) == random_matching(s, p, seed=5)


def test_random_matching_respects_invariants():
    for seed in range(10):
        s = generate_scenario(SMALL, seed=seed)
        p = _prices(s)
        m = random_matching(s, p, seed=seed)
        m.validate(s)
        for su_id, a in m.assignments.items():
            su = s.su_by_id(su_id)
            assert a.q_mb > 0
            assert (su.valuation_eur_gb - a.pi_eur_gb) * a.q_mb >= -1e-12


def test_random_matching_all_unmatched_when_infeasible():
    s = make_scenario(
        pus=[((0.0, 0.0), 1000.0, 0.5)],
        sus=[{"position": (400.0, 0.0), "min_sinr_db": 20.0}],
    )
    m = random_matching(s, _prices(s), seed=0)
    assert not m.assignments and m.unmatched == {0}


def test_random_singleton_equals_run_matching(singleton_scenario):
    run_m, prices, _ = run_matching(singleton_scenario)
    rand_m = random_matching(singleton_scenario, prices, seed=3)
    assert rand_m.assignments[0].pu_id == run_m.assignments[0].pu_id
    assert rand_m.assignments[0].channel_id == run_m.assignments[0].channel_id
    assert rand_m.assignments[0].q_mb == pytest.approx(run_m.assignments[0].q_mb)


def test_worst_case_singleton_unique_matching(singleton_scenario):
    m, kind = worst_case_matching(singleton_scenario, _prices(singleton_scenario))
    assert kind == "exact"
    assert m.assignments[0].pu_id == 0


def test_worst_case_two_by_two_picks_minimum():
    # SU0 is close to PU0 and far from PU1; the adversary serves it far.
    s = make_scenario(
        pus=[((100.0, 100.0), 10000.0, 0.5), ((140.0, 100.0), 10000.0, 0.5)],
        sus=[
            {"position": (110.0, 100.0), "demand_mb": 2000.0, "min_sinr_db": 1.0},
        ],
        n_channels=1,
    )
    p = _prices(s)
    worst, kind = worst_case_matching(s, p)
    assert kind == "exact"
    # non-wastefulness forces a match; the lowest-utility option is PU1 (30 m)
    assert worst.assignments[0].pu_id == 1
    best, _ = brute_force_optimal(s, p)
    assert best.assignments[0].pu_id == 0
    worst_avg = market.avg_su_utility(worst, s, [0])
    best_avg = market.avg_su_utility(best, s, [0])
    assert worst_avg < best_avg


def test_worst_case_exact_below_random():
    for seed in range(10):
        s = generate_scenario(SMALL, seed=seed)
        p = _prices(s)
        worst, kind = worst_case_matching(s, p)
        assert kind == "exact"
        rand = random_matching(s, p, seed=seed)
        participants = s.participants()
        assert market.avg_su_utility(worst, s, participants) <= market.avg_su_utility(
            rand, s, participants
        ) + 1e-9


def test_worst_case_heuristic_label():
    s = generate_scenario(GenConfig(), seed=0)  # 20 SUs: enumeration impossible
    _, kind = worst_case_matching(s, _prices(s))
    assert kind == "heuristic"


def test_brute_force_guard_refusal():
    s = generate_scenario(GenConfig(), seed=0)
    with pytest.raises(InstanceTooLarge, match="10000000"):
        brute_force_optimal(s, _prices(s))


def test_brute_force_singleton(singleton_scenario):
    m, welfare = brute_force_optimal(singleton_scenario, _prices(singleton_scenario))
    assert m.assignments[0].pu_id == 0
    # (v - energy cost) * q = (1.0 - 0.0257) * 0.5
    assert welfare == pytest.approx(0.48715, rel=1e-12)


def test_oracle_dominates_all_methods():
    for seed in range(12):
        s = generate_scenario(SMALL, seed=seed)
        run_m, final_prices, _ = run_matching(s)
        opt_m, opt_welfare = brute_force_optimal(s, final_prices)
        run_welfare = market.welfare(run_m, s, final_prices)
        assert run_welfare <= opt_welfare + 1e-12
        rand_welfare = market.welfare(random_matching(s, final_prices, seed=seed), s, final_prices)
        assert rand_welfare <= opt_welfare + 1e-12
        worst_m, _ = worst_case_matching(s, final_prices)
        assert market.welfare(worst_m, s, final_prices) <= opt_welfare + 1e-12


def test_medium_enumeration_completes():
    # (2*2+1)^6 = 15625 candidates, comfortably under the guard
    cfg = GenConfig(
        n_pus=2,
        n_sus=6,
        n_channels=2,
        area_side_m=120.0,
        min_sinr_db=(1.0, 8.0),
        market=MarketParams(exceed_prob=1.0),
    )
    s = generate_scenario(cfg, seed=1)
    m, welfare = brute_force_optimal(s, _prices(s))
    assert welfare >= 0.0
    m.validate(s)
