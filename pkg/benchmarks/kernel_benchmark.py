#!/usr/bin/env python3
"""Compare the compiled and pure-python evaluator backends.

Times the three hot operations (full structure load, candidate move probe,
candidate exchange probe) and one full matching solve per backend.

    python benchmarks/kernel_benchmark.py [--sus 20 50 100]
"""
import argparse
import time

import numpy as np

from cdna_market.kernels import ScenarioArrays, available_backends, make_evaluator
from cdna_market.market import MarketPrices
from cdna_market.matching import run_matching
from cdna_market.scenario import GenConfig, generate_scenario


def time_op(fn, repeats):
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernel(backend, scenario, repeats):
    arrays = ScenarioArrays.from_scenario(scenario)
    prices = MarketPrices.from_scenario(scenario)
    ev = make_evaluator(arrays, backend)
    ev.set_prices([prices.pi_eur_gb[p] for p in arrays.pu_ids])
    rng = np.random.default_rng(0)
    n, m, b = arrays.n_su, arrays.n_pu, arrays.n_ch
    ap = rng.integers(-1, m, size=n)
    ac = np.where(ap >= 0, rng.integers(0, b, size=n), -1)
    ev.load(ap, ac)
    assigned = [i for i in range(n) if ap[i] >= 0]

    load_t = time_op(lambda: ev.load(ap, ac), repeats)
    move_t = time_op(
        lambda: ev.try_move(int(rng.integers(n)), int(rng.integers(m)), int(rng.integers(b))),
        repeats * 10,
    )
    if len(assigned) >= 2:
        a, bb = assigned[0], assigned[1]
        exch_t = time_op(lambda: ev.try_exchange(a, bb), repeats * 10)
    else:
        exch_t = float("nan")
    return load_t, move_t, exch_t


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sus", type=int, nargs="+", default=[20, 50, 100])
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {backends}")
    header = f"{'N':>4} {'backend':>9} {'load':>12} {'try_move':>12} {'try_exchange':>14} {'full solve':>12}"
    print(header)
    print("-" * len(header))
    for n in args.sus:
        scenario = generate_scenario(GenConfig(n_sus=n), seed=0)
        solve_times = {}
        for backend in backends:
            t0 = time.perf_counter()
            run_matching(scenario, backend=backend)
            solve_times[backend] = time.perf_counter() - t0
        for backend in backends:
            load_t, move_t, exch_t = bench_kernel(backend, scenario, args.repeats)
            print(
                f"{n:>4} {backend:>9} {load_t * 1e6:>10.1f}us {move_t * 1e6:>10.1f}us "
                f"{exch_t * 1e6:>12.1f}us {solve_times[backend]:>10.2f}s "
            )
        if len(backends) == 2:
            speedup = solve_times["python"] / solve_times["compiled"]
            print(f"{'':>4} compiled is {speedup:.0f}x faster on the full solve")


if __name__ == "__main__":
    main()
