"""Compare the compiled and pure-Python kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each workload is a representative inner step of the pipeline; the table
reports the best wall time per backend and the speedup of the compiled one.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from polarber import kernels
from polarber.codec import ChannelModel, bit_reversal
from polarber.lattice import GridList, LatticeList
from polarber.symparam import SymParamList
from polarber.transform import apply_word

BASE = SymParamList.from_pairs([(1, "0.78")])


def _lattice_case():
    # Canonical list six levels deep, then one plus step.
    L = LatticeList.from_symparam(apply_word(BASE, "+-+-+-"))
    return lambda b: L.step("+", backend=b)


def _grid_case(Q: int = 256, K: int = 1152):
    G = GridList.snap(apply_word(BASE, "+-+-+-"), K, True)
    return lambda b: G.step("+", True, Q, backend=b)


def _sc_case(n: int = 10, trials: int = 2000):
    rng = np.random.default_rng(0)
    model = ChannelModel.bsc(0.11)
    _, theta = model.sample(rng, trials, 1 << n)
    theta = theta[:, bit_reversal(n)]
    mask = np.zeros(1 << n, dtype=bool)
    truth = np.zeros((trials, 1 << n), dtype=np.uint8)
    return lambda b: kernels.get(b).sc_decode_batch(theta, mask, None, truth, True)


CASES = {
    "lattice_step": _lattice_case,
    "grid_step Q=256": _grid_case,
    "sc_decode_batch n=10 x2000": _sc_case,
}


def best_time(fn, backend: str, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(backend)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = sorted(kernels.available())
    print(f"{'workload':<30}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, make in CASES.items():
        fn = make()
        times = {b: best_time(fn, b, args.repeat) for b in backends}
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:<30}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
