"""Compare the compiled scan kernels with the numpy fallback.

Each case scans the same pre-drawn increment block with both backends and
checks the stopping rows agree before timing them.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from seqweight import _backend
from seqweight.thresholds import calibrate_gap, calibrate_gi
from seqweight.weights import WeightVector


def _case(J: int, steps: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    w = WeightVector(np.exp(rng.normal(0, 0.5, J)))
    logw = np.ascontiguousarray(w.log)
    incr = 0.15 * rng.standard_normal((steps, J)) - 0.01125
    incr[:, : J // 10] += 0.0225
    return w, logw, incr


def _order(logw):
    return np.lexsort((np.arange(logw.size), -logw)).astype(np.intp)


def bench(J: int, steps: int, repeat: int) -> list[tuple[str, float, float]]:
    w, logw, incr = _case(J, steps)
    m = max(1, J // 10)
    c = calibrate_gap(0.05, m, w).c
    gi = calibrate_gi(0.05, 0.05, max(1, m // 2), 2 * m, w)  # keeps c and d active
    signal = np.zeros(J, dtype=np.uint8)
    signal[:m] = 1

    calls = {
        "gap_scan": lambda k: k.gap_scan(np.zeros(J), incr, logw, _order(logw), m, c),
        "gi_scan": lambda k: k.gi_scan(np.zeros(J), incr, logw, _order(logw), gi.l, gi.u,
                                       gi.a, gi.b, gi.c, gi.d, True, True),
        "separated_scan": lambda k: k.separated_scan(np.zeros(J), incr, logw, signal, c),
    }
    rows = []
    for name, call in calls.items():
        fast, slow = call(_backend.kernels), call(_backend.fallback)
        if fast != slow:
            raise AssertionError(f"{name}: backends disagree ({fast} vs {slow})")
        t_fast = min(timeit.repeat(lambda: call(_backend.kernels), number=1, repeat=repeat))
        t_slow = min(timeit.repeat(lambda: call(_backend.fallback), number=1, repeat=repeat))
        rows.append((name, t_fast, t_slow))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args()
    if _backend.BACKEND != "cython":
        print("compiled kernels not built; only the fallback is available")
        return
    print(f"{'kernel':<16}{'J':>6}{'compiled ms':>14}{'numpy ms':>12}{'speedup':>10}")
    for J in (10, 100, 400):
        for name, t_fast, t_slow in bench(J, args.steps, args.repeat):
            print(f"{name:<16}{J:>6}{t_fast * 1e3:>14.3f}{t_slow * 1e3:>12.3f}{t_slow / t_fast:>10.1f}")


if __name__ == "__main__":
    main()
