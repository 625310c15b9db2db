"""Wall-clock timing of the prox operators."""
from __future__ import annotations

import time

import numpy as np

from .numerics import magnitude_order
from .prox_multi import mfb, prox_multi
from .prox_single import prox_single


def min_time(fn, repeats: int = 5) -> float:
    """Best of ``repeats`` wall-clock runs, in seconds."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def time_prox_single(m: int, rng: np.random.Generator, lam: float = 0.01,
                     repeats: int = 5) -> float:
    x = float(rng.normal())
    y = rng.normal(size=m)
    return min_time(lambda: prox_single(x, y, lam), repeats)


def time_prox_multi(p: int, m: int, rng: np.random.Generator, lam: float = 0.01,
                    repeats: int = 5):
    """Returns ``(seconds, walk_evaluations)``."""
    x = rng.normal(size=p)
    y = rng.normal(size=m)
    evals = mfb(magnitude_order(x), magnitude_order(y), lam).evaluations
    return min_time(lambda: prox_multi(x, y, lam), repeats), evals


def size_grid(max_size: int, start: int = 1000) -> list[int]:
    """Powers of ten from ``start`` up to ``max_size``."""
    out, s = [], start
    while s <= max_size:
        out.append(s)
        s *= 10
    return out


def run_bench(max_m: int, max_p: int, rng: np.random.Generator, repeats: int = 5):
    """Rows ``(op, p, m, seconds, evaluations)`` for both operators."""
    rows = []
    for m in size_grid(max_m):
        rows.append(("prox_single", 1, m, time_prox_single(m, rng, repeats=repeats), ""))
    ps = [p for p in (1, 2, 4, 8, 16, 32) if p <= max_p]
    for p in ps:
        for m in size_grid(min(max_m, 100_000)):
            sec, ev = time_prox_multi(p, m, rng, repeats=repeats)
            rows.append(("prox_multi", p, m, sec, ev))
    return rows
