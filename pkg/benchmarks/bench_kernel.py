"""Compare the compiled line-scan kernel with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernel.py [--sizes 10,20,50] [--repeat 5]

For each arm size the script times one full bivariate statistic
(every cell of the slope line) under both backends, checks that they
return identical values and prints the speed-up.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dbel import _backend
from dbel._engine import Evaluator
from dbel.samples import MultivariateSample


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(n: int, repeat: int, seed: int = 0) -> tuple[float, float, bool]:
    rng = np.random.default_rng(seed)
    x = MultivariateSample(rng.normal(size=(n, 2)))
    y = MultivariateSample(rng.normal(size=(n, 2)))
    compiled = _backend.compiled_scan_line()
    if compiled is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    ev_c = Evaluator(x, y, scan=compiled)
    ev_p = Evaluator(x, y, scan=_backend.python_scan_line)
    P = ev_c.P
    same = np.array_equal(ev_c.scan_cells(P[:, 0], P[:, 1]).values,
                          ev_p.scan_cells(P[:, 0], P[:, 1]).values)
    t_c = _time(lambda: ev_c.scan_cells(P[:, 0], P[:, 1]), repeat)
    t_p = _time(lambda: ev_p.scan_cells(P[:, 0], P[:, 1]), repeat)
    return t_c, t_p, same


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,20,50,65")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'n=m':>5} {'cells':>7} {'compiled s':>11} {'numpy s':>9} {'speed-up':>9} {'identical':>9}")
    for n in (int(s) for s in args.sizes.split(",")):
        t_c, t_p, same = bench(n, args.repeat)
        cells = (2 * n) * (2 * n - 1) // 2
        print(f"{n:>5} {cells:>7} {t_c:>11.4f} {t_p:>9.4f} {t_p / t_c:>9.1f} {str(same):>9}")


if __name__ == "__main__":
    main()
