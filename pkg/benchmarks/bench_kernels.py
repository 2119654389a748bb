"""Compiled vs NumPy kernels: timing and agreement.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import itertools
import time

import numpy as np

from circleflow import _pykernels
from circleflow.multiplier import lambda_2s
from circleflow.multisymbol import MultiSymbolTable, _symbol_table

try:
    from circleflow import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    c = (rng.standard_normal(64) + 1j * rng.standard_normal(64)) / (1 + np.arange(64)) ** 2
    y = rng.uniform(0, 2 * np.pi, 512)
    w = rng.standard_normal(512)
    vals = np.arange(-8, 9)
    modes = np.array([(m0,) + d for m0 in vals
                      for d in itertools.combinations_with_replacement(vals, 4)], dtype=np.int64)
    reach = int(np.abs(modes).sum(axis=1).max())
    table = _symbol_table(MultiSymbolTable(lambda_2s(0.75)), reach, np.longdouble)
    return {
        "eval_series (64 modes, 512 pts)": lambda k: k.eval_series(c, y, 0),
        "eval_series_pair": lambda k: k.eval_series_pair(c, y)[1],
        "gagliardo_sum (512 pts)": lambda k: k.gagliardo_sum(w, 0.4),
        "multisymbol_recursive (n=4, 40k tuples)": lambda k: k.multisymbol_recursive(table, reach, modes),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    if _ckernels is None:
        print("compiled kernels not built; only the NumPy timings are shown")
    print(f"{'kernel':44s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases(rng).items():
        t_py, out_py = best_of(lambda: fn(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:44s} {t_py:10.4f}")
            continue
        t_c, out_c = best_of(lambda: fn(_ckernels), args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_py, dtype=complex) - np.asarray(out_c, dtype=complex))))
        scale = float(np.max(np.abs(np.asarray(out_py, dtype=complex)))) or 1.0
        print(f"{name:44s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f} {diff / scale:10.2e}")


if __name__ == "__main__":
    main()
