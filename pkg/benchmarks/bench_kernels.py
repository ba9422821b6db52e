"""Compare the compiled and numpy projected-gradient kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from rceprecoding import _pgd_py
from rceprecoding.amplifier import PaConfig, clip
from rceprecoding.linear import wiener_filter
from rceprecoding.signals import NoiseModel, build_constellation, draw_channel, draw_symbols

try:
    from rceprecoding import _pgd
except ImportError:
    _pgd = None

CASES = [(4, 32, 1), (4, 32, 1000), (10, 100, 1), (10, 100, 300)]


def _problem(M, N, K, ptx=10.0, f=0.3):
    H = draw_channel(M, N, 0)
    pa = PaConfig(ptx, N)
    S = draw_symbols(build_constellation(16), M, K, 1)
    X0 = clip(S @ wiener_filter(H, NoiseModel.identity(M), pa).matrix.T, pa)
    A = f * H
    mu = 1.0 / np.linalg.norm(A, 2) ** 2
    return A, S, X0, pa.saturation_amplitude, mu


def _time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'M':>3} {'N':>4} {'K':>5} {'mode':>5} {'numpy s':>9} {'cython s':>9} {'speedup':>8} {'max|dX|':>9}")
    for M, N, K in CASES:
        A, S, X0, a, mu = _problem(M, N, K)
        for ce in (False, True):
            call = (A, S, X0, a, ce, mu, 1e-6, 500)
            t_py, out_py = _time(_pgd_py.solve_batch, call, args.repeat)
            if _pgd is None:
                print(f"{M:>3} {N:>4} {K:>5} {'ce' if ce else 'rce':>5} {t_py:9.4f} {'n/a':>9}")
                continue
            t_cy, out_cy = _time(_pgd.solve_batch, call, args.repeat)
            diff = float(np.max(np.abs(out_py[0] - out_cy[0])))
            print(f"{M:>3} {N:>4} {K:>5} {'ce' if ce else 'rce':>5} {t_py:9.4f} {t_cy:9.4f} {t_py / t_cy:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
