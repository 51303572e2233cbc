"""Compare the compiled and pure-Python Fock assembly kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel is timed on the same basis with both backends and the outputs
are checked to agree before the timings are reported.
"""
import argparse
import time

import numpy as np

from bogoliubov import _kernels_py

try:
    from bogoliubov import _kernels
except ImportError:
    _kernels = None

CASES = [(1, 256), (3, 24), (4, 16), (6, 8)]


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _same_coo(a, b, n):
    from scipy import sparse
    ma = sparse.coo_matrix((a[2], (a[0], a[1])), shape=(n, n)).tocsr()
    mb = sparse.coo_matrix((b[2], (b[0], b[1])), shape=(n, n)).tocsr()
    return abs(ma - mb).max() < 1e-12


def run(repeat: int = 3):
    rng = np.random.default_rng(0)
    rows = []
    for m, cutoff in CASES:
        h = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        h = h + h.conj().T
        g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        g = g + g.T
        states = _kernels_py.enumerate_states(m, cutoff)
        n = states.shape[0]
        jobs = {
            "enumerate": lambda k: k.enumerate_states(m, cutoff),
            "ladder": lambda k: k.ladder_coo(states, cutoff, m - 1, True),
            "quadratic": lambda k: k.quadratic_coo(states, cutoff, h, g),
        }
        for name, job in jobs.items():
            t_py, out_py = _best(lambda: job(_kernels_py), repeat)
            if _kernels is None:
                rows.append((m, cutoff, n, name, t_py, float("nan"), float("nan")))
                continue
            t_cy, out_cy = _best(lambda: job(_kernels), repeat)
            ok = (np.array_equal(out_py, out_cy) if name == "enumerate"
                  else _same_coo(out_py, out_cy, n))
            if not ok:
                raise SystemExit(f"backends disagree on {name} for m={m}, N={cutoff}")
            rows.append((m, cutoff, n, name, t_py, t_cy, t_py / t_cy))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'m':>2} {'N':>4} {'size':>7} {'kernel':<10} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for m, cutoff, n, name, t_py, t_cy, ratio in run(args.repeat):
        print(f"{m:>2} {cutoff:>4} {n:>7} {name:<10} {t_py:>11.4f} {t_cy:>11.5f} {ratio:>8.1f}")


if __name__ == "__main__":
    main()
