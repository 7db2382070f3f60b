"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N wall time for each backend
and checks that both give the same answer.
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from spinlab import kernels
from spinlab.spin_core import chain_bonds


def _best(fn, repeat):
    fn()  # warm-up, includes numba compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    n = 12
    bonds = np.array(chain_bonds(n, "ring"))
    ones = np.ones(len(bonds))
    zeeman = rng.normal(size=n)
    yield "xxz_dense (N=12 ring)", lambda k: k.xxz_dense(n, bonds[:, 0], bonds[:, 1], ones, 0.7 * ones, zeeman)

    h0 = kernels.NUMPY.xxz_dense(3, np.array([0, 1]), np.array([1, 2]), np.ones(2), 0.7 * np.ones(2), np.zeros(3))
    drive = np.array([1.0 - 2.0 * ((i >> 1) & 1) for i in range(8)])
    coeffs = 100.0 * np.cos(np.linspace(0, np.pi / 2, 2500)) ** 2
    yield "midpoint_product (8x8, 2500 steps)", lambda k: k.midpoint_product(h0, drive, coeffs, 1e-3)

    H = kernels.NUMPY.xxz_dense(5, np.arange(4), np.arange(1, 5), np.ones(4), np.ones(4), rng.normal(size=5))
    w, v = np.linalg.eigh(H)
    psi = np.zeros(32, dtype=np.complex128)
    psi[3] = 1.0
    keep = np.arange(16)
    times = np.linspace(0, 100, 20000)
    yield "keep_probability (32 states, 20000 times)", lambda k: k.keep_probability(w, v, psi, keep, times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.NUMBA is None:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':45s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, fn in cases():
        t_np, a = _best(lambda: fn(kernels.NUMPY), args.repeat)
        t_nb, b = _best(lambda: fn(kernels.NUMBA), args.repeat)
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:45s} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:9.2f} {diff:11.2e}")

    # end to end: the smooth-switching search selects kernels through the env flag
    from spinlab.switching import search_flat_duration

    timings = {}
    for flag in ("numpy", "numba"):
        os.environ["SPINLAB_BACKEND"] = flag
        timings[flag] = _best(lambda: search_flat_duration("cos2", max_halvings=1).revival_error, 2)
    os.environ.pop("SPINLAB_BACKEND")
    (t_np, e_np), (t_nb, e_nb) = timings["numpy"], timings["numba"]
    print(f"{'search_flat_duration (cos2, one halving)':45s} {1e3 * t_np:12.1f} {1e3 * t_nb:12.1f} {t_np / t_nb:9.2f} {abs(e_np - e_nb):11.2e}")


if __name__ == "__main__":
    main()
