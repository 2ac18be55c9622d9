"""Compiled versus pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from coherent_cipher import _backend
from coherent_cipher.helstrom import constellation, eve_error, gram
from coherent_cipher.keystream import LfsrState


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(128, 128))
    a = 0.5 * (a + a.T)
    g = gram(constellation(256, 1000.0))
    n, k = 100_000, 64
    z1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    z2 = rng.normal(size=n) + 1j * rng.normal(size=n)
    c = constellation(32, 1.0)
    b1, b2 = c.amplitudes()
    logw = np.log(c.weights)
    lab = c.bits.astype(np.uint8)
    mask = LfsrState(0xACE1).tap_mask
    return {
        "jacobi_eigh 128x128": lambda kern: kern.jacobi_eigh(a),
        "pivoted_cholesky 512 (M=256, nbar=1000)": lambda kern: kern.pivoted_cholesky(g, 1e-14, 1e-13),
        f"map_decide {n} x {k}": lambda kern: kern.map_decide(z1, z2, b1, b2, logw, lab, np.log(0.5), np.log(0.5)),
        "lfsr_bits 200000": lambda kern: kern.lfsr_bits(0xACE1, 16, mask, 200_000),
        "eve_error(M=200, nbar=100)": None,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _backend.available()
    print(f"{'kernel':44s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, fn in cases().items():
        times = []
        for b in backends:
            prev = _backend.use(b)
            try:
                kern = _backend.kernels()
                run = (lambda: eve_error(200, 100.0)) if fn is None else (lambda: fn(kern))
                times.append(best_of(run, args.repeat))
            finally:
                _backend.use(prev)
        line = f"{label:44s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
