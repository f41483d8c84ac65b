"""Time the numba kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N] [--skip-end-to-end]``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from risanchor import _kernels as K


def _synth_case(nf, nt, npix, rng):
    freqs = np.linspace(24.5e9, 25.5e9, nf)
    times = np.arange(nt) * 0.025 / nt
    amp = rng.standard_normal((nf, npix)) + 1j * rng.standard_normal((nf, npix))
    return amp, rng.uniform(1e-8, 2e-8, npix), rng.uniform(-800, 800, npix), freqs, times


def _periodogram_case(nf, nt, ntau, nnu, rng):
    amp, tau, nu, freqs, times = _synth_case(nf, nt, 100, rng)
    z = np.ascontiguousarray(K.synth_grid_numpy(amp, tau, nu, freqs, times))
    return (z, freqs - freqs.mean(), times - times.mean(),
            np.linspace(-4e-9, 4e-9, ntau), np.linspace(-320, 320, nnu))


def _time(fn, args, repeat):
    fn(*args)  # compile / warm caches
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


_END_TO_END = """
import time
from risanchor.harness import load_preset, run_monte_carlo, sweep_crb_map
sc = load_preset("desk")
run_monte_carlo(sc, 2)
t = time.perf_counter(); sweep_crb_map(sc); a = time.perf_counter() - t
t = time.perf_counter(); run_monte_carlo(sc, 100); b = time.perf_counter() - t
print(a, b)
"""


def _end_to_end():
    print(f"\n{'desk workload':36s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    res = {}
    for flag in ("1", "0"):
        env = dict(os.environ, RISANCHOR_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _END_TO_END], env=env, check=True,
                             capture_output=True, text=True).stdout.split()
        res[flag] = [float(v) for v in out]
    for n, name in enumerate(("crb-map 10x10", "monte-carlo 100 trials")):
        t_np, t_nb = res["1"][n], res["0"][n]
        print(f"{name:36s} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()
    if K.numba is None:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    cases = [
        ("synth_grid desk (51x25, N=100)", K.synth_grid_numpy, K.synth_grid_numba,
         _synth_case(51, 25, 100, rng)),
        ("synth_grid full (201x100, N=100)", K.synth_grid_numpy, K.synth_grid_numba,
         _synth_case(201, 100, 100, rng)),
        ("periodogram_grid desk (33x257)", K.periodogram_grid_numpy, K.periodogram_grid_numba,
         _periodogram_case(51, 25, 33, 257, rng)),
        ("periodogram_points desk (9 pts)", K.periodogram_points_numpy, K.periodogram_points_numba,
         _periodogram_case(51, 25, 9, 9, rng)[:3] + (np.zeros(9), np.linspace(-5, 5, 9))),
    ]
    print(f"{'kernel':36s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, f_np, f_nb, data in cases:
        t_np = _time(f_np, data, args.repeat) * 1e3
        t_nb = _time(f_nb, data, args.repeat) * 1e3
        print(f"{name:36s} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.2f}")
    if not args.skip_end_to_end:
        _end_to_end()


if __name__ == "__main__":
    main()
