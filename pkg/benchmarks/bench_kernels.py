"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both variants are called directly, so the result does not depend on
HALFPROP_DISABLE_NUMBA.  Each case is warmed up once (which also triggers
JIT compilation) and then timed as the best of ``--repeat`` runs.
"""

import argparse
import json
import sys
import time

import numpy as np

from halfprop import _accel, oracle, specfun
from halfprop.kernels import PotentialParams
from halfprop.verify import gaussian_packet


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    z = np.sort(rng.uniform(0.0, 60.0, 200_000))
    yield "bessel_j nu=1.3, 2e5 points", (specfun._jv_array_numba, specfun._jv_array_numpy), (1.3, z)
    yield "bessel_i_scaled nu=1.3, 2e5 points", (specfun._ive_array_numba, specfun._ive_array_numpy), (1.3, z)

    basis = oracle.SpectralBasis(PotentialParams(1.0, 1.0), n_terms=100)
    x = np.linspace(0.05, 6.0, 20_000)
    args = (x, 1.0, 0.3, 1.0, basis.params.nu, basis.log_norms, basis.energies())
    yield "spectral sum, 100 terms x 2e4 points", (oracle._spectral_sum_numba, oracle._spectral_sum_numpy), args

    state = oracle.GridState.uniform(20.0, 4096, gaussian_packet(1.5, 0.3).evaluate)
    diag, off = oracle._operator_diagonal(PotentialParams(1.0, 1.0), state)
    start = np.asarray(state.values, dtype=complex)

    def cn(step):
        def run():
            step(start.copy(), diag, off, 0.5e-4j, 1000, True)
        return run

    yield "Crank-Nicolson, 4095 nodes x 1000 steps", (cn(oracle._cn_numba), cn(oracle._cn_numpy)), None


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write the timings here")
    args = parser.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is unavailable or disabled; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    print(f"{'case':<42}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, (fast, slow), fargs in cases():
        call_fast = (lambda: fast(*fargs)) if fargs is not None else fast
        call_slow = (lambda: slow(*fargs)) if fargs is not None else slow
        t_fast, t_slow = best_of(call_fast, args.repeat), best_of(call_slow, args.repeat)
        rows.append({"case": name, "numba_s": t_fast, "numpy_s": t_slow})
        print(f"{name:<42}{1e3 * t_fast:>12.2f}{1e3 * t_slow:>12.2f}{t_slow / t_fast:>9.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
