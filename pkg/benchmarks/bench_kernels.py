"""Time the naive-mode kernel: numba vs pure numpy.

    python benchmarks/bench_kernels.py [--reps 10000] [--repeat 3]

Both paths are called directly, so the ``AUXMODE_DISABLE_NUMBA`` flag is
irrelevant here.  Outputs are checked for bit-identity before timing.
"""

import argparse
import time
import warnings

warnings.filterwarnings("ignore")

from auxmode import _kernels  # noqa: E402
from auxmode.dataset import GeneratorConfig, generate_population  # noqa: E402
from auxmode.rng import replication_keys  # noqa: E402


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=10000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-pop", type=int, default=5000)
    args = ap.parse_args()

    pop = generate_population(GeneratorConfig(N=args.n_pop, seed=42))
    print(f"N={pop.N} reps={args.reps} best of {args.repeat}")
    print(f"{'n':>6} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8}")
    for n in (51, 151, 301):
        keys = replication_keys(7, n, args.reps)
        a = _kernels.naive_modes_numpy(pop.y, pop.x, n, keys)
        if not _kernels.HAVE_NUMBA:
            t_np = best_of(lambda: _kernels.naive_modes_numpy(pop.y, pop.x, n, keys), args.repeat)
            print(f"{n:>6} {t_np:>11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        b = _kernels.naive_modes_numba(pop.y, pop.x, n, keys)  # also triggers compilation
        assert a.tobytes() == b.tobytes(), "backends disagree"
        t_np = best_of(lambda: _kernels.naive_modes_numpy(pop.y, pop.x, n, keys), args.repeat)
        t_nb = best_of(lambda: _kernels.naive_modes_numba(pop.y, pop.x, n, keys), args.repeat)
        print(f"{n:>6} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
