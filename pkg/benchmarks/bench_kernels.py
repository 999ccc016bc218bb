"""Compare the compiled and numpy Monte Carlo kernels on one chunk of draws.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from condlab import kernels
from condlab.condcore import CHUNK_SIZE

SHAPES = [(2, 2), (1, 10), (10, 50), (2, 200)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    backends = ["python"]
    try:
        kernels.backend_functions("cython")
        backends.append("cython")
    except ImportError:
        print("compiled extension not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<8} {'n x m':>9} " + " ".join(f"{b + ' ms':>11}" for b in backends) + "  speedup")
    for n, m in SHAPES:
        mat = rng.standard_normal((n, m))
        weights = rng.random(m)
        draws = rng.standard_normal((CHUNK_SIZE, m))
        for label, idx, operand in (("sphere", 0, mat), ("gauss", 1, weights)):
            times = []
            for b in backends:
                fn = kernels.backend_functions(b)[idx]
                best = min(timeit.repeat(lambda: fn(operand, draws, 3.0), number=1, repeat=args.repeat))
                times.append(best * 1e3)
            speed = f"{times[0] / times[1]:7.2f}x" if len(times) == 2 else ""
            print(f"{label:<8} {f'{n}x{m}':>9} " + " ".join(f"{t:11.3f}" for t in times) + "  " + speed)


if __name__ == "__main__":
    main()
