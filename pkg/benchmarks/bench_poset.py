"""Time the compiled and pure-Python poset kernels on random relations.

    python3 benchmarks/bench_poset.py [--sizes 16 64 128] [--reps 200]
"""
import argparse
import random
import timeit

from envycake import _poset_py
from envycake.poset import KERNEL


def relation(rng, n):
    le, lt = [0] * n, [0] * n
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 1.5 / n:
                (lt if rng.random() < 0.5 else le)[i] |= 1 << j
    return le, lt


def acyclic(rng, n):
    while True:
        le, lt = relation(rng, n)
        res = _poset_py.closure(n, le, lt)
        if res is not None:
            return le, lt, res


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 128])
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()
    kernels = {"pure": _poset_py}
    if KERNEL == "compiled":
        from envycake import _poset
        kernels["compiled"] = _poset
    rng = random.Random(0)
    print(f"{'n':>5} {'kernel':>9} {'closure us':>11} {'add_edges us':>13}")
    for n in args.sizes:
        le, lt, (reach, strict) = acyclic(rng, n)
        edges = [(u, v, False) for u, v in (rng.sample(range(n), 2) for _ in range(3))]
        for name, k in kernels.items():
            t1 = timeit.timeit(lambda: k.closure(n, le, lt), number=args.reps) / args.reps
            t2 = timeit.timeit(lambda: k.add_edges(list(reach), list(strict), edges), number=args.reps) / args.reps
            print(f"{n:>5} {name:>9} {t1 * 1e6:>11.1f} {t2 * 1e6:>13.1f}")


if __name__ == "__main__":
    main()
