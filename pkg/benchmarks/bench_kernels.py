"""Benchmark the two kernel backends on the hot table operations.

Run: python benchmarks/bench_kernels.py
"""

import time

from residuap import catalog
from residuap.algebra import wreath
from residuap.kernels import npbackend, pybackend


def timeit(label, fn, repeat=3):
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    print(f"  {label:34s} {best * 1000:9.2f} ms")
    return best


def bench_group(G, sample_cap=256):
    print(f"{G.name} (order {G.order})")
    t = G.mult
    tl = [[int(x) for x in row] for row in t]
    inv_np = npbackend.inverse_table(t)
    inv_py = pybackend.inverse_table(tl)
    gens = [1, G.order - 1]
    results = {}
    results["validate"] = (
        timeit("validate table / numpy", lambda: npbackend.validate_table(t, sample_cap)),
        timeit("validate table / python", lambda: pybackend.validate_table(tl, sample_cap)))
    results["closure"] = (
        timeit("closure / numpy", lambda: npbackend.closure(t, inv_np, gens)),
        timeit("closure / python", lambda: pybackend.closure(tl, inv_py, gens)))
    xs = list(range(0, G.order, 2))
    results["commutators"] = (
        timeit("bulk commutators / numpy",
               lambda: npbackend.commutators(t, inv_np, xs, xs)),
        timeit("bulk commutators / python",
               lambda: pybackend.commutators(tl, inv_py, xs, xs)))
    for name, (fast, slow) in results.items():
        print(f"  {name}: numpy is {slow / max(fast, 1e-9):.1f}x faster")
    print()


def main():
    for G in (catalog.dihedral(8), catalog.heisenberg(3),
              wreath(catalog.cyclic(2), catalog.klein4()).group):
        bench_group(G)


if __name__ == "__main__":
    main()
