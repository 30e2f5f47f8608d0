"""Benchmark the JIT kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py [--quick]

Covers the four hot paths: conditional pair sampling (h-inverse bisection),
the D-vine recursion, the evidence accumulation matrix and the plate element
stiffness batch.  Both backends produce identical numbers; this script only
compares wall time.
"""

import argparse
import time

import numpy as np

from vsuq.backend import load_backend
from vsuq.families import CLAYTON, FRANK, GAUSS


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases(quick: bool):
    n_pairs = 100_000 if quick else 1_000_000
    n_vine = 20_000 if quick else 200_000
    na = 60 if quick else 225
    ndata = 200 if quick else 500
    ne = 1_000 if quick else 10_000

    fams = np.array([[FRANK, FRANK, FRANK, FRANK],
                     [FRANK, FRANK, FRANK, 0],
                     [FRANK, FRANK, 0, 0],
                     [GAUSS, 0, 0, 0]], dtype=np.int64)
    thetas = np.array([[5.0, -11.4, 5.0, -11.4],
                       [2.0, 2.0, 2.0, 0.0],
                       [2.0, 2.0, 0.0, 0.0],
                       [0.5, 0.0, 0.0, 0.0]])
    rng = np.random.default_rng(0)
    U = rng.uniform(1e-3, 1 - 1e-3, (na, ndata))
    V = rng.uniform(1e-3, 1 - 1e-3, (na, ndata))
    tgrid = np.linspace(3.0, 8.0, 15)
    xe = np.tile(np.array([[0.0, 0.0], [1.0, 0.05], [0.95, 1.0], [0.0, 0.9]]),
                 (ne, 1, 1))
    theta_el = rng.uniform(-1.2, 1.2, (ne, 8))
    tvec = np.full(8, 0.00125)
    z3 = np.abs(rng.normal(1e-9, 1e-10, 8))
    dm = np.array([[152.0, 3.1, 0.0], [3.1, 11.4, 0.0], [0.0, 0.0, 6.89]])
    ds = np.array([[3.9, 0.0], [0.0, 6.89]])

    def cases(k):
        return {
            "conditional pairs (frank)": lambda: k.conditional_pairs_kernel(
                FRANK, 5.0, n_pairs, 7),
            "d-vine sample d=5": lambda: k.dvine_sample_kernel(
                fams, thetas, n_vine, 11),
            "evidence matrix (frank)": lambda: k.loglik_matrix(
                FRANK, tgrid, U, V),
            "evidence matrix (clayton)": lambda: k.loglik_matrix(
                CLAYTON, np.linspace(1.0, 3.0, 15), U, V),
            "element stiffness batch": lambda: k.element_stiffness_batch(
                xe, *k.laminate_abd(theta_el, tvec, z3, dm, ds)),
        }

    return cases


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()
    cases = build_cases(args.quick)
    numba_k = load_backend("numba")
    numpy_k = load_backend("numpy")
    nb = cases(numba_k)
    npc = cases(numpy_k)
    for fn in nb.values():  # JIT warmup
        fn()
    width = max(len(n) for n in nb)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name in nb:
        t_nb = timeit(nb[name])
        t_np = timeit(npc[name])
        print(f"{name:<{width}}  {t_nb:>9.4f}s  {t_np:>9.4f}s  "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
