"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs on identical inputs in both backends; outputs are compared
before timing so a speedup never hides a mismatch.
"""

import argparse
import timeit

import numpy as np

from sparseshare import _pykernels
from sparseshare.field import PrimeField
from sparseshare.model import ShareParams
from sparseshare.optimizer import solve_optimal_pmf
from sparseshare.spmat import SourceModel, sample_source_matrix

try:
    from sparseshare import _kernels
except ImportError:
    _kernels = None


def cases():
    fld = PrimeField(89)
    a = sample_source_matrix(SourceModel(fld, 0.9), 300, 200, 1)
    b = sample_source_matrix(SourceModel(fld, 0.9), 200, 300, 2)
    ap, bp = a.indptr, b.indptr
    mult = np.asarray(ShareParams.default(fld, 3).neg_inv_alphas(), dtype=np.int64)
    pmf = solve_optimal_pmf(0.9, 0.8, 89, 3)
    dense = a.to_dense().ravel()
    u = np.random.default_rng(0).random(dense.size)
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    return {
        "spgemm 300x200 @ 200x300": lambda k: k.spgemm(ap, a.cols, a.vals, bp, b.cols, b.vals, 300, 89),
        "padding_draw 60k entries": lambda k: k.padding_draw(dense, u, mult, 89, pmf.p1, pmf.p_star),
        "xoshiro_uniforms 100k": lambda k: k.xoshiro_uniforms(state.copy(), 100_000),
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(same(p, q) for p, q in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return
    print(f"{'kernel':28s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, call in cases().items():
        if not same(call(_pykernels), call(_kernels)):
            raise SystemExit(f"{name}: backends disagree")
        py = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat))
        cc = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat))
        print(f"{name:28s} {py:10.4f} {cc:11.5f} {py / cc:7.0f}x")


if __name__ == "__main__":
    main()
