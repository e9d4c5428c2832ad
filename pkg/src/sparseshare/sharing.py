"""Share generation and product reconstruction.

A matrix A is hidden as shares ``A + alpha_i R`` where the padding R is drawn
entrywise from a :class:`SymmetricSharePMF` conditioned on A.  Products of
matching shares of A and B are evaluations of the degree-2 polynomial
``(A + xR)(B + xS)``; any three of them recover ``AB`` at x = 0.
"""

from __future__ import annotations

import itertools
import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .field import FieldError, PrimeField
from .model import ShareParams, SymmetricSharePMF
from .optimizer import solve_optimal_pmf
from .rng import Xoshiro256
from .spmat import SparseMatrix, empirical_sparsity, read_matrix, sp_mul, write_matrix

MANIFEST = "manifest.txt"
MANIFEST_MAGIC = "SPFQ-SHARES 1"


class DecodeError(ValueError):
    pass


def _as_rng(seed) -> Xoshiro256:
    return seed if isinstance(seed, Xoshiro256) else Xoshiro256(seed)


def sample_padding(a: SparseMatrix, pmf: SymmetricSharePMF, params: ShareParams, seed=0) -> SparseMatrix:
    """Draw R entrywise given A, one uniform u per entry in row-major order.

    For a = 0 the categories are r = 0 (mass p1) then 1, ..., q-1 (p1_inv
    each).  For a != 0 they are -a/alpha_1, ..., -a/alpha_n (p_star each)
    followed by the remaining elements of F_q in ascending order (p_star_inv
    each).  The category is found by inverse CDF on u with
    ``floor((u - offset) / mass)``, clamped to the last category.
    """
    if pmf.n != params.n:
        raise ValueError(f"pmf has n={pmf.n} but params have n={params.n}")
    if pmf.field != a.field or params.field != a.field:
        raise FieldError("matrix, pmf and share parameters must share one field")
    q = a.field.q
    if params.n >= q:
        raise ValueError(f"n={params.n} must be smaller than q={q}")
    return _draw(a, params.neg_inv_alphas(), pmf, seed)


def _draw(a: SparseMatrix, multipliers, pmf: SymmetricSharePMF, seed) -> SparseMatrix:
    k, m = a.shape
    u = _as_rng(seed).uniforms(k * m)
    r = kernels.padding_draw(a.to_dense().ravel(), u, np.asarray(multipliers, dtype=np.int64),
                             a.field.q, pmf.p1, pmf.p_star)
    return SparseMatrix.from_dense(a.field, np.asarray(r).reshape(k, m))


def scheme_multipliers(q: int, scheme: str) -> tuple[int, ...]:
    """Multipliers c with special padding values r = c*a for the fixed-task schemes.

    "four": shares A + R and R, zeroed by r = -a and r = 0.
    "three": shares A + R, A + R/2 and R, zeroed by r = -a, r = -2a and r = 0.
    """
    if scheme == "four":
        return (q - 1, 0)
    if scheme == "three":
        if q < 3:
            raise ValueError("the three-task scheme needs q >= 3")
        return (q - 1, q - 2, 0)
    raise ValueError(f"unknown scheme {scheme!r}")


def sample_scheme_padding(a: SparseMatrix, pmf: SymmetricSharePMF, scheme: str, seed=0) -> SparseMatrix:
    """Padding for :func:`four_task_scheme` (pmf.n = 2) or :func:`three_task_scheme` (pmf.n = 3).

    Every share handed out by the scheme is zero with probability
    ``share_sparsity(pmf, s)`` and leaks exactly ``analytic_leakage(pmf, s)``.
    """
    mult = scheme_multipliers(a.field.q, scheme)
    if pmf.n != len(mult) or pmf.field != a.field:
        raise ValueError(f"{scheme}-task padding needs a pmf with n={len(mult)} over the matrix field")
    return _draw(a, mult, pmf, seed)


@dataclass
class ShareSet:
    params: ShareParams
    shares: list[SparseMatrix]
    pmf: SymmetricSharePMF | None = None
    seed: int | None = None
    s: float | None = None

    def __post_init__(self):
        if len(self.shares) != self.params.n:
            raise ValueError(f"expected {self.params.n} shares, got {len(self.shares)}")
        first = self.shares[0]
        for sh in self.shares:
            if sh.shape != first.shape or sh.field != first.field:
                raise ValueError("all shares must have the same shape and field")

    @property
    def field(self) -> PrimeField:
        return self.params.field

    @property
    def shape(self) -> tuple[int, int]:
        return self.shares[0].shape

    def share(self, i: int) -> SparseMatrix:
        """1-based access."""
        return self.shares[i - 1]

    def items(self):
        return zip(self.params.alphas, self.shares)

    def write(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for i, sh in enumerate(self.shares, start=1):
            write_matrix(sh, d / f"share_{i}.spfq")
        lines = [
            MANIFEST_MAGIC,
            f"n {self.params.n}",
            f"q {self.field.q}",
            "alphas " + " ".join(str(a) for a in self.params.alphas),
            f"seed {'' if self.seed is None else self.seed}".rstrip(),
        ]
        if self.pmf is not None:
            lines += [f"p1 {self.pmf.p1!r}", f"p_star {self.pmf.p_star!r}"]
        if self.s is not None:
            lines.append(f"s {self.s!r}")
        (d / MANIFEST).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_share_set(directory) -> ShareSet:
    d = Path(directory)
    text = (d / MANIFEST).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != MANIFEST_MAGIC:
        raise ValueError(f"{d / MANIFEST}: missing '{MANIFEST_MAGIC}' header")
    meta = {}
    for line in text[1:]:
        if not line.strip():
            continue
        key, _, value = line.partition(" ")
        meta[key] = value.strip()
    try:
        n, q = int(meta["n"]), int(meta["q"])
        alphas = tuple(int(x) for x in meta["alphas"].split())
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{d / MANIFEST}: bad manifest ({exc})") from None
    field = PrimeField(q)
    params = ShareParams(field, alphas)
    if params.n != n:
        raise ValueError(f"manifest declares n={n} but lists {params.n} points")
    shares = [read_matrix(d / f"share_{i}.spfq") for i in range(1, n + 1)]
    for sh in shares:
        if sh.field != field:
            raise ValueError("share file modulus disagrees with manifest")
    pmf = None
    if "p1" in meta and "p_star" in meta:
        pmf = SymmetricSharePMF(field, n, float(meta["p1"]), float(meta["p_star"]))
    seed = int(meta["seed"]) if meta.get("seed") else None
    s = float(meta["s"]) if "s" in meta else None
    return ShareSet(params, shares, pmf, seed, s)


def make_shares(a: SparseMatrix, r: SparseMatrix, params: ShareParams, pmf=None, seed=None, s=None) -> ShareSet:
    """Shares ``A + alpha_i R`` for every evaluation point."""
    if a.shape != r.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {r.shape}")
    if a.field != r.field or params.field != a.field:
        raise FieldError("matrix, padding and share parameters must share one field")
    shares = [a.combine(r, alpha) for alpha in params.alphas]
    return ShareSet(params, shares, pmf, seed, s)


def encode_matrix(a: SparseMatrix, s_d: float, n: int, seed=0, s: float | None = None,
                  params: ShareParams | None = None) -> ShareSet:
    """Optimal padding for target share sparsity ``s_d``, then n shares.

    ``s`` defaults to the empirical sparsity of ``a``.
    """
    q = a.field.q
    if s is None:
        s = float(empirical_sparsity(a))
    if s_d < 1.0 / q:
        warnings.warn(f"s_d={s_d} is below 1/q={1.0 / q}: shares will be denser than uniform padding",
                      stacklevel=2)
    pmf = solve_optimal_pmf(s, s_d, q, n)
    params = params or ShareParams.default(a.field, n)
    r = sample_padding(a, pmf, params, seed)
    return make_shares(a, r, params, pmf, seed if isinstance(seed, int) else None, s)


@dataclass(frozen=True)
class ProductEvaluation:
    alpha: int
    h: SparseMatrix


def evaluate_products(shares_a: ShareSet, shares_b: ShareSet, indices=None) -> list[ProductEvaluation]:
    """Worker computations ``f_A(alpha_i) g_B(alpha_i)`` for 1-based ``indices``."""
    if shares_a.params.alphas != shares_b.params.alphas:
        raise ValueError("share sets use different evaluation points")
    indices = range(1, shares_a.params.n + 1) if indices is None else indices
    out = []
    for i in indices:
        if not 1 <= i <= shares_a.params.n:
            raise ValueError(f"share index {i} outside 1..{shares_a.params.n}")
        out.append(ProductEvaluation(shares_a.params.alphas[i - 1], sp_mul(shares_a.share(i), shares_b.share(i))))
    return out


def _basis(field: PrimeField, alphas, x: int) -> list[int]:
    """Lagrange basis values L_i(x) for the given nodes."""
    out = []
    for i, ai in enumerate(alphas):
        num, den = 1, 1
        for j, aj in enumerate(alphas):
            if j != i:
                num = num * (x - aj) % field.q
                den = den * (ai - aj) % field.q
        out.append(num * field.inv(den) % field.q)
    return out


def _combine(mats, coeffs) -> SparseMatrix:
    out = SparseMatrix.zeros(mats[0].field, mats[0].shape)
    for mat, c in zip(mats, coeffs):
        out = out.combine(mat, c)
    return out


def reconstruct_product(evals: list[ProductEvaluation], check_extra: bool = False) -> SparseMatrix:
    """Interpolate h at 0 from the three evaluations with the smallest alpha.

    With ``check_extra`` every further evaluation must lie on the same
    polynomial, otherwise :class:`DecodeError` is raised.
    """
    if len(evals) < 3:
        raise DecodeError(f"need at least 3 evaluations, got {len(evals)}")
    field = evals[0].h.field
    q = field.q
    alphas = [e.alpha % q for e in evals]
    if 0 in alphas:
        raise DecodeError("evaluation points must be nonzero")
    if len(set(alphas)) != len(alphas):
        raise DecodeError(f"duplicate evaluation points: {alphas}")
    for e in evals:
        if e.h.field != field or e.h.shape != evals[0].h.shape:
            raise DecodeError("evaluations disagree in field or shape")
    ordered = sorted(evals, key=lambda e: e.alpha % q)
    base, extra = ordered[:3], ordered[3:]
    nodes = [e.alpha % q for e in base]
    mats = [e.h for e in base]
    c = _combine(mats, _basis(field, nodes, 0))
    if check_extra:
        for e in extra:
            predicted = _combine(mats, _basis(field, nodes, e.alpha % q))
            if predicted != e.h:
                raise DecodeError(f"evaluation at alpha={e.alpha} is inconsistent")
    return c


def decode_all_subsets(evals: list[ProductEvaluation]):
    """Yield (alphas, C) for every 3-subset of the evaluations."""
    for combo in itertools.combinations(evals, 3):
        yield tuple(e.alpha for e in combo), reconstruct_product(list(combo))


def four_task_scheme(a, b, r, s):
    """Tasks (A+R)(B+S), (A+R)S, R(B+S), RS and C = T1 - T2 - T3 + T4."""
    ar, bs = a + r, b + s
    t1, t2, t3, t4 = sp_mul(ar, bs), sp_mul(ar, s), sp_mul(r, bs), sp_mul(r, s)
    return t1, t2, t3, t4, t1 - t2 - t3 + t4


def three_task_scheme(a, b, r, s):
    """Tasks (A+R)(B+S), (A + R/2)S, R(B + S/2) and C = T1' - T2' - T3'."""
    field = a.field
    if field.q < 3:
        raise ValueError("the three-task scheme needs q >= 3 (2 has no inverse)")
    half = field.inv(2)
    t1 = sp_mul(a + r, b + s)
    t2 = sp_mul(a.combine(r, half), s)
    t3 = sp_mul(r, b.combine(s, half))
    return t1, t2, t3, t1 - t2 - t3


def share_dir_exists(directory) -> bool:
    return os.path.isfile(os.path.join(os.fspath(directory), MANIFEST))
