"""Padding distributions and the sparsity they induce on the shares."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import FieldElement, PrimeField

TOL = 1e-12


def _snap(value: float, lo: float, hi: float) -> float:
    """Clip ``value`` into [lo, hi] when it is outside only by rounding noise."""
    value = float(value)
    clipped = min(max(value, lo), hi)
    return clipped if abs(value - clipped) <= TOL else value


def _check_prob(name: str, value: float):
    if not -TOL <= value <= 1.0 + TOL:
        raise ValueError(f"{name}={value!r} is not a probability")


@dataclass(frozen=True)
class ShareParams:
    """Evaluation points alpha_1..alpha_n (distinct, nonzero)."""

    field: PrimeField
    alphas: tuple[int, ...]

    def __post_init__(self):
        q = self.field.q
        alphas = tuple(int(a) % q for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if len(alphas) < 1:
            raise ValueError("need at least one evaluation point")
        if 0 in alphas:
            raise ValueError("evaluation points must be nonzero")
        if len(set(alphas)) != len(alphas):
            raise ValueError(f"evaluation points must be distinct: {alphas}")
        if len(alphas) > q - 1:
            raise ValueError(f"at most q-1={q - 1} evaluation points exist")

    @classmethod
    def default(cls, field: PrimeField, n: int) -> "ShareParams":
        """alpha_i = i for i in 1..n."""
        return cls(field, tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.alphas)

    def neg_inv_alphas(self) -> np.ndarray:
        """-1/alpha_i mod q; multiplying by a gives the value that zeroes share i."""
        f = self.field
        return np.array([f.neg(f.inv(a)) for a in self.alphas], dtype=np.int64)

    def special_values(self, a: int) -> list[int]:
        q = self.field.q
        return [int(a) * c % q for c in self.neg_inv_alphas().tolist()]


@dataclass(frozen=True)
class SymmetricSharePMF:
    """Padding law parametrised by (p1, p_star).

    Given a = 0 the padding is 0 with probability ``p1`` and each nonzero value
    with ``p1_inv``; given a != 0 each of the n zeroing values -a/alpha_i gets
    ``p_star`` and every other value ``p_star_inv``.
    """

    field: PrimeField
    n: int
    p1: float
    p_star: float
    # 1 - p1 and 1 - n*p_star when known more precisely than the subtraction gives
    p1_comp: float | None = dc_field(default=None, compare=False, repr=False)
    p_star_comp: float | None = dc_field(default=None, compare=False, repr=False)

    def __post_init__(self):
        q = self.field.q
        if self.n < 2:
            raise ValueError(f"need at least two shares, got n={self.n}")
        if self.n >= q:
            raise ValueError(f"n={self.n} must be smaller than q={q}")
        object.__setattr__(self, "p1", _snap(self.p1, 0.0, 1.0))
        object.__setattr__(self, "p_star", _snap(self.p_star, 0.0, 1.0 / self.n))
        _check_prob("p1", self.p1)
        _check_prob("p_star", self.p_star)
        if self.n * self.p_star > 1.0 + TOL:
            raise ValueError(f"n*p_star={self.n * self.p_star} exceeds 1")
        for name, total in (("p1_comp", self.p1), ("p_star_comp", self.n * self.p_star)):
            comp = getattr(self, name)
            if comp is not None and (comp < 0.0 or abs(comp + total - 1.0) > TOL):
                raise ValueError(f"{name}={comp!r} is not 1 - {total!r}")

    @classmethod
    def uniform(cls, field: PrimeField, n: int) -> "SymmetricSharePMF":
        return cls(field, n, 1.0 / field.q, 1.0 / field.q)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def p1_inv(self) -> float:
        comp = max(1.0 - self.p1, 0.0) if self.p1_comp is None else self.p1_comp
        return comp / (self.field.q - 1)

    @property
    def p_star_inv(self) -> float:
        comp = max(1.0 - self.n * self.p_star, 0.0) if self.p_star_comp is None else self.p_star_comp
        return comp / (self.field.q - self.n)

    def constraint_residuals(self) -> tuple[float, float]:
        q, n = self.field.q, self.n
        c1 = self.p1 + (q - 1) * self.p1_inv - 1.0
        c2 = n * self.p_star + (q - n) * self.p_star_inv - 1.0
        return c1, c2

    def conditional_matrix(self, params: ShareParams) -> np.ndarray:
        """q x q table ``P[a, r] = Pr(R = r | A = a)``."""
        if params.n != self.n or params.field != self.field:
            raise ValueError("share parameters do not match the pmf")
        q = self.field.q
        P = np.full((q, q), self.p_star_inv)
        P[0, :] = self.p1_inv
        P[0, 0] = self.p1
        a = np.arange(1, q, dtype=np.int64)
        for c in params.neg_inv_alphas():
            P[a, a * c % q] = self.p_star
        return P


@dataclass(frozen=True)
class AsymmetricSharePMF:
    """Two-share padding law for shares R and A + R.

    Given a = 0: p1 on r = 0, p1_inv elsewhere.  Given a != 0: p2 on r = 0,
    p3 on r = -a, p23_inv on the remaining q - 2 values.
    """

    field: PrimeField
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            object.__setattr__(self, name, _snap(getattr(self, name), 0.0, 1.0))
            _check_prob(name, getattr(self, name))
        if self.p2 + self.p3 > 1.0 + TOL:
            raise ValueError("p2 + p3 must not exceed 1")
        if self.field.q < 3:
            raise ValueError("the two-share law needs q >= 3")

    @property
    def p1_inv(self) -> float:
        return (1.0 - self.p1) / (self.field.q - 1)

    @property
    def p23_inv(self) -> float:
        return max(1.0 - self.p2 - self.p3, 0.0) / (self.field.q - 2)

    def constraint_residuals(self) -> tuple[float, float]:
        q = self.field.q
        return (self.p1 + (q - 1) * self.p1_inv - 1.0,
                self.p2 + self.p3 + (q - 2) * self.p23_inv - 1.0)

    def conditional_matrix(self) -> np.ndarray:
        q = self.field.q
        P = np.full((q, q), self.p23_inv)
        P[0, :] = self.p1_inv
        P[0, 0] = self.p1
        a = np.arange(1, q)
        P[a, 0] = self.p2
        P[a, (q - a) % q] = self.p3
        return P


def conditional_prob(pmf: SymmetricSharePMF, params: ShareParams, r, a) -> float:
    """Pr(R = r | A = a) under ``pmf``."""
    if params.n != pmf.n:
        raise ValueError(f"pmf has n={pmf.n} but params have n={params.n}")
    q = pmf.field.q
    r = r.value if isinstance(r, FieldElement) else int(r) % q
    a = a.value if isinstance(a, FieldElement) else int(a) % q
    if a == 0:
        return pmf.p1 if r == 0 else pmf.p1_inv
    return pmf.p_star if r in params.special_values(a) else pmf.p_star_inv


def share_sparsity(pmf: SymmetricSharePMF, s: float) -> float:
    """Zero probability of every share: p1*s + p_star*(1-s)."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    return pmf.p1 * s + pmf.p_star * (1.0 - s)


def asymmetric_sparsities(pmf: AsymmetricSharePMF, s: float) -> tuple[float, float]:
    """Return (sparsity of R, sparsity of A + R)."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    return pmf.p1 * s + pmf.p2 * (1.0 - s), pmf.p1 * s + pmf.p3 * (1.0 - s)


def feasible_sd_range(s: float, q: int, n: int) -> tuple[float, float]:
    """Closed interval of share sparsities reachable with n shares."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if not 2 <= n < q:
        raise ValueError(f"need 2 <= n < q, got n={n}, q={q}")
    return 0.0, s + (1.0 - s) / n


def is_feasible(s_d: float, s: float, q: int, n: int, tol: float = 1e-12) -> bool:
    lo, hi = feasible_sd_range(s, q, n)
    return lo - tol <= s_d <= hi + tol
