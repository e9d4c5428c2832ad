"""Leakage-optimal padding laws.

The symmetric n-share law is found as the unique admissible real root of a
degree-(n+1) polynomial in p_star, bracketed by a dense scan and refined by
bisection.  The two-share asymmetric law is minimised directly by golden
section search; it exists to check that equal share sparsities are optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .field import PrimeField
from .leakage import (
    analytic_leakage,
    analytic_leakage_array,
    asymmetric_total_leakage,
    q_entropy,
)
from .model import AsymmetricSharePMF, SymmetricSharePMF, feasible_sd_range
from .spmat import SourceModel

SCAN_POINTS = 1024
ROOT_WIDTH = 1e-14
# (q - n)**n beyond this many decimal digits switches to the log-form balance
LOG_GUARD_DIGITS = 300
# optimum coordinates smaller than this are re-solved in their own variable
REFINE_BELOW = 1e-4


class InfeasibleError(ValueError):
    """Requested sparsity cannot be reached with the given (s, q, n)."""


class RootError(RuntimeError):
    """The admissible root is missing or not unique."""

    def __init__(self, message, candidates=()):
        super().__init__(f"{message}: candidates={list(candidates)}")
        self.candidates = list(candidates)


@dataclass(frozen=True)
class Theorem1Coefficients:
    s1: float
    s2: float
    c: float
    b: tuple[float, ...]

    def __call__(self, x: float) -> float:
        return horner(self.b, x)

    @property
    def scale(self) -> float:
        return max(abs(v) for v in self.b)


def horner(coeffs, x):
    """Evaluate sum_j coeffs[j] * x**j."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _check_inputs(s, s_d, q, n):
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s} outside [0, 1]")
    if not 2 <= n < q:
        raise ValueError(f"need 2 <= n < q, got n={n}, q={q}")
    lo, hi = feasible_sd_range(s, q, n)
    if not lo - 1e-12 <= s_d <= hi + 1e-12:
        raise InfeasibleError(f"s_d={s_d} outside feasible range [{lo}, {hi}] for s={s}, n={n}")


def p_star_bounds(s: float, s_d: float, n: int) -> tuple[float, float]:
    """Admissible p_star interval: p1 in [0, 1] and n * p_star <= 1."""
    lo = max(0.0, (s_d - s) / (1.0 - s))
    hi = min(1.0 / n, s_d / (1.0 - s))
    return lo, max(lo, hi)


def theorem1_coefficients(s: float, s_d: float, q: int, n: int) -> Theorem1Coefficients:
    _check_inputs(s, s_d, q, n)
    if s in (0.0, 1.0):
        raise ValueError("coefficients are undefined for s in {0, 1}")
    s1 = s_d / (1.0 - s)
    s2 = (s - s_d) / (1.0 - s)
    c = (q - 1) / (q - n) ** n
    b = [0.0] * (n + 2)
    b[n + 1] = -1.0 - c * (-n) ** n
    b[n] = c * (s1 * (-n) ** n - n * (-n) ** (n - 1)) - s2
    for k in range(1, n):
        b[k] = c * (s1 * comb(n, k) * (-n) ** k - comb(n, k - 1) * (-n) ** (k - 1))
    b[0] = c * s1
    return Theorem1Coefficients(s1, s2, c, tuple(float(v) for v in b))


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def log_balance(p: float, s: float, s_d: float, q: int, n: int) -> float:
    """log LHS - log RHS of the optimality balance; strictly decreasing in p.

    Tends to +inf at the lower end of the admissible interval and -inf at the
    upper end.
    """
    return (
        math.log(q - 1)
        + _log(s_d - (1.0 - s) * p)
        - _log(s - s_d + (1.0 - s) * p)
        - n * (math.log(q - n) + _log(p) - _log(1.0 - n * p))
    )


def balance_error(pmf: SymmetricSharePMF) -> float:
    """Relative mismatch of (q-1) p1 / (1-p1) = ((q-n) p_star / (1-n p_star))**n.

    Under the sparsity constraint s*p1 = s_d - (1-s)*p_star the left side is
    (q-1)(s_d-(1-s)p_star)/(s-s_d+(1-s)p_star); the p1 form avoids the
    cancellation that the s_d form suffers when p1 or 1-p1 is tiny.
    """
    lhs = (pmf.p1, pmf.p1_inv)
    rhs = (pmf.p_star, pmf.p_star_inv)
    if min(lhs + rhs) <= 0.0:
        raise ValueError("balance is only defined for interior pmfs")
    d = math.log(lhs[0]) - math.log(lhs[1]) - pmf.n * (math.log(rhs[0]) - math.log(rhs[1]))
    return -math.expm1(-abs(d))


def _bisect(f, lo, hi, f_lo):
    while hi - lo > ROOT_WIDTH:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_roots(f, lo, hi):
    xs = np.linspace(lo, hi, SCAN_POINTS + 1)
    vals = [f(float(x)) for x in xs]
    roots = []
    for i in range(SCAN_POINTS):
        a, b = float(xs[i]), float(xs[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_bisect(f, a, b, fa))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    merged = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9:
            merged.append(r)
    return merged


def _log_root(s, s_d, q, n, a, b, lo, hi):
    """Bisect the log-form balance on [a, b], nudged inside (lo, hi); None without a sign change."""
    eps = (hi - lo) * 1e-15
    a, b = max(a, lo + eps), min(b, hi - eps)
    if not a < b:
        return None
    f = lambda p: log_balance(p, s, s_d, q, n)  # noqa: E731
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        return None
    while True:
        mid = 0.5 * (a + b)
        if mid in (a, b):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid


def _optimal_p_star(s, s_d, q, n):
    """Root of the optimality polynomial inside the admissible p_star interval.

    The polynomial scan locates and counts roots; the final digits come from
    the equivalent log-form balance, which is far better conditioned.  When
    the root hugs an interval end closer than the polynomial's rounding noise
    (or (q-n)**n would overflow) the log form is bisected on its own.
    """
    lo, hi = p_star_bounds(s, s_d, n)
    if hi - lo <= ROOT_WIDTH:
        return hi
    if n * math.log10(q - n) <= LOG_GUARD_DIGITS:
        roots = _scan_roots(theorem1_coefficients(s, s_d, q, n), lo, hi)
        if len(roots) > 1:
            raise RootError("several admissible roots", roots)
        if roots:
            cell = 2.0 * (hi - lo) / SCAN_POINTS
            polished = _log_root(s, s_d, q, n, roots[0] - cell, roots[0] + cell, lo, hi)
            return roots[0] if polished is None else polished
    root = _log_root(s, s_d, q, n, lo, hi, lo, hi)
    if root is None:
        # the root sits within rounding of an end; the sign says which one
        inside = lo + (hi - lo) * 1e-15
        return lo if log_balance(inside, s, s_d, q, n) < 0 else hi
    return root


def _coords(kind, v, s, s_d, n):
    """(p1, 1 - p1, p_star, 1 - n*p_star) with coordinate ``kind`` set to v.

    Each complement is formed without subtracting nearly equal numbers when
    the chosen coordinate is the small one.
    """
    t = 1.0 - s
    if kind == 0:
        p = (s_d - s * v) / t
        return v, 1.0 - v, p, 1.0 - n * p
    if kind == 1:
        p = (s_d - s + s * v) / t
        return 1.0 - v, v, p, 1.0 - n * p
    if kind == 2:
        return (s_d - t * v) / s, (s - s_d + t * v) / s, v, 1.0 - n * v
    p = (1.0 - v) / n
    return (s_d - t * p) / s, (s - s_d + t * p) / s, p, v


def _log_gap(c, q, n):
    p1, u, p, w = c
    return math.log(q - 1) + math.log(p1) + n * math.log(w) - math.log(u) - n * (math.log(q - n) + math.log(p))


def _refine_small(p0, s, s_d, q, n):
    """Re-solve in whichever of p1, 1-p1, p_star, 1-n*p_star is below REFINE_BELOW.

    Returns the four coordinates, or None when nothing is small or no bracket
    is found.
    """
    c0 = _coords(2, p0, s, s_d, n)
    kind = min(range(4), key=lambda i: c0[i])
    v0 = c0[kind]
    if v0 >= REFINE_BELOW:
        return None
    # the gap tends to -inf as p1 or 1-n*p_star -> 0, to +inf as 1-p1 or p_star -> 0
    neg_at_zero = kind in (0, 3)
    f = lambda v: _log_gap(_coords(kind, v, s, s_d, n), q, n)  # noqa: E731
    hi = 2.0 * max(v0, 1e-300)
    for _ in range(1100):
        c = _coords(kind, hi, s, s_d, n)
        if min(c) <= 0.0:
            return None
        if (f(hi) > 0) == neg_at_zero:
            break
        hi *= 2.0
    else:
        return None
    lo = 0.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (f(mid) > 0) == neg_at_zero:
            hi = mid
        else:
            lo = mid
    return _coords(kind, hi, s, s_d, n)


def solve_optimal_pmf(s: float, s_d: float, q: int, n: int) -> SymmetricSharePMF:
    """Leakage-minimising symmetric padding law for share sparsity ``s_d``."""
    _check_inputs(s, s_d, q, n)
    field = PrimeField(q)
    s_d = min(max(s_d, 0.0), s + (1.0 - s) / n)
    if s == 1.0:
        # no nonzero source entries: p_star never used
        return SymmetricSharePMF(field, n, s_d, 1.0 / q)
    if s == 0.0:
        return SymmetricSharePMF(field, n, 1.0 / q, s_d)
    p_star = _optimal_p_star(s, s_d, q, n)
    refined = _refine_small(p_star, s, s_d, q, n)
    if refined is not None:
        p1, u, p_star, w = refined
        return SymmetricSharePMF(field, n, p1, p_star, p1_comp=u, p_star_comp=w)
    p1 = (s_d - p_star * (1.0 - s)) / s
    return SymmetricSharePMF(field, n, p1, p_star)


@dataclass(frozen=True)
class TradeoffPoint:
    s: float
    s_d: float
    q: int
    n: int
    p1: float
    p_star: float
    leakage: float
    relative: float
    boundary: bool = False


def tradeoff_point(s: float, s_d: float, q: int, n: int) -> TradeoffPoint:
    pmf = solve_optimal_pmf(s, s_d, q, n)
    sd_eff = pmf.p1 * s + pmf.p_star * (1.0 - s)
    leak = analytic_leakage(pmf, s, sd_eff)
    h = q_entropy(SourceModel(pmf.field, s))
    hi = s + (1.0 - s) / n
    return TradeoffPoint(
        s=s, s_d=s_d, q=q, n=n, p1=pmf.p1, p_star=pmf.p_star,
        leakage=leak, relative=leak / h if h > 0 else 0.0,
        boundary=abs(s_d - hi) <= 1e-12,
    )


def sweep_tradeoff(s: float, q: int, n: int, s_d_grid) -> list[TradeoffPoint]:
    """One optimal point per grid value, ordered by s_d."""
    grid = sorted(float(x) for x in s_d_grid)
    for x in grid:
        _check_inputs(s, x, q, n)
    return [tradeoff_point(s, x, q, n) for x in grid]


def sweep_diagnostics(points: list[TradeoffPoint], slack: float = 1e-9) -> list[str]:
    """Flag points where leakage fails to grow as s_d moves away from 1/q."""
    issues = []
    for side in ("below", "above"):
        pts = [p for p in points if (p.s_d < 1.0 / p.q) == (side == "below")]
        if side == "below":
            pts = pts[::-1]
        for prev, cur in zip(pts, pts[1:]):
            if cur.relative < prev.relative - slack:
                issues.append(f"relative leakage drops from {prev.relative} to {cur.relative} "
                              f"between s_d={prev.s_d} and s_d={cur.s_d}")
    return issues


def grid_search_oracle(s: float, s_d: float, q: int, n: int, resolution: float = 1e-4):
    """Brute-force scan of p_star at fixed step; returns (p1, p_star, leakage)."""
    _check_inputs(s, s_d, q, n)
    if s in (0.0, 1.0):
        pmf = solve_optimal_pmf(s, s_d, q, n)
        return pmf.p1, pmf.p_star, analytic_leakage(pmf, s)
    lo, hi = p_star_bounds(s, s_d, n)
    count = int(math.floor((hi - lo) / resolution)) + 1
    grid = lo + resolution * np.arange(count)
    grid = np.append(grid[grid < hi], hi)
    p1 = np.clip((s_d - grid * (1.0 - s)) / s, 0.0, 1.0)
    values = analytic_leakage_array(p1, grid, s, s_d, q, n)
    best = int(np.argmin(values))
    return float(p1[best]), float(grid[best]), float(values[best])


# -- two-share asymmetric law -------------------------------------------------

GOLDEN_WIDTH = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def asymmetric_pmf(q: int, s: float, s_r: float, s_ar: float, p1: float) -> AsymmetricSharePMF:
    p2 = (s_r - s * p1) / (1.0 - s)
    p3 = (s_ar - s * p1) / (1.0 - s)
    return AsymmetricSharePMF(PrimeField(q), p1, p2, p3)


def asymmetric_p1_bounds(s: float, s_r: float, s_ar: float) -> tuple[float, float]:
    """p1 range keeping p2, p3 in [0, 1] and p2 + p3 <= 1."""
    lo = max(0.0, (s_r - (1.0 - s)) / s, (s_ar - (1.0 - s)) / s, (s_r + s_ar - (1.0 - s)) / (2.0 * s))
    hi = min(1.0, s_r / s, s_ar / s)
    return lo, hi


def golden_section(f, lo, hi, width=GOLDEN_WIDTH):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (f(lo), lo), (f(hi), hi)]
    return min(candidates)[1]


def optimize_asymmetric_n2(s: float, s_avg: float, s_delta: float, q: int):
    """Minimise I(R; A) + I(A + R; A) over p1 for fixed share sparsities.

    The shares R and A + R get sparsities ``s_avg - s_delta`` and
    ``s_avg + s_delta``.  Returns ``(pmf, total_leakage)``.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"need 0 < s < 1, got {s}")
    s_r, s_ar = s_avg - s_delta, s_avg + s_delta
    if not (0.0 <= s_r <= 1.0 and 0.0 <= s_ar <= 1.0):
        raise InfeasibleError(f"share sparsities ({s_r}, {s_ar}) outside [0, 1]")
    lo, hi = asymmetric_p1_bounds(s, s_r, s_ar)
    if lo > hi + 1e-12:
        raise InfeasibleError(f"no feasible p1 for s={s}, s_avg={s_avg}, s_delta={s_delta}")
    hi = max(lo, hi)

    def objective(p1):
        return asymmetric_total_leakage(asymmetric_pmf(q, s, s_r, s_ar, p1), s, s_avg, s_delta)

    p1 = golden_section(objective, lo, hi) if hi > lo else lo
    pmf = asymmetric_pmf(q, s, s_r, s_ar, p1)
    return pmf, asymmetric_total_leakage(pmf, s, s_avg, s_delta)


def verify_lemma1(s: float, s_avg: float, q: int, s_delta_grid) -> list[tuple[float, float]]:
    """Rows ``(s_delta, minimal total leakage)``, ordered by s_delta.

    A sparsity split that no two-share law can realise gets ``inf``.
    """
    rows = []
    for d in sorted(float(x) for x in s_delta_grid):
        try:
            _, total = optimize_asymmetric_n2(s, s_avg, d, q)
        except InfeasibleError:
            total = math.inf
        rows.append((d, total))
    return rows


def lemma1_argmin(rows: list[tuple[float, float]]) -> float:
    """s_delta of the smallest finite total leakage (ties go to the smallest |s_delta|)."""
    finite = [(total, abs(d), d) for d, total in rows if math.isfinite(total)]
    if not finite:
        raise InfeasibleError("no feasible s_delta in the grid")
    return min(finite)[2]


def symmetric_grid(half_width: float, step: float) -> list[float]:
    """Grid -w, ..., 0, ..., w built from integer multiples of ``step``."""
    k = int(round(half_width / step))
    return [i * step for i in range(-k, k + 1)]
