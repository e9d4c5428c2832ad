"""Information leakage of a single share, in q-ary units.

Two independent routes are provided: closed-form expressions in the
parameters of the padding law, and exhaustive summation over the joint
distribution of (source entry, share entry).  The tests hold them against
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    AsymmetricSharePMF,
    ShareParams,
    SymmetricSharePMF,
    asymmetric_sparsities,
    share_sparsity,
)
from .spmat import SourceModel

SPARSITY_TOL = 1e-9


def z(x: float, y: float, q: int) -> float:
    """x * log_q(x / y) with 0 * log(0 / y) = 0."""
    if x == 0.0:
        return 0.0
    if y <= 0.0:
        raise ValueError(f"z({x}, {y}): positive mass against zero reference")
    return x * math.log(x / y) / math.log(q)


def q_entropy(model: SourceModel) -> float:
    q, s = model.field.q, model.s
    h = 0.0
    if s > 0.0:
        h -= s * math.log(s)
    if s < 1.0:
        h -= (1.0 - s) * math.log((1.0 - s) / (q - 1))
    return h / math.log(q)


def to_bits(value: float, q: int) -> float:
    return value * math.log2(q)


def kl_divergence(p, r, base: float | None = None) -> float:
    """D(p || r) in units of log base ``base`` (default: alphabet size)."""
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    if p.shape != r.shape:
        raise ValueError("PMFs must have equal length")
    base = len(p) if base is None else base
    mask = p > 0
    if np.any(r[mask] <= 0):
        raise ValueError("reference PMF vanishes where p has mass")
    return float(np.sum(p[mask] * np.log(p[mask] / r[mask])) / math.log(base))


def mutual_information(p_x: np.ndarray, channel: np.ndarray, base: float) -> float:
    """I(X; Y) for input law ``p_x`` and row-stochastic ``channel[x, y]``.

    Computed as sum_x p_x(x) * D(channel[x] || p_y).
    """
    p_y = p_x @ channel
    total = 0.0
    for x in np.flatnonzero(p_x > 0):
        total += p_x[x] * kl_divergence(channel[x], p_y, base)
    return total


def _check_sd(s_d: float, expected: float):
    if abs(s_d - expected) > SPARSITY_TOL:
        raise ValueError(f"s_d={s_d} does not match pmf sparsity {expected}")


def analytic_leakage(pmf: SymmetricSharePMF, s: float, s_d: float | None = None) -> float:
    """Closed-form leakage of any one share under ``pmf``.

    A given ``s_d`` is only checked against the sparsity the pmf induces.
    """
    q, n = pmf.field.q, pmf.n
    expected = share_sparsity(pmf, s)
    if s_d is not None:
        _check_sd(s_d, expected)
    s_d = expected
    s_d_inv = (1.0 - s_d) / (q - 1)
    # a source value with probability zero contributes nothing, even where z is undefined
    zero_part = lambda: z(pmf.p1, s_d, q) + (q - 1) * z(pmf.p1_inv, s_d_inv, q)  # noqa: E731
    nz_part = lambda: (  # noqa: E731
        z(pmf.p_star, s_d, q)
        + (n - 1) * z(pmf.p_star, s_d_inv, q)
        + (q - n) * z(pmf.p_star_inv, s_d_inv, q)
    )
    return _mix(s, zero_part, nz_part)


def _mix(s: float, zero_part, nz_part) -> float:
    out = 0.0
    if s > 0.0:
        out += s * zero_part()
    if s < 1.0:
        out += (1.0 - s) * nz_part()
    return out


def _z_array(x, y, q):
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    pos = np.broadcast_to(x > 0, out.shape)
    xb = np.broadcast_to(x, out.shape)
    yb = np.broadcast_to(np.asarray(y, dtype=float), out.shape)
    out[pos] = xb[pos] * np.log(xb[pos] / yb[pos]) / math.log(q)
    return out


def analytic_leakage_array(p1, p_star, s: float, s_d: float, q: int, n: int) -> np.ndarray:
    """Vectorised closed form over arrays of (p1, p_star) sharing one s_d."""
    p1 = np.asarray(p1, dtype=float)
    ps = np.asarray(p_star, dtype=float)
    p1_inv = np.maximum(1.0 - p1, 0.0) / (q - 1)
    ps_inv = np.maximum(1.0 - n * ps, 0.0) / (q - n)
    s_d_inv = (1.0 - s_d) / (q - 1)
    zero_part = _z_array(p1, s_d, q) + (q - 1) * _z_array(p1_inv, s_d_inv, q)
    nz_part = (_z_array(ps, s_d, q) + (n - 1) * _z_array(ps, s_d_inv, q)
               + (q - n) * _z_array(ps_inv, s_d_inv, q))
    return s * zero_part + (1.0 - s) * nz_part


def share_channel(pmf: SymmetricSharePMF, params: ShareParams, i: int) -> np.ndarray:
    """``W[a, b] = Pr(A + alpha_i R = b | A = a)`` for 1-based share index i."""
    if not 1 <= i <= params.n:
        raise ValueError(f"share index {i} outside 1..{params.n}")
    q = pmf.field.q
    cond = pmf.conditional_matrix(params)
    inv_alpha = pmf.field.inv(params.alphas[i - 1])
    a = np.arange(q)[:, None]
    b = np.arange(q)[None, :]
    r = (b - a) % q * inv_alpha % q
    return cond[np.broadcast_to(a, r.shape), r]


def brute_force_mi(model: SourceModel, pmf: SymmetricSharePMF, params: ShareParams, i: int) -> float:
    """I_q(A + alpha_i R; A) by summing over all (a, b) in F_q x F_q."""
    if model.field != pmf.field:
        raise ValueError("source and pmf live in different fields")
    return mutual_information(model.pmf(), share_channel(pmf, params, i), model.field.q)


def asymmetric_total_leakage(pmf: AsymmetricSharePMF, s: float, s_avg: float, s_delta: float) -> float:
    """I_q(R; A) + I_q(A + R; A) in closed form."""
    q = pmf.field.q
    s_r, s_ar = asymmetric_sparsities(pmf, s)
    _check_sd(s_avg - s_delta, s_r)
    _check_sd(s_avg + s_delta, s_ar)
    s_r_inv = (1.0 - s_r) / (q - 1)
    s_ar_inv = (1.0 - s_ar) / (q - 1)
    p1, p1i, p2, p3, p23 = pmf.p1, pmf.p1_inv, pmf.p2, pmf.p3, pmf.p23_inv
    zero_part = lambda: (  # noqa: E731
        z(p1, s_ar, q) + z(p1, s_r, q) + (q - 1) * (z(p1i, s_ar_inv, q) + z(p1i, s_r_inv, q))
    )
    nz_part = lambda: (  # noqa: E731
        z(p2, s_ar_inv, q) + z(p2, s_r, q)
        + z(p3, s_ar, q) + z(p3, s_r_inv, q)
        + (q - 2) * (z(p23, s_ar_inv, q) + z(p23, s_r_inv, q))
    )
    return _mix(s, zero_part, nz_part)


def asymmetric_brute_force(model: SourceModel, pmf: AsymmetricSharePMF) -> tuple[float, float]:
    """(I_q(R; A), I_q(A + R; A)) by exhaustive summation."""
    q = model.field.q
    cond = pmf.conditional_matrix()
    a = np.arange(q)[:, None]
    b = np.arange(q)[None, :]
    r = (b - a) % q
    plus = cond[np.broadcast_to(a, r.shape), r]
    p_a = model.pmf()
    return mutual_information(p_a, cond, q), mutual_information(p_a, plus, q)


def stationarity_residual(pmf: SymmetricSharePMF, relative: bool = False) -> float:
    """|p1 * p_star_inv**n - p1_inv * p_star**n|, zero at an interior optimum.

    With ``relative=True`` the difference is divided by the larger of the two
    products, which makes it comparable across (q, n).
    """
    n = pmf.n
    lhs = pmf.p1 * pmf.p_star_inv ** n
    rhs = pmf.p1_inv * pmf.p_star ** n
    diff = abs(lhs - rhs)
    if relative:
        scale = max(lhs, rhs)
        return diff / scale if scale > 0 else 0.0
    return diff


@dataclass(frozen=True)
class LeakageReport:
    leakage: float
    entropy: float
    relative: float

    @classmethod
    def build(cls, leakage: float, entropy: float) -> "LeakageReport":
        rel = leakage / entropy if entropy > 0 else 0.0
        return cls(leakage, entropy, rel)


def leakage_report(pmf: SymmetricSharePMF, s: float) -> LeakageReport:
    model = SourceModel(pmf.field, s)
    return LeakageReport.build(analytic_leakage(pmf, s), q_entropy(model))
