"""End-to-end acceptance checks; each test carries the criterion it covers."""

import itertools
import math
import time

import numpy as np
import pytest

from sparseshare.field import PrimeField
from sparseshare.leakage import analytic_leakage, stationarity_residual
from sparseshare.model import feasible_sd_range, share_sparsity
from sparseshare.optimizer import (
    balance_error,
    grid_search_oracle,
    lemma1_argmin,
    solve_optimal_pmf,
    symmetric_grid,
    tradeoff_point,
    verify_lemma1,
)
from sparseshare.sharing import (
    encode_matrix,
    evaluate_products,
    four_task_scheme,
    reconstruct_product,
    three_task_scheme,
)
from sparseshare.spmat import SourceModel, empirical_sparsity, sample_source_matrix, sp_mul
from sparseshare.verify import FIG1_Q, FIG1_S, figure1_curve, load_figure1, oracle_battery, stationarity_points

criterion = pytest.mark.criterion


@criterion(1, "n=2 leakage curve reproduces the 95 tabulated points (|d| <= 1e-6, < 5 s)")
def test_tabulated_curve(measured):
    table = load_figure1()
    t0 = time.perf_counter()
    curve = figure1_curve(2, table)
    elapsed = time.perf_counter() - t0
    dev = np.abs(curve - table.tasks_t)
    measured("points", len(dev))
    measured("max |d|", float(dev.max()))
    measured("seconds", elapsed)
    assert len(dev) == 95
    assert dev.max() <= 1e-6
    for s_d, expected in ((0.50019681165125, 0.0624209851220245), (0.90019681165125, 0.233698563732722)):
        assert abs(tradeoff_point(FIG1_S, s_d, FIG1_Q, 2).relative - expected) <= 1e-6
    assert elapsed < 5.0


def _text_values(q, targets, measured):
    t0 = time.perf_counter()
    got = {n: tradeoff_point(0.95, 0.9, q, n).relative for n in targets}
    elapsed = time.perf_counter() - t0
    for n, v in got.items():
        measured(f"q={q} n={n} relative leakage", f"{v:.6f} (stated {targets[n]})")
    measured("seconds", elapsed)
    assert elapsed < 10.0
    for n, expected in targets.items():
        assert abs(got[n] - expected) <= 1e-3, f"n={n}: {got[n]:.6f} vs {expected}"


@criterion(2, "stated relative leakage at s=0.95, s_d=0.9 for q=89 and q=5081 (+-0.001, < 10 s)")
def test_text_values_q89(measured):
    _text_values(89, {2: 0.234, 5: 0.284}, measured)


@criterion(2, "stated relative leakage at s=0.95, s_d=0.9 for q=89 and q=5081 (+-0.001, < 10 s)")
def test_text_values_q5081(measured):
    _text_values(5081, {2: 0.199, 5: 0.207}, measured)


@criterion(3, "closed-form leakage equals brute-force mutual information on >= 500 pmfs (1e-10, alpha 1e-12)")
def test_oracle_equivalence(measured):
    t0 = time.perf_counter()
    rows = oracle_battery(500, (7, 11, 89))
    elapsed = time.perf_counter() - t0
    worst = max(abs(analytic - v) for *_, analytic, bf, _ in rows for v in bf)
    spread = max(abs(bf[0] - v) for *_, bf, alt in rows for v in bf + alt)
    ns = sorted({r[1] for r in rows})
    measured("pmfs", len(rows))
    measured("n covered", ns)
    measured("max |analytic - brute force|", worst)
    measured("max alpha spread", spread)
    measured("seconds", elapsed)
    assert len(rows) >= 500 and ns == [2, 3, 4, 5, 6]
    assert {r[0] for r in rows} == {7, 11, 89}
    assert worst <= 1e-10
    assert spread <= 1e-12
    assert elapsed < 60.0


@criterion(4, "optimum beats the 1e-5 grid within 1e-6; stationarity and balance <= 1e-8 (>= 100 points)")
def test_optimality(measured):
    t0 = time.perf_counter()
    pts = stationarity_points(100)
    gap = stat = stat_rel = bal = 0.0
    for s, s_d, q, n in pts:
        pmf = solve_optimal_pmf(s, s_d, q, n)
        if q in (7, 11, 89):
            _, _, grid = grid_search_oracle(s, s_d, q, n, 1e-5)
            gap = max(gap, analytic_leakage(pmf, s) - grid)
        stat = max(stat, stationarity_residual(pmf))
        stat_rel = max(stat_rel, stationarity_residual(pmf, relative=True))
        bal = max(bal, balance_error(pmf))
    elapsed = time.perf_counter() - t0
    graded = sum(q in (7, 11, 89) for _, _, q, _ in pts)
    measured("points", len(pts))
    measured("points checked against the grid", graded)
    measured("max (solver - grid) leakage", gap)
    measured("max stationarity residual", stat)
    measured("max relative stationarity residual", stat_rel)
    measured("max balance relative error", bal)
    measured("seconds", elapsed)
    assert len(pts) >= 100
    assert gap <= 1e-6
    assert stat <= 1e-8
    assert bal <= 1e-8
    assert elapsed < 60.0


@criterion(4, "optimum beats the 1e-5 grid within 1e-6; stationarity and balance <= 1e-8 (>= 100 points)")
def test_optimality_grid_battery(measured):
    # 100 points drawn only from the fields the grid oracle is run on
    rng = np.random.default_rng(11)
    gap = 0.0
    for _ in range(100):
        q = int(rng.choice([7, 11, 89]))
        n = int(rng.integers(2, 7))
        s = float(rng.uniform(0.02, 0.98))
        s_d = feasible_sd_range(s, q, n)[1] * float(rng.uniform(0.01, 0.99))
        pmf = solve_optimal_pmf(s, s_d, q, n)
        _, _, grid = grid_search_oracle(s, s_d, q, n, 1e-5)
        gap = max(gap, analytic_leakage(pmf, s) - grid)
    measured("max (solver - grid) leakage", gap)
    assert gap <= 1e-6


@criterion(5, "two-share split: minimum at s_delta=0 and equals twice the n=2 per-share leakage (1e-8)")
def test_two_share_split(measured):
    t0 = time.perf_counter()
    grid = symmetric_grid(0.04, 0.005)
    assert len(grid) == 17
    for s in (0.9, 0.95):
        for s_avg in (0.7, 0.9):
            rows = verify_lemma1(s, s_avg, 89, grid)
            argmin = lemma1_argmin(rows)
            total0 = dict(rows)[0.0]
            twice = 2 * analytic_leakage(solve_optimal_pmf(s, s_avg, 89, 2), s)
            finite = sum(math.isfinite(v) for _, v in rows)
            measured(f"s={s} s_avg={s_avg} argmin", argmin)
            measured(f"s={s} s_avg={s_avg} |total(0) - 2 x per-share|", abs(total0 - twice))
            measured(f"s={s} s_avg={s_avg} feasible grid points", f"{finite}/{len(rows)}")
            assert argmin == 0.0
            assert abs(total0 - twice) <= 1e-8
    elapsed = time.perf_counter() - t0
    measured("seconds", elapsed)
    assert elapsed < 30.0


@criterion(6, "every 3-subset decodes and both fixed-task identities hold (100 seeds, < 60 s)")
def test_protocol_correctness(measured):
    t0 = time.perf_counter()
    decodes = failures = identity_failures = 0
    for q in (89, 5081):
        fld = PrimeField(q)
        for seed in range(100):
            a = sample_source_matrix(SourceModel(fld, 0.9), 50, 40, 2 * seed)
            b = sample_source_matrix(SourceModel(fld, 0.9), 40, 60, 2 * seed + 1)
            c = sp_mul(a, b)
            for n in (3, 4, 5):
                sa = encode_matrix(a, 0.8, n, seed=10 * seed + n, s=0.9)
                sb = encode_matrix(b, 0.8, n, seed=10 * seed + n + 5, s=0.9)
                evals = evaluate_products(sa, sb)
                for combo in itertools.combinations(evals, 3):
                    decodes += 1
                    failures += reconstruct_product(list(combo)) != c
            r, s = sa.share(1) - a, sb.share(1) - b
            if four_task_scheme(a, b, r, s)[-1] != c:
                identity_failures += 1
            if three_task_scheme(a, b, r, s)[-1] != c:
                identity_failures += 1
    elapsed = time.perf_counter() - t0
    measured("subset decodes", decodes)
    measured("decode failures", failures)
    measured("identity failures", identity_failures)
    measured("seconds", elapsed)
    assert decodes == 2 * 100 * (1 + 4 + 10)
    assert failures == 0 and identity_failures == 0
    assert elapsed < 60.0


@criterion(7, "1000x1000 shares within 3 binomial sd of s_d for n = 2..5 (< 30 s)")
def test_sparsity_realization(measured):
    s, s_d, q = 0.95, 0.9, 89
    t0 = time.perf_counter()
    a = sample_source_matrix(SourceModel(PrimeField(q), s), 1000, 1000, 5)
    sigma = math.sqrt(s_d * (1 - s_d) / 1e6)
    worst = 0.0
    for n in range(2, 6):
        ss = encode_matrix(a, s_d, n, seed=100 + n, s=s)
        assert share_sparsity(ss.pmf, s) == pytest.approx(s_d, abs=1e-12)
        devs = [abs(float(empirical_sparsity(sh)) - s_d) / sigma for sh in ss.shares]
        measured(f"n={n} max |empirical - s_d| / sd", max(devs))
        worst = max(worst, max(devs))
    elapsed = time.perf_counter() - t0
    measured("seconds", elapsed)
    assert worst <= 3.0
    assert elapsed < 30.0


MONO_S = (0.5, 0.8, 0.9, 0.95)
MONO_Q = (11, 89, 307, 5081)
MONO_FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)


def _targets(s, q, ns):
    """Fractions of the range (1/q, tightest upper limit over ``ns``]."""
    hi = min(feasible_sd_range(s, q, n)[1] for n in ns)
    return [1 / q + f * (hi - 1 / q) for f in MONO_FRACTIONS]


@criterion(8, "relative leakage nondecreasing in n and nonincreasing in q on a grid (slack 1e-9)")
def test_monotone_in_n(measured):
    ns = (2, 3, 4, 5)
    checked, bad = 0, []
    for s in MONO_S:
        for q in MONO_Q:
            for s_d in _targets(s, q, ns):
                vals = [tradeoff_point(s, s_d, q, n).relative for n in ns]
                for n, (x, y) in zip(ns, zip(vals, vals[1:])):
                    checked += 1
                    if y < x - 1e-9:
                        bad.append((s, q, s_d, n, x, y))
    measured("adjacent n pairs checked", checked)
    measured("violations", len(bad))
    assert not bad, bad[:5]


@criterion(8, "relative leakage nondecreasing in n and nonincreasing in q on a grid (slack 1e-9)")
def test_monotone_in_q(measured):
    ns = (2, 3, 4, 5)
    checked, bad = 0, []
    for s in MONO_S:
        for n in ns:
            # shared targets must exceed 1/q for every q in the grid
            hi = feasible_sd_range(s, MONO_Q[-1], n)[1]
            lo = 1 / MONO_Q[0]
            for f in MONO_FRACTIONS:
                s_d = lo + f * (hi - lo)
                vals = [tradeoff_point(s, s_d, q, n).relative for q in MONO_Q]
                for q, (x, y) in zip(MONO_Q, zip(vals, vals[1:])):
                    checked += 1
                    if y > x + 1e-9:
                        bad.append((s, n, round(s_d, 6), q, round(x, 6), round(y, 6)))
    measured("adjacent q pairs checked", checked)
    measured("violations", len(bad))
    if bad:
        measured("first violation (s, n, s_d, q, leakage at q, at next q)", bad[0])
    assert not bad, bad[:5]
