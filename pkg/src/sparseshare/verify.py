"""Self-check batteries shared by the CLI and the test-suite.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks do.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .field import PrimeField
from .leakage import analytic_leakage, brute_force_mi, stationarity_residual
from .model import ShareParams, SymmetricSharePMF, share_sparsity
from .optimizer import (
    balance_error,
    lemma1_argmin,
    solve_optimal_pmf,
    symmetric_grid,
    tradeoff_point,
    verify_lemma1,
)
from .rng import Xoshiro256
from .spmat import SourceModel

FIG1_S = 0.95
FIG1_Q = 89


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float
    info: bool = False

    @property
    def ok(self) -> bool:
        return self.info or self.residual <= self.tol

    def line(self) -> str:
        status = "INFO" if self.info else ("ok" if self.ok else "FAIL")
        return f"{status:4s} {self.name}: residual={self.residual:.3e} tol={self.tol:.1e}"


@dataclass(frozen=True)
class Figure1Table:
    s_d: np.ndarray
    tasks_t: np.ndarray
    tasks_t_prime: np.ndarray


def load_figure1() -> Figure1Table:
    """Published relative-leakage curves for s = 0.95, q = 89."""
    text = resources.files("sparseshare").joinpath("data/figure1.csv").read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(text)))
    col = lambda k: np.array([float(r[k]) for r in rows])  # noqa: E731
    return Figure1Table(col("s_d"), col("tasks_t"), col("tasks_t_prime"))


def random_pmf(rng: Xoshiro256, q: int, n: int) -> SymmetricSharePMF:
    return SymmetricSharePMF(PrimeField(q), n, rng.uniform(), rng.uniform() / n)


def random_alphas(rng: Xoshiro256, q: int, n: int) -> tuple[int, ...]:
    pool = list(range(1, q))
    out = []
    for _ in range(n):
        out.append(pool.pop(int(rng.uniform() * len(pool))))
    return tuple(out)


def oracle_battery(count: int = 500, qs=(7, 11, 89), seed: int = 2024):
    """Rows (q, n, s, pmf, analytic, per-share brute force under alpha = 1..n, under random alphas)."""
    rng = Xoshiro256(seed)
    rows = []
    for t in range(count):
        q = qs[t % len(qs)]
        n = 2 + int(rng.uniform() * min(5, q - 2))
        s = rng.uniform()
        pmf = random_pmf(rng, q, n)
        fld = PrimeField(q)
        model = SourceModel(fld, s)
        analytic = analytic_leakage(pmf, s)
        default = ShareParams.default(fld, n)
        shuffled = ShareParams(fld, random_alphas(rng, q, n))
        bf = [brute_force_mi(model, pmf, default, i) for i in range(1, n + 1)]
        bf_alt = [brute_force_mi(model, pmf, shuffled, i) for i in range(1, n + 1)]
        rows.append((q, n, s, pmf, analytic, bf, bf_alt))
    return rows


def suite_oracle(count: int = 300, qs=(5, 7, 11)) -> list[Check]:
    worst = worst_alpha = 0.0
    for _, _, _, _, analytic, bf, bf_alt in oracle_battery(count, qs):
        worst = max(worst, max(abs(analytic - v) for v in bf))
        worst_alpha = max(worst_alpha, max(abs(bf[0] - v) for v in bf + bf_alt))
    return [
        Check(f"analytic vs brute force, {count} pmfs, q in {list(qs)}", worst, 1e-10),
        Check("alpha invariance across shares and point sets", worst_alpha, 1e-12),
    ]


LEMMA1_CASES = [(s, s_avg) for s in (0.9, 0.95) for s_avg in (0.7, 0.9)]


def suite_lemma1(q: int = 89, half_width: float = 0.04, step: float = 0.005) -> list[Check]:
    checks = []
    grid = symmetric_grid(half_width, step)
    for s, s_avg in LEMMA1_CASES:
        rows = verify_lemma1(s, s_avg, q, grid)
        argmin = lemma1_argmin(rows)
        at_zero = dict(rows)[0.0]
        per_share = analytic_leakage(solve_optimal_pmf(s, s_avg, q, 2), s)
        checks.append(Check(f"argmin s_delta, s={s} s_avg={s_avg}", abs(argmin), 0.0))
        checks.append(Check(f"total at s_delta=0 vs 2 x per-share, s={s} s_avg={s_avg}",
                            abs(at_zero - 2.0 * per_share), 1e-8))
    return checks


def stationarity_points(count: int = 100, seed: int = 7):
    """Random feasible (s, s_d, q, n) with 0 < s < 1 and s_d strictly inside its range."""
    rng = Xoshiro256(seed)
    qs = (5, 7, 11, 89, 5081)
    out = []
    while len(out) < count:
        q = qs[int(rng.uniform() * len(qs))]
        n = 2 + int(rng.uniform() * min(5, q - 2))
        s = 0.02 + 0.96 * rng.uniform()
        hi = s + (1.0 - s) / n
        s_d = hi * (0.01 + 0.98 * rng.uniform())
        out.append((s, s_d, q, n))
    return out


def suite_stationarity(count: int = 100) -> list[Check]:
    worst_stat = worst_bal = worst_sd = 0.0
    for s, s_d, q, n in stationarity_points(count):
        pmf = solve_optimal_pmf(s, s_d, q, n)
        worst_stat = max(worst_stat, stationarity_residual(pmf, relative=True))
        worst_bal = max(worst_bal, balance_error(pmf))
        worst_sd = max(worst_sd, abs(share_sparsity(pmf, s) - s_d))
    return [
        Check(f"relative stationarity residual, {count} points", worst_stat, 1e-8),
        Check(f"balance relative error, {count} points", worst_bal, 1e-8),
        Check(f"share sparsity constraint, {count} points", worst_sd, 1e-12),
    ]


def figure1_curve(n: int, table: Figure1Table | None = None) -> np.ndarray:
    table = table or load_figure1()
    return np.array([tradeoff_point(FIG1_S, float(x), FIG1_Q, n).relative for x in table.s_d])


def suite_figure1() -> list[Check]:
    table = load_figure1()
    dev2 = float(np.max(np.abs(figure1_curve(2, table) - table.tasks_t)))
    dev3 = float(np.max(np.abs(figure1_curve(3, table) - table.tasks_t_prime)))
    return [
        Check(f"n=2 curve vs tabulated four-task curve ({len(table.s_d)} points)", dev2, 1e-6),
        Check("n=3 curve vs tabulated three-task curve (reported only)", dev3, 1e-6, info=True),
    ]


SUITES = {
    "oracle": suite_oracle,
    "lemma1": suite_lemma1,
    "stationarity": suite_stationarity,
    "figure1": suite_figure1,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()

