"""Simulated main node with n workers, some of which straggle.

Workers are not real processes.  Each one gets a finish time
``base + Exp(rate) + cost * per_op`` (plus a penalty for forced stragglers) and
the main node decodes from the three earliest results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import PrimeField
from .leakage import leakage_report
from .model import ShareParams, SymmetricSharePMF, is_feasible
from .optimizer import InfeasibleError, solve_optimal_pmf
from .rng import Xoshiro256
from .sharing import (
    ProductEvaluation,
    evaluate_products,
    four_task_scheme,
    make_shares,
    reconstruct_product,
    sample_padding,
    sample_scheme_padding,
    three_task_scheme,
)
from .spmat import SourceModel, SparseMatrix, empirical_sparsity, product_cost, sample_source_matrix, sp_mul

CSV_COLUMNS = ("seed", "n", "q", "s", "s_d", "completion_time", "decode_ok", "cost_sparse",
               "cost_dense_baseline", "leakage_per_share", "relative_leakage")
RESULTS_NEEDED = 3


def fmt(x) -> str:
    """15 significant digits for floats, plain text otherwise."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".15g")
    return str(x)


@dataclass(frozen=True)
class SimConfig:
    n: int = 5
    q: int = 89
    dims: tuple[int, int, int] = (50, 40, 60)
    s_a: float = 0.95
    s_b: float = 0.95
    s_d_a: float = 0.9
    s_d_b: float = 0.9
    seed: int = 0
    delay_base: float = 1.0
    delay_rate: float = 1.0
    per_op: float = 1e-4
    stragglers: frozenset = field(default_factory=frozenset)
    straggler_delay: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "stragglers", frozenset(int(i) for i in self.stragglers))
        PrimeField(self.q)
        if self.n < RESULTS_NEEDED:
            raise ValueError(f"decoding needs {RESULTS_NEEDED} results, so n >= 3 (got n={self.n})")
        if self.n >= self.q:
            raise ValueError(f"n={self.n} must be smaller than q={self.q}")
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive sizes, got {self.dims}")
        if self.delay_base < 0 or self.delay_rate <= 0 or self.per_op < 0 or self.straggler_delay < 0:
            raise ValueError("delay parameters must be nonnegative (rate positive)")
        bad = [i for i in self.stragglers if not 1 <= i <= self.n]
        if bad:
            raise ValueError(f"straggler indices {bad} outside 1..{self.n}")
        for name in ("s_a", "s_b", "s_d_a", "s_d_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        for s, s_d, which in ((self.s_a, self.s_d_a, "A"), (self.s_b, self.s_d_b, "B")):
            if not is_feasible(s_d, s, self.q, self.n):
                raise InfeasibleError(f"s_d={s_d} unreachable for {which} with s={s}, n={self.n}")


@dataclass(frozen=True)
class SimReport:
    seed: int
    n: int
    q: int
    s: float
    s_d: float
    completion_time: float
    decode_ok: bool
    used_workers: tuple[int, ...]
    finish_times: tuple[float, ...]
    worker_costs: tuple[int, ...]
    baseline_costs: tuple[int, ...]
    share_sparsities_a: tuple[float, ...]
    share_sparsities_b: tuple[float, ...]
    baseline_decode_ok: bool
    leakage_a: float
    leakage_b: float
    relative_leakage_a: float
    relative_leakage_b: float

    @property
    def cost_sparse(self) -> float:
        return float(np.mean(self.worker_costs))

    @property
    def cost_dense_baseline(self) -> float:
        return float(np.mean(self.baseline_costs))

    @property
    def leakage_per_share(self) -> float:
        """Worst of the two matrices' per-share leakage."""
        return max(self.leakage_a, self.leakage_b)

    @property
    def relative_leakage(self) -> float:
        return max(self.relative_leakage_a, self.relative_leakage_b)

    def csv_values(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)

    def csv_row(self) -> str:
        return ",".join(fmt(v) for v in self.csv_values())

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)

    def to_text(self) -> str:
        pairs = list(zip(CSV_COLUMNS, self.csv_values()))
        pairs += [
            ("used_workers", " ".join(map(str, self.used_workers))),
            ("finish_times", " ".join(fmt(t) for t in self.finish_times)),
            ("worker_costs", " ".join(map(str, self.worker_costs))),
            ("baseline_costs", " ".join(map(str, self.baseline_costs))),
            ("share_sparsity_a", " ".join(fmt(x) for x in self.share_sparsities_a)),
            ("share_sparsity_b", " ".join(fmt(x) for x in self.share_sparsities_b)),
            ("baseline_decode_ok", self.baseline_decode_ok),
            ("leakage_a", self.leakage_a),
            ("leakage_b", self.leakage_b),
        ]
        return "\n".join(f"{k}={fmt(v)}" for k, v in pairs)


def finish_times(config: SimConfig, costs, rng: Xoshiro256) -> list[float]:
    """Shifted-exponential delay plus compute time; forced stragglers get the penalty."""
    out = []
    for i, cost in enumerate(costs, start=1):
        t = config.delay_base + rng.exponential(config.delay_rate) + cost * config.per_op
        if i in config.stragglers:
            t += config.straggler_delay
        out.append(t)
    return out


def first_results(times) -> list[int]:
    """1-based indices of the 3 earliest finite finish times (ties by index)."""
    order = sorted((t, i) for i, t in enumerate(times, start=1) if math.isfinite(t))
    return [i for _, i in order[:RESULTS_NEEDED]]


def _sparsities(shares) -> tuple[float, ...]:
    return tuple(float(empirical_sparsity(sh)) for sh in shares)


def run_simulation(config: SimConfig, a: SparseMatrix | None = None, b: SparseMatrix | None = None) -> SimReport:
    """Sample A and B (unless given), share, simulate workers, decode from the first 3.

    All randomness comes from one generator seeded with ``config.seed``, consumed
    in a fixed order: A, B, padding of A, padding of B, delays, then the
    baseline paddings.
    """
    fld = PrimeField(config.q)
    k, m, p = config.dims
    rng = Xoshiro256(config.seed)
    if a is None:
        a = sample_source_matrix(SourceModel(fld, config.s_a), k, m, rng)
    if b is None:
        b = sample_source_matrix(SourceModel(fld, config.s_b), m, p, rng)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} x {b.shape}")
    params = ShareParams.default(fld, config.n)
    pmf_a = solve_optimal_pmf(config.s_a, config.s_d_a, config.q, config.n)
    pmf_b = solve_optimal_pmf(config.s_b, config.s_d_b, config.q, config.n)
    sa = make_shares(a, sample_padding(a, pmf_a, params, rng), params)
    sb = make_shares(b, sample_padding(b, pmf_b, params, rng), params)

    costs = tuple(product_cost(x, y) for x, y in zip(sa.shares, sb.shares))
    times = finish_times(config, costs, rng)
    used = first_results(times)
    reference = sp_mul(a, b)
    decode_ok = False
    completion = math.inf
    if len(used) == RESULTS_NEEDED:
        completion = max(times[i - 1] for i in used)
        evals = evaluate_products(sa, sb, used)
        decode_ok = reconstruct_product(evals) == reference

    uniform = SymmetricSharePMF.uniform(fld, config.n)
    ba = make_shares(a, sample_padding(a, uniform, params, rng), params)
    bb = make_shares(b, sample_padding(b, uniform, params, rng), params)
    baseline_costs = tuple(product_cost(x, y) for x, y in zip(ba.shares, bb.shares))
    baseline_ok = reconstruct_product(evaluate_products(ba, bb, range(1, RESULTS_NEEDED + 1))) == reference

    rep_a = leakage_report(pmf_a, config.s_a)
    rep_b = leakage_report(pmf_b, config.s_b)
    return SimReport(
        seed=config.seed, n=config.n, q=config.q, s=config.s_a, s_d=config.s_d_a,
        completion_time=completion, decode_ok=decode_ok, used_workers=tuple(used),
        finish_times=tuple(times), worker_costs=costs, baseline_costs=baseline_costs,
        share_sparsities_a=_sparsities(sa.shares), share_sparsities_b=_sparsities(sb.shares),
        baseline_decode_ok=baseline_ok,
        leakage_a=rep_a.leakage, leakage_b=rep_b.leakage,
        relative_leakage_a=rep_a.relative, relative_leakage_b=rep_b.relative,
    )


@dataclass(frozen=True)
class SchemeResult:
    seed: int
    scheme: str
    workers: int
    task_costs: tuple[int, ...]
    decode_ok: bool
    share_sparsities: tuple[float, ...]
    leakage_per_share: float
    relative_leakage: float


@dataclass(frozen=True)
class SchemeComparison:
    header: str
    rows: tuple[SchemeResult, ...]

    COLUMNS = ("seed", "scheme", "workers", "mean_task_cost", "decode_ok",
               "mean_share_sparsity", "leakage_per_share", "relative_leakage")

    def to_csv(self) -> str:
        lines = [f"# {self.header}", ",".join(self.COLUMNS)]
        for r in self.rows:
            vals = (r.seed, r.scheme, r.workers, float(np.mean(r.task_costs)), r.decode_ok,
                    float(np.mean(r.share_sparsities)), r.leakage_per_share, r.relative_leakage)
            lines.append(",".join(fmt(v) for v in vals))
        return "\n".join(lines) + "\n"


def compare_schemes(a: SparseMatrix, b: SparseMatrix, seeds, s_d: float, n: int = 5,
                    s_a: float | None = None, s_b: float | None = None) -> SchemeComparison:
    """Run the four-task, three-task and n-share schemes on the same A and B.

    Each scheme pads to share sparsity ``s_d``.  The four-task scheme hands out
    A + R and R, so its padding uses the n = 2 optimum; the three-task scheme
    hands out A + R, A + R/2 and R, so it uses the n = 3 optimum.  Reported
    leakage is the larger of the A-side and B-side per-share values.
    """
    fld = a.field
    q = fld.q
    if q < 3:
        raise ValueError("scheme comparison needs q >= 3")
    s_a = float(empirical_sparsity(a)) if s_a is None else s_a
    s_b = float(empirical_sparsity(b)) if s_b is None else s_b
    reference = sp_mul(a, b)
    inv2 = fld.inv(2)
    pmfs = {}
    for key, nn in (("four", 2), ("three", 3), ("poly", n)):
        pmfs[key] = (solve_optimal_pmf(s_a, s_d, q, nn), solve_optimal_pmf(s_b, s_d, q, nn))

    def leak(key):
        pa, pb = pmfs[key]
        ra, rb = leakage_report(pa, s_a), leakage_report(pb, s_b)
        return max(ra.leakage, rb.leakage), max(ra.relative, rb.relative)

    rows = []
    for seed in seeds:
        rng = Xoshiro256(seed)
        r = sample_scheme_padding(a, pmfs["four"][0], "four", rng)
        s = sample_scheme_padding(b, pmfs["four"][1], "four", rng)
        t1, t2, t3, t4, c = four_task_scheme(a, b, r, s)
        ar, bs = a + r, b + s
        costs = (product_cost(ar, bs), product_cost(ar, s), product_cost(r, bs), product_cost(r, s))
        rows.append(SchemeResult(seed, "four_task", 4, costs, c == reference,
                                 _sparsities((ar, r, bs, s)), *leak("four")))

        r = sample_scheme_padding(a, pmfs["three"][0], "three", rng)
        s = sample_scheme_padding(b, pmfs["three"][1], "three", rng)
        _, _, _, c = three_task_scheme(a, b, r, s)
        ar, ahr = a + r, a.combine(r, inv2)
        bs, bhs = b + s, b.combine(s, inv2)
        costs = (product_cost(ar, bs), product_cost(ahr, s), product_cost(r, bhs))
        rows.append(SchemeResult(seed, "three_task", 3, costs, c == reference,
                                 _sparsities((ar, ahr, r, bs, bhs, s)), *leak("three")))

        params = ShareParams.default(fld, n)
        sa = make_shares(a, sample_padding(a, pmfs["poly"][0], params, rng), params)
        sb = make_shares(b, sample_padding(b, pmfs["poly"][1], params, rng), params)
        evals: list[ProductEvaluation] = evaluate_products(sa, sb)
        costs = tuple(product_cost(x, y) for x, y in zip(sa.shares, sb.shares))
        ok = reconstruct_product(evals, check_extra=True) == reference
        rows.append(SchemeResult(seed, f"poly_n{n}", n, costs, ok,
                                 _sparsities(sa.shares + sb.shares), *leak("poly")))

    header = (f"q={q} s_d={fmt(float(s_d))} s_a={fmt(s_a)} s_b={fmt(s_b)}; padding: four_task uses the n=2 "
              f"optimum, three_task uses the n=3 optimum, poly uses n={n}")
    return SchemeComparison(header, tuple(rows))

