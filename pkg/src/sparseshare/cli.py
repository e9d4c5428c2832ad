"""Command-line entry point: optimize, sweep, encode, multiply, simulate, verify.

Exit codes: 0 success, 1 usage error, 2 infeasible or bad input, 3 failed
verification.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .field import FieldError, PrimeField
from .optimizer import InfeasibleError, RootError, tradeoff_point
from .sharing import DecodeError, encode_matrix, evaluate_products, read_share_set, reconstruct_product
from .simulator import SimConfig, SimReport, compare_schemes, fmt, run_simulation
from .spmat import SourceModel, SpfqFormatError, read_matrix, sample_source_matrix, write_matrix
from .verify import SUITES, load_figure1, run_suite

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3
SWEEP_HEADER = "s_d,n,q,p1,p_star,leakage,relative_leakage"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prob(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is not in [0, 1]")
    return v


def _prime(text: str) -> int:
    try:
        q = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    try:
        PrimeField(q)
    except FieldError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return q


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` (inclusive), a comma list, or ``fig1`` for the tabulated grid."""
    spec = spec.strip()
    if spec == "fig1":
        return [float(x) for x in load_figure1().s_d]
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step))
            if start + count * step > stop + 1e-12 * max(1.0, abs(stop)):
                count -= 1
            return [start + i * step for i in range(count + 1)]
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}") from None


def _check_n(n: int, q: int, minimum: int = 2):
    if not minimum <= n < q:
        raise UsageError(f"need {minimum} <= n < q, got n={n}, q={q}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_optimize(args) -> int:
    _check_n(args.n, args.q)
    pt = tradeoff_point(args.s, args.sd, args.q, args.n)
    fields = [("s", pt.s), ("s_d", pt.s_d), ("n", pt.n), ("q", pt.q), ("p1", pt.p1), ("p_star", pt.p_star),
              ("leakage", pt.leakage), ("relative_leakage", pt.relative), ("boundary", pt.boundary)]
    if args.format == "csv":
        text = ",".join(k for k, _ in fields) + "\n" + ",".join(fmt(v) for _, v in fields) + "\n"
    else:
        text = "".join(f"{k}={fmt(v)}\n" for k, v in fields)
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    for n in args.n_list:
        _check_n(n, args.q)
    lines = [SWEEP_HEADER]
    for n in sorted(set(args.n_list)):
        for x in sorted(args.sd_grid):
            pt = tradeoff_point(args.s, x, args.q, n)
            vals = (pt.s_d, pt.n, pt.q, pt.p1, pt.p_star, pt.leakage, pt.relative)
            lines.append(",".join(fmt(v) for v in vals))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_encode(args) -> int:
    a = read_matrix(args.input)
    _check_n(args.n, a.field.q)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        shares = encode_matrix(a, args.sd, args.n, seed=args.seed, s=args.s)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    shares.write(args.outdir)
    print(f"wrote {args.n} shares of a {a.shape[0]}x{a.shape[1]} matrix to {args.outdir}")
    return EXIT_OK


def cmd_multiply(args) -> int:
    picks = args.pick
    if len(picks) < 3:
        raise DecodeError(f"need at least 3 share indices, got {len(picks)}")
    sa, sb = read_share_set(args.shares_a), read_share_set(args.shares_b)
    if sa.field != sb.field:
        raise FieldError("share sets use different fields")
    if sa.shape[1] != sb.shape[0]:
        raise ValueError(f"inner dimensions differ: {sa.shape} x {sb.shape}")
    c = reconstruct_product(evaluate_products(sa, sb, picks), check_extra=True)
    write_matrix(c, args.out)
    print(f"decoded {c.shape[0]}x{c.shape[1]} product ({c.nnz} nonzeros) from shares {picks}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.n < 3:
        raise UsageError(f"decoding needs n >= 3, got n={args.n}")
    _check_n(args.n, args.q, 3)
    dims = tuple(args.dims)
    if len(dims) != 3:
        raise UsageError("--dims takes k,m,p")
    sd_b = args.sd if args.sd_b is None else args.sd_b
    s_b = args.s if args.s_b is None else args.s_b
    if args.compare:
        fld = PrimeField(args.q)
        k, m, p = dims
        a = sample_source_matrix(SourceModel(fld, args.s), k, m, args.seed)
        b = sample_source_matrix(SourceModel(fld, s_b), m, p, args.seed + 1)
        _emit(compare_schemes(a, b, args.seeds or [args.seed], args.sd, args.n, args.s, s_b).to_csv(), args.out)
        return EXIT_OK
    reports = []
    for seed in args.seeds or [args.seed]:
        cfg = SimConfig(n=args.n, q=args.q, dims=dims, s_a=args.s, s_b=s_b, s_d_a=args.sd, s_d_b=sd_b,
                        seed=seed, delay_base=args.delay_base, delay_rate=args.delay_rate, per_op=args.per_op,
                        stragglers=frozenset(args.stragglers), straggler_delay=args.straggler_delay)
        reports.append(run_simulation(cfg))
    if args.format == "csv":
        text = SimReport.csv_header() + "\n" + "".join(r.csv_row() + "\n" for r in reports)
    else:
        text = "\n\n".join(r.to_text() for r in reports) + "\n"
    _emit(text, args.out)
    return EXIT_OK if all(r.decode_ok for r in reports) else EXIT_VERIFY


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    ok = all(c.ok for c in checks)
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparseshare", description="Sparse and private shares for distributed matrix products.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, q_default=89):
        sp.add_argument("--q", type=_prime, default=q_default, help="field size (prime)")
        sp.add_argument("--s", type=_prob, default=0.95, help="source sparsity")
        sp.add_argument("--format", choices=("text", "csv"), default="text")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    sp = sub.add_parser("optimize", help="optimal padding law for one target sparsity")
    common(sp)
    sp.add_argument("--sd", type=_prob, required=True, help="target share sparsity")
    sp.add_argument("--n", type=int, default=2, help="number of shares")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="leakage versus target sparsity as CSV")
    common(sp)
    sp.add_argument("--n-list", type=_int_list, default=[2], help="comma-separated share counts")
    sp.add_argument("--sd-grid", type=parse_grid, required=True, help="start:stop:step, a comma list, or fig1")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("encode", help="split an SPFQ matrix into n shares")
    sp.add_argument("--in", dest="input", required=True, help="input SPFQ matrix")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--sd", type=_prob, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--s", type=_prob, default=None, help="source sparsity (default: measured)")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("multiply", help="multiply matching shares and decode the product")
    sp.add_argument("--shares-a", required=True)
    sp.add_argument("--shares-b", required=True)
    sp.add_argument("--pick", type=_int_list, required=True, help="1-based share indices, at least 3")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_multiply)

    sp = sub.add_parser("simulate", help="simulate workers with stragglers")
    common(sp)
    sp.add_argument("--n", type=int, default=5)
    sp.add_argument("--sd", type=_prob, default=0.9)
    sp.add_argument("--s-b", type=_prob, default=None, help="sparsity of B (default: --s)")
    sp.add_argument("--sd-b", type=_prob, default=None, help="target sparsity for B's shares (default: --sd)")
    sp.add_argument("--dims", type=_int_list, default=[50, 40, 60], help="k,m,p for A (k x m) and B (m x p)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seeds", type=_int_list, default=None, help="run several seeds (one row each)")
    sp.add_argument("--stragglers", type=_int_list, default=[], help="1-based workers forced to straggle")
    sp.add_argument("--straggler-delay", type=float, default=float("inf"))
    sp.add_argument("--delay-base", type=float, default=1.0)
    sp.add_argument("--delay-rate", type=float, default=1.0)
    sp.add_argument("--per-op", type=float, default=1e-4)
    sp.add_argument("--compare", action="store_true", help="compare the four-task, three-task and n-share schemes")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run a self-check battery")
    sp.add_argument("--suite", choices=sorted(SUITES), required=True)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sparseshare: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, RootError, DecodeError, FieldError, SpfqFormatError, ValueError, OSError) as exc:
        print(f"sparseshare: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
