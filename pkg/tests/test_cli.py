import csv
import io

import pytest

from sparseshare.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, SWEEP_HEADER, main, parse_grid
from sparseshare.field import PrimeField
from sparseshare.spmat import SourceModel, read_matrix, sample_source_matrix, sp_mul, write_matrix
from sparseshare.verify import load_figure1

F89 = PrimeField(89)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def usage(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    capsys.readouterr()
    return exc.value.code


def test_optimize_text(capsys):
    code, out, _ = run(capsys, "optimize", "--sd", "0.90019681165125", "--n", "2")
    assert code == EXIT_OK
    kv = dict(line.split("=") for line in out.splitlines())
    assert float(kv["relative_leakage"]) == pytest.approx(0.233698563732722, abs=1e-6)
    assert kv["boundary"] == "0"


def test_optimize_csv_to_file(capsys, tmp_path):
    out = tmp_path / "o.csv"
    code, _, _ = run(capsys, "optimize", "--sd", "0.5", "--format", "csv", "--out", str(out))
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1 and float(rows[0]["s_d"]) == 0.5


def test_optimize_uniform_target(capsys):
    code, out, _ = run(capsys, "optimize", "--sd", repr(1 / 89), "--n", "3")
    assert code == EXIT_OK
    kv = dict(line.split("=") for line in out.splitlines())
    assert float(kv["relative_leakage"]) <= 1e-15


def test_optimize_domain_errors(capsys):
    assert run(capsys, "optimize", "--sd", "0.99")[0] == EXIT_DOMAIN
    assert run(capsys, "optimize", "--sd", "0.99", "--n", "5")[0] == EXIT_DOMAIN
    assert run(capsys, "optimize", "--sd", "0.5", "--n", "89")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ("optimize",),
    ("optimize", "--sd", "1.5"),
    ("optimize", "--sd", "0.5", "--q", "90"),
    ("sweep", "--sd-grid", "0.1:0.5:-1"),
    ("bogus",),
    (),
])
def test_usage_errors(capsys, argv):
    assert usage(capsys, *argv) == EXIT_USAGE


def test_parse_grid():
    assert parse_grid("0.1:0.5:0.1") == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
    assert parse_grid("0.3,0.1") == [0.3, 0.1]
    assert len(parse_grid("fig1")) == 95


def test_sweep_tabulated_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--sd-grid", "fig1", "--n-list", "2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == SWEEP_HEADER
    rows = list(csv.DictReader(io.StringIO(out)))
    table = load_figure1()
    got = sorted((float(r["s_d"]), float(r["relative_leakage"])) for r in rows)
    ref = sorted(zip(table.s_d, table.tasks_t))
    assert len(got) == len(ref)
    assert max(abs(g[1] - r[1]) for g, r in zip(got, ref)) <= 1e-6


def test_sweep_sorted_by_n_then_sd(capsys):
    code, out, _ = run(capsys, "sweep", "--sd-grid", "0.5,0.2", "--n-list", "3,2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["n"], r["s_d"]) for r in rows] == [("2", "0.2"), ("2", "0.5"), ("3", "0.2"), ("3", "0.5")]


def test_sweep_share_counts(capsys):
    code, out, _ = run(capsys, "sweep", "--sd-grid", "0.9", "--n-list", "2,3,4,5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["n"] for r in rows] == ["2", "3", "4", "5"]
    assert float(rows[-1]["relative_leakage"]) == pytest.approx(0.284, abs=1e-3)


def test_sweep_infeasible_point(capsys):
    assert run(capsys, "sweep", "--sd-grid", "0.5,0.99")[0] == EXIT_DOMAIN


def _encode(capsys, tmp_path, name, mat, *extra):
    path = tmp_path / f"{name}.spfq"
    write_matrix(mat, path)
    outdir = tmp_path / name
    code, out, err = run(capsys, "encode", "--in", str(path), "--n", "4", "--sd", "0.8",
                         "--outdir", str(outdir), *extra)
    return code, outdir, err


def test_encode_multiply_round_trip(capsys, tmp_path):
    a = sample_source_matrix(SourceModel(F89, 0.9), 12, 10, 1)
    b = sample_source_matrix(SourceModel(F89, 0.9), 10, 8, 2)
    code_a, da, _ = _encode(capsys, tmp_path, "a", a, "--seed", "3")
    code_b, db, _ = _encode(capsys, tmp_path, "b", b, "--seed", "4", "--s", "0.9")
    assert code_a == code_b == EXIT_OK
    out = tmp_path / "c.spfq"
    code, _, _ = run(capsys, "multiply", "--shares-a", str(da), "--shares-b", str(db), "--pick", "4,1,3",
                     "--out", str(out))
    assert code == EXIT_OK
    assert read_matrix(out) == sp_mul(a, b)
    assert run(capsys, "multiply", "--shares-a", str(da), "--shares-b", str(db), "--pick", "1,2",
               "--out", str(out))[0] == EXIT_DOMAIN
    assert run(capsys, "multiply", "--shares-a", str(da), "--shares-b", str(da), "--pick", "1,2,3",
               "--out", str(out))[0] == EXIT_DOMAIN


def test_encode_warns_and_fails(capsys, tmp_path):
    a = sample_source_matrix(SourceModel(F89, 0.9), 5, 5, 1)
    path = tmp_path / "a.spfq"
    write_matrix(a, path)
    code, _, err = run(capsys, "encode", "--in", str(path), "--n", "2", "--sd", "0.005", "--s", "0.9",
                       "--outdir", str(tmp_path / "w"))
    assert code == EXIT_OK and "warning" in err
    assert run(capsys, "encode", "--in", str(tmp_path / "missing.spfq"), "--n", "2", "--sd", "0.5",
               "--outdir", str(tmp_path / "x"))[0] == EXIT_DOMAIN
    (tmp_path / "bad.spfq").write_text("garbage\n")
    assert run(capsys, "encode", "--in", str(tmp_path / "bad.spfq"), "--n", "2", "--sd", "0.5",
               "--outdir", str(tmp_path / "y"))[0] == EXIT_DOMAIN


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--dims", "20,15,25", "--seeds", "0,1", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 2 and all(r["decode_ok"] == "1" for r in rows)


def test_simulate_exit_codes(capsys):
    assert run(capsys, "simulate", "--n", "4", "--dims", "5,5,5", "--stragglers", "1,2")[0] == EXIT_VERIFY
    assert run(capsys, "simulate", "--n", "2")[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--dims", "5,5")[0] == EXIT_USAGE
    assert run(capsys, "simulate", "--sd", "0.99")[0] == EXIT_DOMAIN


def test_simulate_compare(capsys):
    code, out, _ = run(capsys, "simulate", "--compare", "--dims", "20,15,25", "--n", "4")
    assert code == EXIT_OK
    assert "four_task" in out and "three_task" in out and "poly_n4" in out


@pytest.mark.parametrize("suite", ["figure1", "lemma1"])
def test_verify(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite)
    assert code == EXIT_OK
    assert out.splitlines()[-1] == f"suite {suite}: PASS"
