import csv
import io
import json
from fractions import Fraction

import pytest

from chorealloc.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def table1_file(tmp_path, capsys):
    path = tmp_path / "t1.json"
    assert main(["gen", "table1", "--eps", "1/4", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


def test_solve_table1(capsys, table1_file):
    code, out, _ = run(capsys, "solve", table1_file, "--alg", "efx-mms")
    assert code == 0
    data = json.loads(out)
    assert data["social_cost"] == "9/4"
    assert data["bundles"] == {"1": ["e1"], "2": ["e2", "e3"]}
    assert data["algorithm"] == "efx-mms"


def test_solve_ef1(capsys, table1_file):
    code, out, _ = run(capsys, "solve", table1_file, "--alg", "ef1-mms-po", "--verify")
    assert code == 0
    data = json.loads(out)
    assert data["social_cost"] == "5/4"
    assert data["report"]["failed"] == []


def test_solve_verify_writes_table(capsys, table1_file):
    code, out, err = run(capsys, "solve", table1_file, "--verify", "--trace")
    assert code == 0
    assert "N0=[1]" in err and "all required properties hold" in err
    data = json.loads(out)
    assert data["trace"]["last_modifier"] == [0, 2]
    assert data["report"]["efficiency"]["N2"] == [2]


def test_solve_agent_order(capsys, table1_file):
    code, out, _ = run(capsys, "solve", table1_file, "--agent-order", "2,1")
    assert json.loads(out)["bundles"]["2"] == ["e1"]
    assert run(capsys, "solve", table1_file, "--agent-order", "2,2")[0] == 2
    assert run(capsys, "solve", table1_file, "--agent-order", "x")[0] == 2
    code, out, _ = run(capsys, "solve", table1_file, "--seed", "7")
    assert code == 0 and json.loads(out)["social_cost"] == "9/4"


def test_input_errors(capsys, tmp_path):
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", bad)[0] == 2
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"n": 2, "items": [{"id": "a", "cost": "-1"}]}))
    code, _, err = run(capsys, "solve", neg)
    assert code == 2 and "error" in err


def test_budget_exit(capsys, tmp_path):
    path = tmp_path / "big.json"
    items = [{"id": f"e{k}", "cost": 1000 + 7 * k} for k in range(14)]
    path.write_text(json.dumps({"n": 3, "items": items}))
    assert run(capsys, "solve", path, "--budget", "20")[0] == 3


def test_verify_violation(capsys, tmp_path, table1_file):
    alloc = tmp_path / "a.json"
    alloc.write_text(json.dumps({"bundles": {"1": ["e1", "e3"], "2": ["e2"]}}))
    code, out, err = run(capsys, "verify", table1_file, alloc)
    assert code == 1
    assert json.loads(out)["failed"] == ["efx"]
    assert "FAILED: efx" in err
    assert run(capsys, "verify", table1_file, alloc, "--require", "ef1,mms,po")[0] == 0
    assert run(capsys, "verify", table1_file, alloc, "--require", "po-exhaustive")[0] == 0
    assert run(capsys, "verify", table1_file, alloc, "--require", "fast")[0] == 2


def test_verify_round_trip(capsys, tmp_path, table1_file):
    for algorithm in ("efx-mms", "efx-mms-poly", "ef1-mms-po"):
        out_file = tmp_path / f"{algorithm}.json"
        assert run(capsys, "solve", table1_file, "--alg", algorithm, "--trace", "--out", out_file)[0] == 0
        code, out, _ = run(capsys, "verify", table1_file, out_file)
        assert code == 0
        report = json.loads(out)
        assert report["required"] and report["failed"] == []
    report = json.loads(run(capsys, "verify", table1_file, tmp_path / "efx-mms.json")[1])
    assert report["efficiency"]["N0"] == [1]


def test_verify_empty_instance(capsys, tmp_path):
    inst = tmp_path / "empty.json"
    inst.write_text(json.dumps({"n": 2, "items": []}))
    alloc = tmp_path / "a.json"
    alloc.write_text(json.dumps({"bundles": {"1": [], "2": []}}))
    assert run(capsys, "verify", inst, alloc)[0] == 0
    alloc.write_text(json.dumps({"nothing": 1}))
    assert run(capsys, "verify", inst, alloc)[0] == 2


def test_mms_command(capsys, table1_file):
    code, out, _ = run(capsys, "mms", table1_file)
    assert code == 0 and json.loads(out) == {"1": "5/4", "2": "5/4"}
    assert json.loads(run(capsys, "mms", table1_file, "--agent", "2")[1]) == {"2": "5/4"}
    assert run(capsys, "mms", table1_file, "--agent", "5")[0] == 2


def test_gen_command(capsys):
    code, out, _ = run(capsys, "gen", "random", "--n", "2", "--m", "4", "--seed", "3")
    assert code == 0
    first = json.loads(out)
    assert first["n"] == 2 and len(first["items"]) == 4
    assert json.loads(run(capsys, "gen", "random", "--n", "2", "--m", "4", "--seed", "3")[1]) == first
    binary = json.loads(run(capsys, "gen", "binary", "--n", "2", "--m", "5")[1])
    assert {i["cost"] for i in binary["items"]} == {"1"}
    assert run(capsys, "gen", "table3", "--eps", "1/2")[0] == 2


def bench(capsys, *extra):
    code, out, err = run(capsys, "bench", *extra)
    return code, list(csv.DictReader(io.StringIO(out))), err


def test_bench_efx_sweep(capsys):
    code, rows, _ = bench(capsys, "--alg", "efx-mms", "--n", 3, "--m", 7, "--seeds", "0:100", "--no-timing")
    assert code == 0 and len(rows) == 100
    assert list(rows[0]) == ["seed", "n", "m", "algorithm", "sc", "opt", "ratio",
                             "n0", "n1", "n2", "rebalance_rounds", "runtime"]
    for row in rows:
        if row["ratio"] != "NA":
            assert Fraction(row["ratio"]) <= 2
        assert int(row["n0"]) >= int(row["n2"])
        assert int(row["n0"]) + int(row["n1"]) + int(row["n2"]) == 3


def test_bench_ef1_and_empty(capsys):
    code, rows, _ = bench(capsys, "--alg", "ef1-mms-po", "--seeds", "20", "--no-timing")
    assert code == 0 and all(r["sc"] == r["opt"] for r in rows)
    code, rows, _ = bench(capsys, "--m", 0, "--seeds", "3")
    assert code == 0 and {r["ratio"] for r in rows} == {"NA"}
    assert bench(capsys, "--seeds", "a:b")[0] == 2


def test_bench_is_deterministic(capsys):
    args = ("--alg", "efx-mms-poly", "--seeds", "5:25", "--no-timing")
    first = run(capsys, "bench", *args)[1]
    assert run(capsys, "bench", *args, "--workers", 4)[1] == first
    code, rows, _ = bench(capsys, "--seeds", "2")
    assert all(float(r["runtime"]) >= 0 for r in rows)


def test_counterexample(capsys, tmp_path):
    code, out, _ = run(capsys, "counterexample")
    assert code == 0 and out.strip() == "0 / 1024 EFX"
    code, out, _ = run(capsys, "counterexample", "infty", "--graph", "k3", "--out", tmp_path / "k3.json")
    assert code == 0 and out.strip() == "2 / 8 EFX"
    assert json.loads((tmp_path / "k3.json").read_text())["efx"] == 2
    assert run(capsys, "counterexample", "--budget", "10")[0] == 3
    assert run(capsys, "counterexample", "--graph", "petersen")[0] == 2
