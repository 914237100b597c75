"""End-to-end command-line behavior and exit codes."""

from __future__ import annotations

import csv
import json

import pytest

from corriter.cli import main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def results_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    code = run_cli(
        "run", "--dims", "3,6", "--trials", "40", "--seed", "7",
        "--threads", "1", "--out", str(out),
    )
    assert code == 0
    return out


def test_run_writes_four_files(results_dir):
    names = {p.name for p in results_dir.iterdir()}
    assert names == {"traces.csv", "summary.csv", "curves.csv", "manifest.json"}


def test_run_deterministic_outputs(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert run_cli(
            "run", "--dims", "3,6", "--trials", "10", "--seed", "11",
            "--threads", "1", "--out", str(out),
        ) == 0
    for name in ("traces.csv", "summary.csv", "curves.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_deterministic_across_thread_counts(tmp_path):
    a = tmp_path / "t1"
    b = tmp_path / "t4"
    assert run_cli("run", "--dims", "3", "--trials", "12", "--seed", "3",
                   "--threads", "1", "--out", str(a)) == 0
    assert run_cli("run", "--dims", "3", "--trials", "12", "--seed", "3",
                   "--threads", "4", "--out", str(b)) == 0
    assert (a / "traces.csv").read_bytes() == (b / "traces.csv").read_bytes()


def test_run_rejects_dimension_two(tmp_path, capsys):
    code = run_cli("run", "--dims", "2", "--out", str(tmp_path / "x"))
    assert code == 1
    assert "collapses" in capsys.readouterr().err


def test_run_rejects_malformed_dims(tmp_path):
    assert run_cli("run", "--dims", "3;6", "--out", str(tmp_path / "x")) == 1


def test_manifest_inventory_covers_outputs(results_dir):
    manifest = json.loads((results_dir / "manifest.json").read_text())
    names = {f["name"] for f in manifest["files"]}
    assert names == {"traces.csv", "summary.csv", "curves.csv"}
    assert manifest["tool_version"]


def test_dump_final_matrices(tmp_path):
    out = tmp_path / "dump"
    assert run_cli(
        "run", "--dims", "3", "--trials", "2", "--seed", "5",
        "--threads", "1", "--out", str(out), "--dump-final-matrices",
    ) == 0
    dumped = sorted(p.name for p in out.glob("final_*.csv"))
    assert dumped == ["final_n3_t0.csv", "final_n3_t1.csv"]
    rows = list(csv.reader(open(out / "final_n3_t0.csv", newline="")))
    assert len(rows) == 3 and len(rows[0]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert "final_n3_t0.csv" in {f["name"] for f in manifest["files"]}


def test_aggregate_reproduces_run_outputs(results_dir, tmp_path):
    out = tmp_path / "agg"
    assert run_cli("aggregate", "--in", str(results_dir), "--out", str(out)) == 0
    assert (out / "summary.csv").read_bytes() == (results_dir / "summary.csv").read_bytes()
    assert (out / "curves.csv").read_bytes() == (results_dir / "curves.csv").read_bytes()


def test_aggregate_pool_and_per_dim(results_dir, tmp_path):
    pool = tmp_path / "pool"
    per = tmp_path / "per"
    assert run_cli("aggregate", "--in", str(results_dir), "--out", str(pool), "--pool") == 0
    assert run_cli("aggregate", "--in", str(results_dir), "--out", str(per), "--per-dim") == 0
    pool_scopes = {r["scope"] for r in csv.DictReader(open(pool / "curves.csv", newline=""))}
    per_scopes = {r["scope"] for r in csv.DictReader(open(per / "curves.csv", newline=""))}
    assert pool_scopes == {"pooled"}
    assert per_scopes == {"3", "6"}


def test_verify_writes_reports_and_consistent_exit(results_dir, capsys):
    code = run_cli("verify", "--in", str(results_dir), "--laws", "I,IV")
    out_text = capsys.readouterr().out
    assert "law I:" in out_text and "law IV:" in out_text
    payload = json.loads((results_dir / "laws.json").read_text())
    assert [r["law_id"] for r in payload] == ["I", "IV"]
    all_pass = all(r["pass"] for r in payload)
    assert code == (0 if all_pass else 1)
    assert (results_dir / "laws.txt").exists()


def test_verify_missing_traces(tmp_path, capsys):
    code = run_cli("verify", "--in", str(tmp_path))
    assert code == 1
    assert "missing" in capsys.readouterr().err.lower()


def test_verify_rejects_unknown_law(results_dir):
    assert run_cli("verify", "--in", str(results_dir), "--laws", "V") == 1


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("CORRITER_THREADS", "2")
    out = tmp_path / "env"
    assert run_cli("run", "--dims", "3", "--trials", "4", "--seed", "2",
                   "--out", str(out)) == 0
    assert (out / "traces.csv").exists()
