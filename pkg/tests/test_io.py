"""CSV schemas, exact round-trips, manifests, and law-report files."""

from __future__ import annotations

import csv
import json

import pytest

from corriter import ExperimentConfig, run_experiment, verify_law4
from corriter.errors import MissingInputError, SchemaMismatchError
from corriter.io import (
    CURVES_COLUMNS,
    SUMMARY_COLUMNS,
    TRACES_COLUMNS,
    build_curves,
    build_summary_rows,
    file_digest,
    read_traces_csv,
    write_curves_csv,
    write_law_reports,
    write_manifest,
    write_summary_csv,
    write_traces_csv,
)


@pytest.fixture(scope="module")
def outcomes():
    config = ExperimentConfig(dims=(3, 6), trials=10, master_seed=7, threads=1)
    return run_experiment(config)


@pytest.fixture(scope="module")
def traces(outcomes):
    return [o.trace for o in outcomes]


def test_traces_round_trip_exact(tmp_path, traces):
    path = tmp_path / "traces.csv"
    write_traces_csv(path, traces)
    assert read_traces_csv(path) == traces


def test_traces_rewrite_byte_identical(tmp_path, traces):
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    write_traces_csv(p1, traces)
    write_traces_csv(p2, read_traces_csv(p1))
    assert p1.read_bytes() == p2.read_bytes()


def test_traces_header_schema_is_fixed(tmp_path, traces):
    path = tmp_path / "traces.csv"
    write_traces_csv(path, traces)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == TRACES_COLUMNS


def test_unknown_columns_rejected(tmp_path, traces):
    path = tmp_path / "traces.csv"
    write_traces_csv(path, traces)
    lines = path.read_text().splitlines()
    lines[0] = lines[0] + ",bogus"
    tampered = tmp_path / "tampered.csv"
    tampered.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaMismatchError):
        read_traces_csv(tampered)


def test_renamed_column_rejected(tmp_path, traces):
    path = tmp_path / "traces.csv"
    write_traces_csv(path, traces)
    lines = path.read_text().splitlines()
    lines[0] = lines[0].replace("delta", "step")
    tampered = tmp_path / "tampered.csv"
    tampered.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaMismatchError):
        read_traces_csv(tampered)


def test_empty_file_rejected(tmp_path):
    p = tmp_path / "traces.csv"
    p.write_text("")
    with pytest.raises(SchemaMismatchError):
        read_traces_csv(p)


def test_missing_file_raises(tmp_path):
    with pytest.raises(MissingInputError):
        read_traces_csv(tmp_path / "nope.csv")


def test_rho_empty_on_last_step(tmp_path, traces):
    path = tmp_path / "traces.csv"
    write_traces_csv(path, traces)
    rows = list(csv.DictReader(open(path, newline="")))
    last_by_key = {}
    for r in rows:
        last_by_key[(r["n"], r["trial_id"])] = r
    assert all(r["rho"] == "" for r in last_by_key.values())


def test_summary_rows_and_file(tmp_path, traces):
    rows = build_summary_rows(traces)
    metrics = {(n, m) for n, m, _ in rows}
    for n in (3, 6):
        for metric in ("rho0", "T_1e6", "T_1e12", "v_total", "max_overshoot"):
            assert (n, metric) in metrics
    path = tmp_path / "summary.csv"
    write_summary_csv(path, traces)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        assert tuple(next(reader)) == SUMMARY_COLUMNS
        assert sum(1 for _ in reader) == len(rows)


def test_curves_share_pooled_edges(tmp_path, traces):
    curves = build_curves(traces, num_bins=10, min_bin_count=2)
    assert "pooled" in curves and "3" in curves and "6" in curves
    assert curves["3"].bin_edges == curves["pooled"].bin_edges
    path = tmp_path / "curves.csv"
    write_curves_csv(path, curves)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        assert tuple(next(reader)) == CURVES_COLUMNS
        scopes = {row[0] for row in reader}
    assert scopes == {"pooled", "3", "6"}


def test_curves_scope_subsets(traces):
    only_pooled = build_curves(traces, min_bin_count=2, per_dim=False)
    assert set(only_pooled) == {"pooled"}
    only_dims = build_curves(traces, min_bin_count=2, pooled=False)
    assert set(only_dims) == {"3", "6"}


def test_manifest_digests_match(tmp_path, traces):
    config = ExperimentConfig(dims=(3, 6), trials=10, master_seed=7, threads=1)
    t = tmp_path / "traces.csv"
    s = tmp_path / "summary.csv"
    write_traces_csv(t, traces)
    write_summary_csv(s, traces)
    manifest_path = write_manifest(tmp_path, config, "start", "finish", [t, s])
    manifest = json.loads(manifest_path.read_text())
    assert manifest["trial_counts"] == {"3": 10, "6": 10}
    by_name = {f["name"]: f for f in manifest["files"]}
    assert by_name["traces.csv"]["sha256"] == file_digest(t)
    assert by_name["summary.csv"]["bytes"] == s.stat().st_size
    assert manifest["config"]["master_seed"] == 7


def test_law_report_files(tmp_path, outcomes):
    from corriter import LawThresholds

    report = verify_law4(outcomes, LawThresholds(min_trials=5))
    txt, js = write_law_reports(tmp_path, [report])
    assert "law IV:" in txt.read_text()
    payload = json.loads(js.read_text())
    assert payload[0]["law_id"] == "IV"
    assert isinstance(payload[0]["pass"], bool)
