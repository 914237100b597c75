"""Bit-stable serialization of traces, summaries, curves, and run manifests.

Flat, figure-ready CSV tables with fixed column sets (unknown columns are
rejected on read).  Reals are written with Python's shortest round-trip
decimal representation, so parsing reproduces every float bit-exactly and
re-serialization is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .core import SignPattern
from .diagnostics import StepRecord, Termination, TrajectoryTrace
from .errors import MissingInputError, SchemaMismatchError
from .harness import ExperimentConfig, TrialOutcome
from .laws import (
    BinnedCurve,
    LawReport,
    QuantileSummary,
    binned_contraction_curve,
    collect_pairs,
    first_step_ratio,
    max_overshoot,
    summarize,
)

__all__ = [
    "TRACES_COLUMNS",
    "SUMMARY_COLUMNS",
    "CURVES_COLUMNS",
    "RunManifest",
    "write_traces_csv",
    "read_traces_csv",
    "build_summary_rows",
    "write_summary_csv",
    "build_curves",
    "write_curves_csv",
    "write_final_matrix_csv",
    "write_manifest",
    "write_law_reports",
]

TRACES_COLUMNS = (
    "n", "trial_id", "seed", "k", "delta", "e_step", "rho", "terminated_by",
    "t_conv_1e6", "t_conv_1e12", "v_total", "pattern_signs", "pattern_trivial",
    "resample_count",
)

SUMMARY_COLUMNS = (
    "n", "metric", "count", "min", "q05", "q25", "median", "q75", "q90",
    "q95", "q99", "max", "mean", "stddev",
)

CURVES_COLUMNS = (
    "scope", "bin_lo", "bin_hi", "delta_median", "rho_median", "rho_p10",
    "rho_p90", "count",
)


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_opt_int(v: int | None) -> str:
    return "" if v is None else str(v)


def _signs_str(pattern: SignPattern | None) -> str:
    if pattern is None:
        return ""
    return "".join("+" if s == 1 else "-" for s in pattern.signs)


def _open_write(path: Path):
    return open(path, "w", newline="", encoding="utf-8")


# ---------------------------------------------------------------------------
# traces.csv
# ---------------------------------------------------------------------------


def write_traces_csv(path: str | Path, outcomes: Iterable[TrialOutcome | TrajectoryTrace]) -> None:
    """One row per recorded step; trajectory-level fields repeated on every
    row of the trajectory; rho empty on the last step."""
    path = Path(path)
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACES_COLUMNS)
        for item in outcomes:
            trace: TrajectoryTrace = getattr(item, "trace", item)
            signs = _signs_str(trace.pattern)
            trivial = "" if trace.pattern is None else str(trace.pattern.is_trivial).lower()
            shared = (
                str(trace.n),
                str(trace.trial_id),
                str(trace.seed),
            )
            tail = (
                trace.terminated_by.value,
                _fmt_opt_int(trace.t_conv_1e6),
                _fmt_opt_int(trace.t_conv_1e12),
                _fmt(trace.v_total),
                signs,
                trivial,
                str(trace.resample_count),
            )
            for step in trace.steps:
                writer.writerow(
                    shared
                    + (
                        str(step.k),
                        _fmt(step.delta),
                        _fmt(step.e_step),
                        "" if step.rho is None else _fmt(step.rho),
                    )
                    + tail
                )


def read_traces_csv(path: str | Path) -> list[TrajectoryTrace]:
    """Parse traces back into TrajectoryTrace values (exact round-trip)."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatchError(f"{path}: empty file, expected header row")
        if header != TRACES_COLUMNS:
            raise SchemaMismatchError(
                f"{path}: column set {header!r} does not match the fixed schema "
                f"{TRACES_COLUMNS!r}"
            )
        grouped: dict[tuple[int, int], dict] = {}
        order: list[tuple[int, int]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACES_COLUMNS):
                raise SchemaMismatchError(f"{path}:{lineno}: wrong field count")
            rec = dict(zip(TRACES_COLUMNS, row))
            key = (int(rec["n"]), int(rec["trial_id"]))
            entry = grouped.get(key)
            if entry is None:
                pattern = None
                if rec["pattern_signs"]:
                    signs = tuple(1 if c == "+" else -1 for c in rec["pattern_signs"])
                    pattern = SignPattern(
                        signs=signs, is_trivial=rec["pattern_trivial"] == "true"
                    )
                entry = {
                    "seed": int(rec["seed"]),
                    "steps": [],
                    "t6": int(rec["t_conv_1e6"]) if rec["t_conv_1e6"] else None,
                    "t12": int(rec["t_conv_1e12"]) if rec["t_conv_1e12"] else None,
                    "v": float(rec["v_total"]),
                    "term": Termination(rec["terminated_by"]),
                    "pattern": pattern,
                    "resamples": int(rec["resample_count"]),
                }
                grouped[key] = entry
                order.append(key)
            entry["steps"].append(
                StepRecord(
                    k=int(rec["k"]),
                    delta=float(rec["delta"]),
                    e_step=float(rec["e_step"]),
                    rho=float(rec["rho"]) if rec["rho"] else None,
                )
            )
    traces = []
    for n, trial_id in order:
        e = grouped[(n, trial_id)]
        traces.append(
            TrajectoryTrace(
                n=n,
                trial_id=trial_id,
                seed=e["seed"],
                steps=tuple(sorted(e["steps"], key=lambda s: s.k)),
                t_conv_1e6=e["t6"],
                t_conv_1e12=e["t12"],
                v_total=e["v"],
                terminated_by=e["term"],
                pattern=e["pattern"],
                resample_count=e["resamples"],
            )
        )
    return traces


# ---------------------------------------------------------------------------
# summary.csv
# ---------------------------------------------------------------------------


def _metric_samples(traces: Sequence[TrajectoryTrace], metric: str) -> list[float]:
    if metric == "rho0":
        return [r for r in map(first_step_ratio, traces) if r is not None]
    if metric == "T_1e6":
        return [float(t.t_conv_1e6) for t in traces if t.t_conv_1e6 is not None]
    if metric == "T_1e12":
        return [float(t.t_conv_1e12) for t in traces if t.t_conv_1e12 is not None]
    if metric == "v_total":
        return [t.v_total for t in traces]
    if metric == "max_overshoot":
        return [m for m in map(max_overshoot, traces) if m is not None]
    raise ValueError(f"unknown metric {metric!r}")


SUMMARY_METRICS = ("rho0", "T_1e6", "T_1e12", "v_total", "max_overshoot")


def build_summary_rows(
    traces: Sequence[TrajectoryTrace],
) -> list[tuple[int, str, QuantileSummary]]:
    by_dim: dict[int, list[TrajectoryTrace]] = {}
    for t in traces:
        by_dim.setdefault(t.n, []).append(t)
    rows = []
    for n in sorted(by_dim):
        for metric in SUMMARY_METRICS:
            samples = _metric_samples(by_dim[n], metric)
            if samples:
                rows.append((n, metric, summarize(samples)))
    return rows


def write_summary_csv(path: str | Path, traces: Sequence[TrajectoryTrace]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for n, metric, s in build_summary_rows(traces):
            writer.writerow(
                (str(n), metric, str(s.count))
                + tuple(_fmt(v) for v in s.as_row()[1:])
            )


# ---------------------------------------------------------------------------
# curves.csv
# ---------------------------------------------------------------------------


def build_curves(
    traces: Sequence[TrajectoryTrace],
    num_bins: int = 24,
    min_bin_count: int = 20,
    *,
    pooled: bool = True,
    per_dim: bool = True,
) -> dict[str, BinnedCurve]:
    """Pooled and/or per-dimension binned ratio curves.  Per-dimension
    curves share the pooled curve's bin edges so they are comparable."""
    curves: dict[str, BinnedCurve] = {}
    pairs = collect_pairs(traces)
    if not pairs:
        return curves
    pooled_curve = binned_contraction_curve(pairs, num_bins, min_bin_count)
    if pooled:
        curves["pooled"] = pooled_curve
    if per_dim:
        by_dim: dict[int, list[TrajectoryTrace]] = {}
        for t in traces:
            by_dim.setdefault(t.n, []).append(t)
        for n in sorted(by_dim):
            dim_pairs = collect_pairs(by_dim[n])
            if dim_pairs:
                curves[str(n)] = binned_contraction_curve(
                    dim_pairs, num_bins, min_bin_count, edges=pooled_curve.bin_edges
                )
    return curves


def write_curves_csv(path: str | Path, curves: Mapping[str, BinnedCurve]) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVES_COLUMNS)
        for scope in curves:
            for b in curves[scope].bins:
                writer.writerow(
                    (
                        scope,
                        _fmt(b.lo),
                        _fmt(b.hi),
                        _fmt(b.delta_median),
                        _fmt(b.rho_median),
                        _fmt(b.rho_p10),
                        _fmt(b.rho_p90),
                        str(b.count),
                    )
                )


# ---------------------------------------------------------------------------
# final-matrix dumps
# ---------------------------------------------------------------------------


def write_final_matrix_csv(path: str | Path, entries) -> None:
    with _open_write(Path(path)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in entries:
            writer.writerow(tuple(_fmt(v) for v in row))


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    config: ExperimentConfig
    tool_version: str
    started: str
    finished: str
    trial_counts: dict[int, int]
    files: list[dict]

    def as_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "config": {
                "dims": list(self.config.dims),
                "trials": self.config.trials,
                "epsilon_report": list(self.config.epsilon_report),
                "eps_stop": self.config.eps_stop,
                "max_iter": self.config.max_iter,
                "master_seed": self.config.master_seed,
                "threads": self.config.threads,
                "dump_final_matrices": self.config.dump_final_matrices,
            },
            "trial_counts": {str(n): c for n, c in self.trial_counts.items()},
            "files": self.files,
        }


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    out_dir: str | Path,
    config: ExperimentConfig,
    started: str,
    finished: str,
    emitted: Sequence[Path],
) -> Path:
    """Emit manifest.json last, with a digest of every earlier output."""
    out_dir = Path(out_dir)
    manifest = RunManifest(
        config=config,
        tool_version=__version__,
        started=started,
        finished=finished,
        trial_counts={n: config.trials_for(n) for n in config.dims},
        files=[
            {
                "name": p.name,
                "sha256": file_digest(p),
                "bytes": p.stat().st_size,
            }
            for p in emitted
        ],
    )
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest.as_dict(), indent=2) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# law reports
# ---------------------------------------------------------------------------


def write_law_reports(out_dir: str | Path, reports: Sequence[LawReport]) -> tuple[Path, Path]:
    """Human-readable laws.txt plus machine-readable laws.json."""
    out_dir = Path(out_dir)
    txt = out_dir / "laws.txt"
    js = out_dir / "laws.json"
    lines = []
    for r in reports:
        lines.append(f"law {r.law_id}: {'PASS' if r.passed else 'FAIL'}")
        lines.append(r.details)
        lines.append("")
    txt.write_text("\n".join(lines), encoding="utf-8")
    js.write_text(
        json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return txt, js
