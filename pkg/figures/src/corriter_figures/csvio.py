"""Schema-validated readers for the experiment CSV outputs.

The figure layer never recomputes statistics: everything plotted comes
straight out of these files.  Headers are validated exactly; a file with no
data rows is rejected before any output is written.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import MissingColumnError, MissingInputError, SchemaMismatchError

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


def _read_rows(path: Path, expected: tuple[str, ...]) -> list[dict]:
    if not path.exists():
        raise MissingInputError(f"missing input file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatchError(f"{path}: empty file, expected a header row")
        missing = [c for c in expected if c not in header]
        if missing:
            raise MissingColumnError(f"{path}: missing required columns {missing}")
        unknown = [c for c in header if c not in expected]
        if unknown:
            raise SchemaMismatchError(f"{path}: unknown columns {unknown}")
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise SchemaMismatchError(f"{path}: no data rows")
    return rows


@dataclass(frozen=True)
class TraceStep:
    n: int
    trial_id: int
    k: int
    delta: float
    e_step: float
    rho: float | None
    t_conv_1e12: int | None
    v_total: float


def read_traces(path: str | Path) -> list[TraceStep]:
    rows = _read_rows(Path(path), TRACES_COLUMNS)
    return [
        TraceStep(
            n=int(r["n"]),
            trial_id=int(r["trial_id"]),
            k=int(r["k"]),
            delta=float(r["delta"]),
            e_step=float(r["e_step"]),
            rho=float(r["rho"]) if r["rho"] else None,
            t_conv_1e12=int(r["t_conv_1e12"]) if r["t_conv_1e12"] else None,
            v_total=float(r["v_total"]),
        )
        for r in rows
    ]


@dataclass(frozen=True)
class CurveBand:
    scope: str
    delta_median: float
    rho_median: float
    rho_p10: float
    rho_p90: float
    count: int


def read_curves(path: str | Path) -> list[CurveBand]:
    rows = _read_rows(Path(path), CURVES_COLUMNS)
    return [
        CurveBand(
            scope=r["scope"],
            delta_median=float(r["delta_median"]),
            rho_median=float(r["rho_median"]),
            rho_p10=float(r["rho_p10"]),
            rho_p90=float(r["rho_p90"]),
            count=int(r["count"]),
        )
        for r in rows
    ]


def read_summary(path: str | Path) -> list[dict]:
    return _read_rows(Path(path), SUMMARY_COLUMNS)


def dims_of(steps: list[TraceStep]) -> list[int]:
    return sorted({s.n for s in steps})
