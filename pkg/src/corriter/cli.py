"""Command-line surface: run experiments, aggregate results, verify laws.

Exit codes: 0 success, 1 configuration/input error, 2 runtime failure
(message names the failing (n, trial) pair).
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import (
    ConfigError,
    CorriterError,
    InsufficientDataError,
    MissingInputError,
    TrialError,
)
from .harness import DEFAULT_MASTER_SEED, TABLE_DIMS, ExperimentConfig, run_experiment
from .io import (
    build_curves,
    read_traces_csv,
    write_curves_csv,
    write_final_matrix_csv,
    write_law_reports,
    write_manifest,
    write_summary_csv,
    write_traces_csv,
)
from .laws import (
    DEFAULT_THRESHOLDS,
    LawReport,
    verify_law1,
    verify_law2,
    verify_law3,
    verify_law4,
)

_LAW_CHECKS = {"I": verify_law1, "II": verify_law2, "III": verify_law3, "IV": verify_law4}


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"--dims must be comma-separated integers, got {text!r}")


def _threads_arg(text: str):
    return text if text == "auto" else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corriter",
        description="Iterated row-correlation dynamics: experiments, aggregation, law checks.",
    )
    parser.add_argument("--version", action="version", version=f"corriter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write traces/summary/curves/manifest")
    run_p.add_argument("--dims", default=None,
                       help="comma-separated matrix orders (default: the full 22-size grid)")
    run_p.add_argument("--trials", type=int, default=None,
                       help="trials per dimension (default: 1000 for n<=350, 100 beyond)")
    run_p.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED, help="64-bit master seed")
    run_p.add_argument("--max-iter", type=int, default=1000, help="safeguard iteration limit")
    run_p.add_argument("--eps", type=float, default=1e-12,
                       help="entrywise stopping tolerance (default 1e-12)")
    run_p.add_argument("--threads", type=_threads_arg, default=None,
                       help="worker count or 'auto' (CORRITER_THREADS env var as fallback)")
    run_p.add_argument("--out", type=Path, default=Path("./results"), help="output directory")
    run_p.add_argument("--dump-final-matrices", action="store_true",
                       help="also write each trial's final iterate as dense CSV")

    agg_p = sub.add_parser("aggregate", help="recompute summary/curves from traces.csv")
    agg_p.add_argument("--in", dest="in_dir", type=Path, required=True)
    agg_p.add_argument("--out", type=Path, default=None, help="default: the input directory")
    scope = agg_p.add_mutually_exclusive_group()
    scope.add_argument("--pool", action="store_true", help="pooled curve only")
    scope.add_argument("--per-dim", action="store_true", help="per-dimension curves only")

    ver_p = sub.add_parser("verify", help="evaluate the empirical-law checks on a results directory")
    ver_p.add_argument("--in", dest="in_dir", type=Path, required=True)
    ver_p.add_argument("--laws", default="I,II,III,IV",
                       help="comma-separated subset of I,II,III,IV (default all)")
    ver_p.add_argument("--out", type=Path, default=None, help="default: the input directory")
    return parser


def _cmd_run(args) -> int:
    config = ExperimentConfig(
        dims=TABLE_DIMS if args.dims is None else _parse_dims(args.dims),
        trials=args.trials,
        eps_stop=args.eps,
        max_iter=args.max_iter,
        master_seed=args.seed,
        threads=None if args.threads in (None, "auto") else args.threads,
        dump_final_matrices=args.dump_final_matrices,
    )
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    outcomes = run_experiment(config)
    traces = [o.trace for o in outcomes]

    emitted = []
    traces_path = out / "traces.csv"
    write_traces_csv(traces_path, traces)
    emitted.append(traces_path)
    summary_path = out / "summary.csv"
    write_summary_csv(summary_path, traces)
    emitted.append(summary_path)
    curves_path = out / "curves.csv"
    write_curves_csv(curves_path, build_curves(traces))
    emitted.append(curves_path)
    if config.dump_final_matrices:
        for o in outcomes:
            p = out / f"final_n{o.n}_t{o.trial_id}.csv"
            write_final_matrix_csv(p, o.final_entries)
            emitted.append(p)
    finished = datetime.now(timezone.utc).isoformat()
    write_manifest(out, config, started, finished, emitted)
    print(f"wrote {len(emitted) + 1} files to {out} ({len(outcomes)} trials)")
    return 0


def _cmd_aggregate(args) -> int:
    in_dir: Path = args.in_dir
    out: Path = args.out or in_dir
    out.mkdir(parents=True, exist_ok=True)
    traces = read_traces_csv(in_dir / "traces.csv")
    pooled = not args.per_dim
    per_dim = not args.pool
    write_summary_csv(out / "summary.csv", traces)
    write_curves_csv(out / "curves.csv", build_curves(traces, pooled=pooled, per_dim=per_dim))
    print(f"aggregated {len(traces)} traces into {out}")
    return 0


def _cmd_verify(args) -> int:
    in_dir: Path = args.in_dir
    out: Path = args.out or in_dir
    out.mkdir(parents=True, exist_ok=True)
    wanted = [part.strip().upper() for part in args.laws.split(",") if part.strip()]
    unknown = [w for w in wanted if w not in _LAW_CHECKS]
    if unknown:
        raise ConfigError(f"unknown laws {unknown}; choose from I,II,III,IV")
    traces = read_traces_csv(in_dir / "traces.csv")
    reports = []
    for law in wanted:
        try:
            reports.append(_LAW_CHECKS[law](traces, DEFAULT_THRESHOLDS))
        except InsufficientDataError as exc:
            reports.append(
                LawReport(law, False, {}, f"insufficient data: {exc}", {})
            )
    write_law_reports(out, reports)
    for r in reports:
        print(f"law {r.law_id}: {'PASS' if r.passed else 'FAIL'}")
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "aggregate":
            return _cmd_aggregate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, MissingInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TrialError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except CorriterError as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
