"""Reproducible trajectory execution and multi-trial experiments.

A trial is a pure function of ``(master_seed, n, trial_id)``: the substream
seed is derived with an avalanche mixer, the start matrix is drawn i.i.d.
uniform on [-1, 1] (resampling the probability-zero degenerate draws), and
the operator is iterated until the entrywise step falls to the stopping
tolerance or a safeguard iteration limit is reached.  Only two iterates are
held at a time; traces store scalars, never matrices.

Trials are embarrassingly parallel.  ``run_experiment`` schedules them over
a process pool and reassembles results in ``(n, trial)`` order, so output is
bit-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import (
    DEFAULT_TOLERANCES,
    MatrixState,
    Tolerances,
    correlation_step,
    detect_sign_pattern,
    matrix_state,
)
from .diagnostics import StepRecord, Termination, TrajectoryTrace, _t_conv, kahan_sum
from .errors import ConfigError, DegenerateRowError, ResampleLimitExceededError, TrialError
from .rng import seed_stream, substream_seed, uniform_pm1_matrix

__all__ = [
    "TABLE_DIMS",
    "DEFAULT_MASTER_SEED",
    "ExperimentConfig",
    "TrialOutcome",
    "init_matrix",
    "draw_nondegenerate",
    "run_trajectory",
    "run_experiment",
    "resolve_threads",
    "substream_digests",
]

# The 22-dimension reference grid used for full runs.
TABLE_DIMS = (
    3, 6, 7, 9, 12, 16, 23, 30, 40, 50, 55, 69, 80, 100, 150,
    250, 350, 600, 1054, 1600, 1700, 2000,
)

DEFAULT_MASTER_SEED = 0xC0FFEE

_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of a full experiment.

    ``trials=None`` applies the per-dimension default policy (1000 trials up
    to n=350, 100 beyond, where a single update costs ~n^3 flops); an
    explicit count applies uniformly.  ``threads=None`` means auto.
    """

    dims: tuple[int, ...] = TABLE_DIMS
    trials: int | None = None
    epsilon_report: tuple[float, float] = (1e-6, 1e-12)
    eps_stop: float = 1e-12
    max_iter: int = 1000
    master_seed: int = DEFAULT_MASTER_SEED
    threads: int | None = None
    dump_final_matrices: bool = False

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ConfigError("dims must be nonempty")
        if any(n < 3 for n in dims):
            raise ConfigError(
                "dims must all be >= 3: a 2x2 state collapses to the "
                "[[1,-1],[-1,1]] pattern in one step, so the grid starts at n=3"
            )
        if list(dims) != sorted(set(dims)):
            raise ConfigError("dims must be strictly ascending")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        for eps in (*self.epsilon_report, self.eps_stop):
            if not (0.0 < eps < 1.0):
                raise ConfigError(f"tolerances must lie in (0, 1), got {eps!r}")
        if not (0 <= self.master_seed <= _U64_MAX):
            raise ConfigError("master_seed must fit in 64 bits")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def trials_for(self, n: int) -> int:
        if self.trials is not None:
            return self.trials
        return 1000 if n <= 350 else 100

    def tasks(self) -> list[tuple[int, int]]:
        return [(n, t) for n in self.dims for t in range(self.trials_for(n))]


@dataclass(frozen=True)
class TrialOutcome:
    """One trial's trace plus run metadata.

    ``iterate_checksum`` is a 64-bit digest of the final iterate's raw bytes,
    deterministic for fixed ``(master_seed, n, trial_id)``.  ``final_entries``
    is populated only when the experiment asked for final-matrix dumps.
    """

    trace: TrajectoryTrace
    wall_time: float
    iterate_checksum: int
    final_entries: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.trace.n

    @property
    def trial_id(self) -> int:
        return self.trace.trial_id


def init_matrix(n: int, seed: int) -> MatrixState:
    """Generation-0 start: i.i.d. uniform [-1, 1] entries from the
    documented counter-based stream (bit-identical per (n, seed))."""
    if n < 2:
        raise ConfigError("matrix order must be >= 2")
    return matrix_state(uniform_pm1_matrix(n, seed), generation=0)


def draw_nondegenerate(
    n: int,
    seed_stream: Iterable[int],
    tol: Tolerances = DEFAULT_TOLERANCES,
    max_attempts: int = 100,
    sample: Callable[[int, int], MatrixState] = init_matrix,
) -> tuple[MatrixState, int]:
    """First sampled matrix with no (numerically) constant row.

    Degenerate draws are discarded and resampled with the next seed from the
    stream; under the continuous law a resample has probability zero, so
    exceeding ``max_attempts`` signals a broken generator rather than a
    statistical event.
    """
    seeds: Iterator[int] = iter(seed_stream)
    for attempt in range(max_attempts + 1):
        try:
            seed = next(seeds)
        except StopIteration:
            raise ResampleLimitExceededError(
                f"seed stream exhausted after {attempt} attempts at n={n}"
            ) from None
        state = sample(n, seed)
        try:
            _probe_degenerate(state, tol)
        except DegenerateRowError:
            continue
        return state, attempt
    raise ResampleLimitExceededError(
        f"{max_attempts + 1} consecutive degenerate draws at n={n}; "
        "the generator is broken"
    )


def _probe_degenerate(state: MatrixState, tol: Tolerances) -> None:
    # Reuse the sphericalizer's floor check without paying for normalization.
    from .core import _degeneracy_floor, centered_row_norms

    norms = centered_row_norms(state)
    floor = _degeneracy_floor(state, tol)
    bad = np.flatnonzero(norms <= floor)
    if bad.size:
        i = int(bad[0])
        raise DegenerateRowError(i, float(norms[i]), float(floor[i]))


def _iterate(
    P0: MatrixState, config: ExperimentConfig, tol: Tolerances
) -> tuple[list[tuple[int, float, float]], Termination, MatrixState]:
    """Core loop: returns raw (k, delta, e) triples, the termination cause,
    and the last healthy iterate.  Keeps exactly two iterates alive."""
    prev = P0
    raw: list[tuple[int, float, float]] = []
    terminated = Termination.SAFEGUARD_LIMIT
    for k in range(config.max_iter):
        try:
            cur = correlation_step(prev, tol)
        except DegenerateRowError:
            terminated = Termination.DEGENERATE
            break
        D = cur.entries - prev.entries
        delta = float(np.sqrt(np.einsum("ij,ij->", D, D)))
        e = float(np.abs(D).max())
        raw.append((k, delta, e))
        prev = cur
        if e <= config.eps_stop:
            terminated = Termination.TOLERANCE_MET
            break
    return raw, terminated, prev


def _build_trace(
    raw: list[tuple[int, float, float]],
    terminated: Termination,
    final_state: MatrixState,
    config: ExperimentConfig,
    tol: Tolerances,
    *,
    n: int,
    trial_id: int,
    seed: int,
    resample_count: int,
) -> TrajectoryTrace:
    deltas = [d for _, d, _ in raw]
    steps = tuple(
        StepRecord(
            k=k,
            delta=d,
            e_step=e,
            rho=(deltas[i + 1] / d) if (i + 1 < len(deltas) and d > 0.0) else None,
        )
        for i, (k, d, e) in enumerate(raw)
    )
    eps_lo, eps_hi = sorted(config.epsilon_report, reverse=True)
    pattern = (
        detect_sign_pattern(final_state, tol) if final_state.generation >= 1 else None
    )
    return TrajectoryTrace(
        n=n,
        trial_id=trial_id,
        seed=seed,
        steps=steps,
        t_conv_1e6=_t_conv(deltas, eps_lo, terminated),
        t_conv_1e12=_t_conv(deltas, eps_hi, terminated),
        v_total=kahan_sum(deltas),
        terminated_by=terminated,
        pattern=pattern,
        resample_count=resample_count,
    )


def run_trajectory(
    P0: MatrixState,
    config: ExperimentConfig | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    *,
    trial_id: int = 0,
    seed: int = 0,
    resample_count: int = 0,
) -> TrajectoryTrace:
    """Iterate from ``P0`` until the entrywise stopping rule fires (max
    entrywise step <= ``eps_stop``) or ``max_iter`` updates have run.

    Records every step; the convergence times at both report tolerances, the
    total variation, and the final iterate's sign pattern are computed on
    completion.  A mid-flight degenerate iterate terminates the trace with
    ``Termination.DEGENERATE`` (never observed from random starts; handled
    anyway).
    """
    if config is None:
        config = ExperimentConfig(dims=(max(3, P0.n),))
    raw, terminated, final_state = _iterate(P0, config, tol)
    return _build_trace(
        raw,
        terminated,
        final_state,
        config,
        tol,
        n=P0.n,
        trial_id=trial_id,
        seed=seed,
        resample_count=resample_count,
    )


def _checksum(entries: np.ndarray) -> int:
    digest = hashlib.blake2b(np.ascontiguousarray(entries).tobytes(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def _run_trial(config: ExperimentConfig, tol: Tolerances, n: int, trial_id: int) -> TrialOutcome:
    base = substream_seed(config.master_seed, n, trial_id)
    t0 = time.perf_counter()
    P0, resamples = draw_nondegenerate(n, seed_stream(base), tol)
    raw, terminated, final_state = _iterate(P0, config, tol)
    trace = _build_trace(
        raw,
        terminated,
        final_state,
        config,
        tol,
        n=n,
        trial_id=trial_id,
        seed=base,
        resample_count=resamples,
    )
    wall = time.perf_counter() - t0
    return TrialOutcome(
        trace=trace,
        wall_time=wall,
        iterate_checksum=_checksum(final_state.entries),
        final_entries=final_state.entries if config.dump_final_matrices else None,
    )


def _trial_worker(args: tuple[ExperimentConfig, Tolerances, int, int]):
    config, tol, n, trial_id = args
    try:
        return _run_trial(config, tol, n, trial_id)
    except Exception as exc:  # propagate with (n, t) context, do not kill the pool
        return (n, trial_id, f"{type(exc).__name__}: {exc}")


def resolve_threads(threads: int | str | None) -> int:
    """Worker count from an explicit value, the CORRITER_THREADS environment
    variable, or the CPU count ('auto')."""
    if threads is None or threads == "auto":
        env = os.environ.get("CORRITER_THREADS", "").strip()
        if env and env != "auto":
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"CORRITER_THREADS must be an integer or 'auto', got {env!r}")
        else:
            return max(1, os.cpu_count() or 1)
    threads = int(threads)
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    return threads


def run_experiment(
    config: ExperimentConfig, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[TrialOutcome]:
    """Run every (n, trial) pair of the configuration.

    Output is sorted by ``(n, trial_id)`` and is a pure function of the
    configuration: identical for every worker count.  A failing trial does
    not abort the others; failures are re-raised together at the end with
    their (n, t) contexts.
    """
    tasks = config.tasks()
    workers = resolve_threads(config.threads)
    args = [(config, tol, n, t) for n, t in tasks]
    if workers == 1 or len(tasks) <= 1:
        results = [_trial_worker(a) for a in args]
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_worker, args, chunksize=chunk))
    failures = [r for r in results if isinstance(r, tuple)]
    if failures:
        raise TrialError(failures)
    return results


def substream_digests(config: ExperimentConfig, draws: int = 16) -> dict[tuple[int, int], str]:
    """Digest of each trial's first ``draws`` uniforms, for verifying that
    substreams over the configured grid never collide."""
    out: dict[tuple[int, int], str] = {}
    for n, t in config.tasks():
        seed = next(iter(seed_stream(substream_seed(config.master_seed, n, t))))
        gen = np.random.Generator(np.random.Philox(key=seed))
        block = gen.random(draws, dtype=np.float64)
        out[(n, t)] = hashlib.blake2b(block.tobytes(), digest_size=16).hexdigest()
    return out
