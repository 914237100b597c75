"""Initialization, resampling, trajectory execution, and experiment plumbing."""

from __future__ import annotations

import numpy as np
import pytest

import corriter.harness as harness
from corriter import (
    ExperimentConfig,
    Termination,
    audit_trace,
    init_matrix,
    matrix_state,
    run_experiment,
    run_trajectory,
)
from corriter.errors import ConfigError, ResampleLimitExceededError, TrialError
from corriter.harness import draw_nondegenerate, resolve_threads, substream_digests
from corriter.rng import seed_stream


def constant_row_matrix(n, seed):
    m = np.arange(float(n * n)).reshape(n, n)
    m[0] = 3.14
    return matrix_state(m)


# ---------------------------------------------------------------------------
# init_matrix
# ---------------------------------------------------------------------------


def test_init_matrix_deterministic_and_generation_zero():
    a = init_matrix(4, 42)
    b = init_matrix(4, 42)
    assert np.array_equal(a.entries, b.entries)
    assert a.generation == 0


def test_init_matrix_rejects_order_one():
    with pytest.raises(ConfigError):
        init_matrix(1, 0)


# ---------------------------------------------------------------------------
# draw_nondegenerate
# ---------------------------------------------------------------------------


def test_draw_nondegenerate_continuous_draws_never_resample():
    for t in range(20):
        _, resamples = draw_nondegenerate(5, seed_stream(t))
        assert resamples == 0


def test_draw_nondegenerate_counts_discards():
    def stub(n, seed):
        if seed == 0:
            return constant_row_matrix(n, seed)
        return init_matrix(n, seed)

    state, resamples = draw_nondegenerate(3, iter([0, 1]), sample=stub)
    assert resamples == 1
    assert state.entries.shape == (3, 3)


def test_draw_nondegenerate_limit_exceeded():
    with pytest.raises(ResampleLimitExceededError):
        draw_nondegenerate(3, iter(range(200)), sample=constant_row_matrix)


def test_draw_nondegenerate_exhausted_stream():
    with pytest.raises(ResampleLimitExceededError):
        draw_nondegenerate(3, iter([0, 1]), sample=constant_row_matrix)


# ---------------------------------------------------------------------------
# run_trajectory
# ---------------------------------------------------------------------------


def test_trajectory_2x2_collapses_in_one_step():
    trace = run_trajectory(matrix_state([[1.0, 0.5], [0.5, 1.0]]))
    assert trace.terminated_by is Termination.TOLERANCE_MET
    assert trace.t_conv_1e12 == 1
    assert trace.pattern is not None and trace.pattern.signs == (1, -1)
    assert audit_trace(trace) == []


def test_trajectory_from_fixed_point_stops_immediately():
    s = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
    trace = run_trajectory(matrix_state(np.outer(s, s)))
    assert len(trace.steps) == 1
    assert trace.steps[0].delta <= 1e-14
    assert trace.t_conv_1e12 == 0
    assert trace.pattern is not None and trace.pattern.signs == (1, -1, 1, 1, -1)


def test_trajectory_safeguard_limit_records_exactly_max_iter_steps():
    config = ExperimentConfig(dims=(6,), max_iter=3)
    trace = run_trajectory(init_matrix(6, 5), config)
    assert trace.terminated_by is Termination.SAFEGUARD_LIMIT
    assert len(trace.steps) == 3
    assert trace.t_conv_1e12 is None
    assert trace.stop_index is None


def test_trajectory_degenerate_start_is_handled():
    trace = run_trajectory(matrix_state(np.ones((3, 3))))
    assert trace.terminated_by is Termination.DEGENERATE
    assert trace.steps == ()
    assert trace.t_conv_1e6 is None and trace.t_conv_1e12 is None
    assert trace.v_total == 0.0


def test_golden_trace_regression(tmp_path):
    # Frozen from the first verified build on this toolchain; any change to
    # the generator, the operator, the diagnostics, or the serialization
    # shows up as a byte diff.
    from pathlib import Path

    from corriter.io import write_traces_csv

    golden = Path(__file__).parent / "data" / "golden_n3.csv"
    config = ExperimentConfig(dims=(3,), trials=3, master_seed=0x601D, threads=1)
    outcomes = run_experiment(config)
    fresh = tmp_path / "traces.csv"
    write_traces_csv(fresh, [o.trace for o in outcomes])
    assert fresh.read_bytes() == golden.read_bytes()


def test_trajectory_records_both_report_tolerances():
    trace = run_trajectory(init_matrix(8, 21))
    assert trace.t_conv_1e6 is not None
    assert trace.t_conv_1e12 is not None
    assert trace.t_conv_1e6 <= trace.t_conv_1e12
    deltas = trace.deltas
    assert all(d < 1e-6 for d in deltas[trace.t_conv_1e6 :])
    assert all(d < 1e-12 for d in deltas[trace.t_conv_1e12 :])


# ---------------------------------------------------------------------------
# run_experiment
# ---------------------------------------------------------------------------


def test_experiment_ordering_contract():
    config = ExperimentConfig(dims=(3, 6), trials=2, master_seed=7, threads=1)
    outcomes = run_experiment(config)
    assert [(o.n, o.trial_id) for o in outcomes] == [(3, 0), (3, 1), (6, 0), (6, 1)]


def test_experiment_identical_across_worker_counts():
    config1 = ExperimentConfig(dims=(3,), trials=5, master_seed=7, threads=1)
    config4 = ExperimentConfig(dims=(3,), trials=5, master_seed=7, threads=4)
    a = run_experiment(config1)
    b = run_experiment(config4)
    assert [o.trace for o in a] == [o.trace for o in b]
    assert [o.iterate_checksum for o in a] == [o.iterate_checksum for o in b]


def test_experiment_checksum_deterministic():
    config = ExperimentConfig(dims=(3,), trials=3, master_seed=99, threads=1)
    a = run_experiment(config)
    b = run_experiment(config)
    assert [o.iterate_checksum for o in a] == [o.iterate_checksum for o in b]


def test_experiment_final_matrices_only_on_request():
    lean = run_experiment(ExperimentConfig(dims=(3,), trials=1, master_seed=1, threads=1))
    assert lean[0].final_entries is None
    full = run_experiment(
        ExperimentConfig(dims=(3,), trials=1, master_seed=1, threads=1, dump_final_matrices=True)
    )
    assert full[0].final_entries is not None
    assert full[0].final_entries.shape == (3, 3)


def test_experiment_collects_trial_errors_with_context(monkeypatch):
    def boom(config, tol, n, trial_id):
        if (n, trial_id) == (3, 1):
            raise RuntimeError("synthetic failure")
        return real(config, tol, n, trial_id)

    real = harness._run_trial
    monkeypatch.setattr(harness, "_run_trial", boom)
    config = ExperimentConfig(dims=(3,), trials=3, master_seed=5, threads=1)
    with pytest.raises(TrialError) as err:
        run_experiment(config)
    assert err.value.failures == [(3, 1, "RuntimeError: synthetic failure")]


def test_trial_policy_defaults():
    config = ExperimentConfig(dims=(3, 350, 600, 2000))
    assert config.trials_for(3) == 1000
    assert config.trials_for(350) == 1000
    assert config.trials_for(600) == 100
    assert config.trials_for(2000) == 100
    explicit = ExperimentConfig(dims=(3, 600), trials=42)
    assert explicit.trials_for(600) == 42


def test_config_validation():
    with pytest.raises(ConfigError, match="collapses"):
        ExperimentConfig(dims=(2, 3))
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=(6, 3))
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=(3,), trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=(3,), eps_stop=0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=(3,), master_seed=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=(3,), threads=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(dims=())


def test_substream_digests_never_collide():
    config = ExperimentConfig(dims=(3, 6, 12), trials=50, master_seed=31)
    digests = substream_digests(config)
    assert len(digests) == 150
    assert len(set(digests.values())) == 150


def test_resolve_threads(monkeypatch):
    assert resolve_threads(3) == 3
    assert resolve_threads("auto") >= 1
    monkeypatch.setenv("CORRITER_THREADS", "2")
    assert resolve_threads(None) == 2
    monkeypatch.setenv("CORRITER_THREADS", "bogus")
    with pytest.raises(ConfigError):
        resolve_threads(None)
    monkeypatch.delenv("CORRITER_THREADS")
    assert resolve_threads(None) >= 1


def test_iterates_along_experiment_pass_elliptope_checks():
    # Forward invariance: every generation >= 1 iterate revalidates.
    from corriter import correlation_step, psd_quadratic_forms

    P = init_matrix(5, 77)
    for _ in range(10):
        P = correlation_step(P)
        P.validate()
        assert psd_quadratic_forms(P, num_probes=4).min() >= -1e-10
