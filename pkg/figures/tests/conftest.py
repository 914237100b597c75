"""Results fixtures produced through the experiment CLI (the only interface
this package consumes)."""

from __future__ import annotations

import subprocess
import sys

import pytest


def run_experiment_cli(out_dir, dims="3,6,50", trials="100", seed="7"):
    subprocess.run(
        [
            sys.executable, "-m", "corriter.cli", "run",
            "--dims", dims, "--trials", trials, "--seed", seed,
            "--threads", "2", "--out", str(out_dir),
        ],
        check=True,
        capture_output=True,
    )
    return out_dir


@pytest.fixture(scope="session")
def results_dir(tmp_path_factory):
    return run_experiment_cli(tmp_path_factory.mktemp("results"))


@pytest.fixture(scope="session")
def single_dim_results(tmp_path_factory):
    return run_experiment_cli(
        tmp_path_factory.mktemp("results_one"), dims="6", trials="40", seed="3"
    )
