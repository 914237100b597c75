"""Determinism and distributional contracts of the random plumbing."""

from __future__ import annotations

import itertools
import math

import numpy as np

from corriter.rng import mix64, seed_stream, substream_seed, uniform_pm1_matrix

# First four entries of uniform_pm1_matrix(2, 123), frozen from the first
# verified build; any change to the generator, keying, or mapping breaks this.
FROZEN_2x2_SEED123 = np.array(
    [
        [0.03401047702995741, -0.6323992393850921],
        [-0.5743254710896648, -0.5800615930329824],
    ]
)


def test_stream_regression_frozen_values():
    assert np.array_equal(uniform_pm1_matrix(2, 123), FROZEN_2x2_SEED123)


def test_bit_identical_for_fixed_seed():
    a = uniform_pm1_matrix(4, 42)
    b = uniform_pm1_matrix(4, 42)
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    assert not np.array_equal(uniform_pm1_matrix(4, 1), uniform_pm1_matrix(4, 2))


def test_support_is_within_closed_interval():
    entries = uniform_pm1_matrix(1000, 7)  # 1e6 draws
    assert entries.min() >= -1.0
    assert entries.max() <= 1.0


def test_moments_match_uniform_law():
    entries = uniform_pm1_matrix(1000, 11).ravel()  # N = 1e6
    n = entries.size
    # mean 0 with sd 1/sqrt(3); second moment 1/3 with sd sqrt(4/45)
    assert abs(entries.mean()) <= 4.0 * (1.0 / math.sqrt(3.0)) / math.sqrt(n)
    second = float((entries**2).mean())
    assert abs(second - 1.0 / 3.0) <= 4.0 * math.sqrt(4.0 / 45.0) / math.sqrt(n)


def test_mix64_is_a_bijection_sample_and_avalanche():
    outs = {mix64(z) for z in range(4096)}
    assert len(outs) == 4096
    # Flipping one input bit flips roughly half the output bits.
    flips = bin(mix64(1234567) ^ mix64(1234567 ^ (1 << 17))).count("1")
    assert 10 <= flips <= 54


def test_substream_seeds_unique_over_grid():
    seeds = {
        substream_seed(99, n, t)
        for n, t in itertools.product((3, 6, 12, 50, 150, 2000), range(500))
    }
    assert len(seeds) == 6 * 500


def test_seed_stream_deterministic_and_nonrepeating():
    a = list(itertools.islice(seed_stream(42), 64))
    b = list(itertools.islice(seed_stream(42), 64))
    assert a == b
    assert len(set(a)) == 64
