from __future__ import annotations

import numpy as np
from scipy import stats

from qtrel.rng import counter_hash, seed_key, uniforms


def test_pure_function_of_coordinates():
    key = seed_key(7)
    runs = np.arange(1000)
    a = uniforms(key, runs, 0, 5, 1)
    b = np.array([uniforms(key, r, 0, 5, 1) for r in runs])
    assert np.array_equal(a, b)


def test_seed_and_coordinates_change_stream():
    runs = np.arange(1000)
    base = uniforms(seed_key(1), runs, 0, 1, 0)
    for other in (
        uniforms(seed_key(2), runs, 0, 1, 0),
        uniforms(seed_key(1), runs, 1, 1, 0),
        uniforms(seed_key(1), runs, 0, 2, 0),
        uniforms(seed_key(1), runs, 0, 1, 1),
    ):
        assert np.mean(base == other) < 0.01


def test_range_and_uniformity():
    u = uniforms(seed_key(0), np.arange(200_000), 1, 3, 2)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert stats.kstest(u, "uniform").pvalue > 1e-3


def test_adjacent_counters_uncorrelated():
    key = seed_key(5)
    s = np.arange(100_000)
    u0, u1 = uniforms(key, 0, 0, s, 0), uniforms(key, 0, 0, s + 1, 0)
    assert abs(np.corrcoef(u0, u1)[0, 1]) < 0.02


def test_hash_broadcasts():
    h = counter_hash(seed_key(3), np.arange(4)[:, None], 0, np.arange(5)[None, :])
    assert h.shape == (4, 5) and h.dtype == np.uint64
    assert len(np.unique(h)) == 20
