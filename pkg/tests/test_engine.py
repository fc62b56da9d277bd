from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from qtrel.engine import EmpiricalDistributions, ScenarioConfig, run_batch, simulate_run
from qtrel.errors import ConfigError

T = 10e-6


def scenario(p=0.5, n_qubit=1, n_par=1, tau=1.0, f_th=0.75, **kw):
    return ScenarioConfig.symmetric(
        tau=tau, n_qubit=n_qubit, n_par=n_par, f_th=f_th, p_suc_override=(p, p), t_slot_override=T, **kw
    )


def test_certain_success_parallel():
    b = run_batch(scenario(p=1.0, n_qubit=3, n_par=4), 10, 0)
    assert np.all(b.t_a == 1) and np.all(b.t_b == 1) and np.all(b.t_last == 1)
    assert b.success.all()
    assert np.all(b.min_fidelity == 1.0)


def test_certain_success_sequential_fill():
    out = simulate_run(scenario(p=1.0, n_qubit=3, n_par=1), 0)
    assert out.per_qubit == ((1, 1), (2, 2), (3, 3))
    assert out.t_last == 3
    # qubit 1 is held for t'' = 2 slots, qubit 3 for none
    hold = [out.t_last - max(a, b) for a, b in out.per_qubit]
    assert hold == [2, 1, 0]


def test_mean_completion_slot_matches_max_of_geometrics():
    p = 0.5
    b = run_batch(scenario(p=p), 100_000, 1)
    exact = 2 / p - 1 / (2 * p - p * p)
    assert exact == pytest.approx(8 / 3)
    # brute-force joint PMF up to t = 64
    t = np.arange(1, 65)
    pmf = p * (1 - p) ** (t - 1)
    cdf = np.cumsum(pmf)
    p_max = cdf**2 - np.concatenate([[0.0], cdf[:-1] ** 2])
    assert float(np.sum(t * p_max)) == pytest.approx(exact, abs=1e-12)
    var = float(np.sum(t**2 * p_max)) - exact**2
    assert abs(b.t_last.mean() - exact) < 3 * math.sqrt(var / len(b))


def test_first_slot_success_rate():
    p = 0.41
    b = run_batch(scenario(p=p), 100_000, 2)
    frac = np.mean(b.t_a[:, 0] == 1)
    assert abs(frac - p) < 3 * math.sqrt(p * (1 - p) / 100_000)


def test_branches_independent():
    b = run_batch(scenario(p=0.41), 100_000, 3)
    ta = np.minimum(b.t_a[:, 0], 6)
    tb = np.minimum(b.t_b[:, 0], 6)
    table = np.zeros((6, 6))
    np.add.at(table, (ta - 1, tb - 1), 1)
    assert stats.chi2_contingency(table).pvalue > 0.001


def test_marginal_is_geometric():
    p = 0.41
    b = run_batch(scenario(p=p), 100_000, 4)
    x = b.t_a[:, 0]
    # discrete KS: compare the empirical CDF with the geometric CDF on the support
    support = np.arange(1, x.max() + 1)
    ecdf = np.searchsorted(np.sort(x), support, side="right") / x.size
    d = np.max(np.abs(ecdf - stats.geom.cdf(support, p)))
    assert d < 1.63 / math.sqrt(x.size)  # 1% critical value


def test_fifo_matching():
    b = run_batch(scenario(p=0.3, n_qubit=5, n_par=3), 2_000, 5)
    for i in range(len(b)):
        assert np.array_equal(np.sort(b.t_a[i]), b.t_a[i])
        assert np.array_equal(np.sort(b.t_b[i]), b.t_b[i])
        assert b.t_last[i] == max(b.t_a[i].max(), b.t_b[i].max())


def test_parallel_channels_respect_remaining_qubits():
    b = run_batch(scenario(p=0.5, n_qubit=3, n_par=4), 5_000, 6)
    for arr in (b.t_a, b.t_b):
        _, counts = np.unique(arr[0], return_counts=True)
        assert counts.max() <= 3
    # never more than n_par successes per slot
    b = run_batch(scenario(p=0.9, n_qubit=6, n_par=2), 2_000, 7)
    for arr in (b.t_a, b.t_b):
        for row in arr:
            assert np.bincount(row).max() <= 2


def test_capacity_blocking_limits_unmatched_pairs():
    cfg = scenario(p=0.6, n_qubit=6, n_par=2, enforce_capacity=True)
    b = run_batch(cfg, 2_000, 8)
    for ta, tb in zip(b.t_a, b.t_b):
        for s in range(1, int(max(ta.max(), tb.max())) + 1):
            na, nb = np.sum(ta <= s), np.sum(tb <= s)
            assert abs(na - nb) <= 2


def test_truncation_accounting():
    cfg = scenario(p=0.05, n_qubit=2, max_slots=10)
    b = run_batch(cfg, 5_000, 9)
    assert b.n_truncated > 0
    assert b.n_success + b.n_failure + b.n_truncated == len(b)
    assert np.all(b.t_last[b.truncated] == 0)
    assert not b.success[b.truncated].any()
    assert b.trunc_frac == pytest.approx(b.n_truncated / 5_000)
    assert b.distributions.n_runs == 5_000 - b.n_truncated


def test_zero_probability_truncates_everything():
    cfg = ScenarioConfig.symmetric(max_slots=50, p_suc_override=(0.0, 0.5), t_slot_override=T)
    b = run_batch(cfg, 20, 0)
    assert b.truncated.all()


def test_worker_and_chunk_independence():
    cfg = scenario(p=0.3, n_qubit=4, n_par=2)
    ref = run_batch(cfg, 3_000, 42)
    for workers, chunk in ((4, 500), (8, 333), (1, 7)):
        other = run_batch(cfg, 3_000, 42, workers=workers, chunk_size=chunk)
        assert np.array_equal(ref.t_a, other.t_a)
        assert np.array_equal(ref.t_b, other.t_b)
        assert np.array_equal(ref.t_last, other.t_last)


def test_simulate_run_replays_batch_entry():
    cfg = scenario(p=0.3, n_qubit=3, n_par=2, tau=50e-6)
    b = run_batch(cfg, 200, 11)
    for i in (0, 17, 199):
        assert simulate_run(cfg, 11, i) == b[i]


def test_single_run_distributions_are_point_masses():
    b = run_batch(scenario(p=0.4, n_qubit=2), 1, 3)
    d = b.distributions
    assert d.p_se[b.t_last[0]] == 1.0 and d.p_se.sum() == 1.0
    for n in range(2):
        assert d.p_qubit_a[n, b.t_a[0, n]] == 1.0
        assert d.p_qubit_b[n, b.t_b[0, n]] == 1.0


def test_distributions_padding():
    d = EmpiricalDistributions.from_samples([[1], [2]], [[2], [1]], [2, 2])
    p = d.padded(10)
    assert p.p_se.size == 10 and p.p_se.sum() == pytest.approx(1.0)
    assert np.array_equal(p.p_se[:3], d.p_se)


def test_with_threshold_rejudges_same_runs():
    cfg = scenario(p=0.4, n_qubit=2, tau=100e-6, f_th=0.75)
    b = run_batch(cfg, 2_000, 12)
    hi = b.with_threshold(0.95)
    assert np.array_equal(hi.t_last, b.t_last)
    assert hi.n_success <= b.n_success
    direct = run_batch(replace(cfg, f_th=0.95), 2_000, 12)
    assert np.array_equal(direct.success, hi.success)


def test_slot_synchronisation():
    cfg = ScenarioConfig.symmetric(distance=1000.0)
    assert cfg.slot_sync() == "shared"
    assert cfg.slot_time() == pytest.approx(5.56e-6 + 1000.0 / 2e8)


@pytest.mark.parametrize(
    "kw",
    [{"n_qubit": 0}, {"n_par": 0}, {"f_th": 0.25}, {"f_th": 1.5}, {"max_slots": 0}],
)
def test_invalid_scenarios(kw):
    with pytest.raises(ConfigError):
        ScenarioConfig.symmetric(**kw)
