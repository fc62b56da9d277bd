from __future__ import annotations

import math

import numpy as np
import pytest
from statsmodels.stats.proportion import proportion_confint

from qtrel.engine import EmpiricalDistributions, RunOutcome, ScenarioConfig, run_batch
from qtrel.errors import EstimationError
from qtrel.oracle import single_qubit_reliability
from qtrel.reliability import (
    Form,
    Method,
    horizon,
    p_fid,
    reliability_composed,
    reliability_direct,
    wilson_interval,
)

T = 10e-6


def scenario(p=0.41, tau=500e-6, f_th=0.9, n_qubit=1, n_par=1, **kw):
    return ScenarioConfig.symmetric(
        tau=tau, f_th=f_th, n_qubit=n_qubit, n_par=n_par, p_suc_override=(p, p), t_slot_override=T, **kw
    )


def outcome(success, truncated=False):
    return RunOutcome(((1, 1),), 0 if truncated else 1, 1.0, success, truncated)


@pytest.mark.parametrize("k", [0, 1, 17, 50, 99, 100])
def test_wilson_matches_statsmodels(k):
    lo, hi = wilson_interval(k, 100)
    ref = proportion_confint(k, 100, alpha=0.05, method="wilson")
    assert (lo, hi) == pytest.approx(ref, abs=1e-9)
    assert isinstance(lo, float) and isinstance(hi, float)


def test_wilson_half():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.404, abs=5e-4) and hi == pytest.approx(0.596, abs=5e-4)


def test_direct_extremes():
    all_ok = reliability_direct([outcome(True)] * 100)
    assert all_ok.value == 1.0 and all_ok.ci_high == 1.0
    none = reliability_direct([outcome(False)] * 100)
    assert none.value == 0.0 and none.ci_low == 0.0
    assert all_ok.method is Method.DIRECT


def test_direct_excludes_truncated():
    est = reliability_direct([outcome(True)] * 30 + [outcome(False)] * 10 + [outcome(False, True)] * 60)
    assert est.value == pytest.approx(0.75) and est.n_runs == 40


def test_direct_all_truncated_raises():
    with pytest.raises(EstimationError):
        reliability_direct([outcome(False, True)] * 5)


def test_horizon_examples():
    assert horizon(np.array([0.0, 1.0]), 0.3) == 1
    assert horizon(np.array([0.0, 0.5, 0.5]), 0.4) == 2
    t = np.arange(0, 30)
    geo = np.where(t > 0, 0.5**t, 0.0)
    assert horizon(geo, 1e-3) == 10


def test_horizon_empirical_geometric():
    b = run_batch(scenario(p=0.5), 100_000, 0)
    # t_a alone is Geometric(0.5)
    pmf = np.bincount(b.t_a[:, 0]) / len(b)
    assert horizon(pmf, 1e-3) in (9, 10, 11)


def test_horizon_support_max_for_tiny_epsilon():
    pmf = np.array([0.0, 0.3, 0.3, 0.4])
    assert horizon(pmf, 1e-15) == 3


def _uniform_two_slot():
    u = np.array([[0.0, 0.5, 0.5]])
    return EmpiricalDistributions(np.array([0.0, 0.0, 1.0]), u, u.copy(), 4)


def test_p_fid_only_zero_storage_feasible():
    # with tau = T_slot, any stored slot drops F below 0.9
    cfg = scenario(tau=T, f_th=0.9)
    d = _uniform_two_slot()
    assert p_fid(1, 2, d, cfg, Form.PRINTED) == pytest.approx(0.25)
    # last-qubit restriction drops (1,1), which cannot finish at slot 2
    assert p_fid(1, 2, d, cfg, Form.CONDITIONED) == pytest.approx(1 / 3)


def test_p_fid_trivial_threshold():
    cfg = scenario(tau=T, f_th=0.25 + 1e-12)
    assert p_fid(1, 2, _uniform_two_slot(), cfg) == pytest.approx(1.0)


def test_p_fid_point_mass_zero_storage():
    pm = np.array([[0.0, 0.0, 0.0, 1.0]])
    d = EmpiricalDistributions(np.array([0.0, 0.0, 0.0, 1.0]), pm, pm.copy(), 1)
    assert p_fid(1, 3, d, scenario(tau=T, f_th=1.0)) == 1.0


def test_p_fid_no_mass_is_nan():
    pm = np.array([[0.0, 0.0, 0.0, 1.0]])
    d = EmpiricalDistributions(np.array([0.0, 0.0, 0.0, 1.0]), pm, pm.copy(), 1)
    assert math.isnan(p_fid(1, 2, d, scenario()))


def exact_geometric(p, t_max):
    t = np.arange(t_max + 1)
    pmf = np.where(t > 0, p * (1 - p) ** np.clip(t - 1, 0, None), 0.0)
    cdf = np.cumsum(pmf)
    p_se = cdf**2 - np.concatenate([[0.0], cdf[:-1] ** 2])
    return EmpiricalDistributions(p_se, pmf[None, :], pmf[None, :].copy(), 0)


@pytest.mark.parametrize("p,tau,f_th", [(0.41, 500e-6, 0.9), (0.2, 100e-6, 0.75), (0.8, 50e-6, 0.9)])
def test_composed_equals_single_qubit_oracle(p, tau, f_th):
    t_max = 120
    cfg = scenario(p=p, tau=tau, f_th=f_th)
    comp = reliability_composed(exact_geometric(p, t_max), cfg, epsilon=1e-15)
    oracle = single_qubit_reliability(cfg, horizon=t_max)
    assert comp.value == pytest.approx(oracle.value, abs=1e-12)


def test_composed_printed_form_differs_for_one_qubit():
    cfg = scenario()
    d = exact_geometric(0.41, 120)
    printed = reliability_composed(d, cfg, epsilon=1e-15, form=Form.PRINTED).value
    assert printed < single_qubit_reliability(cfg).value - 0.01


def test_composed_huge_tau_is_completed_mass():
    cfg = scenario(tau=1e6, f_th=0.9, n_qubit=3, n_par=2)
    b = run_batch(cfg, 5_000, 1)
    assert reliability_composed(b, n_boot=0).value == pytest.approx(1.0, abs=1e-6)


def test_composed_zero_when_nothing_feasible():
    pm = np.array([[0.0, 0.5, 0.5]])
    d = EmpiricalDistributions(np.array([0.0, 0.0, 1.0]), pm, np.array([[0.0, 0.0, 1.0]]), 1)
    # t_a = 1 or 2, t_b = 2; f_th = 1 tolerates no storage, but (2,2) has none
    assert reliability_composed(d, scenario(tau=T, f_th=1.0)).value == pytest.approx(0.5)
    d0 = EmpiricalDistributions(np.array([0.0, 0.0, 1.0]), np.array([[0.0, 1.0, 0.0]]), np.array([[0.0, 0.0, 1.0]]), 1)
    assert reliability_composed(d0, scenario(tau=T, f_th=1.0)).value == 0.0


def test_composed_padding_invariance():
    b = run_batch(scenario(n_qubit=2, tau=100e-6, f_th=0.8), 3_000, 2)
    d = b.distributions
    base = reliability_composed(d, b.cfg).value
    assert reliability_composed(d.padded(d.p_se.size + 50), b.cfg).value == pytest.approx(base, abs=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_composed_and_direct_agree_for_one_qubit(seed):
    cfg = ScenarioConfig.symmetric(distance=500.0, tau=500e-6, f_th=0.9)
    b = run_batch(cfg, 20_000, seed)
    direct = reliability_direct(b)
    comp = reliability_composed(b, n_boot=200)
    assert comp.ci_low <= comp.value <= comp.ci_high
    assert comp.ci_low <= direct.ci_high and direct.ci_low <= comp.ci_high


def test_bootstrap_deterministic():
    b = run_batch(scenario(n_qubit=2, tau=100e-6, f_th=0.8), 2_000, 3)
    r1 = reliability_composed(b, n_boot=50)
    r2 = reliability_composed(b, n_boot=50)
    assert (r1.ci_low, r1.ci_high) == (r2.ci_low, r2.ci_high)


def test_composed_all_truncated_raises():
    b = run_batch(scenario(p=0.01, max_slots=2), 50, 0)
    assert b.truncated.all()
    with pytest.raises(EstimationError):
        reliability_composed(b)


def test_estimate_helpers():
    b = run_batch(scenario(), 1_000, 4)
    est = reliability_direct(b)
    assert est.meets(est.value) and not est.meets(est.value + 1e-9)
    assert est.straddles(est.value)
