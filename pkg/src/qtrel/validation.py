"""Engine-vs-oracle comparison suite behind ``qtrel oracle-check``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .engine import ScenarioConfig, run_batch
from .oracle import exhaustive_reliability, single_qubit_reliability
from .reliability import reliability_direct

T_SLOT = 10e-6


@dataclass(frozen=True)
class Check:
    label: str
    oracle: float
    estimate: float
    n_runs: int
    z: float
    passed: bool


def _compare(label: str, cfg: ScenarioConfig, exact: float, n_runs: int, seed: int, z_max: float) -> Check:
    est = reliability_direct(run_batch(cfg, n_runs, seed))
    sigma = math.sqrt(max(exact * (1.0 - exact), 1e-300) / est.n_runs)
    z = abs(est.value - exact) / sigma if exact * (1 - exact) > 0 else (0.0 if est.value == exact else math.inf)
    return Check(label, exact, est.value, est.n_runs, z, z <= z_max)


def single_qubit_grid(
    p_values=(0.2, 0.41, 0.8),
    tau_ratios=(10, 50, 200),
    thresholds=(0.3, 0.75, 0.9),
    n_runs: int = 100_000,
    seed: int = 0,
    z_max: float = 4.0,
) -> list[Check]:
    """Single-qubit oracle vs Monte Carlo over a (p_suc, tau/T_slot, F_th) grid."""
    out = []
    for i, (p, r, f) in enumerate(itertools.product(p_values, tau_ratios, thresholds)):
        cfg = ScenarioConfig.symmetric(
            tau=r * T_SLOT, f_th=f, p_suc_override=(p, p), t_slot_override=T_SLOT
        )
        exact = single_qubit_reliability(cfg).value
        out.append(_compare(f"single p={p} tau/T={r} F_th={f}", cfg, exact, n_runs, seed + i, z_max))
    return out


def exhaustive_case(n_runs: int = 1_000_000, seed: int = 0, z_max: float = 4.0, horizon: int = 8) -> Check:
    """Two qubits, two channels, p_suc = 0.9: exact enumeration vs Monte Carlo.

    The engine's slot cap is set to the oracle horizon so both count the
    same event; runs needing more slots are truncated and excluded.
    """
    cfg = ScenarioConfig.symmetric(
        tau=5 * T_SLOT,
        n_qubit=2,
        n_par=2,
        f_th=0.9,
        p_suc_override=(0.9, 0.9),
        t_slot_override=T_SLOT,
        max_slots=horizon,
    )
    res = exhaustive_reliability(cfg, horizon)
    exact = res.value / (1.0 - res.lost_mass)
    return _compare(f"exhaustive N=2 N_par=2 p=0.9 T={horizon}", cfg, exact, n_runs, seed, z_max)


def run_suite(n_runs: int = 100_000, seed: int = 0, z_max: float = 4.0) -> list[Check]:
    return single_qubit_grid(n_runs=n_runs, seed=seed, z_max=z_max) + [
        exhaustive_case(n_runs=10 * n_runs, seed=seed, z_max=z_max)
    ]
