"""Exact reference values for small scenarios.

Neither oracle touches the sampling code in :mod:`qtrel.engine`; they
share only the fidelity test from :mod:`qtrel.decoherence`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .decoherence import feasible
from .engine import ScenarioConfig
from .errors import ConfigError, StateSpaceTooLarge

DEFAULT_STATE_LIMIT = 2_000_000


class OracleMethod(str, enum.Enum):
    CLOSED_FORM = "closed-form-geometric"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class OracleResult:
    value: float
    horizon_used: int
    method: OracleMethod
    lost_mass: float = 0.0


def geometric_horizon(p_a: float, p_b: float, epsilon: float) -> int:
    """Smallest T with P(max(t_a, t_b) > T) <= (1-p_a)^T + (1-p_b)^T < epsilon."""
    if min(p_a, p_b) <= 0:
        raise ConfigError("heralding probability must be > 0 for a finite horizon")
    t = 1
    while (1 - p_a) ** t + (1 - p_b) ** t >= epsilon:
        t = max(t + 1, int(t * 1.1))
    # walk back to the minimal value
    while t > 1 and (1 - p_a) ** (t - 1) + (1 - p_b) ** (t - 1) < epsilon:
        t -= 1
    return t


def single_qubit_reliability(cfg: ScenarioConfig, epsilon: float = 1e-12, horizon: int | None = None) -> OracleResult:
    """Exact reliability for one qubit over one channel per branch.

    Success slots are independent geometrics; the pair is checked at
    ``max(t_a, t_b)``, so only the wait stage matters. The double sum over
    ``t_a, t_b <= T`` is taken diagonal by diagonal with each diagonal in
    closed form.
    """
    if cfg.n_qubit != 1 or cfg.n_par != 1:
        raise ConfigError("single_qubit_reliability needs n_qubit = n_par = 1")
    p_a, p_b = cfg.success_probabilities()
    t_max = horizon if horizon is not None else geometric_horizon(p_a, p_b, epsilon)
    q_a, q_b = 1.0 - p_a, 1.0 - p_b
    k = np.arange(t_max)
    n_terms = t_max - k

    def series(r):
        # sum_{j < n} r^j
        if r == 1.0:
            return n_terms.astype(float)
        return -np.expm1(n_terms * np.log(r)) / (1.0 - r) if r > 0 else np.where(n_terms > 0, 1.0, 0.0)

    s = series(q_a * q_b)
    # b = a + k (A first) and a = b + k (B first)
    a_first = p_a * p_b * q_b**k * s
    b_first = p_a * p_b * q_a**k * s
    t_slot = cfg.slot_time()
    ok_a = feasible(1, 1 + k, 1 + k, cfg.memory, t_slot, cfg.f_th, cfg.f0_gen)
    ok_b = feasible(1 + k, 1, 1 + k, cfg.memory, t_slot, cfg.f_th, cfg.f0_gen)
    value = np.sum(a_first[1:] * ok_a[1:]) + np.sum(b_first[1:] * ok_b[1:]) + a_first[0] * ok_a[0]
    lost = 1.0 - (1.0 - q_a**t_max) * (1.0 - q_b**t_max)
    return OracleResult(float(min(max(value, 0.0), 1.0)), t_max, OracleMethod.CLOSED_FORM, lost)


def _branch_trajectories(p: float, n_qubit: int, n_par: int, horizon: int, limit: int):
    """All ways one branch can collect ``n_qubit`` successes by ``horizon``.

    Returns a list of (success_slots, probability); success_slots[n] is the
    slot of the branch's (n+1)-th success.
    """
    done: list[tuple[tuple[int, ...], float]] = []
    frontier: list[tuple[tuple[int, ...], float]] = [((), 1.0)]
    for slot in range(1, horizon + 1):
        nxt = []
        for slots, prob in frontier:
            tries = min(n_par, n_qubit - len(slots))
            for got in range(tries + 1):
                pk = math.comb(tries, got) * p**got * (1.0 - p) ** (tries - got)
                if pk == 0.0:
                    continue
                grown = slots + (slot,) * got
                if len(grown) == n_qubit:
                    done.append((grown, prob * pk))
                else:
                    nxt.append((grown, prob * pk))
        frontier = nxt
        if len(done) + len(frontier) > limit:
            raise StateSpaceTooLarge(
                f"branch enumeration exceeded {limit} states at slot {slot} of {horizon}"
                f" (n_qubit={n_qubit}, n_par={n_par})"
            )
    return done


def exhaustive_reliability(cfg: ScenarioConfig, horizon: int, limit: int = DEFAULT_STATE_LIMIT) -> OracleResult:
    """Exact reliability restricted to runs finishing within ``horizon`` slots.

    Branches are independent without capacity blocking, so each branch's
    trajectories are enumerated separately and then paired. Probability of
    runs not finished by ``horizon`` is returned as ``lost_mass``.
    """
    if cfg.memory.enforce_capacity:
        raise ConfigError("exhaustive oracle does not model capacity blocking")
    p_a, p_b = cfg.success_probabilities()
    traj_a = _branch_trajectories(p_a, cfg.n_qubit, cfg.n_par, horizon, limit)
    traj_b = _branch_trajectories(p_b, cfg.n_qubit, cfg.n_par, horizon, limit)
    if len(traj_a) * len(traj_b) > limit * 50:
        raise StateSpaceTooLarge(f"{len(traj_a)} x {len(traj_b)} trajectory pairs exceed the guard")
    t_slot = cfg.slot_time()
    value = 0.0
    covered = 0.0
    for slots_a, prob_a in traj_a:
        if not traj_b:
            break
        ta = np.array(slots_a)
        tb = np.array([s for s, _ in traj_b])
        pb = np.array([w for _, w in traj_b])
        t_last = np.maximum(ta[-1], tb[:, -1])
        ok = feasible(ta[None, :], tb, t_last[:, None], cfg.memory, t_slot, cfg.f_th, cfg.f0_gen).all(axis=1)
        value += prob_a * float(pb @ ok)
        covered += prob_a * float(pb.sum())
    return OracleResult(value, horizon, OracleMethod.EXHAUSTIVE, max(0.0, 1.0 - covered))
