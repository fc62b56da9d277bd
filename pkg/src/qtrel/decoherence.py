"""Bell-pair fidelity under independent depolarizing memory noise.

A pair whose qubits sit in memories with coherence times ``tau1`` and
``tau2`` decays as::

    F(t) = (3/4) * ((4*F0 - 1)/3) * exp(-(t-t1)/tau1) * exp(-(t-t2)/tau2) + 1/4

For a repeater-assisted pair the decay happens in two stages: while the
first branch waits for the second (QR memory + first endpoint), and after
the swap while both endpoints wait for the last qubit of the batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MIXED = 0.25


@dataclass(frozen=True)
class MemoryConfig:
    tau_alice: float
    tau_bob: float
    tau_qr: float
    qr_capacity: int = 2
    endpoint_capacity: int = 1
    enforce_capacity: bool = False

    def __post_init__(self) -> None:
        for name in ("tau_alice", "tau_bob", "tau_qr"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.qr_capacity < 1 or self.endpoint_capacity < 1:
            raise ConfigError("memory capacities must be >= 1")

    @classmethod
    def uniform(cls, tau: float, n_par: int = 1, n_qubit: int = 1, enforce_capacity: bool = False):
        return cls(tau, tau, tau, 2 * n_par, n_qubit, enforce_capacity)


@dataclass(frozen=True)
class StorageInterval:
    t_a: int
    t_b: int
    t_last: int

    def __post_init__(self) -> None:
        if self.t_a < 1 or self.t_b < 1:
            raise ConfigError("success slots are 1-based")
        if self.t_last < max(self.t_a, self.t_b):
            raise ConfigError("t_last must be >= max(t_a, t_b)")

    @property
    def wait(self) -> int:
        """Slots the first branch waits for the second (t')."""
        return abs(self.t_a - self.t_b)

    @property
    def hold(self) -> int:
        """Slots the swapped pair waits for batch completion (t'')."""
        return self.t_last - max(self.t_a, self.t_b)


def _check_f0(f0) -> None:
    f0 = np.asarray(f0)
    if np.any(f0 < MIXED) or np.any(f0 > 1.0):
        raise ConfigError("initial fidelity must lie in [1/4, 1]")


def pair_fidelity(t, t1, t2, tau1, tau2, f0=1.0):
    """Fidelity at time ``t`` of a pair stored since ``t1`` / ``t2``.

    Accepts scalars or broadcastable arrays.
    """
    t, t1, t2 = np.asarray(t, float), np.asarray(t1, float), np.asarray(t2, float)
    if np.any(t < t1) or np.any(t < t2):
        raise ConfigError("negative storage time: t must be >= t1 and t2")
    if np.any(np.asarray(tau1) <= 0) or np.any(np.asarray(tau2) <= 0):
        raise ConfigError("coherence times must be > 0")
    _check_f0(f0)
    w = (4.0 * np.asarray(f0, float) - 1.0) / 3.0
    out = 0.75 * w * np.exp(-(t - t1) / tau1 - (t - t2) / tau2) + MIXED
    return out.item() if out.ndim == 0 else out


def _stage_rates(t_a, t_b, mem: MemoryConfig):
    # first-succeeding endpoint holds its qubit during the wait stage
    tau_first = np.where(np.asarray(t_a) > np.asarray(t_b), mem.tau_bob, mem.tau_alice)
    wait_rate = 1.0 / mem.tau_qr + 1.0 / tau_first
    hold_rate = 1.0 / mem.tau_alice + 1.0 / mem.tau_bob
    return wait_rate, hold_rate


def two_stage_fidelity(t_a, t_b, t_last, mem: MemoryConfig, t_slot: float, f0_gen: float = 1.0):
    """Fidelity at ``t_last`` for branch success slots ``(t_a, t_b)``.

    Vectorised over integer arrays of slot indices.
    """
    _check_f0(f0_gen)
    t_a, t_b, t_last = (np.asarray(x, dtype=np.int64) for x in (t_a, t_b, t_last))
    wait = np.abs(t_a - t_b)
    hold = t_last - np.maximum(t_a, t_b)
    if np.any(hold < 0):
        raise ConfigError("t_last must be >= max(t_a, t_b)")
    wait_rate, hold_rate = _stage_rates(t_a, t_b, mem)
    w = (4.0 * f0_gen - 1.0) / 3.0
    out = 0.75 * w * np.exp(-t_slot * (wait * wait_rate + hold * hold_rate)) + MIXED
    return out.item() if out.ndim == 0 else out


def interval_fidelity(interval: StorageInterval, mem: MemoryConfig, t_slot: float, f0_gen: float = 1.0) -> float:
    return two_stage_fidelity(interval.t_a, interval.t_b, interval.t_last, mem, t_slot, f0_gen)


def _check_threshold(f_th) -> None:
    if np.any(np.asarray(f_th) <= MIXED) or np.any(np.asarray(f_th) > 1.0):
        raise ConfigError("fidelity threshold must lie in (1/4, 1]")


def feasible(t_a, t_b, t_last, mem: MemoryConfig, t_slot: float, f_th: float, f0_gen: float = 1.0):
    """True where the two-stage fidelity at ``t_last`` meets ``f_th``."""
    _check_threshold(f_th)
    return np.asarray(two_stage_fidelity(t_a, t_b, t_last, mem, t_slot, f0_gen)) >= f_th


def lemma_terms(t_a: int, t_b: int, t_last: int, mem: MemoryConfig, t_slot: float, f_th: float, f0_gen: float = 1.0):
    """Left- and right-hand sides of the integer storage-time condition.

    Coherence times enter in units of slots, so both sides are in slot^3
    and the ceiling relaxes the bound by at most one such unit. ``tau'``
    belongs to the endpoint whose branch succeeded first. The right-hand
    side is returned before rounding; for ``f0_gen < 1`` the log argument
    is ``(4 f_th - 1) / (4 f0_gen - 1)``.
    """
    _check_threshold(f_th)
    _check_f0(f0_gen)
    wait = abs(t_a - t_b)
    hold = t_last - max(t_a, t_b)
    if t_a > t_b:
        tau1, tau2 = mem.tau_bob, mem.tau_alice
    else:
        tau1, tau2 = mem.tau_alice, mem.tau_bob
    tau1, tau2, tq = tau1 / t_slot, tau2 / t_slot, mem.tau_qr / t_slot
    lhs = wait * tau2 * (tau1 + tq) + hold * tq * (tau1 + tau2)
    if 4.0 * f0_gen - 1.0 <= 0:
        return lhs, -math.inf
    rhs = -tq * tau1 * tau2 * math.log((4.0 * f_th - 1.0) / (4.0 * f0_gen - 1.0))
    return lhs, rhs


def feasible_ceiling(t_a: int, t_b: int, t_last: int, mem: MemoryConfig, t_slot: float, f_th: float, f0_gen: float = 1.0) -> bool:
    """Integer (ceiling) form of the storage-time condition.

    Kept as a cross-check; ``feasible`` is authoritative.
    """
    lhs, rhs = lemma_terms(t_a, t_b, t_last, mem, t_slot, f_th, f0_gen)
    return lhs <= math.ceil(rhs) if math.isfinite(rhs) else False
