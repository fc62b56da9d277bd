"""Counter-based uniforms keyed by (seed, run, link, slot, channel).

Every draw is a pure function of its coordinates, so a run can be
replayed in isolation and results do not depend on how runs are split
across workers or chunks.
"""

from __future__ import annotations

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = 1.0 / (1 << 53)


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser; bijective on uint64
    x = x ^ (x >> _S30)
    x = x * _M1
    x = x ^ (x >> _S27)
    x = x * _M2
    return x ^ (x >> _S31)


def seed_key(master_seed: int) -> np.uint64:
    """Reduce arbitrary integer seed material to a 64-bit key."""
    state = np.random.SeedSequence(master_seed).generate_state(1, dtype=np.uint64)
    return state[0]


def counter_hash(key, *counters) -> np.ndarray:
    """Hash ``key`` together with integer counter arrays (broadcast)."""
    h = np.asarray(key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for c in counters:
            c = np.asarray(c).astype(np.uint64)
            h = _mix(h ^ _mix(c + _GOLDEN))
    return h


def uniforms(key, *counters) -> np.ndarray:
    """Uniform floats in [0, 1) at the given counter coordinates."""
    return (counter_hash(key, *counters) >> _S11).astype(np.float64) * _INV53
