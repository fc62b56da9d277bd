"""Frontier searches: most qubits at a fixed distance, longest distance at a
fixed qubit count, for a target reliability.

Every probe reuses the same master seed (common random numbers), so
neighbouring probes differ only through the parameter being searched.
Truncated runs count against the target here: a probe passes only if
``successes / n_runs >= target``. The truncated fraction is kept on each
probe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .engine import ScenarioConfig, run_batch
from .errors import ConfigError
from .reliability import wilson_interval

DEFAULT_RESOLUTION = 10.0
DEFAULT_RUNS = 10_000


class Axis(str, enum.Enum):
    MAX_QUBITS = "max_qubits"
    MAX_DISTANCE = "max_distance"


@dataclass(frozen=True)
class FeasibilityQuery:
    base: ScenarioConfig
    target_reliability: float
    search_axis: Axis = Axis.MAX_QUBITS
    distance_resolution: float = DEFAULT_RESOLUTION
    qubit_cap: int = 16
    n_runs: int = DEFAULT_RUNS
    master_seed: int = 0
    start_distance: float = 1_000.0
    max_doublings: int = 30
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "search_axis", Axis(self.search_axis))
        if not 0.0 < self.target_reliability <= 1.0:
            raise ConfigError("target reliability must lie in (0, 1]")
        if not self.distance_resolution > 0:
            raise ConfigError("distance_resolution must be > 0")
        if self.qubit_cap < 1:
            raise ConfigError("qubit_cap must be >= 1")
        if self.n_runs < 1:
            raise ConfigError("n_runs must be >= 1")
        if not self.start_distance > 0:
            raise ConfigError("start_distance must be > 0")


@dataclass(frozen=True)
class Probe:
    x: float
    value: float
    ci_low: float
    ci_high: float
    trunc_frac: float
    passed: bool

    def contains(self, target: float) -> bool:
        return self.ci_low <= target <= self.ci_high


@dataclass(frozen=True)
class Frontier:
    """Search result.

    ``value`` is the largest passing point (0 if none). ``lo``/``hi`` are
    the last passing and first failing probe positions; ``hi`` is None when
    no failure was found within the search range. ``uncertain`` is set when
    the target lies inside the CI of either boundary probe.
    """

    value: float
    lo: float
    hi: float | None
    uncertain: bool
    probes: tuple[Probe, ...] = field(default=(), repr=False)

    @property
    def evaluations(self) -> int:
        return len(self.probes)


def _probe(cfg: ScenarioConfig, x: float, q: FeasibilityQuery) -> Probe:
    batch = run_batch(cfg, q.n_runs, q.master_seed, workers=q.workers)
    n = len(batch)
    value = batch.n_success / n
    lo, hi = wilson_interval(batch.n_success, n)
    return Probe(x, value, lo, hi, batch.trunc_frac, value >= q.target_reliability)


def _uncertain(target: float, *probes: Probe | None) -> bool:
    return any(p is not None and p.contains(target) for p in probes)


def max_qubits(q: FeasibilityQuery) -> Frontier:
    """Scan N = 1, 2, ... and stop at the first N missing the target."""
    if q.search_axis is not Axis.MAX_QUBITS:
        raise ConfigError("query axis must be max_qubits")
    probes: list[Probe] = []
    last_pass: Probe | None = None
    first_fail: Probe | None = None
    for n in range(1, q.qubit_cap + 1):
        p = _probe(q.base.with_qubits(n), n, q)
        probes.append(p)
        if not p.passed:
            first_fail = p
            break
        last_pass = p
    best = int(last_pass.x) if last_pass else 0
    hi = int(first_fail.x) if first_fail else None
    return Frontier(best, best, hi, _uncertain(q.target_reliability, last_pass, first_fail), tuple(probes))


def max_distance(q: FeasibilityQuery) -> Frontier:
    """Largest Alice-Bob distance meeting the target, to ``distance_resolution``.

    The upper bracket is found by doubling from ``start_distance``; the
    bracket is then bisected. Assumes reliability falls with distance.
    """
    if q.search_axis is not Axis.MAX_DISTANCE:
        raise ConfigError("query axis must be max_distance")
    probes: list[Probe] = []

    def probe(d: float) -> Probe:
        p = _probe(q.base.with_distance(d), d, q)
        probes.append(p)
        return p

    zero = probe(0.0)
    if not zero.passed:
        return Frontier(0.0, 0.0, 0.0, _uncertain(q.target_reliability, zero), tuple(probes))
    good, bad = zero, None
    d = q.start_distance
    for _ in range(q.max_doublings):
        p = probe(d)
        if not p.passed:
            bad = p
            break
        good = p
        d *= 2.0
    if bad is None:
        return Frontier(good.x, good.x, None, _uncertain(q.target_reliability, good), tuple(probes))
    while bad.x - good.x > q.distance_resolution:
        p = probe((good.x + bad.x) / 2.0)
        if p.passed:
            good = p
        else:
            bad = p
    return Frontier(good.x, good.x, bad.x, _uncertain(q.target_reliability, good, bad), tuple(probes))


def bisection_budget(width: float, resolution: float, bracket_probes: int) -> int:
    """Probe count bound for :func:`max_distance`: the d = 0 probe, the
    bracketing probes, and halvings of the initial bracket ``width``."""
    return 1 + bracket_probes + max(0, math.ceil(math.log2(width / resolution)))
