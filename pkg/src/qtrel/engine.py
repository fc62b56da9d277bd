"""Slotted Monte Carlo of the QR-assisted multi-qubit teleportation stage.

Each slot, each branch (QR-Alice = A, QR-Bob = B) runs up to ``n_par``
heralded attempts. Successes on a branch are numbered in arrival order and
the n-th success on A is paired with the n-th success on B to form qubit
n's end-to-end pair. A branch stops once it holds ``n_qubit`` successes.
The run completes at ``t_last``, the slot in which both branches reach
``n_qubit``; every pair is then checked against the fidelity threshold.

The simulation is vectorised over runs. Randomness comes from
:mod:`qtrel.rng`, keyed by (seed, run, branch, slot, channel).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .channel import LinkConfig, Medium, TimingConfig, make_link, slot_duration, success_probability, transmission_efficiency
from .decoherence import MIXED, MemoryConfig, two_stage_fidelity
from .errors import ConfigError

DEFAULT_MAX_SLOTS = 10_000
_CHUNK = 100_000


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulated teleportation stage needs.

    ``p_suc_override`` (per-branch heralding probabilities) and
    ``t_slot_override`` bypass the channel model; they exist for
    validation against oracles at probabilities the channel formula
    cannot reach.
    """

    n_qubit: int
    n_par: int
    f_th: float
    link_a: LinkConfig
    link_b: LinkConfig
    memory: MemoryConfig
    timing: TimingConfig = field(default_factory=TimingConfig)
    theta: float = math.pi / 4
    f0_gen: float = 1.0
    max_slots: int = DEFAULT_MAX_SLOTS
    p_suc_override: tuple[float, float] | None = None
    t_slot_override: float | None = None

    def __post_init__(self) -> None:
        if self.n_qubit < 1:
            raise ConfigError("n_qubit must be >= 1")
        if self.n_par < 1:
            raise ConfigError("n_par must be >= 1")
        if not MIXED < self.f_th <= 1.0:
            raise ConfigError(f"f_th must satisfy 1/4 < f_th <= 1, got {self.f_th!r}")
        if not MIXED <= self.f0_gen <= 1.0:
            raise ConfigError("f0_gen must lie in [1/4, 1]")
        if self.max_slots < 1:
            raise ConfigError("max_slots must be >= 1")
        if self.p_suc_override is not None:
            p = tuple(float(x) for x in self.p_suc_override)
            if len(p) != 2 or not all(0.0 <= x <= 1.0 for x in p):
                raise ConfigError("p_suc_override must be two probabilities")
            object.__setattr__(self, "p_suc_override", p)
        if self.t_slot_override is not None and not self.t_slot_override > 0:
            raise ConfigError("t_slot_override must be > 0")

    @classmethod
    def symmetric(
        cls,
        medium: Medium | str = Medium.FIBER,
        distance: float = 0.0,
        tau: float = 500e-6,
        n_qubit: int = 1,
        n_par: int = 1,
        f_th: float = 0.75,
        enforce_capacity: bool = False,
        **kwargs,
    ) -> ScenarioConfig:
        """Centred repeater: both links span ``distance / 2``, all memories share ``tau``."""
        link = make_link(medium, distance / 2.0)
        mem = MemoryConfig.uniform(tau, n_par, n_qubit, enforce_capacity)
        return cls(n_qubit, n_par, f_th, link, link, mem, **kwargs)

    @property
    def distance(self) -> float:
        return self.link_a.distance_half + self.link_b.distance_half

    def with_distance(self, distance: float) -> ScenarioConfig:
        half = distance / 2.0
        return replace(self, link_a=self.link_a.at_distance(half), link_b=self.link_b.at_distance(half))

    def with_qubits(self, n_qubit: int) -> ScenarioConfig:
        return replace(self, n_qubit=n_qubit, memory=replace(self.memory, endpoint_capacity=n_qubit))

    def success_probabilities(self) -> tuple[float, float]:
        if self.p_suc_override is not None:
            return self.p_suc_override
        return (
            success_probability(transmission_efficiency(self.link_a), self.theta),
            success_probability(transmission_efficiency(self.link_b), self.theta),
        )

    def slot_time(self) -> float:
        """Common slot length; the slower link sets the clock when links differ."""
        if self.t_slot_override is not None:
            return self.t_slot_override
        return max(slot_duration(self.link_a, self.timing), slot_duration(self.link_b, self.timing))

    def slot_sync(self) -> str:
        if self.t_slot_override is not None:
            return "override"
        ta = slot_duration(self.link_a, self.timing)
        tb = slot_duration(self.link_b, self.timing)
        return "shared" if ta == tb else "max-of-links"


@dataclass(frozen=True)
class RunOutcome:
    per_qubit: tuple[tuple[int, int], ...]
    t_last: int
    min_fidelity: float
    success: bool
    truncated: bool = False


@dataclass(frozen=True)
class EmpiricalDistributions:
    """Normalised PMFs indexed by slot (index 0 carries no mass).

    ``p_qubit_a[n - 1, t]`` is the probability that qubit n's branch-A pair
    was heralded in slot t.
    """

    p_se: np.ndarray
    p_qubit_a: np.ndarray
    p_qubit_b: np.ndarray
    n_runs: int

    @classmethod
    def from_samples(cls, t_a, t_b, t_last, weights=None) -> EmpiricalDistributions:
        t_a = np.asarray(t_a, dtype=np.int64)
        t_b = np.asarray(t_b, dtype=np.int64)
        t_last = np.asarray(t_last, dtype=np.int64)
        if t_last.size == 0:
            raise ValueError("no completed runs to build distributions from")
        w = np.ones(t_last.size) if weights is None else np.asarray(weights, dtype=float)
        size = int(t_last.max()) + 1
        total = w.sum()
        p_se = np.bincount(t_last, weights=w, minlength=size) / total
        n_qubit = t_a.shape[1]
        pa = np.empty((n_qubit, size))
        pb = np.empty((n_qubit, size))
        for n in range(n_qubit):
            pa[n] = np.bincount(t_a[:, n], weights=w, minlength=size) / total
            pb[n] = np.bincount(t_b[:, n], weights=w, minlength=size) / total
        return cls(p_se, pa, pb, int(t_last.size))

    @property
    def n_qubit(self) -> int:
        return self.p_qubit_a.shape[0]

    def padded(self, size: int) -> EmpiricalDistributions:
        """Same distributions on a longer slot axis (zero mass appended)."""
        extra = size - self.p_se.size
        if extra <= 0:
            return self
        return EmpiricalDistributions(
            np.pad(self.p_se, (0, extra)),
            np.pad(self.p_qubit_a, ((0, 0), (0, extra))),
            np.pad(self.p_qubit_b, ((0, 0), (0, extra))),
            self.n_runs,
        )


@dataclass
class Batch:
    """Outcomes of ``n_runs`` simulated runs, stored column-wise.

    Truncated runs (no completion within ``max_slots``) have ``t_last = 0``
    and are excluded from successes, failures and distributions.
    """

    cfg: ScenarioConfig
    master_seed: int
    t_a: np.ndarray
    t_b: np.ndarray
    t_last: np.ndarray
    min_fidelity: np.ndarray
    success: np.ndarray
    truncated: np.ndarray
    t_slot: float
    slot_sync: str

    def __len__(self) -> int:
        return self.t_last.size

    def __getitem__(self, i: int) -> RunOutcome:
        return RunOutcome(
            tuple(zip(self.t_a[i].tolist(), self.t_b[i].tolist())),
            int(self.t_last[i]),
            float(self.min_fidelity[i]),
            bool(self.success[i]),
            bool(self.truncated[i]),
        )

    def outcomes(self) -> list[RunOutcome]:
        return [self[i] for i in range(len(self))]

    @property
    def n_success(self) -> int:
        return int(self.success.sum())

    @property
    def n_truncated(self) -> int:
        return int(self.truncated.sum())

    @property
    def n_failure(self) -> int:
        return len(self) - self.n_success - self.n_truncated

    @property
    def trunc_frac(self) -> float:
        return self.n_truncated / len(self)

    def completed(self) -> np.ndarray:
        return ~self.truncated

    def with_threshold(self, f_th: float) -> Batch:
        """The same runs judged against another fidelity threshold."""
        cfg = replace(self.cfg, f_th=f_th)
        success = self.completed() & (np.nan_to_num(self.min_fidelity, nan=0.0) >= f_th)
        return replace(self, cfg=cfg, success=success)

    @property
    def distributions(self) -> EmpiricalDistributions:
        ok = self.completed()
        return EmpiricalDistributions.from_samples(self.t_a[ok], self.t_b[ok], self.t_last[ok])


def _simulate_chunk(cfg: ScenarioConfig, key: np.uint64, runs: np.ndarray):
    n_runs = runs.size
    nq, npar = cfg.n_qubit, cfg.n_par
    p = cfg.success_probabilities()
    t_arr = [np.zeros((n_runs, nq), dtype=np.int64), np.zeros((n_runs, nq), dtype=np.int64)]
    count = [np.zeros(n_runs, dtype=np.int64), np.zeros(n_runs, dtype=np.int64)]
    t_last = np.zeros(n_runs, dtype=np.int64)
    if min(p) <= 0.0:
        return t_arr[0], t_arr[1], t_last
    base = [rng.counter_hash(key, runs, 0), rng.counter_hash(key, runs, 1)]
    act = np.arange(n_runs)
    enforce = cfg.memory.enforce_capacity
    for s in range(1, cfg.max_slots + 1):
        if act.size == 0:
            break
        ca, cb = count[0][act], count[1][act]
        if enforce:
            matched = np.minimum(ca, cb)
            room = [npar - (ca - matched), npar - (cb - matched)]
        else:
            room = [npar, npar]
        for br, c_now in ((0, ca), (1, cb)):
            channels = np.minimum(nq - c_now, room[br])
            k = np.zeros(act.size, dtype=np.int64)
            b = base[br][act]
            for ch in range(npar):
                hit = rng.uniforms(b, s, ch) < p[br]
                k += hit & (ch < channels)
            for j in range(npar):
                sel = j < k
                if not sel.any():
                    continue
                rows = act[sel]
                t_arr[br][rows, c_now[sel] + j] = s
            count[br][act] = c_now + k
        done = (count[0][act] == nq) & (count[1][act] == nq)
        t_last[act[done]] = s
        act = act[~done]
    return t_arr[0], t_arr[1], t_last


def _chunk_job(args):
    cfg, master_seed, start, stop = args
    return _simulate_chunk(cfg, rng.seed_key(master_seed), np.arange(start, stop, dtype=np.int64))


def run_batch(
    cfg: ScenarioConfig,
    n_runs: int,
    master_seed: int,
    workers: int = 1,
    chunk_size: int = _CHUNK,
) -> Batch:
    """Simulate runs ``0 .. n_runs-1``; bit-identical for any ``workers``."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    jobs = [(cfg, master_seed, lo, min(lo + chunk_size, n_runs)) for lo in range(0, n_runs, chunk_size)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    t_a = np.concatenate([x[0] for x in parts])
    t_b = np.concatenate([x[1] for x in parts])
    t_last = np.concatenate([x[2] for x in parts])
    return _finish(cfg, master_seed, t_a, t_b, t_last)


def _finish(cfg, master_seed, t_a, t_b, t_last) -> Batch:
    t_slot = cfg.slot_time()
    truncated = t_last == 0
    min_fid = np.full(t_last.size, np.nan)
    ok = ~truncated
    if ok.any():
        fid = two_stage_fidelity(t_a[ok], t_b[ok], t_last[ok, None], cfg.memory, t_slot, cfg.f0_gen)
        min_fid[ok] = np.min(fid, axis=1)
    success = ok & (np.nan_to_num(min_fid, nan=0.0) >= cfg.f_th)
    return Batch(cfg, master_seed, t_a, t_b, t_last, min_fid, success, truncated, t_slot, cfg.slot_sync())


def simulate_run(cfg: ScenarioConfig, master_seed: int, run_index: int = 0) -> RunOutcome:
    """Replay a single run; identical to entry ``run_index`` of a batch."""
    t_a, t_b, t_last = _simulate_chunk(cfg, rng.seed_key(master_seed), np.array([run_index], dtype=np.int64))
    return _finish(cfg, master_seed, t_a, t_b, t_last)[0]
