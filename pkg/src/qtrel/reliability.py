"""Reliability estimators.

``reliability_direct`` is the fraction of completed runs in which every
pair met the threshold. ``reliability_composed`` rebuilds the same
quantity from completion-time and per-qubit heralding PMFs, assuming the
qubits' fidelity events are independent given ``t_last``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .decoherence import feasible
from .engine import Batch, EmpiricalDistributions, RunOutcome, ScenarioConfig
from .errors import EstimationError

DEFAULT_EPSILON = 1e-6
DEFAULT_BOOTSTRAP = 200


class Method(str, enum.Enum):
    DIRECT = "direct"
    COMPOSED = "composed"


@dataclass(frozen=True)
class ReliabilityEstimate:
    value: float
    ci_low: float
    ci_high: float
    method: Method
    n_runs: int
    t_max: int | None = None
    epsilon: float | None = None
    skipped_mass: float = 0.0

    def meets(self, target: float) -> bool:
        return self.value >= target

    def straddles(self, target: float) -> bool:
        return self.ci_low < target <= self.ci_high or self.ci_low <= target < self.ci_high


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z / denom * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    return float(max(0.0, centre - half)), float(min(1.0, centre + half))


def _counts(outcomes) -> tuple[int, int]:
    if isinstance(outcomes, Batch):
        return outcomes.n_success, len(outcomes) - outcomes.n_truncated
    succ = done = 0
    for o in outcomes:
        if o.truncated:
            continue
        done += 1
        succ += bool(o.success)
    return succ, done


def reliability_direct(outcomes: Batch | Iterable[RunOutcome], confidence: float = 0.95) -> ReliabilityEstimate:
    """Success fraction over non-truncated runs with a Wilson interval."""
    succ, done = _counts(outcomes)
    if done == 0:
        raise EstimationError("every run was truncated; no reliability estimate")
    lo, hi = wilson_interval(succ, done, confidence)
    value = succ / done
    return ReliabilityEstimate(value, min(lo, value), max(hi, value), Method.DIRECT, done)


def horizon(p_se: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> int:
    """Smallest slot whose cumulative completion mass reaches ``1 - epsilon``."""
    p_se = np.asarray(p_se, dtype=float)
    if p_se.size == 0 or not p_se.any():
        raise ValueError("completion PMF is empty")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    cdf = np.cumsum(p_se)
    hit = np.nonzero(cdf >= 1.0 - epsilon)[0]
    if hit.size:
        return int(hit[0])
    # rounding left the total a hair under 1 - epsilon
    return int(np.nonzero(p_se)[0][-1])


def _indicator(t_last: int, cfg: ScenarioConfig) -> np.ndarray:
    """Feasibility of every (t_a, t_b) in 1..t_last, as a t_last x t_last grid."""
    s = np.arange(1, t_last + 1)
    return feasible(s[:, None], s[None, :], t_last, cfg.memory, cfg.slot_time(), cfg.f_th, cfg.f0_gen)


class Form(str, enum.Enum):
    """How the per-qubit double sum is restricted at completion slot t.

    ``PRINTED`` sums every (t_a, t_b) with both <= t. ``CONDITIONED`` does
    the same for qubits 1..N-1 but, for the last qubit, keeps only pairs
    with max(t_a, t_b) = t, which is the only way that qubit can finish at
    t under in-order pairing. The two differ even for a single qubit;
    only ``CONDITIONED`` is exact there.
    """

    CONDITIONED = "conditioned"
    PRINTED = "printed"


def _restrict(n: int, n_qubit: int, t_last: int, form: Form) -> np.ndarray | None:
    if Form(form) is Form.PRINTED or n != n_qubit:
        return None
    s = np.arange(1, t_last + 1)
    return np.maximum(s[:, None], s[None, :]) == t_last


def p_fid(
    n: int,
    t_last: int,
    dists: EmpiricalDistributions,
    cfg: ScenarioConfig,
    form: Form = Form.CONDITIONED,
) -> float:
    """Probability that qubit ``n`` (1-based) meets the threshold at ``t_last``.

    Returns NaN when the restricted double sum carries no mass.
    """
    size = t_last + 1
    pa = np.zeros(size)
    pb = np.zeros(size)
    ka = min(size, dists.p_qubit_a.shape[1])
    kb = min(size, dists.p_qubit_b.shape[1])
    pa[:ka] = dists.p_qubit_a[n - 1, :ka]
    pb[:kb] = dists.p_qubit_b[n - 1, :kb]
    weight = np.outer(pa[1:], pb[1:])
    mask = _restrict(n, dists.n_qubit, t_last, form)
    if mask is not None:
        weight = weight * mask
    den = weight.sum()
    if den <= 0:
        return float("nan")
    return float(np.sum(weight * _indicator(t_last, cfg)) / den)


def _composed(pa, pb, p_se, t_max: int, cfg: ScenarioConfig, form: Form = Form.CONDITIONED):
    """Composed reliability for a stack of PMF sets.

    ``pa``/``pb`` have shape (k, n_qubit, slots), ``p_se`` (k, slots);
    returns (values, skipped_mass) of shape (k,).
    """
    k, nq = p_se.shape[0], pa.shape[1]
    value = np.zeros(k)
    skipped = np.zeros(k)
    for t in range(1, min(t_max, p_se.shape[1] - 1) + 1):
        w = p_se[:, t]
        if not w.any():
            continue
        ind = _indicator(t, cfg).astype(float)
        a, b = pa[:, :, 1 : t + 1], pb[:, :, 1 : t + 1]
        num = np.sum((a @ ind) * b, axis=2)
        den = a.sum(axis=2) * b.sum(axis=2)
        mask = _restrict(nq, nq, t, form)
        if mask is not None:
            m = mask.astype(float)
            la, lb = a[:, -1], b[:, -1]
            num[:, -1] = np.sum((la @ (ind * m)) * lb, axis=1)
            den[:, -1] = np.sum((la @ m) * lb, axis=1)
        bad = np.any(den <= 0, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        value += np.where(bad, 0.0, w * np.prod(ratio, axis=1))
        skipped += np.where(bad, w, 0.0)
    return value, skipped


def composed_value(
    dists: EmpiricalDistributions,
    cfg: ScenarioConfig,
    epsilon: float = DEFAULT_EPSILON,
    form: Form = Form.CONDITIONED,
):
    """Point value of the composed estimator: ``(value, t_max, skipped_mass)``."""
    t_max = horizon(dists.p_se, epsilon)
    size = max(dists.p_se.size, dists.p_qubit_a.shape[1], dists.p_qubit_b.shape[1])
    d = _align(dists, size)
    value, skipped = _composed(d.p_qubit_a[None], d.p_qubit_b[None], d.p_se[None], t_max, cfg, form)
    return float(np.clip(value[0], 0.0, 1.0)), t_max, float(skipped[0])


def _align(dists: EmpiricalDistributions, size: int) -> EmpiricalDistributions:
    def pad(a):
        return np.pad(a, [(0, 0)] * (a.ndim - 1) + [(0, size - a.shape[-1])])

    return EmpiricalDistributions(pad(dists.p_se), pad(dists.p_qubit_a), pad(dists.p_qubit_b), dists.n_runs)


def reliability_composed(
    source: Batch | EmpiricalDistributions,
    cfg: ScenarioConfig | None = None,
    epsilon: float = DEFAULT_EPSILON,
    n_boot: int = DEFAULT_BOOTSTRAP,
    confidence: float = 0.95,
    form: Form = Form.CONDITIONED,
) -> ReliabilityEstimate:
    """Composed estimate; bootstrap CI over runs when given a :class:`Batch`.

    With bare distributions there is nothing to resample and the interval
    collapses to the point value.
    """
    if isinstance(source, Batch):
        cfg = cfg or source.cfg
        ok = source.completed()
        if not ok.any():
            raise EstimationError("every run was truncated; no reliability estimate")
        dists = source.distributions
    else:
        if cfg is None:
            raise ValueError("cfg is required with bare distributions")
        dists = source
    value, t_max, skipped = composed_value(dists, cfg, epsilon, form)
    lo = hi = value
    if isinstance(source, Batch) and n_boot > 0:
        boots = _bootstrap(source, cfg, t_max, n_boot, form)
        alpha = (1.0 - confidence) / 2.0
        lo, hi = (float(x) for x in np.quantile(boots, [alpha, 1.0 - alpha]))
    return ReliabilityEstimate(value, min(lo, value), max(hi, value), Method.COMPOSED, dists.n_runs, t_max, epsilon, skipped)


def _bootstrap(batch: Batch, cfg: ScenarioConfig, t_max: int, n_boot: int, form: Form, block: int = 25) -> np.ndarray:
    ok = batch.completed()
    t_a, t_b, t_last = batch.t_a[ok], batch.t_b[ok], batch.t_last[ok]
    n = t_last.size
    size = int(t_last.max()) + 1
    nq = t_a.shape[1]
    gen = np.random.default_rng(np.random.SeedSequence(batch.master_seed, spawn_key=(0xB007,)))
    out = []
    for lo in range(0, n_boot, block):
        k = min(block, n_boot - lo)
        w = np.stack([np.bincount(gen.integers(0, n, n), minlength=n) for _ in range(k)]).astype(float) / n
        p_se = np.stack([np.bincount(t_last, weights=wi, minlength=size) for wi in w])
        pa = np.stack([[np.bincount(t_a[:, q], weights=wi, minlength=size) for q in range(nq)] for wi in w])
        pb = np.stack([[np.bincount(t_b[:, q], weights=wi, minlength=size) for q in range(nq)] for wi in w])
        value, _ = _composed(pa, pb, p_se, t_max, cfg, form)
        out.append(value)
    return np.clip(np.concatenate(out), 0.0, 1.0)
