"""Sweep orchestration and result emission.

Grid points that differ only in ``f_th`` share one batch of runs, judged
against each threshold in turn. Row order follows the grid order of the
spec regardless of how many workers ran it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Any

import numpy as np

from .config import ExperimentSpec, emit
from .engine import run_batch
from .errors import EstimationError
from .feasibility import Axis, FeasibilityQuery, max_distance, max_qubits
from .reliability import reliability_composed, reliability_direct

CSV_COLUMNS = (
    "medium",
    "d_m",
    "tau_s",
    "n_qubit",
    "n_par",
    "f_th",
    "r_direct",
    "ci_low",
    "ci_high",
    "r_composed",
    "trunc_frac",
    "mean_t_last",
    "n_runs",
    "seed",
)
FEASIBILITY_COLUMNS = (
    "axis",
    "medium",
    "d_m",
    "tau_s",
    "n_qubit",
    "n_par",
    "f_th",
    "r_th",
    "frontier",
    "lo",
    "hi",
    "uncertain",
    "evaluations",
    "n_runs",
    "seed",
)


@dataclass
class ExperimentResult:
    rows: list[dict[str, Any]]
    columns: tuple[str, ...]
    spec: ExperimentSpec
    details: list[dict[str, Any]] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return any(d.get("error") for d in self.details)


def _group_key(point):
    return tuple((k, v) for k, v in point.items() if k != "f_th")


def _reliability_group(args):
    spec, points = args
    t0 = time.perf_counter()
    cfg = spec.scenario(points[0])
    batch = run_batch(cfg, spec.runs_per_point, spec.master_seed)
    rows, details = [], []
    done = batch.completed()
    mean_t_last = float(batch.t_last[done].mean()) if done.any() else math.nan
    p_a, p_b = cfg.success_probabilities()
    for point in points:
        b = batch.with_threshold(point["f_th"])
        row = {
            "medium": point["medium"],
            "d_m": point["d"],
            "tau_s": point["tau"],
            "n_qubit": point["n_qubit"],
            "n_par": point["n_par"],
            "f_th": point["f_th"],
            "trunc_frac": b.trunc_frac,
            "mean_t_last": mean_t_last,
            "n_runs": spec.runs_per_point,
            "seed": spec.master_seed,
        }
        detail = {
            "scenario": asdict(b.cfg),
            "p_suc": [p_a, p_b],
            "t_slot": batch.t_slot,
            "slot_sync": batch.slot_sync,
        }
        try:
            direct = reliability_direct(b)
            comp = reliability_composed(b, epsilon=spec.epsilon, n_boot=spec.bootstrap)
        except EstimationError as exc:
            row.update(r_direct=math.nan, ci_low=math.nan, ci_high=math.nan, r_composed=math.nan)
            detail["error"] = str(exc)
        else:
            row.update(r_direct=direct.value, ci_low=direct.ci_low, ci_high=direct.ci_high, r_composed=comp.value)
            detail.update(
                composed_ci=[comp.ci_low, comp.ci_high],
                t_max=comp.t_max,
                composed_skipped_mass=comp.skipped_mass,
                n_completed=direct.n_runs,
            )
        rows.append(row)
        details.append(detail)
    return rows, details, time.perf_counter() - t0


def _feasibility_job(args):
    spec, point, r_th = args
    t0 = time.perf_counter()
    f = spec.feasibility
    q = FeasibilityQuery(
        base=spec.scenario(point),
        target_reliability=r_th,
        search_axis=f.axis,
        distance_resolution=f.distance_resolution,
        qubit_cap=f.qubit_cap,
        n_runs=spec.runs_per_point,
        master_seed=spec.master_seed,
        start_distance=f.start_distance,
    )
    res = max_distance(q) if f.axis is Axis.MAX_DISTANCE else max_qubits(q)
    row = {
        "axis": f.axis.value,
        "medium": point["medium"],
        "d_m": "" if f.axis is Axis.MAX_DISTANCE else point["d"],
        "tau_s": point["tau"],
        "n_qubit": point["n_qubit"] if f.axis is Axis.MAX_DISTANCE else "",
        "n_par": point["n_par"],
        "f_th": point["f_th"],
        "r_th": r_th,
        "frontier": res.value,
        "lo": res.lo,
        "hi": "" if res.hi is None else res.hi,
        "uncertain": res.uncertain,
        "evaluations": res.evaluations,
        "n_runs": spec.runs_per_point,
        "seed": spec.master_seed,
    }
    detail = {"scenario": asdict(q.base), "probes": [asdict(p) for p in res.probes]}
    return [row], [detail], time.perf_counter() - t0


def _jobs(spec: ExperimentSpec):
    grid = spec.grid()
    if spec.feasibility is None:
        return _reliability_group, [(spec, list(g)) for _, g in groupby(grid, key=_group_key)]
    points = grid
    if spec.feasibility.axis is Axis.MAX_QUBITS:
        # n_qubit is the searched quantity
        seen, points = set(), []
        for p in grid:
            key = tuple((k, v) for k, v in p.items() if k != "n_qubit")
            if key not in seen:
                seen.add(key)
                points.append(p)
    return _feasibility_job, [(spec, p, r) for p in points for r in spec.feasibility.r_th]


def run_experiment(spec: ExperimentSpec, workers: int = 1, progress=None) -> ExperimentResult:
    """Evaluate every grid point; results are independent of ``workers``."""
    fn, jobs = _jobs(spec)
    columns = CSV_COLUMNS if spec.feasibility is None else FEASIBILITY_COLUMNS
    result = ExperimentResult([], columns, spec)

    def collect(i, out):
        rows, details, wall = out
        result.rows.extend(rows)
        result.details.extend(details)
        result.wall_time.append(wall)
        if progress is not None:
            progress(i + 1, len(jobs))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, out in enumerate(pool.map(fn, jobs)):
                collect(i, out)
    else:
        for i, job in enumerate(jobs):
            collect(i, fn(job))
    return result


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_fmt(row[c]) for c in result.columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, np.generic):
        return v.item()
    return v


def to_json(result: ExperimentResult) -> str:
    spec = result.spec
    rows = []
    for point_row, detail in zip(result.rows, result.details):
        row = {k: _jsonable(v) for k, v in point_row.items()}
        row.update({k: _jsonable(v) for k, v in detail.items()})
        rows.append(row)
    doc = {
        "spec": emit(spec),
        "columns": list(result.columns),
        "rows": rows,
        "metadata": {"wall_time_s": sum(result.wall_time), "grid_points": len(result.rows)},
    }
    return json.dumps(doc, indent=2, default=_jsonable)


def write(result: ExperimentResult, path: str | Path, fmt: str = "csv") -> None:
    text = to_csv(result) if fmt == "csv" else to_json(result)
    Path(path).write_text(text)
