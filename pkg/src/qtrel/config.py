"""Experiment documents: JSON in, validated :class:`ExperimentSpec` out.

A document is a flat JSON object. Scenario keys listed in ``GRID_KEYS``
take either a scalar or a list; lists become sweep axes and the grid is
their cross product. Everything omitted falls back to the reference
parameter set. See ``README.md`` for the full key list.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .channel import FSOGeometry, Medium, TimingConfig, make_link
from .decoherence import MIXED, MemoryConfig
from .engine import DEFAULT_MAX_SLOTS, ScenarioConfig
from .errors import ConfigError
from .feasibility import DEFAULT_RESOLUTION, Axis

# outermost first; rows are emitted in this nesting order
GRID_KEYS = ("medium", "tau", "n_par", "n_qubit", "d", "f_th")

DEFAULTS: dict[str, Any] = {
    "medium": "fiber",
    "d": 0.0,
    "tau": 500e-6,
    "n_qubit": 1,
    "n_par": 1,
    "f_th": 0.75,
}
SCALAR_DEFAULTS: dict[str, Any] = {
    "tau_alice": None,
    "tau_bob": None,
    "tau_qr": None,
    "theta": math.pi / 4,
    "f0_gen": 1.0,
    "max_slots": DEFAULT_MAX_SLOTS,
    "enforce_capacity": False,
}
LINK_KEYS = {
    "p_emit",
    "p_detect",
    "p_couple",
    "attenuation_length",
    "propagation_speed",
    "aperture_diameter",
    "beam_waist",
    "wavelength",
}
_GEOMETRY_KEYS = {"aperture_diameter", "beam_waist", "wavelength"}
TIMING_KEYS = {"t_attempt", "t_bsm", "t_pauli"}
FEASIBILITY_KEYS = {"r_th", "axis", "distance_resolution", "qubit_cap", "start_distance"}
META_KEYS = {"name", "description", "runs", "seed", "epsilon", "outputs", "links", "timing", "feasibility", "exclude", "bootstrap"}
TOP_KEYS = set(GRID_KEYS) | set(SCALAR_DEFAULTS) | META_KEYS

DEFAULT_RUNS = 10_000
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class Output:
    path: str
    format: str = "csv"


@dataclass(frozen=True)
class FeasibilitySpec:
    r_th: tuple[float, ...]
    axis: Axis = Axis.MAX_DISTANCE
    distance_resolution: float = DEFAULT_RESOLUTION
    qubit_cap: int = 16
    start_distance: float = 1_000.0


@dataclass(frozen=True)
class ExperimentSpec:
    axes: dict[str, tuple]
    scalars: dict[str, Any]
    links: dict[str, dict[str, float]] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)
    runs_per_point: int = DEFAULT_RUNS
    master_seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    outputs: tuple[Output, ...] = ()
    feasibility: FeasibilitySpec | None = None
    exclude: tuple[dict[str, Any], ...] = ()
    bootstrap: int = 0
    name: str = ""
    description: str = ""

    def grid(self) -> list[dict[str, Any]]:
        """Grid points in emission order, exclusions removed."""
        combos = itertools.product(*(self.axes[k] for k in GRID_KEYS))
        points = [dict(zip(GRID_KEYS, c)) for c in combos]
        return [p for p in points if not any(all(p.get(k) == v for k, v in ex.items()) for ex in self.exclude)]

    @property
    def grid_size(self) -> int:
        return len(self.grid())

    def scenario(self, point: dict[str, Any]) -> ScenarioConfig:
        return build_scenario(point, self.scalars, self.links, self.timing)


def build_scenario(point, scalars, links=None, timing=None) -> ScenarioConfig:
    medium = Medium(point["medium"])
    overrides = dict((links or {}).get(medium.value, {}))
    geo = {k: overrides.pop(k) for k in list(overrides) if k in _GEOMETRY_KEYS}
    if medium is Medium.FSO:
        overrides["geometry"] = FSOGeometry(**geo)
    link = make_link(medium, point["d"] / 2.0, **overrides)
    tau = point["tau"]
    mem = MemoryConfig(
        scalars.get("tau_alice") or tau,
        scalars.get("tau_bob") or tau,
        scalars.get("tau_qr") or tau,
        2 * point["n_par"],
        point["n_qubit"],
        bool(scalars.get("enforce_capacity", False)),
    )
    return ScenarioConfig(
        n_qubit=point["n_qubit"],
        n_par=point["n_par"],
        f_th=point["f_th"],
        link_a=link,
        link_b=link,
        memory=mem,
        timing=TimingConfig(**(timing or {})),
        theta=scalars.get("theta", math.pi / 4),
        f0_gen=scalars.get("f0_gen", 1.0),
        max_slots=scalars.get("max_slots", DEFAULT_MAX_SLOTS),
    )


def _fail(key: str, why: str):
    raise ConfigError(f"{key}: {why}")


def _number(key, v, *, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(key, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        _fail(key, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        _fail(key, "must be finite")
    return int(v) if integer else float(v)


def _axis(key: str, raw) -> tuple:
    values = raw if isinstance(raw, list) else [raw]
    if not values:
        _fail(key, "empty list")
    out = []
    for v in values:
        if key == "medium":
            try:
                out.append(Medium(v).value)
            except ValueError:
                _fail(key, f"unknown medium {v!r} (expected 'fiber' or 'fso')")
        elif key in ("n_qubit", "n_par"):
            n = _number(key, v, integer=True)
            if n < 1:
                _fail(key, "must be >= 1")
            out.append(n)
        else:
            x = _number(key, v)
            if key == "f_th" and not MIXED < x <= 1.0:
                _fail(key, f"{x} outside the domain 1/4 < f_th <= 1")
            if key == "tau" and not x > 0:
                _fail(key, "coherence time must be > 0")
            if key == "d" and x < 0:
                _fail(key, "distance must be >= 0")
            out.append(x)
    return tuple(out)


def _sub(key: str, raw, allowed: set[str]) -> dict[str, float]:
    if not isinstance(raw, dict):
        _fail(key, "expected an object")
    unknown = set(raw) - allowed
    if unknown:
        _fail(key, f"unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")
    return {k: _number(f"{key}.{k}", v) for k, v in raw.items()}


def load_spec(document: str | dict | Path) -> ExperimentSpec:
    """Parse and validate an experiment document (JSON text, path or dict)."""
    if isinstance(document, Path):
        document = document.read_text()
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"document is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("document must be a JSON object")
    unknown = set(document) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)}")

    axes = {k: _axis(k, document.get(k, DEFAULTS[k])) for k in GRID_KEYS}
    scalars = dict(SCALAR_DEFAULTS)
    for k in SCALAR_DEFAULTS:
        if k not in document or document[k] is None:
            continue
        v = document[k]
        if k == "enforce_capacity":
            if not isinstance(v, bool):
                _fail(k, "expected true/false")
            scalars[k] = v
        elif k == "max_slots":
            scalars[k] = _number(k, v, integer=True)
            if scalars[k] < 1:
                _fail(k, "must be >= 1")
        else:
            scalars[k] = _number(k, v)
    for k in ("tau_alice", "tau_bob", "tau_qr"):
        if scalars[k] is not None and not scalars[k] > 0:
            _fail(k, "coherence time must be > 0")
    if not MIXED <= scalars["f0_gen"] <= 1.0:
        _fail("f0_gen", "must lie in [1/4, 1]")

    links_raw = document.get("links", {})
    if not isinstance(links_raw, dict):
        _fail("links", "expected an object keyed by medium")
    links = {}
    for m, body in links_raw.items():
        if m not in {x.value for x in Medium}:
            _fail("links", f"unknown medium {m!r}")
        links[m] = _sub(f"links.{m}", body, LINK_KEYS)
    timing = _sub("timing", document.get("timing", {}), TIMING_KEYS)

    runs = _number("runs", document.get("runs", DEFAULT_RUNS), integer=True)
    if runs < 1:
        _fail("runs", "must be >= 1")
    seed = _number("seed", document.get("seed", 0), integer=True)
    epsilon = _number("epsilon", document.get("epsilon", DEFAULT_EPSILON))
    if not 0.0 < epsilon < 1.0:
        _fail("epsilon", "must lie in (0, 1)")
    bootstrap = _number("bootstrap", document.get("bootstrap", 0), integer=True)
    if bootstrap < 0:
        _fail("bootstrap", "must be >= 0")

    outputs = []
    for i, o in enumerate(document.get("outputs", [])):
        if not isinstance(o, dict) or set(o) - {"path", "format"} or "path" not in o:
            _fail(f"outputs[{i}]", "expected {path, format}")
        fmt = o.get("format", "csv").lower()
        if fmt not in ("csv", "json"):
            _fail(f"outputs[{i}].format", f"{fmt!r} is not csv or json")
        outputs.append(Output(str(o["path"]), fmt))

    feas = None
    if "feasibility" in document:
        raw = document["feasibility"]
        if not isinstance(raw, dict):
            _fail("feasibility", "expected an object")
        extra = set(raw) - FEASIBILITY_KEYS
        if extra:
            _fail("feasibility", f"unknown key(s) {sorted(extra)}")
        if "r_th" not in raw:
            _fail("feasibility.r_th", "required")
        r_th = tuple(_number("feasibility.r_th", r) for r in (raw["r_th"] if isinstance(raw["r_th"], list) else [raw["r_th"]]))
        if any(not 0.0 < r <= 1.0 for r in r_th):
            _fail("feasibility.r_th", "target reliability must lie in (0, 1]")
        try:
            axis = Axis(raw.get("axis", Axis.MAX_DISTANCE.value))
        except ValueError:
            _fail("feasibility.axis", "expected 'max_distance' or 'max_qubits'")
        res = _number("feasibility.distance_resolution", raw.get("distance_resolution", DEFAULT_RESOLUTION))
        cap = _number("feasibility.qubit_cap", raw.get("qubit_cap", 16), integer=True)
        start = _number("feasibility.start_distance", raw.get("start_distance", 1_000.0))
        if res <= 0 or cap < 1 or start <= 0:
            _fail("feasibility", "distance_resolution and start_distance must be > 0, qubit_cap >= 1")
        feas = FeasibilitySpec(r_th, axis, res, cap, start)

    exclude = []
    for i, ex in enumerate(document.get("exclude", [])):
        if not isinstance(ex, dict) or set(ex) - set(GRID_KEYS):
            _fail(f"exclude[{i}]", f"expected an object over {GRID_KEYS}")
        exclude.append({k: _axis(k, v)[0] for k, v in ex.items()})

    spec = ExperimentSpec(
        axes=axes,
        scalars=scalars,
        links=links,
        timing=timing,
        runs_per_point=runs,
        master_seed=seed,
        epsilon=epsilon,
        outputs=tuple(outputs),
        feasibility=feas,
        exclude=tuple(exclude),
        bootstrap=bootstrap,
        name=str(document.get("name", "")),
        description=str(document.get("description", "")),
    )
    grid = spec.grid()
    if not grid:
        _fail("exclude", "removes every grid point")
    # surface physical errors (e.g. link overrides outside [0, 1]) up front
    for m in sorted({p["medium"] for p in grid}):
        spec.scenario(next(p for p in grid if p["medium"] == m))
    return spec


def emit(spec: ExperimentSpec) -> dict[str, Any]:
    """Inverse of :func:`load_spec`."""
    doc: dict[str, Any] = {}
    if spec.name:
        doc["name"] = spec.name
    if spec.description:
        doc["description"] = spec.description
    for k in GRID_KEYS:
        vals = list(spec.axes[k])
        doc[k] = vals[0] if len(vals) == 1 else vals
    for k, v in spec.scalars.items():
        if v is not None:
            doc[k] = v
    if spec.links:
        doc["links"] = {m: dict(v) for m, v in spec.links.items()}
    if spec.timing:
        doc["timing"] = dict(spec.timing)
    doc["runs"] = spec.runs_per_point
    doc["seed"] = spec.master_seed
    doc["epsilon"] = spec.epsilon
    doc["bootstrap"] = spec.bootstrap
    if spec.outputs:
        doc["outputs"] = [{"path": o.path, "format": o.format} for o in spec.outputs]
    if spec.feasibility is not None:
        f = spec.feasibility
        doc["feasibility"] = {
            "r_th": list(f.r_th),
            "axis": f.axis.value,
            "distance_resolution": f.distance_resolution,
            "qubit_cap": f.qubit_cap,
            "start_distance": f.start_distance,
        }
    if spec.exclude:
        doc["exclude"] = [dict(e) for e in spec.exclude]
    return doc
