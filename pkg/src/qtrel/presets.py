"""Bundled experiment documents.

``experiment1``-``experiment3`` are runnable sweep specs; ``table1`` holds
the default physical parameters and ``table2`` lists memory coherence
times (reference data, not a runnable spec).
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

from .config import ExperimentSpec, load_spec
from .errors import ConfigError

REFERENCE_ONLY = frozenset({"table2"})


def names() -> list[str]:
    files = resources.files(__package__).joinpath("presets")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def text(name: str) -> str:
    if name not in names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(names())}")
    return resources.files(__package__).joinpath("presets", f"{name}.json").read_text()


def document(name: str) -> dict[str, Any]:
    return json.loads(text(name))


def load(name: str, **overrides: Any) -> ExperimentSpec:
    """Load a runnable preset, optionally overriding top-level keys (e.g. ``runs``)."""
    if name in REFERENCE_ONLY:
        raise ConfigError(f"preset {name!r} is reference data, not an experiment spec")
    doc = document(name)
    doc.update(overrides)
    return load_spec(doc)
