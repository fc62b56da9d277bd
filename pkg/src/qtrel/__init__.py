"""Reliability of multi-qubit teleportation over a single quantum repeater.

Monte Carlo engine, reliability estimators, exact oracles for small
scenarios, feasibility frontier searches and a JSON/CSV experiment harness.
"""

from __future__ import annotations

from .channel import (
    FSOGeometry,
    LinkConfig,
    Medium,
    TimingConfig,
    fiber_link,
    fso_link,
    geometric_coupling,
    make_link,
    slot_duration,
    success_probability,
    transmission_efficiency,
)
from .config import ExperimentSpec, emit, load_spec
from .decoherence import (
    MemoryConfig,
    StorageInterval,
    feasible,
    feasible_ceiling,
    pair_fidelity,
    two_stage_fidelity,
)
from .engine import Batch, EmpiricalDistributions, RunOutcome, ScenarioConfig, run_batch, simulate_run
from .errors import ConfigError, EstimationError, StateSpaceTooLarge
from .experiment import ExperimentResult, run_experiment, to_csv, to_json
from .feasibility import Axis, FeasibilityQuery, Frontier, max_distance, max_qubits
from .oracle import exhaustive_reliability, single_qubit_reliability
from .reliability import (
    Form,
    ReliabilityEstimate,
    reliability_composed,
    reliability_direct,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "Batch",
    "ConfigError",
    "EmpiricalDistributions",
    "EstimationError",
    "ExperimentResult",
    "ExperimentSpec",
    "FSOGeometry",
    "FeasibilityQuery",
    "Form",
    "Frontier",
    "LinkConfig",
    "Medium",
    "MemoryConfig",
    "ReliabilityEstimate",
    "RunOutcome",
    "ScenarioConfig",
    "StateSpaceTooLarge",
    "StorageInterval",
    "TimingConfig",
    "emit",
    "exhaustive_reliability",
    "feasible",
    "feasible_ceiling",
    "fiber_link",
    "fso_link",
    "geometric_coupling",
    "load_spec",
    "make_link",
    "max_distance",
    "max_qubits",
    "pair_fidelity",
    "reliability_composed",
    "reliability_direct",
    "run_batch",
    "run_experiment",
    "simulate_run",
    "slot_duration",
    "success_probability",
    "to_csv",
    "to_json",
    "transmission_efficiency",
    "two_stage_fidelity",
    "wilson_interval",
]
