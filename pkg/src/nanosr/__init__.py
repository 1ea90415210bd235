"""Collective (Dicke) superradiance of water confined in protein nanotubes.

Modules: ``units`` (SI conversions), ``geometry`` (nanotube presets and water
counts), ``dicke`` (ladder operators, Tavis-Cummings Hamiltonian),
``dynamics`` (master-equation engine), ``semiclassical`` (mean-field burst),
``oracle`` (full 2^N reference) and ``scenario`` (configs, presets, sweeps).
"""
from .dicke import CapacityError, DickeBasis, ModelParams
from .dynamics import CollectiveLindblad, InvariantViolation, evolve_master
from .scenario import ConfigError, ScenarioConfig, compare_scenarios, run_scenario, sweep
from .trace import EmissionTrace, PulseMetrics, pulse_metrics

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CollectiveLindblad",
    "ConfigError",
    "DickeBasis",
    "EmissionTrace",
    "InvariantViolation",
    "ModelParams",
    "PulseMetrics",
    "ScenarioConfig",
    "compare_scenarios",
    "evolve_master",
    "pulse_metrics",
    "run_scenario",
    "sweep",
]
