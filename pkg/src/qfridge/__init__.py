"""Simulator for the three-qubit quantum absorption refrigerator in the transient regime."""

from .analysis import (
    Evolver,
    SweepResult,
    TimeSeries,
    find_min_temperature,
    fit_decay_rate,
    run_timeseries,
    sweep,
)
from .hilbert import MachineSpec, product_thermal, thermal_qubit
from .liouvillian import build_full_superoperator, build_reduced_system
from .observables import (
    max_entanglement,
    min_unitary_temperature,
    trace_distance,
    virtual_temperature,
    witness,
)
from .spectral import classify, decompose, evolve_spectral, steady_state

__all__ = [
    "Evolver",
    "MachineSpec",
    "SweepResult",
    "TimeSeries",
    "build_full_superoperator",
    "build_reduced_system",
    "classify",
    "decompose",
    "evolve_spectral",
    "find_min_temperature",
    "fit_decay_rate",
    "max_entanglement",
    "min_unitary_temperature",
    "product_thermal",
    "run_timeseries",
    "steady_state",
    "sweep",
    "thermal_qubit",
    "trace_distance",
    "virtual_temperature",
    "witness",
]
