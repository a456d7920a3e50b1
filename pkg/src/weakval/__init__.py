"""Weak values from postselected Gaussian pointer wavefunctions.

The central routine, :func:`extract_weak_value`, recovers the weak value as
the mixed derivative d/dbeta d/dQ ln psi at Q = 0, beta = 0 of a detector
wavefunction psi, using a two-infinitesimal dual algebra.
"""
from .errors import (
    ConvergenceError,
    DegenerateDensity,
    DimensionMismatch,
    DomainError,
    ExpressionSyntaxError,
    OrthogonalSelection,
    ScenarioParseError,
    UnboundVariable,
    ValidationError,
    WeakvalError,
    ZeroWavefunction,
)
from .expr import WaveExpr, evaluate, parse, to_source
from .extraction import (
    ExtractionResult,
    equivalence_report,
    extract_from_expression,
    extract_weak_value,
)
from .numerics import DualBi, HermitianMatrix, dual_apply, dual_mul, eigh, gaussian_moment, mixed_fd
from .pointer import (
    GaussianPointer,
    PostselectedWave,
    av_series_wavefunction,
    grid_evaluate,
    synthesize_postselected,
)
from .quantum import Observable, QuantumState, WeakValue, inner, weak_moment, weak_value_direct
from .scenarios import (
    OpticalParams,
    Scenario,
    load_preset,
    load_scenario,
    optical_equivalent_system,
    optical_wavefunction,
    optical_weak_value_closed_form,
    preset_names,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateDensity",
    "DimensionMismatch",
    "DomainError",
    "DualBi",
    "ExpressionSyntaxError",
    "ExtractionResult",
    "GaussianPointer",
    "HermitianMatrix",
    "Observable",
    "OpticalParams",
    "OrthogonalSelection",
    "PostselectedWave",
    "QuantumState",
    "Scenario",
    "ScenarioParseError",
    "UnboundVariable",
    "ValidationError",
    "WaveExpr",
    "WeakValue",
    "WeakvalError",
    "ZeroWavefunction",
    "av_series_wavefunction",
    "dual_apply",
    "dual_mul",
    "eigh",
    "equivalence_report",
    "evaluate",
    "extract_from_expression",
    "extract_weak_value",
    "gaussian_moment",
    "grid_evaluate",
    "inner",
    "load_preset",
    "load_scenario",
    "mixed_fd",
    "optical_equivalent_system",
    "optical_wavefunction",
    "optical_weak_value_closed_form",
    "parse",
    "preset_names",
    "save_scenario",
    "synthesize_postselected",
    "to_source",
    "weak_moment",
    "weak_value_direct",
]
