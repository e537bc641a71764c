"""Simulator for the conditional-rotation linear-system solver and its
hybrid variant with classically analyzed eigenvalue bits."""

from .errors import (
    CompileError,
    ConstraintError,
    DomainError,
    HhlError,
    ImpossibleOutcomeError,
    NotReducibleError,
    ValidationError,
)
from .noise import NoiseParams, survival_bound
from .problem import (
    EigenmeanProfile,
    HermitianProblem,
    SpectralData,
    build_a_lambda,
    classical_solution,
    load_problem,
    problem_from_dict,
)
from .qpe import QpeConfig, build_qpe, register_distribution_exact, run_qpea
from .qstate import (
    DensityMatrix,
    MeasurementHistogram,
    StateVector,
    fidelity_pure,
    partial_trace,
    postselect,
)
from .solvers import (
    AqeSpec,
    EigenEstimate,
    HHLOutcome,
    HybridPolicy,
    analyze_qpea,
    build_aqe,
    build_hhl_circuit,
    run_hybrid_hhl,
    run_original_hhl,
    synthesize_reduced_aqe,
    reduced_encoding_equivalence_check,
)

__all__ = [
    "AqeSpec",
    "CompileError",
    "ConstraintError",
    "DensityMatrix",
    "DomainError",
    "EigenEstimate",
    "EigenmeanProfile",
    "HHLOutcome",
    "HermitianProblem",
    "HhlError",
    "HybridPolicy",
    "ImpossibleOutcomeError",
    "MeasurementHistogram",
    "NoiseParams",
    "NotReducibleError",
    "QpeConfig",
    "SpectralData",
    "StateVector",
    "ValidationError",
    "analyze_qpea",
    "build_a_lambda",
    "build_aqe",
    "build_hhl_circuit",
    "build_qpe",
    "classical_solution",
    "fidelity_pure",
    "load_problem",
    "partial_trace",
    "postselect",
    "problem_from_dict",
    "register_distribution_exact",
    "run_hybrid_hhl",
    "run_original_hhl",
    "run_qpea",
    "survival_bound",
    "synthesize_reduced_aqe",
    "reduced_encoding_equivalence_check",
]

__version__ = "1.0.0"
