"""Rigorous lower bounds on quantum control time from broken symmetries.

A control system H(t) = H_d + sum_j f_j(t) H_j can only implement a target
slowly if the target breaks a symmetry that the controls preserve and the
drift only weakly breaks.  This package finds such symmetries (linear
commutants and quadratic invariants of the control set), repairs the drift by
a minimal perturbation so the symmetry becomes exact, and turns the size of
that perturbation plus the target's symmetry breaking into a lower bound on
the evolution time.
"""

from __future__ import annotations

from .bounds import (
    BoundReport,
    ChebyshevFilter,
    chebyshev_degree_for,
    chebyshev_filter_bound,
    evolution_from_identity_peak,
    hamiltonian_speed_limit,
    kernel_complement_norm_commutator,
    kernel_complement_norm_exact,
    kernel_projection_lower_bound,
    optimize_symmetry,
    single_control_bound,
    uniform_speed_limit,
    unitary_speed_limit,
)
from .cli import (
    PauliParseError,
    ProblemFormatError,
    ProblemSpec,
    load_problem,
    main,
    parse_pauli_expression,
    run_command,
)
from .lie import (
    OperatorBasis,
    Symmetry,
    center_dimension,
    commutant_basis,
    lie_closure,
    project_onto_span,
    quadratic_symmetry_basis,
    span_residual,
    symmetry_breaking_norm,
)
from .matcore import (
    ClosureTruncatedError,
    ConditioningError,
    DIMENSION_CAP,
    DimensionCapError,
    DimensionError,
    NoSpectralGapError,
    PAULI,
    QslError,
    ValidationError,
    adjoint_superoperator,
    commutator,
    devectorize,
    frobenius_norm,
    hermitize,
    iota,
    kron,
    matrix_exponential,
    operator_norm,
    permutation_operator,
    row_vectorize,
)
from .models import (
    ControlSystem,
    ModelBundle,
    PulseSchedule,
    coupled_qubit_model,
    global_controls,
    hopping_chain_closed_form,
    hopping_chain_model,
    local_operator,
    majorana_operators,
    propagate_piecewise,
    rydberg_chain_model,
    site_sum,
    syk_model,
)
from .perturb import (
    Perturbation,
    perturbation_norm_bound,
    restore_symmetry,
    spectral_gap_min,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ChebyshevFilter",
    "ClosureTruncatedError",
    "ConditioningError",
    "ControlSystem",
    "DIMENSION_CAP",
    "DimensionCapError",
    "DimensionError",
    "ModelBundle",
    "NoSpectralGapError",
    "OperatorBasis",
    "PAULI",
    "PauliParseError",
    "Perturbation",
    "ProblemFormatError",
    "ProblemSpec",
    "PulseSchedule",
    "QslError",
    "Symmetry",
    "ValidationError",
    "adjoint_superoperator",
    "center_dimension",
    "chebyshev_degree_for",
    "chebyshev_filter_bound",
    "commutant_basis",
    "commutator",
    "coupled_qubit_model",
    "devectorize",
    "evolution_from_identity_peak",
    "frobenius_norm",
    "global_controls",
    "hamiltonian_speed_limit",
    "hermitize",
    "hopping_chain_closed_form",
    "hopping_chain_model",
    "iota",
    "kernel_complement_norm_commutator",
    "kernel_complement_norm_exact",
    "kernel_projection_lower_bound",
    "kron",
    "lie_closure",
    "load_problem",
    "local_operator",
    "main",
    "majorana_operators",
    "matrix_exponential",
    "operator_norm",
    "optimize_symmetry",
    "parse_pauli_expression",
    "permutation_operator",
    "perturbation_norm_bound",
    "project_onto_span",
    "propagate_piecewise",
    "quadratic_symmetry_basis",
    "restore_symmetry",
    "row_vectorize",
    "run_command",
    "single_control_bound",
    "site_sum",
    "span_residual",
    "spectral_gap_min",
    "symmetry_breaking_norm",
    "syk_model",
    "uniform_speed_limit",
    "unitary_speed_limit",
]
