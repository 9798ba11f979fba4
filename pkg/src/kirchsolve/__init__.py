"""Truncation solver and verification harness for strongly singular Kirchhoff
problems with variable-exponent growth on the unit interval."""

from .analysis import (
    BoundaryFit,
    ExponentReport,
    RateFit,
    RenormTestFunction,
    RenormalizedCheck,
    energy_decay,
    fit_boundary,
    fit_rate,
    renormalized_residual,
    theoretical_exponents,
)
from .calculus import (
    DiscreteFunction,
    Grid,
    energy,
    h1_norm,
    l2_norm,
    modular,
    singular_mass,
    truncate_double,
    truncate_lower,
)
from .estimator import PowerLawRate, TruncatedKirchhoffSolver
from .exceptions import (
    ConvergenceError,
    DegenerateFitError,
    DomainError,
    InvalidSpecError,
    KirchsolveError,
    LinAlgError,
    PreconditionError,
)
from .problem import (
    ExponentField,
    KirchhoffFunction,
    ProblemSpec,
    ValidationReport,
    default_spec,
    eval_field,
    eval_kirchhoff,
    eval_kirchhoff_antiderivative,
    field_bounds,
    validate_spec,
)
from .properties import (
    OrderReport,
    StabilityReport,
    alpha_sensitivity,
    check_order,
    comparison_experiment,
    epsilon_monotonicity,
    stability_experiment,
)
from .solver import (
    ContinuationResult,
    SolutionProfile,
    SolverOptions,
    assemble_residual,
    continuation_sweep,
    solve_inner,
    solve_truncated,
)

__version__ = "0.1.0"
