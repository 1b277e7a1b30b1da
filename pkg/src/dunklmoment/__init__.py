"""Moment calculus with the Dunkl factorials: sequences, series operators,
generalised exponentials, linear systems, translation equations and the
Bessel-weight moment problem."""

from .bessel import bessel_K, complete_monotonicity_spot, moment_quadrature, weight
from .entire import (
    E_alpha,
    E_alpha_h,
    E_m,
    E_m_prime,
    G_alpha,
    I_alpha,
    decay_scan,
    growth_scan,
)
from .errors import (
    BoundaryDegeneracyError,
    CapacityError,
    ConvergenceError,
    DefectiveExtractionError,
    DegeneracyError,
    DomainError,
    DunklError,
    QuadratureError,
)
from .functional import (
    ExpPolynomial,
    build_solution,
    equation_residual,
    eval_exp_polynomial,
    find_roots,
    independence_check,
)
from .linsys import fundamental_solutions, jordan_chains, residual_check, solution_asymptotics
from .sequences import (
    MomentSequence,
    assoc_M,
    check_strong_regularity,
    omega_estimate,
    proximate_order_d,
)
from .series import (
    TruncatedSeries,
    dunkl_apply_direct,
    euler_divergence_witness,
    even_translate,
    m_translate,
    moment_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryDegeneracyError",
    "CapacityError",
    "ConvergenceError",
    "DefectiveExtractionError",
    "DegeneracyError",
    "DomainError",
    "DunklError",
    "E_alpha",
    "E_alpha_h",
    "E_m",
    "E_m_prime",
    "ExpPolynomial",
    "G_alpha",
    "I_alpha",
    "MomentSequence",
    "QuadratureError",
    "TruncatedSeries",
    "assoc_M",
    "bessel_K",
    "build_solution",
    "check_strong_regularity",
    "complete_monotonicity_spot",
    "decay_scan",
    "dunkl_apply_direct",
    "equation_residual",
    "euler_divergence_witness",
    "eval_exp_polynomial",
    "even_translate",
    "find_roots",
    "fundamental_solutions",
    "growth_scan",
    "independence_check",
    "jordan_chains",
    "m_translate",
    "moment_derivative",
    "moment_quadrature",
    "omega_estimate",
    "proximate_order_d",
    "residual_check",
    "solution_asymptotics",
    "weight",
]
