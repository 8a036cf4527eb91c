"""Reduction of third-kind integral equations to smooth bi-Carleman kernel
pencils, by unitary basis pairing over a dyadic grid model of L2[0, 1)."""

from .errors import (
    AlphaNotZeroError,
    ConfigError,
    DegenerateSystemError,
    EmptyBandError,
    NearSingularError,
    NotBisectableError,
    QuadratureInsufficientError,
    SpaceMismatchError,
    ThirdKindError,
    ToleranceUnreachableError,
)
from .hermite import Multiplier, SmoothBasis, basis_value, multiplier_matrix
from .kernels import (
    BilinearKernel,
    MFactorization,
    carleman,
    carleman_norm,
    eval_kernel,
    hs_norm,
    m_factorize,
    probe_grid,
    scale_by_multiplier,
    series_consistency,
    synthesize,
)
from .measure import (
    GridFunction,
    GridKernel,
    IntegralOperator,
    MeasurableSet,
    MeasureSpace,
    MultiplicationOperator,
    band_set,
    bisect,
    build_space,
    inner_product,
    lift,
    lift_kernel,
    lift_set,
)
from .rademacher import (
    IndexSelection,
    KorotkovSequence,
    RademacherFunction,
    build_sequence,
    rademacher,
    select_index,
)
from .reduction import (
    UnitarySurrogate,
    apply_forward,
    apply_inverse,
    complete_basis,
    matrix_elements,
)
from .solvers import (
    EquivalenceReport,
    FirstKindProblem,
    FirstKindSolution,
    KernelPencil,
    SecondKindSolution,
    ThirdKindProblem,
    forward_third_kind,
    make_first_kind,
    reduce_problem,
    solve_first_kind,
    solve_second_kind,
    verify_equivalence,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaNotZeroError",
    "BilinearKernel",
    "ConfigError",
    "DegenerateSystemError",
    "EmptyBandError",
    "EquivalenceReport",
    "FirstKindProblem",
    "FirstKindSolution",
    "GridFunction",
    "GridKernel",
    "IndexSelection",
    "IntegralOperator",
    "KernelPencil",
    "KorotkovSequence",
    "MFactorization",
    "MeasurableSet",
    "MeasureSpace",
    "MultiplicationOperator",
    "Multiplier",
    "NearSingularError",
    "NotBisectableError",
    "QuadratureInsufficientError",
    "RademacherFunction",
    "SecondKindSolution",
    "SmoothBasis",
    "SpaceMismatchError",
    "ThirdKindError",
    "ThirdKindProblem",
    "ToleranceUnreachableError",
    "UnitarySurrogate",
    "apply_forward",
    "apply_inverse",
    "band_set",
    "basis_value",
    "bisect",
    "build_sequence",
    "build_space",
    "carleman",
    "carleman_norm",
    "complete_basis",
    "eval_kernel",
    "forward_third_kind",
    "hs_norm",
    "inner_product",
    "lift",
    "lift_kernel",
    "lift_set",
    "m_factorize",
    "make_first_kind",
    "matrix_elements",
    "multiplier_matrix",
    "probe_grid",
    "rademacher",
    "reduce_problem",
    "scale_by_multiplier",
    "select_index",
    "series_consistency",
    "solve_first_kind",
    "solve_second_kind",
    "synthesize",
    "verify_equivalence",
]
