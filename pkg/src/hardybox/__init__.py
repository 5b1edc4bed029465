"""Numerical certification of moving-box Hardy and geometric-mean inequalities.

Weighted Lebesgue-norm boundedness of the box Hardy operator (and its
geometric-mean analogue) is characterized by a constrained supremum
functional; this package computes those functionals, brackets the best
constants between closed-form sandwich factors, estimates operator norms by
ratio ascent over grid functions, and certifies that everything lands inside
the proven two-sided bounds.
"""

from .bounds import (
    SandwichReport,
    lower_factor,
    optimize_sandwich,
    pk_lower_factor,
    upper_factor,
)
from .charf import (
    A_limit,
    B1,
    B2,
    D2,
    CharacterizationValue,
    Exponents,
    Problem1D,
    ProblemConfig,
    ScalePoint,
    Tolerances,
    pk_transformed_config,
    pk_weight_w,
    rect_corner,
)
from .errors import (
    AccuracyError,
    ConfigError,
    CoverageError,
    DomainError,
    ExtrapolationError,
    HardyboxError,
    IntegrabilityError,
    RangeError,
)
from .funcspace import (
    BoundaryFn,
    BoundaryPair,
    SearchPoint,
    Weight1D,
    Weight2D,
    eval_boundary,
    eval_weight1d,
    invert_boundary,
)
from .ops import (
    GridFn,
    NormEstimate,
    apply_G2,
    apply_H2,
    estimate_norm,
    rayleigh_ratio,
    weighted_norm,
)
from .partition import (
    LimitSequence,
    QuadrantDecomposition,
    build_sequence,
    quadrant_decompose,
    transformed_weight,
    transformed_weight2d,
)
from .quad import QuadResult, VFunction, V_diff, build_V, integrate_1d, integrate_2d
from .witness import (
    WitnessCheck,
    WitnessSpec,
    lemma2_witness,
    pk_witness,
    thm1_witness,
    witness_bound_check,
)

__version__ = "0.1.0"
