"""Calculus of set functions on finite point configurations.

Set functions live on the subset lattice of a ground configuration of
points in R^d. The package provides the disjoint-sum convolution and the
cover product with naive and transform-based routes, the exp*/ln*/inverse
calculus, derivations and evolution equations, Poisson-weighted
integration with exact exponent formulas and Monte Carlo estimators,
per-level norm inequalities, and positive-definiteness checks via Gram
matrices of cover-product pairings.
"""

from .calculus import (
    Derivation,
    NumberDerivation,
    PointDerivation,
    check_derivation,
    conv_exp,
    conv_inverse,
    conv_log,
    conv_power,
    conv_series,
    drop_point,
    number_op,
    point_derivative,
)
from .errors import StarcalcError
from .evolution import (
    EvolutionResult,
    cumulant_evolution_check,
    evolve,
    evolve_singleton,
    mult_operator,
    resolvent,
)
from .fields import as_field, const_field, coord_field, indicator_box, parse_field
from .kernels import (
    ConstantLevel,
    EmptyIndicator,
    Kernel,
    KernelProduct,
    KernelSum,
    LevelWeights,
    NormWitness,
    PointProduct,
    ScaledKernel,
    SingletonKernel,
    eval_kernel,
    kernel_from_json,
    register_kernel_type,
    tabulate,
)
from .model import (
    MAX_GROUND,
    GroundConfiguration,
    PhasePoint,
    PhaseSpace,
    SetFunction,
    make_ground,
    point,
    space_from_json,
)
from .norms import NormParams, k_norm_estimate, l_norm, power_norm_check, young_check
from .poisson import (
    IntegralEstimate,
    LPIntegrator,
    bogolyubov,
    bogolyubov_positivity_check,
    integrate_exponent,
    integrate_mc,
    lp_pairing,
    measure_convolution_check,
    minlos_check,
)
from .posdef import (
    GramReport,
    LiftedKernel,
    ProductTwoType,
    TransferReport,
    critposdef_check,
    default_basis,
    gram_star,
    gram_two_type,
)
from .transforms import (
    TwoTypeSetFunction,
    conv_fast,
    conv_kernels,
    conv_naive,
    cover_fast,
    cover_naive,
    lift_two_type,
    mobius,
    two_type_cover,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_GROUND",
    "ConstantLevel",
    "Derivation",
    "EmptyIndicator",
    "EvolutionResult",
    "GramReport",
    "GroundConfiguration",
    "IntegralEstimate",
    "Kernel",
    "KernelProduct",
    "KernelSum",
    "LPIntegrator",
    "LevelWeights",
    "LiftedKernel",
    "NormParams",
    "NormWitness",
    "NumberDerivation",
    "PhasePoint",
    "PhaseSpace",
    "PointDerivation",
    "PointProduct",
    "ProductTwoType",
    "ScaledKernel",
    "SetFunction",
    "SingletonKernel",
    "StarcalcError",
    "TransferReport",
    "TwoTypeSetFunction",
    "as_field",
    "bogolyubov",
    "bogolyubov_positivity_check",
    "check_derivation",
    "const_field",
    "conv_exp",
    "conv_fast",
    "conv_inverse",
    "conv_kernels",
    "conv_log",
    "conv_naive",
    "conv_power",
    "conv_series",
    "coord_field",
    "cover_fast",
    "cover_naive",
    "critposdef_check",
    "cumulant_evolution_check",
    "default_basis",
    "drop_point",
    "eval_kernel",
    "evolve",
    "evolve_singleton",
    "gram_star",
    "gram_two_type",
    "indicator_box",
    "integrate_exponent",
    "integrate_mc",
    "k_norm_estimate",
    "kernel_from_json",
    "l_norm",
    "lift_two_type",
    "lp_pairing",
    "make_ground",
    "measure_convolution_check",
    "minlos_check",
    "mobius",
    "mult_operator",
    "number_op",
    "parse_field",
    "point",
    "point_derivative",
    "power_norm_check",
    "register_kernel_type",
    "resolvent",
    "space_from_json",
    "tabulate",
    "two_type_cover",
    "young_check",
    "zeta",
]
