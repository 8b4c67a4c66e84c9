"""Coarse dimension estimates on finite metric samples.

Finite metric spaces and the ln(1 + d) remetrization, cover families and
their counts, transport of power-type and Nagata-type dimension witnesses,
scale-function classes, and Higson-type oscillation profiles.
"""

from .errors import (BudgetExceeded, CoarseDimError, ConstructionError, DomainError, MetricError,
                     OutOfRangeError, ParseError, PreconditionError, WindowTooSmall)
from .metric_core import (MetricSpace, PointMap, PointedSpace, build_cayley_ball, build_grid,
                          build_interval, build_tree, identity_map, inverse_remetrize,
                          is_isometry, is_M_connected, log_remetrize, regular_tree_parents,
                          transport_map)
from .scale_functions import (Classification, ExpLogWrap, Monomial, PiecewiseSlope, Sum,
                              Tabulated, classify, evaluate, mono, numeric_check, parse,
                              psi_backward, psi_forward, to_text)
from .covers import (CoverFamilySet, CoverReport, DimensionProfile, Linear, Power, ScaleVerdict,
                     check_cover, dimension_profile, exact_cover, interval_witness_Z,
                     is_D_bounded, is_r_disjoint, min_families_exact, min_families_greedy,
                     validate)
from .dim_transform import (NagataWitness, PowerWitness, interval_nagata_witness,
                            interval_power_witness, nagata_to_power, power_to_nagata,
                            proof_chain_check, validate_witness, witness_from_recipe)
from .higson import (ObservedFunction, decay_verdict, higson_profile, local_oscillation,
                     membership_estimate, theorem_crosscheck)

__all__ = [
    "BudgetExceeded", "CoarseDimError", "ConstructionError", "DomainError", "MetricError",
    "OutOfRangeError", "ParseError", "PreconditionError", "WindowTooSmall", "MetricSpace",
    "PointMap", "PointedSpace", "build_cayley_ball", "build_grid", "build_interval",
    "build_tree", "identity_map", "inverse_remetrize", "is_isometry", "is_M_connected",
    "log_remetrize", "regular_tree_parents", "transport_map", "Classification", "ExpLogWrap",
    "Monomial", "PiecewiseSlope", "Sum", "Tabulated", "classify", "evaluate", "mono",
    "numeric_check", "parse", "psi_backward", "psi_forward", "to_text", "CoverFamilySet",
    "CoverReport", "DimensionProfile", "Linear", "Power", "ScaleVerdict", "check_cover",
    "dimension_profile", "exact_cover", "interval_witness_Z", "is_D_bounded", "is_r_disjoint",
    "min_families_exact", "min_families_greedy", "validate", "NagataWitness", "PowerWitness",
    "interval_nagata_witness", "interval_power_witness", "nagata_to_power", "power_to_nagata",
    "proof_chain_check", "validate_witness", "witness_from_recipe", "ObservedFunction",
    "decay_verdict", "higson_profile", "local_oscillation", "membership_estimate",
    "theorem_crosscheck",
]

__version__ = "0.1.0"
