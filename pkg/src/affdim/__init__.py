"""Rigorous dimensions of diagonal self-affine sets and signed Lüroth digit sets."""

from .digits import (
    Cofinite,
    DigitPair,
    DigitSetSpec,
    Explicit,
    Power,
    format_digit_set,
    parse_digit_class,
    parse_digit_sequence,
    parse_digit_set,
)
from .enclosure import Enclosure, ZetaSeries, power_tail, series_sum
from .errors import BudgetExceeded, ConsistencyError, ToleranceNotReached
from .luroth import (
    ExpansionStrategy,
    Schedule,
    affine_map_2d,
    box_dim_digit_points,
    dim_1d,
    dim_2d,
    dim_F_finite,
    dim_F_infinite,
    dim_nonautonomous,
    evaluate_expansion,
    expand,
    fiber_dimension,
    luroth_affinity_dimension,
    osc_example_check,
    osc_violation_check,
    phi_map,
)
from .pressure import (
    AlphabetSpec,
    DimensionResult,
    Method,
    affinity_dimension,
    modified_affinity_dimension,
    word_sum_oracle,
)
from .spectrum import SpectrumRequest, realize_1d, realize_2d
from .svf import (
    Branch,
    Diagonal2,
    DiagonalMap2,
    SingularPair,
    compose,
    power_transform,
    singular_values,
    svf,
)

__all__ = [name for name in dir() if not name.startswith("_")]
