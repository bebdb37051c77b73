"""Fourier analysis on truncated bounded Vilenkin groups."""

from .group import (
    GroupPoint,
    IndexDigits,
    ModulusSequence,
    NumberSystem,
    StructureMismatchError,
    add,
    compose_index,
    cylinder_index,
    decompose_index,
    haar_weight,
    neg,
)
from .basis import (
    CylinderGrid1D,
    Spectrum1D,
    character_matrix,
    dirichlet_closed,
    dirichlet_direct,
    dirichlet_grid,
    forward_transform,
    inverse_transform,
    partial_sum_1d,
    rademacher,
    vilenkin,
)
from .summability import (
    CylinderGrid2D,
    GaugeFunction,
    Spectrum2D,
    forward_transform_2d,
    fridli_schipp_mean_1d,
    gauge_dominates,
    glukhov_integral,
    glukhov_ratio,
    inverse_transform_2d,
    marginal_sum_1,
    marginal_sum_2,
    parse_gauge,
    power_gauge,
    power_mean_block,
    rect_partial_sum,
    sqrt_gauge,
    strong_mean_2d,
    strong_mean_table,
    zero_gauge,
)
from .approximation import (
    ApproxReport,
    approx_report,
    block_approx_surrogate,
    marginal_approx_surrogate_1,
    marginal_approx_surrogate_2,
    theorem1_lhs,
    theorem1_rhs,
)
from .counterexample import (
    BlockFunction,
    CounterexampleParams,
    build_F,
    build_block,
    build_f,
    choose_params,
    desk_params,
    divergence_diagnostic,
    j_decomposition,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
