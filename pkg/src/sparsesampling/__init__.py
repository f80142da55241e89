"""Sparse sampling recovery with the Weak Chebyshev Greedy Algorithm on the torus."""

from .dictionaries import (
    CoefficientVector,
    SampledSystem,
    TabulatedSystem,
    TrigSystem,
    a_beta_block_norms,
    continuous_l2_norm,
    continuous_lp_norm,
    evaluate,
)
from .discretization import (
    draw_random_points,
    incoherence_estimate,
    rip_check,
    sample_budget,
    sampling_matrix,
    unconditionality_estimate,
    verify_usd,
)
from .errors import (
    CapExceeded,
    ConvergenceError,
    DimensionError,
    ParameterError,
    PreconditionError,
    ZeroResidual,
)
from .greedy import (
    BudgetSpec,
    GreedyTrace,
    block_greedy_vterm,
    bv_best_vterm_recovery,
    iteration_budget,
    lp_span_projection,
    sigma_v_bruteforce,
    wcga_run,
)
from .lp_space import (
    DiscreteMeasure,
    LpExponent,
    PointSet,
    SampledFunction,
    lp_norm,
    mixed_measure_norm,
    norming_functional_apply,
)

__version__ = "0.1.0"
