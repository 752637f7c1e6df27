"""Convex regression toolkit.

Least squares projection onto the cone of convex sequences, adaptation
functionals for piecewise-affine approximation, explicit packing-set
constructions for local entropy lower bounds, closed-form minimax bound
evaluators, misspecified-model projections, and a deterministic Monte
Carlo harness for risk rates.
"""

from .affine import (
    PiecewiseAffineConvex,
    adaptation_envelope,
    best_affine_fit,
    candidate_family,
    canonicalize,
    knot_interpolant,
    local_ball_size_upper,
)
from .bounds import (
    AssouadInputs,
    EnvelopeParams,
    LowerBoundReport,
    assouad_lower_bound,
    entropy_integral_bound,
    kl_gaussian,
    neighborhood_radius,
    pinsker_tv_bound,
    risk_envelope_adaptive,
    risk_envelope_worst_case,
)
from .cone import (
    ConvexFit,
    ConvexityConstraints,
    DykstraResult,
    SolverError,
    canonical_lse,
    is_convex_feasible,
    project,
    project_bruteforce,
    project_dykstra,
)
from .grid import (
    DesignGrid,
    Observations,
    PiecewiseLinearFn,
    SampledFunction,
    check_pointwise_bound,
    integral_l2,
    interpolant,
    interval_count,
    l2_loss,
    lp_norm,
    make_grid,
)
from .misspec import (
    concave_projection_affine_check,
    convex_projection,
    pythagorean_check,
)
from .packing import (
    AffinePiece,
    BinaryCode,
    CurvatureClass,
    PackingSet,
    ScalingEstimate,
    build_packing,
    bump_interpolants,
    entropy_scaling_estimate,
    phi_tau,
    separation_bound,
    sup_ball_membership,
    vg_code,
)
from .sim import (
    ExperimentConfig,
    RateFit,
    RiskCurve,
    RiskRow,
    compare_to_lower_bound,
    estimate_risk,
    rate_exponent,
    simulate_once,
)
from .truths import TRUTHS, TruthFunction, get_truth, polynomial_truth

__version__ = "0.1.0"
