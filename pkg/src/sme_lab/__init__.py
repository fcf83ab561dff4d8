"""Set-membership identification lab.

Tools for simulating linear systems driven by noise bounded in a known
compact convex set, computing the resulting parameter membership sets with
certified diameter bounds, benchmarking against regularized least squares,
and evaluating non-asymptotic convergence-rate bounds.
"""

from sme_lab.geometry import (
    CircumscribedPolygon,
    ConvexSupport,
    HPolytope,
    L2Ball,
    NoiseDistribution,
    ShsCatalog,
    WeightedBox,
    WeightedL1Ball,
    ball_probability,
    default_shs_catalog,
    slice_probability,
    support_from_config,
)
from sme_lab.lti import (
    LinearFeedbackPlusNoise,
    LinearSystem,
    PureNoise,
    Trajectory,
    empirical_small_ball_profile,
    simulate,
    trajectory_bounds,
)
from sme_lab.membership import DiameterConfig, MembershipSet
from sme_lab.estimators import LseResult, lse_fit, estimation_error, run_sme
from sme_lab.theory import (
    RateModel,
    TheoryParams,
    analytic_boundary_rates,
    compute_xi,
    corollary_rate,
    theorem1_bound,
    theorem2_bound,
)

__all__ = [
    "CircumscribedPolygon",
    "ConvexSupport",
    "DiameterConfig",
    "HPolytope",
    "L2Ball",
    "LinearFeedbackPlusNoise",
    "LinearSystem",
    "LseResult",
    "MembershipSet",
    "NoiseDistribution",
    "PureNoise",
    "RateModel",
    "ShsCatalog",
    "TheoryParams",
    "Trajectory",
    "WeightedBox",
    "WeightedL1Ball",
    "analytic_boundary_rates",
    "ball_probability",
    "compute_xi",
    "corollary_rate",
    "default_shs_catalog",
    "empirical_small_ball_profile",
    "estimation_error",
    "lse_fit",
    "run_sme",
    "simulate",
    "slice_probability",
    "support_from_config",
    "theorem1_bound",
    "theorem2_bound",
    "trajectory_bounds",
]

__version__ = "0.1.0"
