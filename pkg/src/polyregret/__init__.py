"""Online linear optimization over structured domains.

Lazy anytime subgradient plus lifted-Hedge, greedy-subgradient and barrier
baselines; exact and iterative Euclidean projections onto the built-in domain
families; geometric constants and closed-form regret/pseudo-regret bounds; and
an experiment harness with a CLI.
"""

from .analysis import (
    BoundParams,
    GapReport,
    GeometryReport,
    bound_adversarial,
    bound_iid,
    curvature_integral,
    diameter,
    geometry_report,
    suboptimality_gaps,
    theta_lower_bound,
    width,
    width_along,
    width_lower_bound_variance,
)
from .domains import (
    AffineHull,
    Ball,
    Birkhoff,
    Box,
    CurvedEpigraph,
    Permutahedron,
    ProjectionResult,
    SignedPermutahedron,
    Simplex,
    VPolytope,
    affine_decomposition,
    contains,
    linear_minimizer,
    project,
    project_birkhoff,
    project_permutahedron,
    project_vpolytope_minnorm,
    vertices,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateGapError,
    DimensionMismatchError,
    PolyregretError,
    VertexCountError,
)
from .harness import (
    ExperimentConfig,
    RegretTrace,
    RunSummary,
    export,
    run_experiment,
    snap_probability,
    sweep,
)
from .learners import (
    Learner,
    LearnerConfig,
    LearnerState,
    barrier_next,
    greedy_subgradient_next,
    lazy_subgradient_next,
    lifted_hedge_next,
)
from .streams import (
    AlternatingStream,
    BestResponseStream,
    CostBounds,
    IIDStream,
    Noise,
    RecordedStream,
    empirical_bounds,
    next_cost,
)

__version__ = "0.1.0"
