"""Optimal as-you-go relay placement along a random lattice corridor."""

from .model import (
    CostParams,
    ModelError,
    PathParams,
    hop_cost,
    hop_cost_point,
    hop_deltas,
    point_cost,
    validate_cost_model,
)
from .placement import (
    BoundaryPartition,
    BoundaryStructureError,
    DivergenceError,
    PlacementSet,
    boundary_partition,
    bounding_box,
    build_set,
)
from .renewal import (
    EvaluationError,
    SetEvaluation,
    eval_cost,
    hit_probs,
    identity_residual,
    reaching_prob,
    reaching_table,
)
from .osla import ConvergenceError, GridScan, SolveResult, grid_scan, solve_unconstrained
from .bellman import (
    EquivalenceReport,
    GridTruncationError,
    ValueTable,
    bellman_placement_set,
    finite_horizon_values,
    value_iteration,
    verify_osla_equivalence,
)
from .constrained import (
    ConstrainedSolution,
    InfeasibleBudgetError,
    LambdaPoint,
    MixedPolicy,
    relay_curve,
    solve_constrained,
)
from .heuristic import DistancePolicy, FrontierPoint, compare, distance_set, optimize_threshold
from .simulate import EpisodeResult, McEstimate, PathEvent, monte_carlo, run_episode, sample_path, walk_events

__version__ = "0.1.0"
