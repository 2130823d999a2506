"""Exact discrete optimal transport on grids.

Sparse multi-scale solving with a warm-startable network simplex:
neighborhoods built by shielding around the current plan, swapped into
the running simplex without restarting, coarse-to-fine over a dyadic
pyramid. All arithmetic is exact; the reported cost is always the true
integer optimum of the dense problem.
"""

from .grid import (
    DiscreteMeasure,
    GridPoint,
    GridShape,
    ProblemInstance,
    balance,
    flat_index,
    increment_all,
    point_of,
    sq_euclidean_cost,
)
from .multiscale import Pyramid, build_pyramid, coarsen, refine_neighborhood
from .oracle import oracle_solve
from .shielding import is_shielded, shielding_neighborhood, verify_shielding
from .simplex import (
    InfeasibleRestriction,
    NetworkSimplex,
    PivotStats,
    ReplaceStats,
    SolveStats,
)
from .solver import Solution, solve_dense, solve_multiscale, solve_sparse
from .sparsity import (
    Neighborhood,
    Potentials,
    TransportPlan,
    check_marginals,
    full_neighborhood,
    plan_cost,
    union_with_support,
)

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure",
    "GridPoint",
    "GridShape",
    "InfeasibleRestriction",
    "Neighborhood",
    "NetworkSimplex",
    "PivotStats",
    "Potentials",
    "ProblemInstance",
    "Pyramid",
    "ReplaceStats",
    "Solution",
    "SolveStats",
    "TransportPlan",
    "balance",
    "build_pyramid",
    "check_marginals",
    "coarsen",
    "flat_index",
    "full_neighborhood",
    "increment_all",
    "is_shielded",
    "oracle_solve",
    "plan_cost",
    "point_of",
    "refine_neighborhood",
    "shielding_neighborhood",
    "solve_dense",
    "solve_multiscale",
    "solve_sparse",
    "sq_euclidean_cost",
    "union_with_support",
    "verify_shielding",
]
