"""Exact solvers: the shielding fixed-point loop and the multiscale driver.

The sparse loop alternates two steps on one persistent simplex state:
solve the restriction to the current neighborhood, then rebuild the
neighborhood by shielding around the resulting plan and swap it into the
arc set in place. The basis survives each swap, so later rounds only pay
for what actually changed. Termination is the first zero-pivot round
right after a replacement: at that point the plan is optimal within its
own shielding neighborhood, which certifies global optimality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .grid import ProblemInstance
from .multiscale import build_pyramid, refine_neighborhood
from .shielding import shielding_neighborhood
from .simplex import NetworkSimplex, SolveStats
from .sparsity import (
    Neighborhood,
    Potentials,
    TransportPlan,
    full_neighborhood,
    plan_cost,
)

MAX_OUTER_ITERATIONS = 1000


@dataclass(eq=False)
class Solution:
    """Optimal plan with duals, exact cost, and solve telemetry."""

    plan: TransportPlan
    potentials: Potentials
    cost: int
    stats: SolveStats
    final_neighborhood_size: int
    final_neighborhood: Neighborhood
    cost_history: list[int] = field(default_factory=list)
    simplex: NetworkSimplex | None = None


def _plans_identical(a: TransportPlan, b: TransportPlan) -> bool:
    return (
        len(a) == len(b)
        and bool((a.src == b.src).all())
        and bool((a.tgt == b.tgt).all())
        and bool((a.mass == b.mass).all())
    )


def solve_sparse(
    inst: ProblemInstance,
    n0: Neighborhood,
    *,
    instrument: bool = False,
    keep_state: bool = False,
) -> Solution:
    """Solve exactly, starting from an arbitrary initial neighborhood.

    `instrument` additionally asserts, around every arc-set replacement,
    that the objective and the flow vector are byte-identical before and
    after (the warm-start conservation property); it costs one plan
    extraction per outer round. `keep_state` attaches the final simplex
    state to the solution (for optimality-certificate inspection).
    """
    sim = NetworkSimplex(inst, n0)
    stats = SolveStats()
    run = sim.run_pivots()
    stats.add_pivot_run(run)
    stats.outer_iterations = 1
    cost_history = [sim.objective()]

    nbhd = n0
    while True:
        plan = sim.current_plan()
        nbhd = shielding_neighborhood(plan, inst)
        if instrument:
            obj_before = sim.objective()
        sim.replace_arcs(nbhd)
        stats.arc_replacements += 1
        if instrument:
            if sim.objective() != obj_before:
                raise AssertionError("objective changed across replace_arcs")
            if not _plans_identical(plan, sim.current_plan()):
                raise AssertionError("flow vector changed across replace_arcs")
        run = sim.run_pivots()
        stats.add_pivot_run(run)
        stats.outer_iterations += 1
        obj = sim.objective()
        if obj > cost_history[-1]:
            raise AssertionError("objective increased across an outer iteration")
        cost_history.append(obj)
        if run.pivots == 0:
            break
        if stats.outer_iterations > MAX_OUTER_ITERATIONS:
            raise RuntimeError(
                f"no shielding fixed point within {MAX_OUTER_ITERATIONS} iterations"
            )

    plan = sim.current_plan()
    cost = plan_cost(plan)
    if cost != cost_history[-1]:
        raise AssertionError("recomputed plan cost disagrees with solver objective")
    return Solution(
        plan=plan,
        potentials=sim.current_potentials(),
        cost=cost,
        stats=stats,
        final_neighborhood_size=nbhd.size(),
        final_neighborhood=nbhd,
        cost_history=cost_history,
        simplex=sim if keep_state else None,
    )


def solve_dense(inst: ProblemInstance, *, instrument: bool = False) -> Solution:
    """Baseline: the same loop started from the full neighborhood."""
    n0 = full_neighborhood(inst.mu.shape, inst.nu.shape)
    return solve_sparse(inst, n0, instrument=instrument)


def solve_multiscale(
    inst: ProblemInstance,
    *,
    coarsest_max_extent: int = 8,
    instrument: bool = False,
) -> Solution:
    """Coarse-to-fine solve; returns the finest level's solution.

    The coarsest level starts dense (it is tiny by construction); every
    finer level starts from the neighborhood refined out of the previous
    plan. Stats are accumulated across levels; the answer is exact at
    every level, so the multiscale path changes speed, never the cost.
    """
    pyramid = build_pyramid(inst, coarsest_max_extent)
    levels = pyramid.levels
    coarsest = levels[-1]
    sol = solve_sparse(
        coarsest,
        full_neighborhood(coarsest.mu.shape, coarsest.nu.shape),
        instrument=instrument,
    )
    total = sol.stats
    for k in range(len(levels) - 2, -1, -1):
        n0 = refine_neighborhood(sol.plan, pyramid, k)
        sol = solve_sparse(levels[k], n0, instrument=instrument)
        total = SolveStats(
            pivots=total.pivots + sol.stats.pivots,
            arcs_scanned=total.arcs_scanned + sol.stats.arcs_scanned,
            arc_replacements=total.arc_replacements + sol.stats.arc_replacements,
            outer_iterations=total.outer_iterations + sol.stats.outer_iterations,
        )
    sol.stats = total
    return sol
