import numpy as np
import pytest

import gridot as g

from conftest import make_measure, random_instance


def identity_instance(masses, dims):
    m = make_measure(dims, masses)
    return g.ProblemInstance(m, m)


def diagonal_neighborhood(shape):
    coords = shape.coords()
    return g.Neighborhood(shape, shape, coords.copy(), coords.copy())


# -- solve_sparse -------------------------------------------------------------

def test_diagonal_start_converges_immediately():
    inst = identity_instance([2, 3, 1, 4], (2, 2))
    sol = g.solve_sparse(inst, diagonal_neighborhood(inst.mu.shape))
    assert sol.cost == 0
    # one productive round plus the zero-pivot fixed-point check
    assert sol.stats.outer_iterations == 2
    assert g.check_marginals(sol.plan, inst)


def test_translated_point_mass():
    shape = g.GridShape((4, 4))
    mu = np.zeros(16, dtype=np.int64)
    nu = np.zeros(16, dtype=np.int64)
    mu[shape.flat_index((1, 1))] = 6
    nu[shape.flat_index((2, 3))] = 6
    inst = g.ProblemInstance(g.DiscreteMeasure(shape, mu), g.DiscreteMeasure(shape, nu))
    sol = g.solve_sparse(inst, g.full_neighborhood(shape, shape))
    assert sol.cost == 30
    assert len(sol.plan) == 1


def test_sparse_loop_matches_oracle_8x8(rng):
    for _ in range(15):
        inst = random_instance(rng, max_extent=8, max_mass=20)
        sol = g.solve_sparse(
            inst, g.full_neighborhood(inst.mu.shape, inst.nu.shape), instrument=True
        )
        cost, _ = g.oracle_solve(inst)
        assert sol.cost == cost
        assert g.check_marginals(sol.plan, inst)
        assert g.plan_cost(sol.plan) == sol.cost


def test_cost_history_monotone_and_above_final(rng):
    inst = random_instance(rng, max_extent=8, max_mass=20)
    sol = g.solve_sparse(inst, g.full_neighborhood(inst.mu.shape, inst.nu.shape))
    hist = sol.cost_history
    assert all(a >= b for a, b in zip(hist, hist[1:]))
    assert all(c >= sol.cost for c in hist)
    assert hist[-1] == sol.cost


def test_fixed_point_certificate(rng):
    inst = random_instance(rng, max_extent=8, max_mass=9)
    sol = g.solve_sparse(
        inst, g.full_neighborhood(inst.mu.shape, inst.nu.shape), keep_state=True
    )
    assert sol.simplex is not None
    assert sol.simplex.assert_optimal_basis()
    assert g.verify_shielding(sol.final_neighborhood, sol.plan)
    assert sol.final_neighborhood_size == sol.final_neighborhood.size()


def test_infeasible_initial_neighborhood_propagates():
    inst = g.ProblemInstance(make_measure((2,), [1, 1]), make_measure((2,), [1, 1]))
    lo = np.array([[1], [2]], dtype=np.int64)
    hi = np.array([[1], [1]], dtype=np.int64)
    with pytest.raises(g.InfeasibleRestriction):
        g.solve_sparse(inst, g.Neighborhood(inst.mu.shape, inst.nu.shape, lo, hi))


# -- solve_dense ----------------------------------------------------------------

def test_dense_trivial():
    inst = identity_instance([3], (1, 1))
    assert g.solve_dense(inst).cost == 0


def test_dense_forced_move():
    inst = g.ProblemInstance(make_measure((2, 1), [1, 1]), make_measure((2, 1), [0, 2]))
    assert g.solve_dense(inst).cost == 1


def test_dense_matches_oracle_6x6(rng):
    for _ in range(5):
        inst = random_instance(rng, max_extent=6, max_mass=20)
        assert g.solve_dense(inst).cost == g.oracle_solve(inst)[0]


# -- solve_multiscale --------------------------------------------------------------

def test_multiscale_uniform_is_zero():
    m = make_measure((32, 32), [3] * 1024)
    inst = g.ProblemInstance(m, m)
    sol = g.solve_multiscale(inst)
    assert sol.cost == 0


def test_multiscale_matches_dense_16(rng):
    for _ in range(5):
        inst = random_instance(rng, max_extent=16, max_mass=20)
        assert g.solve_multiscale(inst).cost == g.solve_dense(inst).cost


def test_multiscale_zero_mass_robustness(rng):
    # plenty of zeros, no +1 increment: still exact vs the oracle
    for _ in range(5):
        inst = random_instance(rng, max_extent=10, max_mass=3)
        assert g.solve_multiscale(inst).cost == g.oracle_solve(inst)[0]


def test_multiscale_aggregates_stats():
    inst = identity_instance([1] * 256, (16, 16))
    sol = g.solve_multiscale(inst)
    assert sol.stats.outer_iterations >= 2 * 2  # at least two levels solved
    assert sol.stats.pivots > 0


def test_solution_shapes_and_types(rng):
    inst = random_instance(rng, max_extent=6, max_mass=9)
    sol = g.solve_multiscale(inst)
    assert isinstance(sol.cost, int)
    assert sol.potentials.u.shape == (inst.mu.shape.size,)
    assert sol.potentials.v.shape == (inst.nu.shape.size,)
    assert sol.simplex is None
