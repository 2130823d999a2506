"""Shared helpers: random balanced instances and brute-force references."""

import math

import numpy as np
import pytest

import gridot as g


def make_measure(dims, masses) -> g.DiscreteMeasure:
    return g.DiscreteMeasure(g.GridShape(tuple(dims)), np.asarray(masses))


def random_instance(
    rng,
    max_extent=16,
    max_mass=20,
    d=2,
    strictly_positive=False,
    same_shape=False,
) -> g.ProblemInstance:
    """Random balanced instance; zeros allowed unless told otherwise."""
    low = 1 if strictly_positive else 0
    while True:
        sdims = tuple(int(rng.integers(1, max_extent + 1)) for _ in range(d))
        tdims = sdims if same_shape else tuple(
            int(rng.integers(1, max_extent + 1)) for _ in range(d)
        )
        mu = rng.integers(low, max_mass + 1, size=math.prod(sdims))
        nu = rng.integers(low, max_mass + 1, size=math.prod(tdims))
        if mu.sum() == 0 or nu.sum() == 0:
            continue
        return g.balance(make_measure(sdims, mu), make_measure(tdims, nu))


def enumerate_flows(row_sums, col_sums):
    """Yield every non-negative integer matrix with the given marginals.

    Exponential; only for tiny reference cases.
    """
    row_sums = [int(x) for x in row_sums]
    col_sums = [int(x) for x in col_sums]
    assert sum(row_sums) == sum(col_sums)
    r, c = len(row_sums), len(col_sums)
    grid = [[0] * c for _ in range(r)]
    col_rem = list(col_sums)

    def fill(i, j, row_rem):
        if i == r:
            yield [row[:] for row in grid]
            return
        if j == c - 1:
            if row_rem <= col_rem[j]:
                grid[i][j] = row_rem
                col_rem[j] -= row_rem
                nxt = row_sums[i + 1] if i + 1 < r else 0
                yield from fill(i + 1, 0, nxt)
                col_rem[j] += row_rem
                grid[i][j] = 0
            return
        for v in range(min(row_rem, col_rem[j]) + 1):
            grid[i][j] = v
            col_rem[j] -= v
            yield from fill(i, j + 1, row_rem - v)
            col_rem[j] += v
            grid[i][j] = 0

    yield from fill(0, 0, row_sums[0])


def plan_from_matrix(inst, matrix) -> g.TransportPlan:
    entries = [
        (i, j, int(v))
        for i, row in enumerate(matrix)
        for j, v in enumerate(row)
        if v > 0
    ]
    return g.TransportPlan.from_entries(inst.mu.shape, inst.nu.shape, entries)


def brute_force_optimum(inst) -> int:
    """Exhaustive minimum of the transport cost; tiny instances only."""
    assert inst.mu.shape.size * inst.nu.shape.size <= 16
    best = None
    for matrix in enumerate_flows(inst.mu.masses, inst.nu.masses):
        cost = g.plan_cost(plan_from_matrix(inst, matrix))
        if best is None or cost < best:
            best = cost
    assert best is not None
    return best


def northwest_corner_plan(inst) -> g.TransportPlan:
    """A feasible (usually suboptimal) plan, for not-optimal-plan tests."""
    mu = inst.mu.masses.tolist()
    nu = inst.nu.masses.tolist()
    entries = []
    i = j = 0
    while i < len(mu) and j < len(nu):
        if mu[i] == 0:
            i += 1
            continue
        if nu[j] == 0:
            j += 1
            continue
        v = min(mu[i], nu[j])
        entries.append((i, j, v))
        mu[i] -= v
        nu[j] -= v
    return g.TransportPlan.from_entries(inst.mu.shape, inst.nu.shape, entries)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
