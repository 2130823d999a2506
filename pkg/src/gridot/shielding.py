"""Shielding neighborhoods for squared-Euclidean transport on grids.

A pair (x, y) is *shielded* by a plan entry (xs, ys) with xs grid-adjacent
to x when c(x,y) + c(xs,ys) > c(x,ys) + c(xs,y); for squared Euclidean
cost this reads <xs - x, y - ys> > 0. Shielded pairs can be dropped from
the admissible set without changing the optimum, which is what makes the
sparse fixed-point iteration exact.

Since the only grid-adjacent shield sources are x +- e_i, a target y
escapes every shield of x exactly when, per axis i, y_i is at most the
smallest i-th target coordinate used by x + e_i and at least the largest
used by x - e_i. The unshielded set per source is therefore an axis
aligned box, possibly empty for non-monotone interim plans; feasibility
is restored by unioning in the plan support.
"""

from __future__ import annotations

import numpy as np

from .grid import GridPoint, ProblemInstance, sq_euclidean_cost
from .sparsity import Neighborhood, TransportPlan, union_with_support

_BIG = 2**62


def _per_source_target_coord_extremes(
    p: TransportPlan,
) -> tuple[np.ndarray, np.ndarray]:
    """Per source point and axis: min and max target coordinate in the plan."""
    n = p.source_shape.size
    d = p.source_shape.d
    cmin = np.full((n, d), _BIG, dtype=np.int64)
    cmax = np.zeros((n, d), dtype=np.int64)
    if len(p):
        rem = p.tgt.copy()
        for i, s in enumerate(p.target_shape.strides()):
            c = rem // s + 1
            rem %= s
            np.minimum.at(cmin[:, i], p.src, c)
            np.maximum.at(cmax[:, i], p.src, c)
    return cmin, cmax


def shielding_neighborhood(p: TransportPlan, inst: ProblemInstance) -> Neighborhood:
    """The box neighborhood of unshielded pairs, unioned with supp(p).

    Requires every source point carrying positive mass to appear in the
    plan (its entries are what shields its neighbors).
    """
    if p.source_shape != inst.mu.shape or p.target_shape != inst.nu.shape:
        raise ValueError("plan shapes do not match the instance")
    has_entry = np.zeros(p.source_shape.size, dtype=bool)
    has_entry[p.src] = True
    if (~has_entry & (inst.mu.masses > 0)).any():
        raise ValueError("source point with positive mass has no plan entry")

    src_dims = p.source_shape.dims
    tgt_dims = p.target_shape.dims
    d = len(src_dims)
    cmin, cmax = _per_source_target_coord_extremes(p)

    n = p.source_shape.size
    lo = np.empty((n, d), dtype=np.int64)
    hi = np.empty((n, d), dtype=np.int64)
    for i in range(d):
        # upper bound from the +e_i neighbor's targets, lower from -e_i's
        up = np.full(src_dims, _BIG, dtype=np.int64)
        dn = np.zeros(src_dims, dtype=np.int64)
        sl_head = [slice(None)] * d
        sl_tail = [slice(None)] * d
        sl_head[i] = slice(None, -1)
        sl_tail[i] = slice(1, None)
        if src_dims[i] > 1:
            up[tuple(sl_head)] = cmin[:, i].reshape(src_dims)[tuple(sl_tail)]
            dn[tuple(sl_tail)] = cmax[:, i].reshape(src_dims)[tuple(sl_head)]
        hi[:, i] = np.minimum(up.ravel(), tgt_dims[i])
        lo[:, i] = np.maximum(dn.ravel(), 1)

    boxes = Neighborhood(p.source_shape, p.target_shape, lo, hi)
    return union_with_support(boxes, p)


def is_shielded(x: GridPoint, y: GridPoint, p: TransportPlan) -> bool:
    """Definitional test: some support pair adjacent to x shields (x, y).

    Pure reference implementation over the plan entries; quadratic and
    meant for small cases and for validating the vectorized verifier.
    """
    cxy = sq_euclidean_cost(x, y)
    for s, t, _m in p.entries():
        xs = p.source_shape.point_of(s)
        if sum(abs(a - b) for a, b in zip(xs, x)) != 1:
            continue
        ys = p.target_shape.point_of(t)
        if cxy + sq_euclidean_cost(xs, ys) > sq_euclidean_cost(x, ys) + sq_euclidean_cost(xs, y):
            return True
    return False


def verify_shielding(n: Neighborhood, p: TransportPlan) -> bool:
    """Brute-force check that every excluded pair is shielded.

    Evaluates the shielding inequality (as the inner product form) for
    every pair (x, y) outside the neighborhood against every support
    entry of every grid neighbor of x. Desk-scale instances only.
    """
    if n.source_shape != p.source_shape or n.target_shape != p.target_shape:
        raise ValueError("neighborhood and plan shapes do not match")
    src_shape, tgt_shape = p.source_shape, p.target_shape
    n_src, n_tgt, d = src_shape.size, tgt_shape.size, src_shape.d
    src_coords = src_shape.coords()
    tgt_coords = tgt_shape.coords()

    # plan entries grouped by source (plan arrays are sorted by source)
    bounds = np.searchsorted(p.src, np.arange(n_src + 1))
    src_strides = src_shape.strides()
    src_dims = src_shape.dims

    for x in range(n_src):
        shielded = np.zeros(n_tgt, dtype=bool)
        cx = src_coords[x]
        for i in range(d):
            for step in (-1, 1):
                ci = cx[i] + step
                if not 1 <= ci <= src_dims[i]:
                    continue
                xs = x + step * src_strides[i]
                a, b = bounds[xs], bounds[xs + 1]
                if a == b:
                    continue
                dvec = src_coords[xs] - cx
                for t in p.tgt[a:b]:
                    dots = (tgt_coords - tgt_coords[t]) @ dvec
                    shielded |= dots > 0

        member = ((tgt_coords >= n.lo[x]) & (tgt_coords <= n.hi[x])).all(axis=1)
        ex = n.extras.get(x)
        if ex is not None:
            member[ex] = True
        if not shielded[~member].all():
            return False
    return True
