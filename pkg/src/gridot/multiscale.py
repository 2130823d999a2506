"""Coarse-to-fine pyramid and neighborhood refinement.

Coarsening merges axis-aligned blocks of extent 2 (extent 1 on odd
tails), preserving total mass exactly. The coarse plan at each level
seeds the next finer level's initial neighborhood; a whole coarse cell of
slack is added around each source's coupled targets so that support
drift at the finer scale rarely forces extra outer iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DiscreteMeasure, GridShape, ProblemInstance
from .sparsity import Neighborhood, TransportPlan

_BIG = 2**62


def coarsen(m: DiscreteMeasure) -> DiscreteMeasure:
    """Halve every axis (ceil division), summing masses per block."""
    arr = m.masses.reshape(m.shape.dims)
    for ax, n in enumerate(m.shape.dims):
        arr = np.add.reduceat(arr, np.arange(0, n, 2), axis=ax)
    coarse_shape = GridShape(tuple(-(-n // 2) for n in m.shape.dims))
    return DiscreteMeasure(coarse_shape, arr.ravel())


def _parent_map(fine: GridShape, coarse: GridShape) -> np.ndarray:
    """Flat index of each fine point's coarse block, row-major."""
    coords = fine.coords()
    parent = np.zeros(fine.size, dtype=np.int64)
    for i, stride in enumerate(coarse.strides()):
        parent += ((coords[:, i] + 1) // 2 - 1) * stride
    return parent


@dataclass(eq=False)
class Pyramid:
    """Problem instances from finest (index 0) to coarsest, plus block maps.

    `src_parent[k]` / `tgt_parent[k]` map level-k flat indices to their
    level-(k+1) block; blocks partition each finer grid.
    """

    levels: list[ProblemInstance]
    src_parent: list[np.ndarray]
    tgt_parent: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.levels)


def build_pyramid(inst: ProblemInstance, coarsest_max_extent: int = 8) -> Pyramid:
    """Coarsen both measures until every grid extent is small enough."""
    if coarsest_max_extent < 1:
        raise ValueError("coarsest_max_extent must be >= 1")
    levels = [inst]
    src_parent: list[np.ndarray] = []
    tgt_parent: list[np.ndarray] = []
    while max(max(inst.mu.shape.dims), max(inst.nu.shape.dims)) > coarsest_max_extent:
        mu_c = coarsen(inst.mu)
        nu_c = coarsen(inst.nu)
        src_parent.append(_parent_map(inst.mu.shape, mu_c.shape))
        tgt_parent.append(_parent_map(inst.nu.shape, nu_c.shape))
        inst = ProblemInstance(mu_c, nu_c)
        levels.append(inst)
    return Pyramid(levels, src_parent, tgt_parent)


def _window_extremes(lo: np.ndarray, hi: np.ndarray, dims: tuple[int, ...]):
    """Chebyshev-distance-1 dilation: per-cell extremes over the 3^d window."""
    d = len(dims)
    lo_w = lo.reshape(dims + (d,)).copy()
    hi_w = hi.reshape(dims + (d,)).copy()
    for ax, n in enumerate(dims):
        if n == 1:
            continue
        for arr, op, fill in ((lo_w, np.minimum, _BIG), (hi_w, np.maximum, 0)):
            fwd = np.full_like(arr, fill)
            bwd = np.full_like(arr, fill)
            head = [slice(None)] * d + [slice(None)]
            tail = [slice(None)] * d + [slice(None)]
            head[ax] = slice(None, -1)
            tail[ax] = slice(1, None)
            fwd[tuple(head)] = arr[tuple(tail)]
            bwd[tuple(tail)] = arr[tuple(head)]
            op(arr, fwd, out=arr)
            op(arr, bwd, out=arr)
    n_cells = int(np.prod(dims))
    return lo_w.reshape(n_cells, d), hi_w.reshape(n_cells, d)


def refine_neighborhood(
    coarse_plan: TransportPlan, pyramid: Pyramid, fine_level: int
) -> Neighborhood:
    """Initial neighborhood for a level, derived from the coarser plan.

    Each fine source gets the coordinate hull of the children of every
    coarse target coupled to its own coarse block or to any block within
    Chebyshev distance 1 of it. Sources whose whole window is uncoupled
    (possible only for zero-mass regions) fall back to the full target
    range; boxes are never empty.
    """
    if not 0 <= fine_level < len(pyramid) - 1:
        raise ValueError(f"fine_level {fine_level} out of range")
    coarse = pyramid.levels[fine_level + 1]
    fine = pyramid.levels[fine_level]
    if (
        coarse_plan.source_shape != coarse.mu.shape
        or coarse_plan.target_shape != coarse.nu.shape
    ):
        raise ValueError("plan shapes do not match the coarse level")

    d = coarse.d
    n_coarse = coarse.mu.shape.size
    lo_c = np.full((n_coarse, d), _BIG, dtype=np.int64)
    hi_c = np.zeros((n_coarse, d), dtype=np.int64)
    rem = coarse_plan.tgt.copy()
    for i, s in enumerate(coarse.nu.shape.strides()):
        c = rem // s + 1
        rem %= s
        np.minimum.at(lo_c[:, i], coarse_plan.src, c)
        np.maximum.at(hi_c[:, i], coarse_plan.src, c)

    lo_w, hi_w = _window_extremes(lo_c, hi_c, coarse.mu.shape.dims)

    parent = pyramid.src_parent[fine_level]
    lo_f = lo_w[parent]
    hi_f = hi_w[parent]
    uncoupled = (lo_f > hi_f).any(axis=1)
    lo_f[uncoupled] = 1
    hi_f[uncoupled] = 1

    fine_tgt_dims = np.asarray(fine.nu.shape.dims, dtype=np.int64)
    lo = 2 * lo_f - 1
    hi = np.minimum(2 * hi_f, fine_tgt_dims)
    lo[uncoupled] = 1
    hi[uncoupled] = fine_tgt_dims
    return Neighborhood(fine.mu.shape, fine.nu.shape, lo, hi)
