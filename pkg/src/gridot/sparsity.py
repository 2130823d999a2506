"""Sparse neighborhoods, transport plans, and the exact cost functional.

A neighborhood assigns each source point an axis-aligned box of admissible
target coordinates plus an explicit list of extra targets outside the box.
Boxes cover the common structured case in O(1) per source; extras absorb
support pairs that drift outside boxes between updates, so plan support
containment never forces box inflation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .grid import GridShape, INT63_MAX, max_pair_cost, pair_costs


def _box_volumes(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    ext = hi - lo + 1
    np.maximum(ext, 0, out=ext)
    vol = ext[:, 0].copy()
    for i in range(1, ext.shape[1]):
        vol *= ext[:, i]
    return vol


@dataclass(eq=False)
class Neighborhood:
    """Admissible (source, target) pairs: one box per source point + extras.

    Boxes are inclusive 1-based coordinate intervals per axis over the
    target grid; a box with lo > hi on any axis is empty. `extras[s]` is a
    sorted array of target flat indices admissible for source s but not
    inside its box. Immutable after construction.

    Pair visitation order is fixed: sources ascending, each source's box
    row-major (ascending target flat index), then its extras ascending.
    """

    source_shape: GridShape
    target_shape: GridShape
    lo: np.ndarray
    hi: np.ndarray
    extras: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n, d = self.source_shape.size, self.source_shape.d
        if self.target_shape.d != d:
            raise ValueError("source/target dimension mismatch")
        lo = np.ascontiguousarray(self.lo, dtype=np.int64)
        hi = np.ascontiguousarray(self.hi, dtype=np.int64)
        if lo.shape != (n, d) or hi.shape != (n, d):
            raise ValueError(f"box arrays must have shape ({n}, {d})")
        dims = np.asarray(self.target_shape.dims, dtype=np.int64)
        nonempty = (lo <= hi).all(axis=1)
        if nonempty.any():
            if int(lo[nonempty].min()) < 1 or (hi[nonempty] > dims).any():
                raise ValueError("non-empty boxes must lie within the target grid")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo, self.hi = lo, hi
        extras: dict[int, np.ndarray] = {}
        for s, idx in self.extras.items():
            a = np.ascontiguousarray(idx, dtype=np.int64)
            if a.size == 0:
                continue
            if not 0 <= s < n:
                raise ValueError(f"extras source {s} out of range")
            if (a < 0).any() or (a >= self.target_shape.size).any():
                raise ValueError("extras target index out of range")
            if (np.diff(a) <= 0).any():
                raise ValueError("extras must be strictly increasing")
            if self._in_box(s, a).any():
                raise ValueError("extras may not duplicate box targets")
            a.setflags(write=False)
            extras[s] = a
        self.extras = extras

    # -- queries ---------------------------------------------------------

    def _in_box(self, s: int, tgt: np.ndarray) -> np.ndarray:
        coords = self._target_coords(tgt)
        return ((coords >= self.lo[s]) & (coords <= self.hi[s])).all(axis=1)

    def _target_coords(self, tgt: np.ndarray) -> np.ndarray:
        rem = np.asarray(tgt, dtype=np.int64)
        cols = []
        for s in self.target_shape.strides():
            cols.append(rem // s + 1)
            rem = rem % s
        return np.stack(cols, axis=1)

    def contains(self, src: int, tgt: int) -> bool:
        """Whether (src, tgt), given as flat indices, is admissible."""
        if not 0 <= src < self.source_shape.size:
            raise ValueError(f"source index {src} out of range")
        if not 0 <= tgt < self.target_shape.size:
            raise ValueError(f"target index {tgt} out of range")
        point = self.target_shape.point_of(tgt)
        if all(l <= c <= h for c, l, h in zip(point, self.lo[src], self.hi[src])):
            return True
        ex = self.extras.get(src)
        if ex is None:
            return False
        k = int(np.searchsorted(ex, tgt))
        return k < ex.size and int(ex[k]) == tgt

    def box_volumes(self) -> np.ndarray:
        return _box_volumes(self.lo, self.hi)

    def size(self) -> int:
        """Total admissible pair count."""
        vols = self.box_volumes()
        approx = float(vols.sum(dtype=np.float64))
        if approx >= 2.0**62:
            total = sum(int(v) for v in vols)
        else:
            total = int(vols.sum(dtype=np.int64))
        return total + sum(a.size for a in self.extras.values())

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Yield (src, tgt) flat pairs in the canonical visitation order."""
        strides = self.target_shape.strides()
        d = self.target_shape.d
        for s in range(self.source_shape.size):
            lo, hi = self.lo[s], self.hi[s]
            if (lo <= hi).all():
                coord = lo.copy()
                while True:
                    t = 0
                    for i in range(d):
                        t += (int(coord[i]) - 1) * strides[i]
                    yield s, t
                    i = d - 1
                    while i >= 0:
                        coord[i] += 1
                        if coord[i] <= hi[i]:
                            break
                        coord[i] = lo[i]
                        i -= 1
                    if i < 0:
                        break
            ex = self.extras.get(s)
            if ex is not None:
                for t in ex:
                    yield s, int(t)

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All admissible pairs as parallel int64 arrays, canonical order.

        Vectorized counterpart of :meth:`pairs`; the two agree entry for
        entry (tested).
        """
        vols = self.box_volumes()
        total_box = int(vols.sum(dtype=np.int64))
        n_extra = sum(a.size for a in self.extras.values())
        src = np.empty(total_box + n_extra, dtype=np.int64)
        tgt = np.empty(total_box + n_extra, dtype=np.int64)

        strides = self.target_shape.strides()
        d = self.target_shape.d
        starts = np.zeros(len(vols) + 1, dtype=np.int64)
        np.cumsum(vols, out=starts[1:])
        # chunk over sources to bound temporaries
        chunk_pairs = 1 << 22
        s0 = 0
        n_src = len(vols)
        while s0 < n_src:
            s1 = s0 + 1
            acc = int(vols[s0])
            while s1 < n_src and acc + int(vols[s1]) <= chunk_pairs:
                acc += int(vols[s1])
                s1 += 1
            o0, o1 = int(starts[s0]), int(starts[s1])
            if o1 > o0:
                v = vols[s0:s1]
                src[o0:o1] = np.repeat(np.arange(s0, s1, dtype=np.int64), v)
                pos = np.arange(o1 - o0, dtype=np.int64) - np.repeat(
                    starts[s0:s1] - o0, v
                )
                ext = np.maximum(self.hi[s0:s1] - self.lo[s0:s1] + 1, 0)
                t = np.zeros(o1 - o0, dtype=np.int64)
                for i in range(d - 1, -1, -1):
                    e = np.repeat(ext[:, i], v)
                    off = pos % e
                    pos //= e
                    t += (np.repeat(self.lo[s0:s1, i], v) - 1 + off) * strides[i]
                tgt[o0:o1] = t
            s0 = s1

        if n_extra:
            o = total_box
            for s in sorted(self.extras):
                a = self.extras[s]
                src[o : o + a.size] = s
                tgt[o : o + a.size] = a
                o += a.size
            flag = np.zeros(total_box + n_extra, dtype=np.int8)
            flag[total_box:] = 1
            order = np.lexsort((flag, src))
            src = src[order]
            tgt = tgt[order]
        return src, tgt


def full_neighborhood(source_shape: GridShape, target_shape: GridShape) -> Neighborhood:
    """The dense neighborhood: every box is the whole target grid."""
    if source_shape.size * target_shape.size > INT63_MAX:
        raise OverflowError("pair count exceeds the 63-bit budget")
    n, d = source_shape.size, source_shape.d
    lo = np.ones((n, d), dtype=np.int64)
    hi = np.tile(np.asarray(target_shape.dims, dtype=np.int64), (n, 1))
    return Neighborhood(source_shape, target_shape, lo, hi)


@dataclass(eq=False)
class TransportPlan:
    """Sparse coupling: (source, target, positive mass) triples, flat-indexed.

    Entries are stored sorted by (source, target); duplicates are rejected.
    """

    source_shape: GridShape
    target_shape: GridShape
    src: np.ndarray
    tgt: np.ndarray
    mass: np.ndarray

    def __post_init__(self) -> None:
        src = np.ascontiguousarray(self.src, dtype=np.int64)
        tgt = np.ascontiguousarray(self.tgt, dtype=np.int64)
        mass = np.ascontiguousarray(self.mass, dtype=np.int64)
        if not (src.shape == tgt.shape == mass.shape) or src.ndim != 1:
            raise ValueError("src/tgt/mass must be parallel 1-d arrays")
        if src.size:
            if int(src.min()) < 0 or int(src.max()) >= self.source_shape.size:
                raise ValueError("plan source index out of range")
            if int(tgt.min()) < 0 or int(tgt.max()) >= self.target_shape.size:
                raise ValueError("plan target index out of range")
            if int(mass.min()) <= 0:
                raise ValueError("plan masses must be strictly positive")
            order = np.lexsort((tgt, src))
            src, tgt, mass = src[order], tgt[order], mass[order]
            dup = (np.diff(src) == 0) & (np.diff(tgt) == 0)
            if dup.any():
                raise ValueError("duplicate (source, target) pair in plan")
        for a in (src, tgt, mass):
            a.setflags(write=False)
        self.src, self.tgt, self.mass = src, tgt, mass

    def __len__(self) -> int:
        return self.src.size

    def entries(self) -> Iterator[tuple[int, int, int]]:
        for s, t, m in zip(self.src, self.tgt, self.mass):
            yield int(s), int(t), int(m)

    @classmethod
    def from_entries(
        cls,
        source_shape: GridShape,
        target_shape: GridShape,
        entries: "list[tuple[int, int, int]]",
    ) -> "TransportPlan":
        if entries:
            src, tgt, mass = (np.asarray(c, dtype=np.int64) for c in zip(*entries))
        else:
            src = tgt = mass = np.empty(0, dtype=np.int64)
        return cls(source_shape, target_shape, src, tgt, mass)


@dataclass(eq=False)
class Potentials:
    """Dual values: u per source point, v per target point."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.u = np.ascontiguousarray(self.u, dtype=np.int64)
        self.v = np.ascontiguousarray(self.v, dtype=np.int64)


def plan_cost(p: TransportPlan) -> int:
    """Exact transport cost of a plan: sum of mass times squared distance.

    Recomputed from scratch; never read out of solver state.
    """
    if len(p) == 0:
        return 0
    costs = pair_costs(p.source_shape, p.target_shape, p.src, p.tgt)
    max_c = max_pair_cost(p.source_shape, p.target_shape)
    max_m = int(p.mass.max())
    # int64 fast path only when no partial sum can wrap
    if max_c * max_m * len(p) < 2**62:
        return int((costs * p.mass).sum(dtype=np.int64))
    return sum(int(c) * int(m) for c, m in zip(costs, p.mass))


def check_marginals(p: TransportPlan, inst) -> bool:
    """Exact test that a plan's row/column sums match the instance measures."""
    if p.source_shape != inst.mu.shape or p.target_shape != inst.nu.shape:
        raise ValueError("plan shapes do not match instance shapes")
    row = np.zeros(inst.mu.shape.size, dtype=np.int64)
    col = np.zeros(inst.nu.shape.size, dtype=np.int64)
    np.add.at(row, p.src, p.mass)
    np.add.at(col, p.tgt, p.mass)
    return bool((row == inst.mu.masses).all() and (col == inst.nu.masses).all())


def union_with_support(n: Neighborhood, p: TransportPlan) -> Neighborhood:
    """Smallest extension of a neighborhood containing the plan's support.

    Support pairs already inside a box are ignored; the rest land in the
    extras of their source, deduplicated against existing extras.
    """
    if n.source_shape != p.source_shape or n.target_shape != p.target_shape:
        raise ValueError("neighborhood and plan shapes do not match")
    if len(p) == 0:
        return n
    coords = n._target_coords(p.tgt)
    inside = ((coords >= n.lo[p.src]) & (coords <= n.hi[p.src])).all(axis=1)
    if inside.all():
        return n
    extras = dict(n.extras)
    out_src = p.src[~inside]
    out_tgt = p.tgt[~inside]
    for s in np.unique(out_src):
        s = int(s)
        add = out_tgt[out_src == s]
        old = extras.get(s)
        merged = np.union1d(old, add) if old is not None else np.unique(add)
        extras[s] = merged
    return Neighborhood(n.source_shape, n.target_shape, n.lo, n.hi, extras)
