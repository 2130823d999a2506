"""Grid geometry, integer mass measures, and exact squared-Euclidean costs.

Points of a d-dimensional grid carry 1-based coordinates, one per axis;
flat indices are 0-based and row-major. All masses and costs are integers
so that optimality can be decided by exact comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Point counts, totals, and scaled totals must stay below 2**63 so that
# flows fit in signed 64-bit arithmetic.
INT63_MAX = 2**63 - 1

GridPoint = tuple[int, ...]


@dataclass(frozen=True)
class GridShape:
    """Extents of a d-dimensional grid; points are indexed row-major."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(x) for x in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) == 0:
            raise ValueError("grid needs at least one axis")
        if any(x < 1 for x in dims):
            raise ValueError(f"grid extents must be >= 1, got {dims}")
        if math.prod(dims) > INT63_MAX:
            raise OverflowError(f"point count of {dims} exceeds the 63-bit budget")

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def strides(self) -> tuple[int, ...]:
        """Row-major strides: flat = sum((coord_i - 1) * stride_i)."""
        out = [1] * self.d
        for i in range(self.d - 2, -1, -1):
            out[i] = out[i + 1] * self.dims[i + 1]
        return tuple(out)

    def flat_index(self, p: GridPoint) -> int:
        if len(p) != self.d:
            raise ValueError(f"point {p} has dimension {len(p)}, grid has {self.d}")
        idx = 0
        for c, n, s in zip(p, self.dims, self.strides()):
            if not 1 <= c <= n:
                raise ValueError(f"coordinate {c} out of range [1, {n}] in {p}")
            idx += (c - 1) * s
        return idx

    def point_of(self, i: int) -> GridPoint:
        if not 0 <= i < self.size:
            raise ValueError(f"flat index {i} out of range [0, {self.size})")
        coords = []
        for s in self.strides():
            coords.append(i // s + 1)
            i %= s
        return tuple(coords)

    def coords(self) -> np.ndarray:
        """All grid points as a (size, d) array of 1-based coordinates."""
        grids = np.meshgrid(
            *[np.arange(1, n + 1, dtype=np.int64) for n in self.dims], indexing="ij"
        )
        return np.stack([g.ravel() for g in grids], axis=1)


def flat_index(p: GridPoint, s: GridShape) -> int:
    """Row-major flat index of a 1-based grid point."""
    return s.flat_index(p)


def point_of(i: int, s: GridShape) -> GridPoint:
    """Inverse of :func:`flat_index`."""
    return s.point_of(i)


def sq_euclidean_cost(x: GridPoint, y: GridPoint) -> int:
    """Exact squared Euclidean distance between two grid points.

    Both points use 1-based coordinates; they may live on grids of
    different extents as long as the dimension agrees.
    """
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    return sum((a - b) * (a - b) for a, b in zip(x, y))


def max_pair_cost(a: GridShape, b: GridShape) -> int:
    """Largest squared distance between any point of grid a and any of grid b."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")
    return sum(max(n - 1, m - 1) ** 2 for n, m in zip(a.dims, b.dims))


def pair_costs(
    src_shape: GridShape,
    tgt_shape: GridShape,
    src: np.ndarray,
    tgt: np.ndarray,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Vectorized squared distances for parallel arrays of flat indices."""
    if src_shape.d != tgt_shape.d:
        raise ValueError("dimension mismatch")
    n = len(src)
    if out is None:
        out = np.zeros(n, dtype=np.int64)
    else:
        out[:] = 0
    ss = src_shape.strides()
    ts = tgt_shape.strides()
    src = np.asarray(src)
    tgt = np.asarray(tgt)
    chunk = 1 << 22
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        rs = src[a:b].astype(np.int64)
        rt = tgt[a:b].astype(np.int64)
        for i in range(src_shape.d):
            cs = rs // ss[i]
            ct = rt // ts[i]
            diff = cs - ct
            out[a:b] += diff * diff
            rs -= cs * ss[i]
            rt -= ct * ts[i]
    return out


def _exact_total(masses: np.ndarray) -> int:
    # int64 partial sums of non-negatives never wrap as long as the true
    # total is below 2**63; a float pre-check rules out the wrap case.
    approx = float(masses.sum(dtype=np.float64))
    if approx >= 2.0**62:
        return int(sum(int(v) for v in masses))
    return int(masses.sum(dtype=np.int64))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Non-negative integer mass per grid point, flat row-major order.

    A total of zero is representable (some benchmark images are blank)
    but cannot enter a ProblemInstance.
    """

    shape: GridShape
    masses: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.masses, dtype=np.int64, copy=True).ravel()
        if m.ndim != 1 or m.shape[0] != self.shape.size:
            raise ValueError(
                f"expected {self.shape.size} masses for shape {self.shape.dims}, "
                f"got {m.shape}"
            )
        if m.size and int(m.min()) < 0:
            raise ValueError("masses must be non-negative")
        total = _exact_total(m)
        if total > INT63_MAX:
            raise OverflowError("total mass exceeds the 63-bit budget")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "_total", total)

    @property
    def total(self) -> int:
        return self._total  # type: ignore[attr-defined]

    @property
    def d(self) -> int:
        return self.shape.d

    def scaled(self, k: int) -> "DiscreteMeasure":
        """This measure with every mass multiplied by a positive integer."""
        if k < 1:
            raise ValueError("scale factor must be a positive integer")
        if self.total * k > INT63_MAX:
            raise OverflowError("scaled total exceeds the 63-bit budget")
        return DiscreteMeasure(self.shape, self.masses * np.int64(k))


def increment_all(m: DiscreteMeasure) -> DiscreteMeasure:
    """Add one unit of mass to every grid point (benchmark reproduction mode)."""
    if m.total + m.shape.size > INT63_MAX:
        raise OverflowError("incremented total exceeds the 63-bit budget")
    return DiscreteMeasure(m.shape, m.masses + np.int64(1))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A balanced transport instance: equal-total integer measures, equal dimension."""

    mu: DiscreteMeasure
    nu: DiscreteMeasure

    def __post_init__(self) -> None:
        if self.mu.d != self.nu.d:
            raise ValueError(f"dimension mismatch: {self.mu.d} vs {self.nu.d}")
        if self.mu.total <= 0 or self.nu.total <= 0:
            raise ValueError("measures must have positive total mass")
        if self.mu.total != self.nu.total:
            raise ValueError(
                f"unbalanced instance: totals {self.mu.total} != {self.nu.total}; "
                "use balance()"
            )

    @property
    def total(self) -> int:
        return self.mu.total

    @property
    def d(self) -> int:
        return self.mu.d


def balance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> ProblemInstance:
    """Scale two positive measures by cross factors so their totals agree.

    Uses the smallest positive integer factors (cross totals divided by
    their gcd). Scaling a measure by a positive integer does not change
    which plans are optimal, so this is a lossless way to make the
    coupling polytope non-empty for integer masses.
    """
    if mu.total <= 0 or nu.total <= 0:
        raise ValueError("cannot balance a measure with zero total mass")
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
    g = math.gcd(mu.total, nu.total)
    fa = nu.total // g
    fb = mu.total // g
    if mu.total * fa > INT63_MAX:
        raise OverflowError("balanced total exceeds the 63-bit budget")
    return ProblemInstance(
        mu if fa == 1 else mu.scaled(fa),
        nu if fb == 1 else nu.scaled(fb),
    )
