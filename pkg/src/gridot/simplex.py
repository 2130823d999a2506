"""Network simplex for transport instances with a mutable arc set.

The bipartite flow network has one node per source point, one per target
point, and an artificial root. The spanning-tree basis, flows, and node
potentials survive arc-set replacement (`replace_arcs`), which is what
makes warm starts across neighborhood updates possible without restarting
from an artificial basis.

Everything is exact integer arithmetic. The objective is accumulated in
Python integers, so the artificial big-M contributions never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _simplex_core as core
from .grid import GridShape, ProblemInstance, max_pair_cost, pair_costs
from .sparsity import Neighborhood, Potentials, TransportPlan


class InfeasibleRestriction(RuntimeError):
    """Positive artificial flow at a restricted optimum.

    Cannot happen when the instance is balanced and the neighborhood
    contains the support of some coupling; it signals a caller bug.
    """


@dataclass
class PivotStats:
    """Work done by one run_pivots call."""

    pivots: int
    arcs_scanned: int
    optimal: bool


@dataclass
class ReplaceStats:
    """Arc-set delta of one replace_arcs call."""

    added: int
    removed: int


@dataclass
class SolveStats:
    """Cumulative counters over a whole solve."""

    pivots: int = 0
    arcs_scanned: int = 0
    arc_replacements: int = 0
    outer_iterations: int = 0

    def add_pivot_run(self, run: PivotStats) -> None:
        self.pivots += run.pivots
        self.arcs_scanned += run.arcs_scanned


class NetworkSimplex:
    """Simplex state over a transport instance restricted to a neighborhood.

    The constructor builds the standard artificial basis: every real node
    hangs off the root via an artificial arc of cost M carrying |supply|,
    oriented away from the root only for strictly negative supplies (a
    strongly feasible tree). All neighborhood arcs start non-basic at
    flow zero.
    """

    def __init__(self, inst: ProblemInstance, n0: Neighborhood):
        if n0.source_shape != inst.mu.shape or n0.target_shape != inst.nu.shape:
            raise ValueError("neighborhood shapes do not match the instance")
        self.inst = inst
        self._src_shape: GridShape = inst.mu.shape
        self._tgt_shape: GridShape = inst.nu.shape
        self.n_sources = inst.mu.shape.size
        self.n_targets = inst.nu.shape.size
        self.root = self.n_sources + self.n_targets
        self.n_nodes = self.root + 1

        maxc = max_pair_cost(self._src_shape, self._tgt_shape)
        self.big_m = (1 + maxc) * self.n_nodes
        # potentials stay within renorm bound + M + n*maxc; reduced costs
        # add one more cost term; require comfortable int64 headroom
        if 2**56 + 2 * (self.big_m + self.n_nodes * maxc) + maxc >= 2**62:
            raise OverflowError("instance too large for 64-bit arithmetic budget")

        self.supply = np.concatenate(
            [inst.mu.masses, -inst.nu.masses.astype(np.int64), np.zeros(1, np.int64)]
        )

        src, tgt = n0.pair_arrays()
        m_real = src.size
        m = m_real + self.root
        self.tail = np.empty(m, dtype=np.int32)
        self.head = np.empty(m, dtype=np.int32)
        self.cost = np.empty(m, dtype=np.int64)
        self.flow = np.zeros(m, dtype=np.int64)
        self.state = np.full(m, core.ARC_LOWER, dtype=np.int8)

        self.tail[:m_real] = src
        self.head[:m_real] = tgt + self.n_sources
        pair_costs(self._src_shape, self._tgt_shape, src, tgt, out=self.cost[:m_real])

        nodes = np.arange(self.root, dtype=np.int32)
        nonneg = self.supply[: self.root] >= 0
        self.tail[m_real:] = np.where(nonneg, nodes, self.root)
        self.head[m_real:] = np.where(nonneg, self.root, nodes)
        self.cost[m_real:] = self.big_m
        self.flow[m_real:] = np.abs(self.supply[: self.root])
        self.state[m_real:] = core.ARC_BASIC
        self._art_ids = np.arange(m_real, m, dtype=np.int64)

        n = self.n_nodes
        self.pi = np.empty(n, dtype=np.int64)
        self.pi[: self.root] = np.where(nonneg, self.big_m, -self.big_m)
        self.pi[self.root] = 0
        self.parent = np.full(n, self.root, dtype=np.int32)
        self.parent[self.root] = -1
        self.pred = np.empty(n, dtype=np.int32)
        self.pred[: self.root] = np.arange(m_real, m, dtype=np.int32)
        self.pred[self.root] = -1
        self.thread = np.empty(n, dtype=np.int32)
        self.thread[self.root] = 0
        self.thread[: self.root - 1] = np.arange(1, self.root, dtype=np.int32)
        self.thread[self.root - 1] = self.root
        self.rev_thread = np.empty(n, dtype=np.int32)
        self.rev_thread[self.thread] = np.arange(n, dtype=np.int32)
        self.size = np.ones(n, dtype=np.int32)
        self.size[self.root] = n
        self.last = np.arange(n, dtype=np.int32)
        self.last[self.root] = self.root - 1

        self.scan = np.zeros(1, dtype=np.int64)
        self.counters = np.zeros(2, dtype=np.int64)

    # -- solving ----------------------------------------------------------

    def run_pivots(self, max_pivots: int | None = None) -> PivotStats:
        """Pivot to optimality over the current arc set.

        With `max_pivots` set, stops early after that many pivots (useful
        for inspecting invariants mid-solve); the basis is then a valid
        intermediate state, not necessarily optimal.
        """
        before = self.counters.copy()
        status = core.run_pivots(
            self.tail,
            self.head,
            self.cost,
            self.flow,
            self.state,
            self.pi,
            self.parent,
            self.pred,
            self.thread,
            self.rev_thread,
            self.size,
            self.last,
            self.n_nodes,
            self.root,
            self.scan,
            self.counters,
            -1 if max_pivots is None else int(max_pivots),
        )
        if status == core.RUN_UNBOUNDED:
            raise RuntimeError("unbounded pivot cycle; simplex invariant broken")
        optimal = status == core.RUN_OPTIMAL
        if optimal and int(self.flow[self._art_ids].sum()) != 0:
            raise InfeasibleRestriction(
                "restricted problem admits no coupling (artificial flow remains)"
            )
        return PivotStats(
            pivots=int(self.counters[0] - before[0]),
            arcs_scanned=int(self.counters[1] - before[1]),
            optimal=optimal,
        )

    def replace_arcs(self, new: Neighborhood) -> ReplaceStats:
        """Swap the arc set for {current basic arcs} + {arcs of `new`}.

        Basic arcs are retained even when absent from `new` (they carry
        the tree and possibly flow); all dropped arcs are non-basic with
        zero flow. Flows, tree structure, and potentials are untouched;
        pricing restarts from arc 0 with a recomputed block size.
        """
        if new.source_shape != self._src_shape or new.target_shape != self._tgt_shape:
            raise ValueError("neighborhood shapes do not match the instance")
        nx, ny, root = self.n_sources, self.n_targets, self.root

        new_src, new_tgt = new.pair_arrays()
        m_new_real = new_src.size
        new_keys = new_src * ny + new_tgt

        basic_old = self.pred[:root].astype(np.int64)
        tails_b = self.tail[basic_old].astype(np.int64)
        heads_b = self.head[basic_old].astype(np.int64)
        real_b = (tails_b != root) & (heads_b != root)
        keys_b = tails_b[real_b] * ny + (heads_b[real_b] - nx)

        sorter = np.argsort(new_keys, kind="stable")
        sorted_keys = new_keys[sorter]
        found_full = np.zeros(root, dtype=bool)
        new_id_of_basic = np.empty(0, dtype=np.int64)
        if m_new_real and keys_b.size:
            pos = np.searchsorted(sorted_keys, keys_b)
            pos_c = np.minimum(pos, m_new_real - 1)
            found = sorted_keys[pos_c] == keys_b
            idx_real = np.nonzero(real_b)[0]
            found_full[idx_real[found]] = True
            new_id_of_basic = sorter[pos_c[found]]

        leftover_mask = ~found_full
        leftover_old = basic_old[leftover_mask]
        m_new = m_new_real + leftover_old.size

        # count arcs present on both sides: all basics, plus non-basic old
        # real arcs whose pair is in the new neighborhood
        nb_mask = self.state == core.ARC_LOWER
        nb_real = nb_mask & (self.tail != root) & (self.head != root)
        nb_keys = self.tail[nb_real].astype(np.int64) * ny + (
            self.head[nb_real].astype(np.int64) - nx
        )
        if m_new_real and nb_keys.size:
            pos = np.searchsorted(sorted_keys, nb_keys)
            pos_c = np.minimum(pos, m_new_real - 1)
            nb_kept = int((sorted_keys[pos_c] == nb_keys).sum())
        else:
            nb_kept = 0
        kept = root + nb_kept
        stats = ReplaceStats(added=m_new - kept, removed=self.tail.size - kept)

        newid = np.empty(root, dtype=np.int64)
        newid[found_full] = new_id_of_basic
        newid[leftover_mask] = m_new_real + np.arange(leftover_old.size, dtype=np.int64)

        tail = np.empty(m_new, dtype=np.int32)
        head = np.empty(m_new, dtype=np.int32)
        cost = np.empty(m_new, dtype=np.int64)
        tail[:m_new_real] = new_src
        head[:m_new_real] = new_tgt + nx
        pair_costs(
            self._src_shape, self._tgt_shape, new_src, new_tgt, out=cost[:m_new_real]
        )
        tail[m_new_real:] = self.tail[leftover_old]
        head[m_new_real:] = self.head[leftover_old]
        cost[m_new_real:] = self.cost[leftover_old]

        flow = np.zeros(m_new, dtype=np.int64)
        state = np.full(m_new, core.ARC_LOWER, dtype=np.int8)
        flow[newid] = self.flow[basic_old]
        state[newid] = core.ARC_BASIC

        self.tail, self.head, self.cost = tail, head, cost
        self.flow, self.state = flow, state
        self.pred[:root] = newid
        art = (tail == root) | (head == root)
        self._art_ids = np.nonzero(art)[0]
        self.scan[0] = 0
        return stats

    # -- observers --------------------------------------------------------

    def current_plan(self) -> TransportPlan:
        """Arcs with positive flow, real arcs only, as a transport plan."""
        mask = (self.flow > 0) & (self.tail != self.root) & (self.head != self.root)
        return TransportPlan(
            self._src_shape,
            self._tgt_shape,
            self.tail[mask].astype(np.int64),
            self.head[mask].astype(np.int64) - self.n_sources,
            self.flow[mask],
        )

    def current_potentials(self) -> Potentials:
        return Potentials(
            self.pi[: self.n_sources].copy(),
            -self.pi[self.n_sources : self.root],
        )

    def objective(self) -> int:
        """Exact cost of the current flow, artificial arcs included."""
        ids = np.nonzero(self.flow > 0)[0]
        return sum(int(self.cost[i]) * int(self.flow[i]) for i in ids)

    def artificial_flow(self) -> int:
        return int(self.flow[self._art_ids].sum())

    def assert_optimal_basis(self) -> bool:
        """Reduced cost >= 0 on every arc, == 0 on every basic arc."""
        chunk = 1 << 22
        m = self.tail.size
        for a in range(0, m, chunk):
            b = min(a + chunk, m)
            rc = (
                self.cost[a:b]
                - self.pi[self.tail[a:b]]
                + self.pi[self.head[a:b]]
            )
            if int(rc.min(initial=0)) < 0:
                return False
            basic = self.state[a:b] == core.ARC_BASIC
            if basic.any() and np.any(rc[basic] != 0):
                return False
        return True

    # -- debugging --------------------------------------------------------

    def check_invariants(self) -> None:
        """Raise AssertionError when any basis invariant is violated.

        Intended for tests on desk-scale instances; checks conservation,
        the zero-flow property of non-basic arcs, zero reduced cost on
        basic arcs, and tree-array consistency.
        """
        assert (self.flow >= 0).all(), "negative flow"
        excess = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(excess, self.tail, self.flow)
        np.add.at(excess, self.head, -self.flow)
        assert (excess == self.supply).all(), "flow conservation violated"
        nb = self.state == core.ARC_LOWER
        assert (self.flow[nb] == 0).all(), "non-basic arc carries flow"
        basic = np.nonzero(self.state == core.ARC_BASIC)[0]
        rc = self.cost[basic] - self.pi[self.tail[basic]] + self.pi[self.head[basic]]
        assert (rc == 0).all(), "basic arc with nonzero reduced cost"
        assert basic.size == self.n_nodes - 1, "basis is not a spanning tree"
        assert sorted(int(p) for p in self.pred[: self.root]) == sorted(
            int(b) for b in basic
        ), "pred arcs disagree with basic arcs"
        for v in range(self.root):
            a = int(self.pred[v])
            ends = {int(self.tail[a]), int(self.head[a])}
            assert ends == {v, int(self.parent[v])}, "pred arc endpoints wrong"
        # thread must be one cycle through all nodes
        seen = np.zeros(self.n_nodes, dtype=bool)
        v = self.root
        for _ in range(self.n_nodes):
            assert not seen[v], "thread revisits a node"
            seen[v] = True
            assert int(self.rev_thread[self.thread[v]]) == v, "rev_thread broken"
            v = int(self.thread[v])
        assert v == self.root and seen.all(), "thread does not cover the tree"
        assert int(self.size[self.root]) == self.n_nodes, "root size wrong"
