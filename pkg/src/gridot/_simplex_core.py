"""JIT-compiled inner loops of the network simplex.

All state lives in flat numpy arrays owned by the Python-side wrapper;
the kernels mutate them in place. Node arrays: potential, parent,
predecessor arc, preorder thread, reverse thread, subtree size, last
subtree node. Arc arrays: tail, head, cost, flow, state.

The tree-surgery routines follow the classic parent/thread/size update
scheme; potentials are rewritten only on the smaller side of the cut,
which may shift all potentials by a common constant (reduced costs are
unaffected; a renormalization guard keeps magnitudes inside int64).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ARC_BASIC = 0
ARC_LOWER = 1

_INF = 2**62
_PI_RENORM = 2**56

# run-loop return codes
RUN_OPTIMAL = 0
RUN_PIVOT_LIMIT = 1
RUN_UNBOUNDED = 2


@njit(cache=True)
def _find_join(parent, size, p, q):
    size_p = size[p]
    size_q = size[q]
    while True:
        while size_p < size_q:
            p = parent[p]
            size_p = size[p]
        while size_p > size_q:
            q = parent[q]
            size_q = size[q]
        if size_p == size_q:
            if p != q:
                p = parent[p]
                size_p = size[p]
                q = parent[q]
                size_q = size[q]
            else:
                return p


@njit(cache=True)
def _remove_edge(parent, pred, thread, rev_thread, size, last, s, t):
    # detach the subtree rooted at t from its parent s
    size_t = size[t]
    prev_t = rev_thread[t]
    last_t = last[t]
    next_last_t = thread[last_t]
    parent[t] = -1
    pred[t] = -1
    thread[prev_t] = next_last_t
    rev_thread[next_last_t] = prev_t
    thread[last_t] = t
    rev_thread[t] = last_t
    w = s
    while w != -1:
        size[w] -= size_t
        if last[w] == last_t:
            last[w] = prev_t
        w = parent[w]


@njit(cache=True)
def _make_root(parent, pred, thread, rev_thread, size, last, anc, q):
    # re-root the detached subtree containing q at q
    k = 0
    v = q
    while v != -1:
        anc[k] = v
        k += 1
        v = parent[v]
    for i in range(k - 1, 0, -1):
        p = anc[i]
        c = anc[i - 1]
        size_p = size[p]
        last_p = last[p]
        prev_c = rev_thread[c]
        last_c = last[c]
        next_last_c = thread[last_c]
        parent[p] = c
        parent[c] = -1
        pred[p] = pred[c]
        pred[c] = -1
        size[p] = size_p - size[c]
        size[c] = size_p
        thread[prev_c] = next_last_c
        rev_thread[next_last_c] = prev_c
        thread[last_c] = c
        rev_thread[c] = last_c
        if last_p == last_c:
            last[p] = prev_c
            last_p = prev_c
        rev_thread[p] = last_c
        thread[last_c] = p
        thread[last_p] = c
        rev_thread[c] = last_p
        last[c] = last_p


@njit(cache=True)
def _add_edge(parent, pred, thread, rev_thread, size, last, arc, p, q):
    # attach the subtree rooted at q (a detached root) below p via arc
    last_p = last[p]
    next_last_p = thread[last_p]
    size_q = size[q]
    last_q = last[q]
    parent[q] = p
    pred[q] = arc
    thread[last_p] = q
    rev_thread[q] = last_p
    rev_thread[next_last_p] = last_q
    thread[last_q] = next_last_p
    w = p
    while w != -1:
        size[w] += size_q
        if last[w] == last_p:
            last[w] = last_q
        w = parent[w]


@njit(cache=True)
def _pivot(
    tail,
    head,
    cost,
    flow,
    state,
    pi,
    parent,
    pred,
    thread,
    rev_thread,
    size,
    last,
    anc,
    n_nodes,
    root,
    e,
):
    p = tail[e]
    q = head[e]
    w = _find_join(parent, size, p, q)

    # Minimum-ratio leaving arc over the basis cycle. Ties: keep the first
    # candidate on the tail-side walk (strict <), then let the head-side walk
    # override non-strictly (<=). This is the strongly feasible (Cunningham)
    # choice: the last blocking arc in cycle orientation starting at the join.
    delta = _INF
    u_out = -1
    side = 0
    u = p
    while u != w:
        a = pred[u]
        if tail[a] == u:
            d = flow[a]
            if d < delta:
                delta = d
                u_out = u
                side = 1
        u = parent[u]
    u = q
    while u != w:
        a = pred[u]
        if head[a] == u:
            d = flow[a]
            if d <= delta:
                delta = d
                u_out = u
                side = 2
        u = parent[u]
    if u_out == -1:
        return RUN_UNBOUNDED

    if delta > 0:
        flow[e] += delta
        u = p
        while u != w:
            a = pred[u]
            if tail[a] == u:
                flow[a] -= delta
            else:
                flow[a] += delta
            u = parent[u]
        u = q
        while u != w:
            a = pred[u]
            if head[a] == u:
                flow[a] -= delta
            else:
                flow[a] += delta
            u = parent[u]

    leave = pred[u_out]
    s_par = parent[u_out]
    _remove_edge(parent, pred, thread, rev_thread, size, last, s_par, u_out)
    state[leave] = ARC_LOWER
    state[e] = ARC_BASIC
    if side == 1:
        # detached subtree contains the entering tail
        dpi = cost[e] + pi[q] - pi[p]
        _make_root(parent, pred, thread, rev_thread, size, last, anc, p)
        _add_edge(parent, pred, thread, rev_thread, size, last, e, q, p)
        sub = p
    else:
        dpi = pi[p] - cost[e] - pi[q]
        _make_root(parent, pred, thread, rev_thread, size, last, anc, q)
        _add_edge(parent, pred, thread, rev_thread, size, last, e, p, q)
        sub = q

    if 2 * size[sub] <= n_nodes:
        v = sub
        for _i in range(size[sub]):
            pi[v] += dpi
            v = thread[v]
    else:
        # equivalent up to a global shift: subtract from the complement
        rem = n_nodes - size[sub]
        v = root
        cnt = 0
        while cnt < rem:
            if v == sub:
                v = thread[last[sub]]
                continue
            pi[v] -= dpi
            cnt += 1
            v = thread[v]

    if pi[root] > _PI_RENORM or pi[root] < -_PI_RENORM:
        off = pi[root]
        for v2 in range(n_nodes):
            pi[v2] -= off
    return 0


@njit(cache=True)
def run_pivots(
    tail,
    head,
    cost,
    flow,
    state,
    pi,
    parent,
    pred,
    thread,
    rev_thread,
    size,
    last,
    n_nodes,
    root,
    scan,
    counters,
    max_pivots,
):
    """Pivot until no admissible arc prices out negative.

    Pricing is block search: blocks of ceil(sqrt(m)) consecutive arcs,
    cyclic, resuming where the previous scan stopped (scan[0]); within a
    block the most negative reduced cost wins, first index on ties.
    counters[0] accumulates pivots, counters[1] arcs scanned.
    """
    m = tail.shape[0]
    if m == 0:
        return RUN_OPTIMAL
    anc = np.empty(n_nodes, dtype=np.int32)
    block = int(math.ceil(math.sqrt(m)))
    nblocks = (m + block - 1) // block
    pivots = 0
    while True:
        if max_pivots >= 0 and pivots >= max_pivots:
            return RUN_PIVOT_LIMIT
        pos = scan[0]
        if pos >= m:
            pos = 0
        e = -1
        b = 0
        while b < nblocks:
            best = 0
            cnt = 0
            i = pos
            while cnt < block:
                if state[i] == ARC_LOWER:
                    rc = cost[i] - pi[tail[i]] + pi[head[i]]
                    if rc < best:
                        best = rc
                        e = i
                cnt += 1
                i += 1
                if i == m:
                    i = 0
            counters[1] += block
            pos = i
            if e >= 0:
                break
            b += 1
        scan[0] = pos
        if e < 0:
            return RUN_OPTIMAL
        status = _pivot(
            tail,
            head,
            cost,
            flow,
            state,
            pi,
            parent,
            pred,
            thread,
            rev_thread,
            size,
            last,
            anc,
            n_nodes,
            root,
            e,
        )
        if status != 0:
            return status
        pivots += 1
        counters[0] += 1
