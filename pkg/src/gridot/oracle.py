"""Independent exact solver used as ground truth in tests.

Successive shortest paths with node potentials over the dense bipartite
graph: repeatedly send the maximum feasible amount along a minimum
reduced-cost path from a node with remaining supply to one with remaining
demand. Shares no code path with the network simplex, so agreement
between the two certifies both.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .grid import ProblemInstance
from .sparsity import TransportPlan

_INF = 2**62

MAX_DENSE_PAIRS = 10**6


@njit(cache=True)
def _ssp(C, rem_mu, rem_nu, flow, phi_s, phi_t):
    nx, ny = C.shape
    ds = np.empty(nx, np.int64)
    dt = np.empty(ny, np.int64)
    done_s = np.empty(nx, np.bool_)
    done_t = np.empty(ny, np.bool_)
    par_t = np.empty(ny, np.int64)
    par_s = np.empty(nx, np.int64)
    cap = nx + ny + 2
    fx = np.empty(cap, np.int64)
    fy = np.empty(cap, np.int64)
    bx = np.empty(cap, np.int64)
    by = np.empty(cap, np.int64)

    deficit = 0
    for y in range(ny):
        deficit += rem_nu[y]

    while deficit > 0:
        for x in range(nx):
            ds[x] = 0 if rem_mu[x] > 0 else _INF
            done_s[x] = False
            par_s[x] = -1
        for y in range(ny):
            dt[y] = _INF
            done_t[y] = False
            par_t[y] = -1

        best_t = -1
        while True:
            mv = _INF
            mi = -1
            msrc = True
            for x in range(nx):
                if not done_s[x] and ds[x] < mv:
                    mv = ds[x]
                    mi = x
                    msrc = True
            for y in range(ny):
                if not done_t[y] and dt[y] < mv:
                    mv = dt[y]
                    mi = y
                    msrc = False
            if mi < 0:
                break
            if msrc:
                x = mi
                done_s[x] = True
                base = ds[x] + phi_s[x]
                for y in range(ny):
                    if not done_t[y]:
                        nd = base + C[x, y] - phi_t[y]
                        if nd < dt[y]:
                            dt[y] = nd
                            par_t[y] = x
            else:
                y = mi
                if rem_nu[y] > 0:
                    best_t = y
                    break
                done_t[y] = True
                base = dt[y] + phi_t[y]
                for x in range(nx):
                    if (not done_s[x]) and flow[x, y] > 0:
                        nd = base - C[x, y] - phi_s[x]
                        if nd < ds[x]:
                            ds[x] = nd
                            par_s[x] = y
        if best_t < 0:
            return 1  # some demand is unreachable: unbalanced input

        # walk parents back to an origin source, collecting forward gains
        # (fx, fy) and backward reductions (bx, by)
        k = 0
        y = best_t
        delta = rem_nu[best_t]
        origin = -1
        while True:
            x = par_t[y]
            fx[k] = x
            fy[k] = y
            k += 1
            yb = par_s[x]
            if yb < 0:
                origin = x
                break
            bx[k - 1] = x
            by[k - 1] = yb
            if flow[x, yb] < delta:
                delta = flow[x, yb]
            y = yb
        if rem_mu[origin] < delta:
            delta = rem_mu[origin]

        for j in range(k):
            flow[fx[j], fy[j]] += delta
        for j in range(k - 1):
            flow[bx[j], by[j]] -= delta
        rem_mu[origin] -= delta
        rem_nu[best_t] -= delta
        deficit -= delta

        dd = dt[best_t]
        for x in range(nx):
            phi_s[x] += ds[x] if ds[x] < dd else dd
        for y in range(ny):
            phi_t[y] += dt[y] if dt[y] < dd else dd
    return 0


def oracle_solve(inst: ProblemInstance) -> tuple[int, TransportPlan]:
    """Exact optimal cost and an optimal plan over the full pair product.

    Only intended for small instances (the dense pair count is capped);
    cost is recomputed from the flow matrix in Python integers.
    """
    nx = inst.mu.shape.size
    ny = inst.nu.shape.size
    if nx * ny > MAX_DENSE_PAIRS:
        raise ValueError(f"oracle budget exceeded: {nx}*{ny} > {MAX_DENSE_PAIRS}")

    cs = inst.mu.shape.coords()
    ct = inst.nu.shape.coords()
    diff = cs[:, None, :] - ct[None, :, :]
    C = np.ascontiguousarray((diff * diff).sum(axis=2))

    flow = np.zeros((nx, ny), dtype=np.int64)
    status = _ssp(
        C,
        inst.mu.masses.copy(),
        inst.nu.masses.copy(),
        flow,
        np.zeros(nx, np.int64),
        np.zeros(ny, np.int64),
    )
    if status != 0:
        raise RuntimeError("oracle found the instance infeasible; it is not balanced")

    xs, ys = np.nonzero(flow)
    cost = sum(int(C[x, y]) * int(flow[x, y]) for x, y in zip(xs, ys))
    plan = TransportPlan(
        inst.mu.shape,
        inst.nu.shape,
        xs.astype(np.int64),
        ys.astype(np.int64),
        flow[xs, ys],
    )
    return cost, plan
