"""Primal network simplex for the balanced transportation problem.

The basis is a spanning tree of the complete bipartite graph (sources
``0..m-1``, sinks ``m..m+n-1``) stored as ``m + n - 1`` arc slots.  The
tree structure and dual potentials are rebuilt from scratch after every
pivot, which costs O(m + n) and is dwarfed by full O(m n) pricing.

Pricing is Dantzig (most negative reduced cost, lowest ``(i, j)`` on ties)
and the leaving arc is the blocking arc with the smallest ``(cost, i, j)``.
After a long run of degenerate pivots the kernel switches to Bland's rule
(first improving arc in row-major order, lowest-index blocking arc) until a
pivot moves flow again.
"""

import numpy as np
from numba import njit

STATUS_OPTIMAL = 0
STATUS_MAX_ITER = 1


@njit(cache=True)
def _northwest_corner(a, b, bi, bj, flow):
    m, n = a.shape[0], b.shape[0]
    ra = a.copy()
    rb = b.copy()
    i = 0
    j = 0
    for k in range(m + n - 1):
        bi[k] = i
        bj[k] = j
        if ra[i] <= rb[j]:
            q = ra[i]
            rb[j] -= q
            ra[i] = 0.0
            down = True
        else:
            q = rb[j]
            ra[i] -= q
            rb[j] = 0.0
            down = False
        flow[k] = q
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif down:
            i += 1
        else:
            j += 1


@njit(cache=True)
def _build_tree(C, m, n, bi, bj, parent, parent_slot, depth, u, v, order, deg, offs, adj_node, adj_slot):
    nn = m + n
    nb = nn - 1
    deg[:] = 0
    for k in range(nb):
        deg[bi[k]] += 1
        deg[m + bj[k]] += 1
    offs[0] = 0
    for x in range(nn):
        offs[x + 1] = offs[x] + deg[x]
    deg[:] = 0
    for k in range(nb):
        s = bi[k]
        t = m + bj[k]
        adj_node[offs[s] + deg[s]] = t
        adj_slot[offs[s] + deg[s]] = k
        deg[s] += 1
        adj_node[offs[t] + deg[t]] = s
        adj_slot[offs[t] + deg[t]] = k
        deg[t] += 1
    parent[:] = -2
    parent[0] = -1
    parent_slot[0] = -1
    depth[0] = 0
    u[0] = 0.0
    order[0] = 0
    head = 0
    tail = 1
    while head < tail:
        x = order[head]
        head += 1
        for e in range(offs[x], offs[x + 1]):
            y = adj_node[e]
            if parent[y] != -2:
                continue
            k = adj_slot[e]
            parent[y] = x
            parent_slot[y] = k
            depth[y] = depth[x] + 1
            if y >= m:
                v[y - m] = C[bi[k], bj[k]] - u[x]
            else:
                u[y] = C[bi[k], bj[k]] - v[x - m]
            order[tail] = y
            tail += 1
    return tail


@njit(cache=True)
def network_simplex(C, a, b, eps, max_iter):
    """Solve ``min <C, P>`` subject to ``P 1 = a``, ``P^T 1 = b``, ``P >= 0``.

    Returns ``(bi, bj, flow, u, v, iterations, status)`` where the basis
    arcs are ``(bi[k], bj[k])`` with flow ``flow[k]`` and ``u, v`` are the
    basis duals (``u[0] = 0``).
    """
    m, n = C.shape
    nn = m + n
    nb = nn - 1
    bi = np.empty(nb, np.int64)
    bj = np.empty(nb, np.int64)
    flow = np.empty(nb)
    _northwest_corner(a, b, bi, bj, flow)

    parent = np.empty(nn, np.int64)
    parent_slot = np.empty(nn, np.int64)
    depth = np.empty(nn, np.int64)
    order = np.empty(nn, np.int64)
    deg = np.empty(nn, np.int64)
    offs = np.empty(nn + 1, np.int64)
    adj_node = np.empty(2 * nb, np.int64)
    adj_slot = np.empty(2 * nb, np.int64)
    u = np.zeros(m)
    v = np.zeros(n)
    path = np.empty(nn, np.int64)
    up_p = np.empty(nn, np.int64)

    status = STATUS_MAX_ITER
    degenerate_run = 0
    bland = False
    it = 0
    while it < max_iter:
        _build_tree(C, m, n, bi, bj, parent, parent_slot, depth, u, v, order, deg, offs, adj_node, adj_slot)

        # pricing
        p = -1
        q = -1
        best = -eps
        for i in range(m):
            ui = u[i]
            for j in range(n):
                r = C[i, j] - ui - v[j]
                if r < best:
                    best = r
                    p = i
                    q = j
                    if bland:
                        break
            if bland and p >= 0:
                break
        if p < 0:
            status = STATUS_OPTIMAL
            break

        # cycle: entering arc (p, q), then tree path from sink q back to source p
        x = m + q
        y = p
        n_up = 0
        n_down = 0
        while depth[x] > depth[y]:
            path[n_up] = parent_slot[x]
            n_up += 1
            x = parent[x]
        while depth[y] > depth[x]:
            up_p[n_down] = parent_slot[y]
            n_down += 1
            y = parent[y]
        while x != y:
            path[n_up] = parent_slot[x]
            n_up += 1
            x = parent[x]
            up_p[n_down] = parent_slot[y]
            n_down += 1
            y = parent[y]
        for t in range(n_down - 1, -1, -1):
            path[n_up] = up_p[t]
            n_up += 1

        # leaving arc: blocking arc among the even positions (flow decreases)
        leave = -1
        theta = 0.0
        for t in range(0, n_up, 2):
            k = path[t]
            f = flow[k]
            if leave < 0 or f < theta:
                leave = k
                theta = f
            elif f == theta:
                kb = leave
                if bland:
                    if bi[k] * n + bj[k] < bi[kb] * n + bj[kb]:
                        leave = k
                else:
                    ck = C[bi[k], bj[k]]
                    cb = C[bi[kb], bj[kb]]
                    if ck < cb or (ck == cb and (bi[k] < bi[kb] or (bi[k] == bi[kb] and bj[k] < bj[kb]))):
                        leave = k

        if theta > 0.0:
            for t in range(n_up):
                k = path[t]
                if t % 2 == 0:
                    flow[k] -= theta
                else:
                    flow[k] += theta
            degenerate_run = 0
            bland = False
        else:
            degenerate_run += 1
            if degenerate_run > nn:
                bland = True
        bi[leave] = p
        bj[leave] = q
        flow[leave] = theta
        it += 1

    if status == STATUS_MAX_ITER:
        _build_tree(C, m, n, bi, bj, parent, parent_slot, depth, u, v, order, deg, offs, adj_node, adj_slot)
    return bi, bj, flow, u, v, it, status
