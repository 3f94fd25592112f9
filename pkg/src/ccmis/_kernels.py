"""Compiled inner loops.

Everything here works on plain CSR arrays (``indptr`` int64, ``indices`` int32)
so the public classes stay thin.  Randomness inside the algorithms comes from a
counter-based hash so that a draw depends only on (key, item) and never on the
traversal order.
"""

import numpy as np
from numba import njit

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_PAIR = np.uint64(0xD6E8FEB86659FD93)
_LO32 = np.uint64(0xFFFFFFFF)


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def draw1(key, x):
    return mix64(key + np.uint64(x) * _GOLDEN)


@njit(cache=True, inline="always")
def draw2(key, x, y):
    inner = mix64((key ^ _PAIR) + np.uint64(x) * _GOLDEN)
    return mix64(inner + np.uint64(y) * _GOLDEN)


@njit(cache=True, inline="always")
def mulhi(a, b):
    # high 64 bits of a*b, used to map a uniform draw onto [0, b)
    a_lo = a & _LO32
    a_hi = a >> np.uint64(32)
    b_lo = b & _LO32
    b_hi = b >> np.uint64(32)
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> np.uint64(32)) + (hi_lo & _LO32) + lo_hi
    return hi_hi + (hi_lo >> np.uint64(32)) + (cross >> np.uint64(32))


@njit(cache=True)
def draw1_array(key, xs):
    out = np.empty(xs.shape[0], dtype=np.uint64)
    for i in range(xs.shape[0]):
        out[i] = draw1(key, xs[i])
    return out


@njit(cache=True)
def draw2_array(key, xs, ys):
    out = np.empty(xs.shape[0], dtype=np.uint64)
    for i in range(xs.shape[0]):
        out[i] = draw2(key, xs[i], ys[i])
    return out


@njit(cache=True)
def sample_uniform(key, labels, tm1):
    out = np.empty(labels.shape[0], dtype=np.bool_)
    for i in range(labels.shape[0]):
        out[i] = draw1(key, labels[i]) <= tm1
    return out


@njit(cache=True)
def sample_per_vertex(key, labels, tm1s):
    out = np.empty(labels.shape[0], dtype=np.bool_)
    for i in range(labels.shape[0]):
        out[i] = draw1(key, labels[i]) <= tm1s[i]
    return out


@njit(cache=True)
def assign_parts(key, labels, parts):
    out = np.empty(labels.shape[0], dtype=np.int64)
    p = np.uint64(parts)
    for i in range(labels.shape[0]):
        out[i] = np.int64(mulhi(draw1(key, labels[i]), p))
    return out


# --------------------------------------------------------------------------
# construction


@njit(cache=True)
def gnp_upper(n, p, seed, cap):
    """Geometric skipping over the C(n,2) pairs in row-major order.

    Returns per-row counts and the column array of the upper triangle.  The
    last return value is False when ``cap`` was too small.
    """
    counts = np.zeros(n, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int32)
    total = np.int64(n) * np.int64(n - 1) // 2
    if total == 0 or p <= 0.0:
        return counts, cols[:0], True
    dense = p >= 1.0
    inv = 0.0 if dense else 1.0 / np.log1p(-p)
    state = mix64(np.uint64(seed))
    scale = 1.0 / 9007199254740992.0
    m = 0
    u = 0
    row_start = np.int64(0)
    row_end = np.int64(n - 1)
    pos = np.int64(-1)
    while True:
        if dense:
            gap = np.int64(1)
        else:
            state += _GOLDEN
            r = (np.float64(mix64(state) >> np.uint64(11)) + 1.0) * scale
            g = np.floor(np.log(r) * inv) + 1.0
            if g > total + 1.0:
                break
            gap = np.int64(g)
        pos += gap
        if pos >= total:
            break
        while pos >= row_end:
            u += 1
            row_start = row_end
            row_end += n - 1 - u
        if m >= cap:
            return counts, cols, False
        cols[m] = u + 1 + (pos - row_start)
        counts[u] += 1
        m += 1
    return counts, cols[:m], True


@njit(cache=True)
def symmetrize(n, upper_counts, cols):
    """Full sorted CSR from an upper-triangle listing sorted by row then column."""
    lower = np.zeros(n, dtype=np.int64)
    for i in range(cols.shape[0]):
        lower[cols[i]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + lower[v] + upper_counts[v]
    indices = np.empty(indptr[n], dtype=np.int32)
    fill = np.zeros(n, dtype=np.int64)
    k = 0
    for u in range(n):
        base_up = indptr[u] + lower[u]
        for j in range(upper_counts[u]):
            v = cols[k]
            k += 1
            indices[base_up + j] = v
            indices[indptr[v] + fill[v]] = u
            fill[v] += 1
    return indptr, indices


@njit(cache=True)
def induced(indptr, indices, keep):
    n = keep.shape[0]
    remap = np.full(n, -1, dtype=np.int64)
    k = 0
    for v in range(n):
        if keep[v]:
            remap[v] = k
            k += 1
    new_ptr = np.zeros(k + 1, dtype=np.int64)
    for v in range(n):
        if keep[v]:
            c = 0
            for e in range(indptr[v], indptr[v + 1]):
                if keep[indices[e]]:
                    c += 1
            new_ptr[remap[v] + 1] = c
    for i in range(k):
        new_ptr[i + 1] += new_ptr[i]
    new_idx = np.empty(new_ptr[k], dtype=np.int32)
    for v in range(n):
        if keep[v]:
            w = new_ptr[remap[v]]
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if keep[u]:
                    new_idx[w] = remap[u]
                    w += 1
    return new_ptr, new_idx


@njit(cache=True)
def edge_list(indptr, indices):
    n = indptr.shape[0] - 1
    m = indices.shape[0] // 2
    out = np.empty((m, 2), dtype=np.int64)
    k = 0
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v > u:
                out[k, 0] = u
                out[k, 1] = v
                k += 1
    return out


@njit(cache=True)
def edge_ids(indptr, indices):
    """Undirected edge id for every CSR slot, ids follow lexicographic order."""
    n = indptr.shape[0] - 1
    eid = np.empty(indices.shape[0], dtype=np.int64)
    k = 0
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            if indices[e] > u:
                eid[e] = k
                k += 1
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v < u:
                # find slot of u in row v by binary search
                lo = indptr[v]
                hi = indptr[v + 1]
                while lo < hi:
                    mid = (lo + hi) // 2
                    if indices[mid] < u:
                        lo = mid + 1
                    else:
                        hi = mid
                eid[e] = eid[lo]
    return eid


# --------------------------------------------------------------------------
# greedy solvers


@njit(cache=True)
def greedy_mis(indptr, indices, order):
    """LFMIS over the vertices listed in ``order``.

    Returns (in_set, covered).  ``covered`` marks the closed neighbourhood of
    the set in the whole graph, which is exactly what the residual removes.
    """
    n = indptr.shape[0] - 1
    in_set = np.zeros(n, dtype=np.bool_)
    covered = np.zeros(n, dtype=np.bool_)
    for i in range(order.shape[0]):
        v = order[i]
        if covered[v]:
            continue
        in_set[v] = True
        covered[v] = True
        for e in range(indptr[v], indptr[v + 1]):
            covered[indices[e]] = True
    return in_set, covered


@njit(cache=True)
def greedy_mm_filtered(indptr, indices, allowed):
    """LFMM over edges (u<v, lexicographic) whose CSR slot is allowed."""
    n = indptr.shape[0] - 1
    mate = np.full(n, -1, dtype=np.int64)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v <= u or not allowed[e]:
                continue
            if mate[u] < 0 and mate[v] < 0:
                mate[u] = v
                mate[v] = u
    return mate


@njit(cache=True)
def greedy_mm_order(indptr, indices, edges):
    """LFMM following an explicit edge order (rows of ``edges``)."""
    n = indptr.shape[0] - 1
    mate = np.full(n, -1, dtype=np.int64)
    for i in range(edges.shape[0]):
        u = edges[i, 0]
        v = edges[i, 1]
        if mate[u] < 0 and mate[v] < 0:
            mate[u] = v
            mate[v] = u
    return mate


@njit(cache=True)
def sample_edges(indptr, indices, labels, key, tm1):
    """Per-slot sampling flag for every edge, decided once per undirected edge."""
    n = indptr.shape[0] - 1
    flag = np.zeros(indices.shape[0], dtype=np.bool_)
    for u in range(n):
        lu = labels[u]
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v > u:
                flag[e] = draw2(key, lu, labels[v]) <= tm1
    return flag


@njit(cache=True)
def same_part_slots(indptr, indices, part):
    n = indptr.shape[0] - 1
    flag = np.zeros(indices.shape[0], dtype=np.bool_)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v > u and part[u] == part[v]:
                flag[e] = True
    return flag


@njit(cache=True)
def free_degrees(indptr, indices, mate):
    n = indptr.shape[0] - 1
    deg = np.zeros(n, dtype=np.int64)
    for u in range(n):
        if mate[u] >= 0:
            continue
        c = 0
        for e in range(indptr[u], indptr[u + 1]):
            if mate[indices[e]] < 0:
                c += 1
        deg[u] = c
    return deg


@njit(cache=True)
def cleanup_match(indptr, indices, mate, high):
    """Match high vertices to each other greedily by ascending id."""
    n = indptr.shape[0] - 1
    added = 0
    for u in range(n):
        if not high[u] or mate[u] >= 0:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if high[v] and mate[v] < 0:
                mate[u] = v
                mate[v] = u
                added += 1
                break
    return added


# --------------------------------------------------------------------------
# message accounting helpers


@njit(cache=True)
def neighbour_hits(indptr, indices, mask):
    """For each vertex, how many of its neighbours are in ``mask``."""
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    for u in range(n):
        c = 0
        for e in range(indptr[u], indptr[u + 1]):
            if mask[indices[e]]:
                c += 1
        out[u] = c
    return out


@njit(cache=True)
def upper_hits(indptr, indices, mask, slot_mask):
    """Per vertex u in mask: edges (u, v>u) with v in mask (and slot allowed)."""
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    use_slots = slot_mask.shape[0] > 0
    for u in range(n):
        if not mask[u]:
            continue
        c = 0
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v > u and mask[v]:
                if use_slots and not slot_mask[e]:
                    continue
                c += 1
        out[u] = c
    return out


@njit(cache=True)
def upper_slot_counts(indptr, indices, slot_mask):
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    for u in range(n):
        c = 0
        for e in range(indptr[u], indptr[u + 1]):
            if indices[e] > u and slot_mask[e]:
                c += 1
        out[u] = c
    return out


# --------------------------------------------------------------------------
# structured generators


@njit(cache=True)
def line_graph_upper(indptr, indices, eid, m):
    """Upper-triangle listing of the line graph; vertex i is edge id i."""
    n = indptr.shape[0] - 1
    total = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        total += d * (d - 1) // 2
    a = np.empty(total, dtype=np.int64)
    b = np.empty(total, dtype=np.int64)
    k = 0
    for v in range(n):
        lo = indptr[v]
        hi = indptr[v + 1]
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                x = eid[i]
                y = eid[j]
                if x < y:
                    a[k] = x
                    b[k] = y
                else:
                    a[k] = y
                    b[k] = x
                k += 1
    return a, b


# --------------------------------------------------------------------------
# cluster graphs (cliques kept implicit, cross edges explicit)


@njit(cache=True)
def cluster_degrees(cluster_of, cluster_active, xptr, xidx, active):
    n = cluster_of.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        if not active[v]:
            continue
        c = cluster_active[cluster_of[v]] - 1
        for e in range(xptr[v], xptr[v + 1]):
            if active[xidx[e]]:
                c += 1
        deg[v] = c
    return deg


@njit(cache=True)
def cluster_greedy_mis(cluster_of, n_clusters, xptr, xidx, order, active):
    """LFMIS on the subgraph induced by ``order``; returns (in_set, covered)."""
    n = cluster_of.shape[0]
    taken = np.zeros(n_clusters, dtype=np.bool_)
    blocked = np.zeros(n, dtype=np.bool_)
    in_set = np.zeros(n, dtype=np.bool_)
    for i in range(order.shape[0]):
        v = order[i]
        if blocked[v] or taken[cluster_of[v]]:
            continue
        in_set[v] = True
        taken[cluster_of[v]] = True
        for e in range(xptr[v], xptr[v + 1]):
            blocked[xidx[e]] = True
    covered = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        if active[v] and (blocked[v] or taken[cluster_of[v]]):
            covered[v] = True
    return in_set, covered


@njit(cache=True)
def cluster_active_cross_edges(xptr, xidx, active):
    n = xptr.shape[0] - 1
    total = 0
    for u in range(n):
        if not active[u]:
            continue
        for e in range(xptr[u], xptr[u + 1]):
            v = xidx[e]
            if v > u and active[v]:
                total += 1
    return total


# --------------------------------------------------------------------------
# opportunistic routing


@njit(cache=True)
def oproute_collect(indptr, indices, eid, key, r, block_of, bounds):
    """Simulate the routing steps; returns (receiver y, edge id) pairs.

    Step 1: vertex j draws one incident edge for every slot x.  Step 3: every
    x in a block forwards to each y of its block the received edges whose
    nearer endpoint lies within distance r of y in the received subgraph.
    Also returns per-vertex message counts for both communication steps.
    """
    n = indptr.shape[0] - 1
    ends_u = np.empty(indices.shape[0] // 2 if indices.shape[0] > 0 else 0, dtype=np.int64)
    ends_v = np.empty(indices.shape[0] // 2 if indices.shape[0] > 0 else 0, dtype=np.int64)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v > u:
                ends_u[eid[e]] = u
                ends_v[eid[e]] = v
    sent1 = np.zeros(n, dtype=np.int64)
    recv1 = np.zeros(n, dtype=np.int64)
    sent3 = np.zeros(n, dtype=np.int64)
    recv3 = np.zeros(n, dtype=np.int64)
    cap = 16
    out_y = np.empty(cap, dtype=np.int64)
    out_e = np.empty(cap, dtype=np.int64)
    k = 0
    # scratch for the per-x local graph
    lptr = np.zeros(n + 1, dtype=np.int64)
    ladj = np.empty(2 * n, dtype=np.int64)
    got = np.empty(n, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    ldeg = np.zeros(n, dtype=np.int64)
    seen = np.zeros(ends_u.shape[0], dtype=np.bool_)
    gs_buf = np.empty(n, dtype=np.int64)
    for x in range(n):
        # step 1 for slot x: every vertex j with degree > 0 sends one edge
        cnt = 0
        for j in range(n):
            d = indptr[j + 1] - indptr[j]
            if d == 0:
                continue
            pick = mulhi(draw2(key, j, x), np.uint64(d))
            e = eid[indptr[j] + np.int64(pick)]
            got[cnt] = e
            cnt += 1
            if j != x:
                sent1[j] += 1
                recv1[x] += 1
        # dedupe with a marker array (sorting here dominated the runtime)
        uniq = 0
        for i in range(cnt):
            e = got[i]
            if not seen[e]:
                seen[e] = True
                gs_buf[uniq] = e
                uniq += 1
        gs = gs_buf[:uniq]
        for i in range(uniq):
            seen[gs[i]] = False
        # build the local graph G_x on touched vertices only
        for i in range(uniq):
            ldeg[ends_u[gs[i]]] += 1
            ldeg[ends_v[gs[i]]] += 1
        lptr[0] = 0
        for v in range(n):
            lptr[v + 1] = lptr[v] + ldeg[v]
        fillp = lptr[:-1].copy()
        for i in range(uniq):
            a = ends_u[gs[i]]
            b = ends_v[gs[i]]
            ladj[fillp[a]] = i
            fillp[a] += 1
            ladj[fillp[b]] = i
            fillp[b] += 1
        for i in range(uniq):
            ldeg[ends_u[gs[i]]] = 0
            ldeg[ends_v[gs[i]]] = 0
        bstart = bounds[block_of[x]]
        bend = bounds[block_of[x] + 1]
        for y in range(bstart, bend):
            # BFS from y in G_x to depth r
            head = 0
            tail = 0
            dist[y] = 0
            queue[tail] = y
            tail += 1
            nt = 0
            touched[nt] = y
            nt += 1
            while head < tail:
                a = queue[head]
                head += 1
                if dist[a] >= r:
                    continue
                for s in range(lptr[a], lptr[a + 1]):
                    i = ladj[s]
                    b = ends_v[gs[i]] if ends_u[gs[i]] == a else ends_u[gs[i]]
                    if dist[b] < 0:
                        dist[b] = dist[a] + 1
                        queue[tail] = b
                        tail += 1
                        touched[nt] = b
                        nt += 1
            # edges whose nearer endpoint is within distance r
            sent_here = 0
            for t in range(nt):
                a = touched[t]
                for s in range(lptr[a], lptr[a + 1]):
                    i = ladj[s]
                    b = ends_v[gs[i]] if ends_u[gs[i]] == a else ends_u[gs[i]]
                    # count each edge once: from the endpoint with smaller (dist, id)
                    db = dist[b]
                    if db >= 0 and (db < dist[a] or (db == dist[a] and b < a)):
                        continue
                    if k >= cap:
                        cap *= 2
                        ny = np.empty(cap, dtype=np.int64)
                        ne = np.empty(cap, dtype=np.int64)
                        ny[:k] = out_y[:k]
                        ne[:k] = out_e[:k]
                        out_y = ny
                        out_e = ne
                    out_y[k] = y
                    out_e[k] = gs[i]
                    k += 1
                    sent_here += 1
            if y != x:
                sent3[x] += sent_here
                recv3[y] += sent_here
            for t in range(nt):
                dist[touched[t]] = -1
    return out_y[:k], out_e[:k], sent1, recv1, sent3, recv3


@njit(cache=True)
def ball_edges(indptr, indices, eid, y, r, dist, queue):
    """Edge ids of E^r(y): both endpoints within distance r of y."""
    head = 0
    tail = 0
    dist[y] = 0
    queue[tail] = y
    tail += 1
    while head < tail:
        a = queue[head]
        head += 1
        if dist[a] >= r:
            continue
        for e in range(indptr[a], indptr[a + 1]):
            b = indices[e]
            if dist[b] < 0:
                dist[b] = dist[a] + 1
                queue[tail] = b
                tail += 1
    cnt = 0
    for t in range(tail):
        a = queue[t]
        for e in range(indptr[a], indptr[a + 1]):
            b = indices[e]
            if b > a and dist[b] >= 0:
                cnt += 1
    out = np.empty(cnt, dtype=np.int64)
    cnt = 0
    for t in range(tail):
        a = queue[t]
        for e in range(indptr[a], indptr[a + 1]):
            b = indices[e]
            if b > a and dist[b] >= 0:
                out[cnt] = eid[e]
                cnt += 1
    for t in range(tail):
        dist[queue[t]] = -1
    return np.sort(out)


@njit(cache=True)
def oproute_views(n, ends_u, ends_v, yptr, yedges, r):
    """Each y keeps received edges with both endpoints within distance r.

    ``yedges[yptr[y]:yptr[y+1]]`` are the (sorted, unique) edge ids y received.
    Distances are measured in the graph formed by those edges.
    """
    deg = np.zeros(n, dtype=np.int64)
    start = np.full(n, -1, dtype=np.int64)
    fill = np.zeros(n, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    out = np.empty(yedges.shape[0], dtype=np.int64)
    k = 0
    for y in range(n):
        lo = yptr[y]
        hi = yptr[y + 1]
        cnt = hi - lo
        # local adjacency over the received edges
        verts = np.empty(2 * cnt, dtype=np.int64)
        for i in range(cnt):
            verts[2 * i] = ends_u[yedges[lo + i]]
            verts[2 * i + 1] = ends_v[yedges[lo + i]]
        for i in range(2 * cnt):
            deg[verts[i]] += 1
        acc = 0
        for i in range(2 * cnt):
            w = verts[i]
            if start[w] < 0:
                start[w] = acc
                acc += deg[w]
        adj = np.empty(2 * cnt, dtype=np.int64)
        for i in range(cnt):
            a = verts[2 * i]
            b = verts[2 * i + 1]
            adj[start[a] + fill[a]] = b
            fill[a] += 1
            adj[start[b] + fill[b]] = a
            fill[b] += 1
        head = 0
        tail = 0
        dist[y] = 0
        queue[tail] = y
        tail += 1
        while head < tail:
            a = queue[head]
            head += 1
            if dist[a] >= r or start[a] < 0:
                continue
            s0 = start[a]
            for t in range(s0, s0 + deg[a]):
                b = adj[t]
                if dist[b] < 0:
                    dist[b] = dist[a] + 1
                    queue[tail] = b
                    tail += 1
        for i in range(cnt):
            e = yedges[lo + i]
            if dist[ends_u[e]] >= 0 and dist[ends_v[e]] >= 0:
                out[k] = e
                k += 1
        out_ptr[y + 1] = k
        for t in range(tail):
            dist[queue[t]] = -1
        for i in range(2 * cnt):
            deg[verts[i]] = 0
            start[verts[i]] = -1
            fill[verts[i]] = 0
    return out_ptr, out[:k]


@njit(cache=True)
def true_views(indptr, indices, eid, r):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    ptr = np.zeros(n + 1, dtype=np.int64)
    chunks = []
    total = 0
    for y in range(n):
        e = ball_edges(indptr, indices, eid, y, r, dist, queue)
        chunks.append(e)
        total += e.shape[0]
        ptr[y + 1] = total
    out = np.empty(total, dtype=np.int64)
    for y in range(n):
        out[ptr[y]:ptr[y + 1]] = chunks[y]
    return ptr, out
