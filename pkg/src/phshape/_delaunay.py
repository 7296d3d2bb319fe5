"""Incremental Delaunay triangulation kernel (2D and 3D).

Bowyer-Watson insertion over a triangulation of the whole space: hull facets
are coned to a symbolic vertex at infinity (index ``n``), so every point
insertion is a cavity retriangulation.  Simplices are stored with positive
orientation; ``N[t, i]`` is the neighbour across the facet opposite
``V[t, i]``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from numba import njit, objmode

from .predicates import incircle, insphere, insphere_exact, orient2d, orient3d, orient3d_exact

OK = 0
ERR_DEGENERATE = 1
ERR_DUPLICATE = 2


def _collinear_between_exact(ax, ay, bx, by, px, py) -> int:
    ax, ay, bx, by, px, py = map(Fraction, (ax, ay, bx, by, px, py))
    return int((px - ax) * (px - bx) + (py - ay) * (py - by) < 0)


def _coplanar_in_circle_exact(a, b, c, p) -> int:
    # the sphere through a, b, c and any off-plane point q cuts the plane in
    # the circumcircle of abc
    for axis in range(3):
        q = np.array(a, dtype=float)
        q[axis] += 1.0
        o = orient3d_exact(a, b, c, q)
        if o != 0:
            return int(o * insphere_exact(a, b, c, q, p) > 0)
    return 0


@njit(cache=True)
def _orient_idx(P, D, i0, i1, i2, i3):
    if D == 2:
        return orient2d(P[i0, 0], P[i0, 1], P[i1, 0], P[i1, 1], P[i2, 0], P[i2, 1])
    return orient3d(P[i0], P[i1], P[i2], P[i3])


@njit(cache=True)
def _orient_replaced(P, D, V, t, k, p):
    v0 = V[t, 0]
    v1 = V[t, 1]
    v2 = V[t, 2]
    v3 = V[t, 3]
    if k == 0:
        v0 = p
    elif k == 1:
        v1 = p
    elif k == 2:
        v2 = p
    else:
        v3 = p
    return _orient_idx(P, D, v0, v1, v2, v3)


@njit(cache=True)
def _insphere_simplex(P, D, V, t, q):
    if D == 2:
        a = V[t, 0]
        b = V[t, 1]
        c = V[t, 2]
        return incircle(P[a, 0], P[a, 1], P[b, 0], P[b, 1], P[c, 0], P[c, 1], P[q, 0], P[q, 1])
    return insphere(P[V[t, 0]], P[V[t, 1]], P[V[t, 2]], P[V[t, 3]], P[q])


@njit(cache=True)
def _inf_pos(V, t, K, INF):
    for i in range(K):
        if V[t, i] == INF:
            return i
    return -1


@njit(cache=True)
def _in_conflict(P, D, V, t, p, INF):
    K = D + 1
    k = _inf_pos(V, t, K, INF)
    if k < 0:
        return _insphere_simplex(P, D, V, t, p) > 0
    o = _orient_replaced(P, D, V, t, k, p)
    if o != 0:
        return o > 0
    # p lies on the supporting line/plane of a hull facet
    if D == 2:
        return _between2(P, V[t, (k + 1) % 3], V[t, (k + 2) % 3], p)
    return _coplanar_circle(P, V[t, (k + 1) % 4], V[t, (k + 2) % 4], V[t, (k + 3) % 4], p)


@njit(cache=True)
def _between2(P, a, b, p):
    with objmode(r="int64"):
        r = _collinear_between_exact(P[a, 0], P[a, 1], P[b, 0], P[b, 1], P[p, 0], P[p, 1])
    return r == 1


@njit(cache=True)
def _coplanar_circle(P, f0, f1, f2, p):
    with objmode(r="int64"):
        r = _coplanar_in_circle_exact(P[f0], P[f1], P[f2], P[p])
    return r == 1


@njit(cache=True)
def _grow2(a, newcap, fill):
    out = np.full((newcap, a.shape[1]), fill, a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow1(a, newcap):
    out = np.zeros(newcap, a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _collinear3(P, a, b, c):
    # exact: collinear iff all three coordinate projections are degenerate
    if orient2d(P[a, 0], P[a, 1], P[b, 0], P[b, 1], P[c, 0], P[c, 1]) != 0:
        return False
    if orient2d(P[a, 1], P[a, 2], P[b, 1], P[b, 2], P[c, 1], P[c, 2]) != 0:
        return False
    if orient2d(P[a, 0], P[a, 2], P[b, 0], P[b, 2], P[c, 0], P[c, 2]) != 0:
        return False
    return True


@njit(cache=True)
def _same_point(P, a, b):
    for d in range(P.shape[1]):
        if P[a, d] != P[b, d]:
            return False
    return True


@njit(cache=True)
def build(P, order, seed):
    """Triangulate ``P`` inserting points in ``order``.

    Returns ``(V, N, alive, status)``; rows of ``V`` hold vertex indices with
    ``n`` standing for the vertex at infinity.
    """
    n, D = P.shape
    K = D + 1
    INF = n
    np.random.seed(seed)

    cap = 64 + (3 * n if D == 2 else 8 * n)
    V = np.full((cap, 4), -1, np.int64)
    N = np.full((cap, 4), -1, np.int64)
    alive = np.zeros(cap, np.bool_)
    mark = np.zeros(cap, np.int64)
    free = np.zeros(cap, np.int64)
    nfree = 0
    top = 0

    # initial full-dimensional simplex
    init = np.full(4, -1, np.int64)
    init[0] = order[0]
    found = 1
    for q in order[1:]:
        if found == 1:
            if not _same_point(P, init[0], q):
                init[1] = q
                found = 2
        elif found == 2:
            if D == 2:
                if _orient_idx(P, D, init[0], init[1], q, 0) != 0:
                    init[2] = q
                    found = 3
                    break
            else:
                if not _collinear3(P, init[0], init[1], q):
                    init[2] = q
                    found = 3
        elif found == 3:
            if _orient_idx(P, D, init[0], init[1], init[2], q) != 0:
                init[3] = q
                found = 4
                break
    if found < K:
        return V[:0], N[:0], alive[:0], ERR_DEGENERATE

    for i in range(K):
        V[0, i] = init[i]
    if _orient_idx(P, D, V[0, 0], V[0, 1], V[0, 2], V[0, 3]) < 0:
        V[0, 0], V[0, 1] = V[0, 1], V[0, 0]
    alive[0] = True
    for i in range(K):
        s = 1 + i
        for j in range(K):
            V[s, j] = V[0, j]
        V[s, i] = INF
        # flip orientation by swapping two finite slots
        j0 = (i + 1) % K
        j1 = (i + 2) % K
        V[s, j0], V[s, j1] = V[s, j1], V[s, j0]
        alive[s] = True
    top = K + 1
    for s in range(top):
        for i in range(K):
            for t in range(top):
                if t == s:
                    continue
                shared = 0
                for j in range(K):
                    if j == i:
                        continue
                    for l in range(K):
                        if V[t, l] == V[s, j]:
                            shared += 1
                            break
                if shared == D:
                    N[s, i] = t
                    break

    inserted = np.zeros(n, np.bool_)
    for i in range(K):
        inserted[init[i]] = True

    stack = np.zeros(256, np.int64)
    bnd_t = np.zeros(256, np.int64)
    bnd_i = np.zeros(256, np.int64)
    bnd_u = np.zeros(256, np.int64)
    cav = np.zeros(256, np.int64)
    last = 0
    stamp = 0

    for p in order:
        if inserted[p]:
            continue
        inserted[p] = True

        # locate by stochastic visibility walk
        t = last
        seed_t = -1
        for _ in range(100 * n + 1000):
            start = np.random.randint(0, K)
            moved = False
            for kk in range(K):
                i = (start + kk) % K
                if _orient_replaced(P, D, V, t, i, p) < 0:
                    u = N[t, i]
                    if _inf_pos(V, u, K, INF) >= 0:
                        seed_t = u
                    else:
                        t = u
                        moved = True
                    break
            if seed_t >= 0:
                break
            if not moved:
                seed_t = t
                break
        if seed_t < 0:
            return V[:top], N[:top], alive[:top], ERR_DEGENERATE
        if not _in_conflict(P, D, V, seed_t, p, INF):
            for j in range(K):
                if V[seed_t, j] != INF and _same_point(P, V[seed_t, j], p):
                    return V[:top], N[:top], alive[:top], ERR_DUPLICATE
            return V[:top], N[:top], alive[:top], ERR_DEGENERATE

        # cavity of conflicting simplices
        stamp += 2
        s_in = stamp
        s_out = stamp + 1
        mark[seed_t] = s_in
        ns = 1
        stack[0] = seed_t
        ncav = 0
        nb = 0
        while ns > 0:
            ns -= 1
            t = stack[ns]
            if ncav == cav.shape[0]:
                cav = _grow1(cav, 2 * ncav)
            cav[ncav] = t
            ncav += 1
            for i in range(K):
                u = N[t, i]
                if mark[u] != s_in and mark[u] != s_out:
                    if _in_conflict(P, D, V, u, p, INF):
                        mark[u] = s_in
                        if ns == stack.shape[0]:
                            stack = _grow1(stack, 2 * ns)
                        stack[ns] = u
                        ns += 1
                        continue
                    mark[u] = s_out
                if mark[u] == s_out:
                    if nb == bnd_t.shape[0]:
                        bnd_t = _grow1(bnd_t, 2 * nb)
                        bnd_i = _grow1(bnd_i, 2 * nb)
                        bnd_u = _grow1(bnd_u, 2 * nb)
                    bnd_t[nb] = t
                    bnd_i[nb] = i
                    bnd_u[nb] = u
                    nb += 1

        # new simplices coning the cavity boundary to p
        if top + nb >= V.shape[0]:
            newcap = 2 * V.shape[0] + nb
            V = _grow2(V, newcap, -1)
            N = _grow2(N, newcap, -1)
            alive = _grow1(alive, newcap)
            mark = _grow1(mark, newcap)
            free = _grow1(free, newcap)
        new = np.empty(nb, np.int64)
        for b in range(nb):
            t = bnd_t[b]
            i = bnd_i[b]
            u = bnd_u[b]
            if nfree > 0:
                nfree -= 1
                s = free[nfree]
            else:
                s = top
                top += 1
            new[b] = s
            for j in range(4):
                V[s, j] = V[t, j]
                N[s, j] = -1
            V[s, i] = p
            N[s, i] = u
            mark[s] = 0
            alive[s] = True
            for j in range(K):
                if N[u, j] == t:
                    N[u, j] = s
                    break

        # link the new simplices to each other through facets containing p
        m = nb * D
        keys = np.empty(m, np.int64)
        owner = np.empty(m, np.int64)
        slot = np.empty(m, np.int64)
        e = 0
        for b in range(nb):
            s = new[b]
            i = bnd_i[b]
            for j in range(K):
                if j == i:
                    continue
                if D == 2:
                    key = V[s, 3 - i - j]
                else:
                    x = -1
                    y = -1
                    for l in range(4):
                        if l != i and l != j:
                            if x < 0:
                                x = V[s, l]
                            else:
                                y = V[s, l]
                    if x > y:
                        x, y = y, x
                    key = x * (INF + 1) + y
                keys[e] = key
                owner[e] = s
                slot[e] = j
                e += 1
        idx = np.argsort(keys, kind="mergesort")
        for q in range(0, m - 1, 2):
            a = idx[q]
            b2 = idx[q + 1]
            N[owner[a], slot[a]] = owner[b2]
            N[owner[b2], slot[b2]] = owner[a]

        for c in range(ncav):
            t = cav[c]
            alive[t] = False
            free[nfree] = t
            nfree += 1

        for b in range(nb):
            if _inf_pos(V, new[b], K, INF) < 0:
                last = new[b]
                break

    return V[:top], N[:top], alive[:top], OK


@njit(cache=True)
def check(P, V, N, alive):
    """Count orientation and local-Delaunay violations among finite simplices."""
    n, D = P.shape
    K = D + 1
    INF = n
    bad = 0
    for t in range(V.shape[0]):
        if not alive[t] or _inf_pos(V, t, K, INF) >= 0:
            continue
        if _orient_idx(P, D, V[t, 0], V[t, 1], V[t, 2], V[t, 3]) <= 0:
            bad += 1
        for i in range(K):
            u = N[t, i]
            if u < 0 or not alive[u]:
                bad += 1
                continue
            back = False
            for j in range(K):
                if N[u, j] == t:
                    back = True
            if not back:
                bad += 1
            if u < t or _inf_pos(V, u, K, INF) >= 0:
                continue
            for j in range(K):
                q = V[u, j]
                inside = False
                for l in range(K):
                    if V[t, l] == q:
                        inside = True
                if not inside:
                    if _insphere_simplex(P, D, V, t, q) > 0:
                        bad += 1
    return bad
