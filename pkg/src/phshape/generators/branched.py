"""Branched polymers: tangent non-overlapping balls on a labeled tree.

The target measure is uniform over labeled trees times independent uniform
unit directions on the tree edges, restricted to configurations where no two
balls overlap.  ``gen_bp_rejection`` samples it exactly for small n;
``gen_bp_mcmc`` runs a Metropolis-Hastings chain with two moves:

(a) resample the direction of a uniform edge, translating the smaller side;
(b) move a uniform leaf to a uniform other ball in a uniform direction,
    accepted with probability min(1, leaves_before / leaves_after).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import Polymer, PolymerKind
from ._rng import numba_seed

RADIUS = 1.0
OVERLAP_RTOL = 1e-10


@dataclass(frozen=True)
class BpConfig:
    n_balls: int
    ambient_dim: int = 3
    mcmc_sweeps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_balls < 1:
            raise ValueError("n_balls must be >= 1")
        if self.ambient_dim not in (2, 3):
            raise ValueError("ambient_dim must be 2 or 3")
        if self.mcmc_sweeps < 1:
            raise ValueError("mcmc_sweeps must be >= 1")


@njit(cache=True)
def _unit(dim):
    v = np.random.standard_normal(dim)
    nrm = np.sqrt((v * v).sum())
    while nrm == 0.0:
        v = np.random.standard_normal(dim)
        nrm = np.sqrt((v * v).sum())
    return v / nrm


@njit(cache=True)
def _prufer_tree(n):
    """Uniform labeled tree on n >= 2 vertices as an (n-1, 2) edge array."""
    edges = np.empty((n - 1, 2), np.int64)
    if n == 2:
        edges[0, 0] = 0
        edges[0, 1] = 1
        return edges
    seq = np.random.randint(0, n, n - 2)
    degree = np.ones(n, np.int64)
    for v in seq:
        degree[v] += 1
    k = 0
    for v in seq:
        for leaf in range(n):
            if degree[leaf] == 1:
                edges[k, 0] = leaf
                edges[k, 1] = v
                k += 1
                degree[leaf] -= 1
                degree[v] -= 1
                break
    u = -1
    for w in range(n):
        if degree[w] == 1:
            if u < 0:
                u = w
            else:
                edges[k, 0] = u
                edges[k, 1] = w
    return edges


@njit(cache=True)
def _place(n, edges, dirs, r):
    """Centers from edge directions by breadth-first search from ball 0."""
    dim = dirs.shape[1]
    deg = np.zeros(n, np.int64)
    for e in range(n - 1):
        deg[edges[e, 0]] += 1
        deg[edges[e, 1]] += 1
    start = np.zeros(n + 1, np.int64)
    for v in range(n):
        start[v + 1] = start[v] + deg[v]
    fill = start[:-1].copy()
    inc = np.empty(2 * (n - 1), np.int64)
    for e in range(n - 1):
        inc[fill[edges[e, 0]]] = e
        fill[edges[e, 0]] += 1
        inc[fill[edges[e, 1]]] = e
        fill[edges[e, 1]] += 1
    pos = np.zeros((n, dim))
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    queue[0] = 0
    seen[0] = True
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for q in range(start[v], start[v + 1]):
            e = inc[q]
            a = edges[e, 0]
            b = edges[e, 1]
            w = b if a == v else a
            if seen[w]:
                continue
            sign = 1.0 if a == v else -1.0
            for d in range(dim):
                pos[w, d] = pos[v, d] + sign * 2 * r * dirs[e, d]
            seen[w] = True
            queue[tail] = w
            tail += 1
    return pos


@njit(cache=True)
def _valid_bruteforce(pos, edges, r):
    n = pos.shape[0]
    lim = 4 * r * r * (1 - OVERLAP_RTOL)
    adj = np.zeros((n, n), np.bool_)
    for e in range(edges.shape[0]):
        adj[edges[e, 0], edges[e, 1]] = True
        adj[edges[e, 1], edges[e, 0]] = True
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j]:
                continue
            d2 = 0.0
            for d in range(pos.shape[1]):
                t = pos[i, d] - pos[j, d]
                d2 += t * t
            if d2 < lim:
                return False
    return True


@njit(cache=True)
def _rejection(n, dim, r, max_attempts, seed):
    np.random.seed(seed)
    for attempt in range(1, max_attempts + 1):
        edges = _prufer_tree(n)
        dirs = np.empty((n - 1, dim))
        for e in range(n - 1):
            dirs[e] = _unit(dim)
        pos = _place(n, edges, dirs, r)
        if _valid_bruteforce(pos, edges, r):
            return pos, edges, attempt
    return np.zeros((0, dim)), np.zeros((0, 2), np.int64), max_attempts


def gen_bp_rejection(n_balls: int, ambient_dim: int, seed: int = 0,
                     max_attempts: int = 10_000_000) -> Polymer:
    """Exact sample: uniform labeled tree and uniform directions, kept only if valid."""
    if n_balls < 1:
        raise ValueError("n_balls must be >= 1")
    if ambient_dim not in (2, 3):
        raise ValueError("ambient_dim must be 2 or 3")
    if n_balls == 1:
        return Polymer(np.zeros((1, ambient_dim)), RADIUS, PolymerKind.BRANCHED_POLYMER, seed,
                       np.zeros((0, 2), np.int64))
    pos, edges, attempts = _rejection(n_balls, ambient_dim, RADIUS, max_attempts, numba_seed(seed))
    if len(pos) == 0:
        raise RuntimeError(f"no valid configuration in {max_attempts} attempts")
    return Polymer(pos, RADIUS, PolymerKind.BRANCHED_POLYMER, seed, edges)


# ------------------------------------------------------------ spatial hash

@njit(cache=True)
def _hash_cells(c0, c1, c2, mask):
    h = (c0 * np.int64(73856093)) ^ (c1 * np.int64(19349663)) ^ (c2 * np.int64(83492791))
    return (h ^ (h >> 31)) & mask


@njit(cache=True)
def _cell_of(p, cell):
    c0 = np.int64(np.floor(p[0] / cell))
    c1 = np.int64(np.floor(p[1] / cell))
    c2 = np.int64(np.floor(p[2] / cell)) if p.shape[0] == 3 else np.int64(0)
    return c0, c1, c2


@njit(cache=True)
def _hash_insert(v, pos, cell, mask, head, nxt, prv, slot):
    c0, c1, c2 = _cell_of(pos[v], cell)
    h = _hash_cells(c0, c1, c2, mask)
    slot[v] = h
    prv[v] = -1
    nxt[v] = head[h]
    if head[h] >= 0:
        prv[head[h]] = v
    head[h] = v


@njit(cache=True)
def _hash_remove(v, head, nxt, prv, slot):
    h = slot[v]
    if prv[v] >= 0:
        nxt[prv[v]] = nxt[v]
    else:
        head[h] = nxt[v]
    if nxt[v] >= 0:
        prv[nxt[v]] = prv[v]


@njit(cache=True)
def _overlaps(p, skip_mark, mark, exclude, pos, cell, mask, head, nxt):
    """Does a ball at p overlap any ball w with mark[w] != skip_mark and w != exclude?

    Cells have side 4r, so the 2r-neighbourhood of p meets two cells per axis.
    """
    dim = p.shape[0]
    lim = 4 * RADIUS * RADIUS * (1 - OVERLAP_RTOL)
    c0 = np.int64(np.floor((p[0] - 0.5 * cell) / cell))
    c1 = np.int64(np.floor((p[1] - 0.5 * cell) / cell))
    c2 = np.int64(np.floor((p[2] - 0.5 * cell) / cell)) if dim == 3 else np.int64(0)
    kz = 2 if dim == 3 else 1
    for i in range(2):
        for j in range(2):
            for k in range(kz):
                w = head[_hash_cells(c0 + i, c1 + j, c2 + k, mask)]
                while w >= 0:
                    if w != exclude and mark[w] != skip_mark:
                        d2 = 0.0
                        for d in range(dim):
                            s = p[d] - pos[w, d]
                            d2 += s * s
                        if d2 < lim:
                            return True
                    w = nxt[w]
    return False


# ------------------------------------------------------------ MCMC state

@njit(cache=True)
def _other_end(edges, e, v):
    return edges[e, 1] if edges[e, 0] == v else edges[e, 0]


@njit(cache=True)
def _detach(v, e, inc, deg):
    for q in range(deg[v]):
        if inc[v, q] == e:
            inc[v, q] = inc[v, deg[v] - 1]
            deg[v] -= 1
            return


@njit(cache=True)
def _leaf_add(v, leaves, leaf_at, nleaves):
    leaf_at[v] = nleaves
    leaves[nleaves] = v
    return nleaves + 1


@njit(cache=True)
def _leaf_remove(v, leaves, leaf_at, nleaves):
    k = leaf_at[v]
    last = leaves[nleaves - 1]
    leaves[k] = last
    leaf_at[last] = k
    leaf_at[v] = -1
    return nleaves - 1


@njit(cache=True)
def _smaller_side(a, b, e, edges, inc, deg, mark, stamp, qa, qb):
    """Vertices on the smaller side of edge e, marked with the returned tag.

    Two breadth-first searches advance alternately and the first to finish
    wins, so the cost is proportional to the smaller side.
    """
    mark[a] = stamp
    mark[b] = stamp + 1
    qa[0] = a
    qb[0] = b
    ha = 0
    ta = 1
    hb = 0
    tb = 1
    while True:
        if ha == ta:
            return qa, ta, stamp
        if hb == tb:
            return qb, tb, stamp + 1
        v = qa[ha]
        ha += 1
        for q in range(deg[v]):
            f = inc[v, q]
            if f != e:
                w = _other_end(edges, f, v)
                if mark[w] != stamp:
                    mark[w] = stamp
                    qa[ta] = w
                    ta += 1
        v = qb[hb]
        hb += 1
        for q in range(deg[v]):
            f = inc[v, q]
            if f != e:
                w = _other_end(edges, f, v)
                if mark[w] != stamp + 1:
                    mark[w] = stamp + 1
                    qb[tb] = w
                    tb += 1


@njit(cache=True)
def _mcmc(edges, dirs, moves, seed, r):
    """Run ``moves`` attempted moves in place on the state (edges, dirs); even moves are kind (a)."""
    np.random.seed(seed)
    n = edges.shape[0] + 1
    dim = dirs.shape[1]
    maxdeg = 6 if dim == 2 else 12
    inc = np.full((n, maxdeg + 1), -1, np.int64)
    deg = np.zeros(n, np.int64)
    for e in range(n - 1):
        for s in range(2):
            v = edges[e, s]
            inc[v, deg[v]] = e
            deg[v] += 1
    pos = _place(n, edges, dirs, r)
    leaves = np.empty(n, np.int64)
    leaf_at = np.full(n, -1, np.int64)
    nleaves = 0
    for v in range(n):
        if deg[v] == 1:
            nleaves = _leaf_add(v, leaves, leaf_at, nleaves)

    cell = 4 * r
    size = 1
    while size < 2 * n:
        size *= 2
    mask = size - 1
    head = np.full(size, -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    prv = np.full(n, -1, np.int64)
    slot = np.zeros(n, np.int64)
    for v in range(n):
        _hash_insert(v, pos, cell, mask, head, nxt, prv, slot)

    mark = np.zeros(n, np.int64)
    stamp = 2
    qa = np.empty(n, np.int64)
    qb = np.empty(n, np.int64)
    newpos = np.empty((n, dim))
    shift = np.empty(dim)
    target = np.empty(dim)
    acc = np.zeros(2, np.int64)
    tried = np.zeros(2, np.int64)
    for it in range(moves):
        kind = it % 2
        tried[kind] += 1
        if kind == 0:
            # (a) new direction for a uniform edge; the smaller side follows rigidly
            e = np.random.randint(0, n - 1)
            a = edges[e, 0]
            b = edges[e, 1]
            d = _unit(dim)
            stamp += 2
            side, m, tag = _smaller_side(a, b, e, edges, inc, deg, mark, stamp, qa, qb)
            for q in range(dim):
                if tag == stamp + 1:
                    shift[q] = pos[a, q] + 2 * r * d[q] - pos[b, q]
                else:
                    shift[q] = pos[b, q] - 2 * r * d[q] - pos[a, q]
            ok = True
            for k in range(m):
                v = side[k]
                for q in range(dim):
                    newpos[k, q] = pos[v, q] + shift[q]
                if _overlaps(newpos[k], tag, mark, -1, pos, cell, mask, head, nxt):
                    ok = False
                    break
            if ok:
                for k in range(m):
                    v = side[k]
                    _hash_remove(v, head, nxt, prv, slot)
                    pos[v] = newpos[k]
                    _hash_insert(v, pos, cell, mask, head, nxt, prv, slot)
                dirs[e] = d
                acc[0] += 1
        else:
            # (b) relocate a uniform leaf onto a uniform other ball
            u = leaves[np.random.randint(0, nleaves)]
            e = inc[u, 0]
            p = _other_end(edges, e, u)
            q = np.random.randint(0, n - 1)
            if q >= u:
                q += 1
            d = _unit(dim)
            after = nleaves
            if q != p:
                if deg[p] == 2:
                    after += 1
                if deg[q] == 1:
                    after -= 1
            if after > nleaves and np.random.random() * after >= nleaves:
                continue
            if q != p and deg[q] >= maxdeg:
                continue
            for k in range(dim):
                target[k] = pos[q, k] + 2 * r * d[k]
            stamp += 2
            mark[u] = stamp
            if _overlaps(target, stamp, mark, q, pos, cell, mask, head, nxt):
                continue
            _hash_remove(u, head, nxt, prv, slot)
            pos[u] = target
            _hash_insert(u, pos, cell, mask, head, nxt, prv, slot)
            if q != p:
                _detach(u, e, inc, deg)
                _detach(p, e, inc, deg)
                if deg[p] == 1:
                    nleaves = _leaf_add(p, leaves, leaf_at, nleaves)
                if deg[q] == 1:
                    nleaves = _leaf_remove(q, leaves, leaf_at, nleaves)
                inc[u, deg[u]] = e
                deg[u] += 1
                inc[q, deg[q]] = e
                deg[q] += 1
            edges[e, 0] = q
            edges[e, 1] = u
            dirs[e] = d
            acc[1] += 1
        if (it + 1) % n == 0:
            # refresh centers from directions so round-off does not accumulate
            pos[:] = _place(n, edges, dirs, r)
            head[:] = -1
            for v in range(n):
                _hash_insert(v, pos, cell, mask, head, nxt, prv, slot)
    return acc, tried


def straight_chain(n_balls: int, ambient_dim: int):
    """Initial state: edges i -> i+1 all pointing along the first axis."""
    edges = np.column_stack([np.arange(n_balls - 1), np.arange(1, n_balls)]).astype(np.int64)
    dirs = np.zeros((n_balls - 1, ambient_dim))
    dirs[:, 0] = 1.0
    return edges, dirs


def hastings_leaf_ratio(leaves_before: int, leaves_after: int) -> float:
    """Acceptance probability of a leaf move between valid states."""
    return min(1.0, leaves_before / leaves_after)


def run_bp_chain(cfg: BpConfig, state=None):
    """Advance the chain; returns (edges, dirs, accepted, attempted) per move kind.

    ``state`` is an (edges, dirs) pair to continue from; it is not modified.
    """
    edges, dirs = straight_chain(cfg.n_balls, cfg.ambient_dim) if state is None else (
        np.array(state[0], dtype=np.int64), np.array(state[1], dtype=float))
    if cfg.n_balls == 1:
        z = np.zeros(2, np.int64)
        return edges, dirs, z, z
    acc, tried = _mcmc(edges, dirs, cfg.mcmc_sweeps * cfg.n_balls, numba_seed(cfg.seed), RADIUS)
    return edges, dirs, acc, tried


def run_bp_moves(edges, dirs, n_moves: int, seed: int = 0):
    """Apply ``n_moves`` attempted moves to a copy of (edges, dirs), starting with kind (a)."""
    edges = np.array(edges, dtype=np.int64)
    dirs = np.array(dirs, dtype=float)
    if len(edges) == 0:
        z = np.zeros(2, np.int64)
        return edges, dirs, z, z
    acc, tried = _mcmc(edges, dirs, int(n_moves), numba_seed(seed), RADIUS)
    return edges, dirs, acc, tried


def bp_centers(edges, dirs) -> np.ndarray:
    n = len(edges) + 1
    return _place(n, np.asarray(edges, np.int64), np.asarray(dirs, float), RADIUS)


def gen_bp_mcmc(cfg: BpConfig) -> Polymer:
    """Approximate sample after ``cfg.mcmc_sweeps`` sweeps from a straight chain."""
    edges, dirs, _, _ = run_bp_chain(cfg)
    if cfg.n_balls == 1:
        return Polymer(np.zeros((1, cfg.ambient_dim)), RADIUS, PolymerKind.BRANCHED_POLYMER,
                       cfg.seed, edges)
    return Polymer(bp_centers(edges, dirs), RADIUS, PolymerKind.BRANCHED_POLYMER, cfg.seed, edges)
