"""Persistent homology of a filtered simplicial complex over Z/2."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import Convention, Diagram
from .delaunay_alpha import FilteredComplex

BETTI_CAP = 2000


@njit(cache=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True)
def _symdiff(a, na, b, nb, out):
    i = 0
    j = 0
    k = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def _pairs(dims, bptr, bidx):
    """Return ``partner`` with partner[birth] = death and partner[death] = birth (-1 if unpaired)."""
    S = len(dims)
    partner = np.full(S, -1, np.int64)
    kmax = 0
    for s in range(S):
        if dims[s] > kmax:
            kmax = dims[s]

    # degree 0: elder rule on a union-find over vertices
    parent = np.arange(S)
    eldest = np.arange(S)
    for s in range(S):
        if dims[s] != 1:
            continue
        ru = _find(parent, bidx[bptr[s]])
        rv = _find(parent, bidx[bptr[s] + 1])
        if ru == rv:
            continue
        if eldest[ru] > eldest[rv]:
            ru, rv = rv, ru
        partner[eldest[rv]] = s
        partner[s] = eldest[rv]
        parent[rv] = ru

    # degrees >= 1: column reduction from the top dimension down, with clearing
    low_owner = np.full(S, -1, np.int64)
    col_start = np.zeros(S, np.int64)
    col_len = np.zeros(S, np.int64)
    pool = np.empty(max(16, 4 * len(bidx)), np.int64)
    used = 0
    buf = np.empty(64, np.int64)
    tmp = np.empty(64, np.int64)
    for d in range(kmax, 1, -1):
        for j in range(S):
            if dims[j] != d or partner[j] >= 0:
                continue
            n = bptr[j + 1] - bptr[j]
            if n > buf.shape[0]:
                buf = np.empty(2 * n, np.int64)
            for q in range(n):
                buf[q] = bidx[bptr[j] + q]
            while n > 0:
                k = low_owner[buf[n - 1]]
                if k < 0:
                    break
                m = col_len[k]
                if n + m > tmp.shape[0]:
                    tmp = np.empty(2 * (n + m), np.int64)
                n = _symdiff(buf, n, pool[col_start[k]:], m, tmp)
                buf, tmp = tmp, buf
            if n == 0:
                continue
            low = buf[n - 1]
            low_owner[low] = j
            partner[low] = j
            partner[j] = low
            if used + n > pool.shape[0]:
                bigger = np.empty(2 * (used + n), np.int64)
                bigger[:used] = pool[:used]
                pool = bigger
            pool[used:used + n] = buf[:n]
            col_start[j] = used
            col_len[j] = n
            used += n
    return partner


def compute_persistence(fc: FilteredComplex) -> Diagram:
    """Persistence intervals of ``fc`` in alpha units.

    The eldest component is kept only in ``essential_count``.  When the
    filtration was truncated, every other unpaired class is reported as an
    interval ending at ``fc.alpha_max`` with its ``truncated`` flag set.
    """
    S = len(fc)
    if S == 0:
        return Diagram([], [], [], Convention.ALPHA, 0.0, (0,), pair_count=0)
    dims = np.ascontiguousarray(fc.dims, dtype=np.int64)
    partner = _pairs(dims, fc.boundary_ptr, fc.boundary_idx)
    idx = np.arange(S)
    born = (partner > idx) | (partner < 0)
    paired = born & (partner >= 0)
    b_idx = idx[paired]
    births = fc.values[b_idx]
    deaths = fc.values[partner[b_idx]]
    degrees = dims[b_idx]
    pair_count = len(b_idx)

    unpaired = idx[partner < 0]
    kmax = int(dims.max())
    essential = np.bincount(dims[unpaired], minlength=kmax + 1)
    trunc = np.zeros(len(births), bool)
    if math.isfinite(fc.alpha_max):
        # the first vertex is the eldest component under the elder rule
        cut = unpaired[unpaired != 0]
        essential = np.bincount(dims[unpaired[unpaired == 0]], minlength=kmax + 1)
        births = np.concatenate([births, fc.values[cut]])
        deaths = np.concatenate([deaths, np.full(len(cut), fc.alpha_max)])
        degrees = np.concatenate([degrees, dims[cut]])
        trunc = np.concatenate([trunc, np.ones(len(cut), bool)])
    keep = deaths - births > 1e-12 * np.maximum(deaths, 1.0)
    return Diagram(degrees[keep], births[keep], deaths[keep], Convention.ALPHA, 0.0,
                   tuple(int(e) for e in essential), trunc[keep], pair_count)


def to_epsilon_units(d: Diagram, r: float) -> Diagram:
    """Shift endpoints by the ball radius: alpha -> max(alpha - r, 0).

    Intervals that die at or before ``r`` live inside the solid polymer and
    are dropped.
    """
    if d.convention != Convention.ALPHA:
        raise ValueError("diagram is already in epsilon units")
    if r < 0:
        raise ValueError("radius must be non-negative")
    keep = d.deaths > r
    b = np.maximum(d.births[keep] - r, 0.0)
    e = d.deaths[keep] - r
    ok = e - b > 1e-12 * np.maximum(e, 1.0)
    return Diagram(d.degrees[keep][ok], b[ok], e[ok], Convention.EPSILON, r,
                   d.essential_count, d.truncated[keep][ok], d.pair_count)


def _rank_z2(columns: list) -> int:
    """Rank of a Z/2 matrix given as int bitmask columns."""
    pivots = {}
    rank = 0
    for c in columns:
        while c:
            top = c.bit_length() - 1
            if top in pivots:
                c ^= pivots[top]
            else:
                pivots[top] = c
                rank += 1
                break
    return rank


def betti_at(fc: FilteredComplex, alpha: float) -> tuple:
    """Unreduced Betti numbers of the sublevel complex {value <= alpha}."""
    m = int(np.searchsorted(fc.values, alpha, side="right"))
    if m > BETTI_CAP:
        raise ValueError(f"betti_at is limited to {BETTI_CAP} simplices, got {m}")
    kmax = max(fc.max_dim, 0)
    counts = np.bincount(fc.dims[:m], minlength=kmax + 1)
    cols = [[] for _ in range(kmax + 2)]
    for s in range(m):
        mask = 0
        for f in fc.boundary(s):
            mask |= 1 << int(f)
        cols[fc.dims[s]].append(mask)
    ranks = [0] + [_rank_z2(cols[k]) for k in range(1, kmax + 1)] + [0]
    return tuple(int(counts[k] - ranks[k] - ranks[k + 1]) for k in range(kmax + 1))
