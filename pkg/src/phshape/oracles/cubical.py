"""Brute-force persistence of a ball union from a sampled distance function.

The distance to the centers (minus r, clamped at 0) is sampled on a regular
grid over the bounding box of the centers.  Clipping to a convex box that
contains the centers does not change the homotopy type of any sublevel set:
nearest-point projection onto the box moves no point farther from any
center.  The grid carries the lower-star cubical filtration (a cell takes the
max of its corner values), stored on the doubled grid where a cell's
dimension is the number of its odd coordinates.

Degree 0 comes from a union-find over vertices and edges, the top degree
m - 1 from a union-find over top cells in reverse order (duality on the box),
and degree 1 in 3D from a Z/2 column reduction with clearing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit
from scipy.spatial import cKDTree

from ..core import Convention, Diagram

MAX_GRID_VERTICES = 20_000_000


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of max(dist(., centers) - r, 0) on a regular grid."""

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.values.ndim

    def dump(self, path) -> None:
        """Flat float64 binary plus a JSON header next to it."""
        path = Path(path)
        self.values.astype("<f8").tofile(path)
        header = {"shape": list(self.values.shape), "origin": [float(o) for o in self.origin],
                  "spacing": self.spacing, "dtype": "<f8", "order": "C"}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(header, indent=1))


def grid_field(points, r: float, h: float, pad: int = 2,
               max_vertices: int = MAX_GRID_VERTICES) -> GridField:
    pts = np.asarray(points, dtype=float)
    lo = pts.min(0) - pad * h
    hi = pts.max(0) + pad * h
    shape = tuple(int(math.ceil(s / h)) + 1 for s in hi - lo)
    if math.prod(shape) > max_vertices:
        raise MemoryError(f"grid {shape} exceeds {max_vertices} vertices; increase h")
    axes = [lo[d] + h * np.arange(shape[d]) for d in range(len(shape))]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(shape))
    dist, _ = cKDTree(pts).query(mesh)
    vals = np.maximum(dist - r, 0.0).reshape(shape)
    return GridField(lo, h, vals)


def _doubled(values: np.ndarray) -> np.ndarray:
    """Lower-star values on the doubled grid."""
    m = values.ndim
    out = np.full(tuple(2 * s - 1 for s in values.shape), -np.inf)
    out[tuple(slice(None, None, 2) for _ in range(m))] = values
    for axis in range(m):
        # odd slots along this axis: max of the two even neighbours
        src = [slice(None)] * m
        lo = list(src)
        hi = list(src)
        dst = list(src)
        lo[axis] = slice(0, -1, 2)
        hi[axis] = slice(2, None, 2)
        dst[axis] = slice(1, None, 2)
        out[tuple(dst)] = np.maximum(out[tuple(lo)], out[tuple(hi)])
    return out


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
def _cell_dim(idx, shape):
    dim = 0
    for ax in range(len(shape) - 1, -1, -1):
        c = idx % shape[ax]
        idx //= shape[ax]
        dim += c & 1
    return dim


@njit(cache=True)
def _coords(idx, shape, out):
    for ax in range(len(shape) - 1, -1, -1):
        out[ax] = idx % shape[ax]
        idx //= shape[ax]


@njit(cache=True)
def _strides(shape):
    st = np.ones(len(shape), np.int64)
    for ax in range(len(shape) - 2, -1, -1):
        st[ax] = st[ax + 1] * shape[ax + 1]
    return st


@njit(cache=True)
def _pairs_low(order, dims, shape):
    """Degree-0 pairs by union-find over vertices and edges in filtration order."""
    ncell = len(dims)
    st = _strides(shape)
    rank = np.empty(ncell, np.int64)
    rank[order] = np.arange(ncell)
    parent = np.arange(ncell)
    out_b = []
    out_d = []
    c = np.empty(len(shape), np.int64)
    for s in order:
        if dims[s] != 1:
            continue
        _coords(s, shape, c)
        ax = 0
        for a in range(len(shape)):
            if c[a] & 1:
                ax = a
        u = _find(parent, s - st[ax])
        v = _find(parent, s + st[ax])
        if u == v:
            continue
        if rank[u] > rank[v]:
            u, v = v, u
        out_b.append(v)
        out_d.append(s)
        parent[v] = u
    return np.array(out_b, np.int64), np.array(out_d, np.int64)


@njit(cache=True)
def _pairs_top(order, dims, shape):
    """(m-1, m) pairs by union-find over top cells plus the outside, in reverse order."""
    m = len(shape)
    ncell = len(dims)
    st = _strides(shape)
    outside = ncell
    parent = np.arange(ncell + 1)
    rank = np.empty(ncell + 1, np.int64)
    rank[order] = np.arange(ncell)
    rank[outside] = ncell
    out_b = []
    out_d = []
    c = np.empty(m, np.int64)
    for q in range(ncell - 1, -1, -1):
        s = order[q]
        if dims[s] != m - 1:
            continue
        _coords(s, shape, c)
        ax = 0
        for a in range(m):
            if not c[a] & 1:
                ax = a
        u = outside if c[ax] == 0 else s - st[ax]
        v = outside if c[ax] == shape[ax] - 1 else s + st[ax]
        u = _find(parent, u)
        v = _find(parent, v)
        if u == v:
            continue
        # the younger hole in reverse order is the one with the lower top value
        if rank[u] < rank[v]:
            u, v = v, u
        out_b.append(s)
        out_d.append(v)
        parent[v] = u
    return np.array(out_b, np.int64), np.array(out_d, np.int64)


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
def _pairs_mid(order, dims, shape, cleared):
    """(1, 2) pairs in 3D by reducing square columns over edge rows."""
    ncell = len(dims)
    st = _strides(shape)
    rank = np.empty(ncell, np.int64)
    rank[order] = np.arange(ncell)
    owner = np.full(ncell, -1, np.int64)      # edge rank -> square with that low
    start = np.zeros(ncell, np.int64)
    length = np.zeros(ncell, np.int64)
    pool = np.empty(1024, np.int64)
    used = 0
    buf = np.empty(64, np.int64)
    tmp = np.empty(64, np.int64)
    out_b = []
    out_d = []
    c = np.empty(3, np.int64)
    for s in order:
        if dims[s] != 2 or cleared[s]:
            continue
        _coords(s, shape, c)
        n = 0
        for a in range(3):
            if c[a] & 1:
                buf[n] = rank[s - st[a]]
                buf[n + 1] = rank[s + st[a]]
                n += 2
        buf[:n].sort()
        while n > 0:
            k = owner[buf[n - 1]]
            if k < 0:
                break
            mlen = length[k]
            if n + mlen > tmp.shape[0]:
                tmp = np.empty(2 * (n + mlen), np.int64)
            if n + mlen > buf.shape[0]:
                nb = np.empty(2 * (n + mlen), np.int64)
                nb[:n] = buf[:n]
                buf = nb
            n = _symdiff(buf, n, pool[start[k]:], mlen, tmp)
            buf, tmp = tmp, buf
        if n == 0:
            continue
        owner[buf[n - 1]] = s
        out_b.append(order[buf[n - 1]])
        out_d.append(s)
        if used + n > pool.shape[0]:
            bigger = np.empty(2 * (used + n), np.int64)
            bigger[:used] = pool[:used]
            pool = bigger
        pool[used:used + n] = buf[:n]
        start[s] = used
        length[s] = n
        used += n
    return np.array(out_b, np.int64), np.array(out_d, np.int64)


def cubical_persistence(field: GridField, alpha_max: float = math.inf) -> Diagram:
    """Diagram (epsilon units) of the lower-star filtration of ``field``."""
    vals = _doubled(field.values)
    if math.isfinite(alpha_max):
        vals = np.minimum(vals, alpha_max)
    shape = np.array(vals.shape, np.int64)
    m = len(shape)
    flat = vals.ravel()
    parity = np.indices(vals.shape).reshape(m, -1) & 1
    dims = parity.sum(0).astype(np.int64)
    order = np.lexsort((np.arange(len(flat)), dims, flat))
    degs, births, deaths = [], [], []
    b, d = _pairs_low(order, dims, shape)
    degs.append(np.zeros(len(b), np.int64))
    births.append(flat[b])
    deaths.append(flat[d])
    b, d = _pairs_top(order, dims, shape)
    degs.append(np.full(len(b), m - 1, np.int64))
    births.append(flat[b])
    deaths.append(flat[d])
    if m == 3:
        cleared = np.zeros(len(flat), bool)
        cleared[b] = True
        b, d = _pairs_mid(order, dims, shape, cleared)
        degs.append(np.ones(len(b), np.int64))
        births.append(flat[b])
        deaths.append(flat[d])
    deg = np.concatenate(degs)
    bb = np.concatenate(births)
    dd = np.concatenate(deaths)
    keep = dd - bb > 1e-12 * np.maximum(dd, 1.0)
    trunc = dd[keep] >= alpha_max
    essential = (1,) + (0,) * (m - 1)
    return Diagram(deg[keep], bb[keep], dd[keep], Convention.EPSILON, 0.0, essential, trunc)


def cubical_diagram(points, r: float, h: float, alpha_max: float = math.inf,
                    max_vertices: int = MAX_GRID_VERTICES) -> Diagram:
    """Persistence of the r + eps neighbourhoods of ``points`` from a grid of spacing h.

    Each endpoint is within h*sqrt(m)/2 of the exact value.
    """
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    field = grid_field(points, r, h, max_vertices=max_vertices)
    d = cubical_persistence(field, alpha_max)
    return Diagram(d.degrees, d.births, d.deaths, Convention.EPSILON, r,
                   d.essential_count, d.truncated)
