"""Delaunay triangulations and alpha-complex filtrations in 2D and 3D."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _delaunay

DEFAULT_JITTER = 1e-9

# relative Gram determinant below which a simplex counts as flat
_FLAT_RTOL = 1e-20


class DegenerateInputError(ValueError):
    """Input points do not span the ambient space (or repeat)."""


def _morton_keys(points: np.ndarray, bits: int = 16) -> np.ndarray:
    lo = points.min(0)
    span = float((points.max(0) - lo).max()) or 1.0
    q = ((points - lo) / span * ((1 << bits) - 1)).astype(np.int64)
    key = np.zeros(len(points), np.int64)
    dim = points.shape[1]
    for b in range(bits):
        for d in range(dim):
            key |= ((q[:, d] >> b) & 1) << (b * dim + d)
    return key


def insertion_order(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Biased randomized insertion order: geometric rounds, Morton order within a round."""
    n = len(points)
    # round k holds about half of the points of round k + 1
    rounds = np.minimum(rng.geometric(0.5, size=n), 64)
    key = _morton_keys(points)
    return np.lexsort((key, rounds))[::-1].copy()


def _face_keys(rows: np.ndarray, n: int) -> np.ndarray:
    key = np.zeros(len(rows), np.int64)
    for j in range(rows.shape[1]):
        key = key * n + rows[:, j]
    return key


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Delaunay triangulation with all faces enumerated.

    ``simplices[k]`` is an (n_k, k+1) array of sorted vertex tuples and
    ``facets[k][s, j]`` is the row in ``simplices[k-1]`` of the face of
    simplex ``s`` that omits its ``j``-th vertex.
    """

    points: np.ndarray
    vertices: np.ndarray
    simplices: tuple
    facets: tuple
    jitter_applied: float
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def counts(self) -> tuple:
        return tuple(len(s) for s in self.simplices)


def delaunay(points, jitter_scale: float = DEFAULT_JITTER, seed: int = 0,
             verify: bool = True) -> Triangulation:
    """Delaunay triangulation of ``points`` after a seeded jitter.

    The jitter has magnitude ``jitter_scale`` times the bounding-box diagonal
    and only breaks ties; predicates on the jittered points are exact.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise ValueError(f"points must be (n, 2) or (n, 3), got {pts.shape}")
    n, dim = pts.shape
    if n < dim + 1:
        raise DegenerateInputError(f"need at least {dim + 1} points in {dim}D, got {n}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinates")
    rng = np.random.default_rng(seed)
    diag = float(np.linalg.norm(pts.max(0) - pts.min(0)))
    jitter = jitter_scale * diag
    work = pts + rng.uniform(-jitter, jitter, size=pts.shape) if jitter > 0 else pts.copy()
    order = insertion_order(work, rng)
    V, N, alive, status = _delaunay.build(work, order, int(rng.integers(2**31 - 1)))
    if status == _delaunay.ERR_DUPLICATE:
        raise DegenerateInputError("repeated points")
    if status != _delaunay.OK:
        raise DegenerateInputError(f"points are affinely degenerate in {dim}D")
    if verify:
        bad = _delaunay.check(work, V, N, alive)
        if bad:
            raise RuntimeError(f"triangulation failed verification ({bad} violations)")
    K = dim + 1
    top = V[alive & np.all(V[:, :K] < n, axis=1), :K]
    top = np.sort(top, axis=1)
    top = top[np.lexsort(top.T[::-1])]
    simplices = [None] * (dim + 1)
    facets = [None] * (dim + 1)
    simplices[dim] = top
    facets[0] = np.zeros((n, 0), np.int64)
    for k in range(dim, 1, -1):
        upper = simplices[k]
        rows = np.concatenate([np.delete(upper, j, axis=1) for j in range(k + 1)])
        keys, first, inv = np.unique(_face_keys(rows, n), return_index=True, return_inverse=True)
        simplices[k - 1] = rows[first]
        facets[k] = inv.reshape(k + 1, len(upper)).T.copy()
    simplices[0] = np.arange(n, dtype=np.int64).reshape(-1, 1)
    facets[1] = simplices[1][:, ::-1].copy()
    for arr in simplices + facets:
        arr.setflags(write=False)
    return Triangulation(pts, work, tuple(simplices), tuple(facets), jitter, seed)


def circumspheres(coords: np.ndarray, simplices: np.ndarray):
    """Centres and squared radii of the smallest circumspheres.

    Cross-product closed forms in extended precision; the Gram-matrix route
    loses several digits on thin simplices.  Flat simplices get ``inf`` radius.
    """
    k = simplices.shape[1] - 1
    P = np.asarray(coords, dtype=np.longdouble)
    p0 = P[simplices[:, 0]]
    if k == 0:
        return p0.astype(float), np.zeros(len(simplices))
    u = P[simplices[:, 1]] - p0
    uu = (u * u).sum(1)
    dim = P.shape[1]
    if k == 1:
        off = 0.5 * u
        flat = np.zeros(len(u), bool)
    elif k == 2:
        v = P[simplices[:, 2]] - p0
        vv = (v * v).sum(1)
        if dim == 2:
            w = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            num = np.stack([v[:, 1] * uu - u[:, 1] * vv, u[:, 0] * vv - v[:, 0] * uu], 1)
            den = 2 * w
            flat = ~(w * w > _FLAT_RTOL * uu * vv)
        else:
            n = np.cross(u, v)
            nn = (n * n).sum(1)
            num = uu[:, None] * np.cross(v, n) + vv[:, None] * np.cross(n, u)
            den = 2 * nn
            flat = ~(nn > _FLAT_RTOL * uu * vv)
        den = np.where(flat, 1, den)
        off = num / den[:, None]
    else:
        v = P[simplices[:, 2]] - p0
        w = P[simplices[:, 3]] - p0
        vv = (v * v).sum(1)
        ww = (w * w).sum(1)
        vol = (u * np.cross(v, w)).sum(1)
        num = (uu[:, None] * np.cross(v, w) + vv[:, None] * np.cross(w, u)
               + ww[:, None] * np.cross(u, v))
        flat = ~(vol * vol > _FLAT_RTOL * uu * vv * ww)
        off = num / (2 * np.where(flat, 1, vol))[:, None]
    r2 = (off * off).sum(1).astype(float)
    r2[flat] = np.inf
    return (p0 + off).astype(float), r2


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Simplices sorted by (value, dim, vertex tuple) with boundaries in CSR form.

    ``boundary_idx[boundary_ptr[s]:boundary_ptr[s+1]]`` are the positions of
    the facets of simplex ``s``.  ``alpha_max`` is finite when the filtration
    was cut and classes alive there must be reported as truncated.
    """

    verts: np.ndarray
    dims: np.ndarray
    values: np.ndarray
    boundary_ptr: np.ndarray
    boundary_idx: np.ndarray
    alpha_max: float = math.inf

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if len(self.dims) else -1

    def simplex(self, s: int) -> tuple:
        return tuple(int(v) for v in self.verts[s, : self.dims[s] + 1])

    def __iter__(self) -> Iterator[tuple]:
        for s in range(len(self)):
            yield self.simplex(s), int(self.dims[s]), float(self.values[s])

    def boundary(self, s: int) -> np.ndarray:
        return self.boundary_idx[self.boundary_ptr[s]:self.boundary_ptr[s + 1]]

    def check_monotone(self) -> None:
        """Raise if some face comes later or has a larger value than its coface."""
        cols = np.repeat(np.arange(len(self)), np.diff(self.boundary_ptr))
        if np.any(self.boundary_idx >= cols):
            raise ValueError("a face is ordered after its coface")
        if np.any(self.values[self.boundary_idx] > self.values[cols]):
            raise ValueError("a face has a larger filtration value than its coface")
        if np.any(self.values < 0) or np.any(np.diff(self.values) < 0):
            raise ValueError("filtration values must be non-negative and sorted")

    @classmethod
    def from_simplices(cls, simplices: Sequence[Sequence[int]], values: Sequence[float],
                       alpha_max: float = math.inf) -> "FilteredComplex":
        """Build from explicit simplices; every face must be listed too."""
        tuples = [tuple(sorted(int(v) for v in s)) for s in simplices]
        if len(set(tuples)) != len(tuples):
            raise ValueError("repeated simplex")
        width = max((len(t) for t in tuples), default=1)
        verts = np.full((len(tuples), width), -1, np.int64)
        for i, t in enumerate(tuples):
            verts[i, : len(t)] = t
        dims = np.array([len(t) - 1 for t in tuples], np.int64)
        vals = np.asarray(values, dtype=float)
        order = _sort_order(verts, dims, vals)
        pos = {tuples[i]: p for p, i in enumerate(order)}
        ptr = [0]
        idx = []
        for i in order:
            t = tuples[i]
            if len(t) > 1:
                for j in range(len(t)):
                    face = t[:j] + t[j + 1:]
                    if face not in pos:
                        raise ValueError(f"face {face} of {t} missing")
                    idx.append(pos[face])
            ptr.append(len(idx))
        bidx = np.array(idx, np.int64)
        bptr = np.array(ptr, np.int64)
        for a, b in zip(ptr[:-1], ptr[1:]):
            bidx[a:b].sort()
        fc = cls(verts[order], dims[order], vals[order], bptr, bidx, alpha_max)
        fc.check_monotone()
        return fc

    def rows(self) -> Iterator[list]:
        """Rows of the debug dump ``alpha,dim,v0,...``."""
        for s in range(len(self)):
            yield [float(self.values[s]), int(self.dims[s]), *self.simplex(s)]


def _sort_order(verts: np.ndarray, dims: np.ndarray, values: np.ndarray) -> np.ndarray:
    keys = [verts[:, j] for j in range(verts.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [dims, values])


def alpha_values(t: Triangulation) -> list:
    """Filtration value of every simplex, per dimension, from the unjittered points."""
    dim = t.dim
    vals = [None] * (dim + 1)
    _, r2 = circumspheres(t.points, t.simplices[dim])
    bad = ~np.isfinite(r2)
    if bad.any():
        # flat in the original coordinates; the jittered cell is not
        _, r2j = circumspheres(t.vertices, t.simplices[dim][bad])
        r2[bad] = r2j
    vals[dim] = np.sqrt(r2)
    for k in range(dim - 1, 0, -1):
        cen, r2 = circumspheres(t.points, t.simplices[k])
        upper = t.simplices[k + 1]
        inc = t.facets[k + 1]
        attached = np.zeros(len(cen), bool)
        inherited = np.full(len(cen), np.inf)
        for j in range(k + 2):
            f = inc[:, j]
            opp = t.points[upper[:, j]]
            inside = np.einsum("md,md->m", opp - cen[f], opp - cen[f]) < r2[f]
            attached[f[inside]] = True
            np.minimum.at(inherited, f, vals[k + 1])
        own = np.where(attached, np.inf, np.sqrt(r2))
        vals[k] = np.minimum(own, inherited)
    if bad.any():
        # a cell with no volume encloses nothing: it enters with its last facet
        last = vals[dim - 1][t.facets[dim][bad]].max(axis=1)
        vals[dim][bad] = np.minimum(vals[dim][bad], last)
    vals[0] = np.zeros(len(t.simplices[0]))
    return vals


def alpha_filtration(t: Triangulation) -> FilteredComplex:
    """Alpha-complex filtration of the Delaunay triangulation ``t``."""
    dim = t.dim
    vals = alpha_values(t)
    sizes = [len(s) for s in t.simplices]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    verts = np.full((total, dim + 1), -1, np.int64)
    dims = np.empty(total, np.int64)
    for k in range(dim + 1):
        verts[offsets[k]:offsets[k + 1], : k + 1] = t.simplices[k]
        dims[offsets[k]:offsets[k + 1]] = k
    values = np.concatenate(vals)
    order = _sort_order(verts, dims, values)
    pos = np.empty(total, np.int64)
    pos[order] = np.arange(total)
    counts = np.where(dims == 0, 0, dims + 1)[order]
    ptr = np.concatenate([[0], np.cumsum(counts)])
    idx = np.empty(int(ptr[-1]), np.int64)
    for k in range(1, dim + 1):
        faces = pos[t.facets[k] + offsets[k - 1]]
        faces.sort(axis=1)
        starts = ptr[pos[offsets[k]:offsets[k + 1]]]
        idx[starts[:, None] + np.arange(k + 1)] = faces
    fc = FilteredComplex(verts[order], dims[order], values[order], ptr, idx)
    fc.check_monotone()
    return fc


def truncate_filtration(fc: FilteredComplex, alpha_max: float) -> FilteredComplex:
    """Keep simplices with value <= alpha_max; classes alive there become truncated."""
    if alpha_max < 0:
        raise ValueError("alpha_max must be non-negative")
    if len(fc) == 0 or alpha_max >= fc.values[-1]:
        return fc
    m = int(np.searchsorted(fc.values, alpha_max, side="right"))
    ptr = fc.boundary_ptr[: m + 1]
    return FilteredComplex(fc.verts[:m], fc.dims[:m], fc.values[:m], ptr.copy(),
                           fc.boundary_idx[: ptr[-1]].copy(), float(alpha_max))


def check_delaunay(t: Triangulation) -> bool:
    """Empty-circumsphere test of every top simplex against its neighbours' apexes (exact)."""
    from .predicates import incircle, insphere, orient2d, orient3d

    top = t.simplices[t.dim]
    P = t.vertices
    inc = t.facets[t.dim]
    owner = {}
    for s in range(len(top)):
        for j in range(t.dim + 1):
            owner.setdefault(int(inc[s, j]), []).append((s, j))
    for pairs in owner.values():
        if len(pairs) != 2:
            continue
        (s, j), (u, i) = pairs
        a = top[s].copy()
        if _orient(P, a, orient2d, orient3d) < 0:
            a[[0, 1]] = a[[1, 0]]
        q = P[top[u][i]]
        if t.dim == 2:
            v = incircle(*P[a[0]], *P[a[1]], *P[a[2]], *q)
        else:
            v = insphere(P[a[0]], P[a[1]], P[a[2]], P[a[3]], q)
        if v > 0:
            return False
    return True


def _orient(P, a, orient2d, orient3d):
    if len(a) == 3:
        return orient2d(*P[a[0]], *P[a[1]], *P[a[2]])
    return orient3d(P[a[0]], P[a[1]], P[a[2]], P[a[3]])
