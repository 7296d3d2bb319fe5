"""Domain types shared across the package and the interval -> P.H. point map."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

HALF_PI = math.pi / 2

# relative tolerance for tangency / non-overlap checks (in units of r)
CONTACT_RTOL = 1e-9


def is_noise(birth: float, death: float) -> bool:
    """True when an interval is too short to be anything but round-off."""
    return death - birth <= 1e-12 * max(death, 1.0)


class PolymerKind(str, enum.Enum):
    BRANCHED_POLYMER = "BranchedPolymer"
    BROWNIAN_TREE = "BrownianTree"
    SELF_AVOIDING_WALK = "SelfAvoidingWalk"
    POINT_SAMPLE = "PointSample"


class Convention(str, enum.Enum):
    ALPHA = "AlphaUnits"
    EPSILON = "EpsilonUnits"


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Polymer:
    """A finite union of equal balls (or a bare point sample when r = 0)."""

    centers: np.ndarray
    ball_radius: float
    kind: PolymerKind = PolymerKind.POINT_SAMPLE
    seed: int = 0
    adjacency: Optional[np.ndarray] = None

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim != 2 or centers.shape[1] not in (2, 3):
            raise ValueError(f"centers must be an (n, 2) or (n, 3) array, got {centers.shape}")
        if self.ball_radius < 0:
            raise ValueError("ball_radius must be non-negative")
        object.__setattr__(self, "centers", _frozen(centers, float))
        object.__setattr__(self, "kind", PolymerKind(self.kind))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "ball_radius", float(self.ball_radius))
        if self.adjacency is not None:
            adj = np.asarray(self.adjacency, dtype=np.int64).reshape(-1, 2)
            object.__setattr__(self, "adjacency", _frozen(adj, np.int64))

    @property
    def ambient_dim(self) -> int:
        return self.centers.shape[1]

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class PersistenceInterval:
    degree: int
    birth: float
    death: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if not self.birth >= 0:
            raise ValueError(f"birth must be >= 0, got {self.birth}")
        if is_noise(self.birth, self.death):
            raise ValueError(f"degenerate interval ({self.birth}, {self.death})")


@dataclass(frozen=True)
class PHPoint:
    degree: int
    size: float
    aspect: float


@dataclass(frozen=True)
class AspectWindow:
    lo: float = 0.0
    hi: float = HALF_PI

    def __post_init__(self):
        if self.lo < 0 or self.hi > HALF_PI + 1e-15 or not self.lo < self.hi:
            raise ValueError(f"invalid aspect window [{self.lo}, {self.hi}]")

    def contains(self, y):
        return (y >= self.lo) & (y <= self.hi)


FULL_WINDOW = AspectWindow()


@dataclass(frozen=True, eq=False)
class Diagram:
    """A multiset of persistence intervals stored column-wise.

    ``truncated`` marks intervals whose death was forced by a filtration cut.
    ``pair_count`` counts every birth/death pairing made by the reduction,
    including zero-length ones that are not stored.
    """

    degrees: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    convention: Convention = Convention.ALPHA
    radius: float = 0.0
    essential_count: tuple = (1,)
    truncated: Optional[np.ndarray] = None
    pair_count: int = -1

    def __post_init__(self):
        deg = _frozen(self.degrees, np.int64).reshape(-1)
        b = _frozen(self.births, float).reshape(-1)
        d = _frozen(self.deaths, float).reshape(-1)
        if not (len(deg) == len(b) == len(d)):
            raise ValueError("degrees, births and deaths must have equal length")
        tr = self.truncated
        tr = np.zeros(len(deg), dtype=bool) if tr is None else np.asarray(tr, dtype=bool)
        object.__setattr__(self, "degrees", deg)
        object.__setattr__(self, "births", b)
        object.__setattr__(self, "deaths", d)
        object.__setattr__(self, "truncated", _frozen(tr, bool))
        object.__setattr__(self, "convention", Convention(self.convention))
        object.__setattr__(self, "essential_count", tuple(int(c) for c in self.essential_count))

    @classmethod
    def from_intervals(cls, intervals: Sequence[PersistenceInterval], **kw) -> "Diagram":
        ivs = list(intervals)
        return cls(
            np.array([iv.degree for iv in ivs], dtype=np.int64),
            np.array([iv.birth for iv in ivs], dtype=float),
            np.array([iv.death for iv in ivs], dtype=float),
            **kw,
        )

    def __len__(self) -> int:
        return len(self.degrees)

    def intervals(self, degree: Optional[int] = None) -> Iterator[PersistenceInterval]:
        for i, b, d in zip(self.degrees, self.births, self.deaths):
            if degree is None or i == degree:
                yield PersistenceInterval(int(i), float(b), float(d))

    def in_degree(self, degree: int) -> np.ndarray:
        """(k, 2) array of (birth, death) pairs in one degree, sorted."""
        m = self.degrees == degree
        out = np.column_stack([self.births[m], self.deaths[m]])
        return out[np.lexsort((out[:, 1], out[:, 0]))] if len(out) else out.reshape(0, 2)

    def lifetimes(self) -> np.ndarray:
        return self.deaths - self.births


def ph_point_from_interval(iv: PersistenceInterval) -> PHPoint:
    """Size is the interval midpoint; aspect is arcsec(death/birth)."""
    size = 0.5 * (iv.birth + iv.death)
    aspect = HALF_PI if iv.birth == 0 else math.acos(iv.birth / iv.death)
    return PHPoint(iv.degree, size, aspect)


@dataclass(frozen=True, eq=False)
class PHPoints:
    """Column-wise multiset of P.H. points."""

    degrees: np.ndarray
    sizes: np.ndarray
    aspects: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "degrees", _frozen(self.degrees, np.int64).reshape(-1))
        object.__setattr__(self, "sizes", _frozen(self.sizes, float).reshape(-1))
        object.__setattr__(self, "aspects", _frozen(self.aspects, float).reshape(-1))

    def __len__(self) -> int:
        return len(self.sizes)

    def __iter__(self) -> Iterator[PHPoint]:
        for i, x, y in zip(self.degrees, self.sizes, self.aspects):
            yield PHPoint(int(i), float(x), float(y))

    def select(self, degree: int) -> "PHPoints":
        m = self.degrees == degree
        return PHPoints(self.degrees[m], self.sizes[m], self.aspects[m])

    @classmethod
    def concat(cls, parts: Sequence["PHPoints"]) -> "PHPoints":
        parts = list(parts)
        if not parts:
            return cls(np.zeros(0, np.int64), np.zeros(0), np.zeros(0))
        return cls(
            np.concatenate([p.degrees for p in parts]),
            np.concatenate([p.sizes for p in parts]),
            np.concatenate([p.aspects for p in parts]),
        )


def ph_points(diagram: Diagram, degree: Optional[int] = None) -> PHPoints:
    """Vectorised :func:`ph_point_from_interval` over a whole diagram."""
    m = np.ones(len(diagram), bool) if degree is None else diagram.degrees == degree
    b, d = diagram.births[m], diagram.deaths[m]
    aspect = np.full(len(b), HALF_PI)
    pos = b > 0
    aspect[pos] = np.arccos(b[pos] / d[pos])
    return PHPoints(diagram.degrees[m], 0.5 * (b + d), aspect)


def interval_from_ph_point(size: float, aspect: float) -> tuple[float, float]:
    """Inverse of the P.H. point map for aspect < pi/2."""
    sec = 1.0 / math.cos(aspect)
    return 2 * size / (1 + sec), 2 * size * sec / (1 + sec)


def max_pairwise_distance(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return 0.0
    cand = points
    if len(points) > 64:
        try:
            cand = points[ConvexHull(points).vertices]
        except QhullError:
            # flat input; the extreme pair is still among the coordinate extremes of a line
            pass
    if len(cand) > 4000:
        cand = cand[np.unique(np.r_[cand.argmin(0), cand.argmax(0)])]
    best = 0.0
    for start in range(0, len(cand), 512):
        block = cand[start:start + 512]
        d2 = ((block[:, None, :] - cand[None, :, :]) ** 2).sum(-1)
        best = max(best, float(d2.max()))
    return math.sqrt(best)


def diameter(p: Polymer) -> float:
    """Largest distance between two points of the union of balls."""
    if p.n == 0:
        raise ValueError("empty polymer has no diameter")
    return max_pairwise_distance(p.centers) + 2 * p.ball_radius


def validate_polymer(p: Polymer) -> list[str]:
    """Return human-readable invariant violations (empty when valid)."""
    out: list[str] = []
    c, r, n = p.centers, p.ball_radius, p.n
    if n == 0:
        return ["polymer has no centers"]
    if not np.all(np.isfinite(c)):
        out.append("non-finite center coordinates")
        return out
    tol = CONTACT_RTOL * r
    adjacent = set()
    if p.adjacency is not None:
        for k, (i, j) in enumerate(p.adjacency):
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                out.append(f"adjacency entry {k} ({i}, {j}) is not a pair of distinct valid indices")
                continue
            adjacent.add((min(i, j), max(i, j)))
            dist = float(np.linalg.norm(c[i] - c[j]))
            if abs(dist - 2 * r) > tol:
                out.append(f"adjacent pair ({i}, {j}) not tangent: distance {dist!r}, expected {2 * r!r}")
        if not _spans_connected(n, adjacent):
            out.append("adjacency does not connect all centers")
    tree = cKDTree(c)
    if r > 0:
        for i, j in sorted(tree.query_pairs(2 * r - tol)):
            d = float(np.linalg.norm(c[i] - c[j]))
            if (i, j) in adjacent:
                continue
            out.append(f"balls {i} and {j} overlap: distance {d!r} < {2 * r!r}")
    dup = tree.query_pairs(0.0) if r == 0 else set()
    for i, j in sorted(dup):
        out.append(f"centers {i} and {j} coincide")
    return out


def _spans_connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = n
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            comps -= 1
    return comps == 1
