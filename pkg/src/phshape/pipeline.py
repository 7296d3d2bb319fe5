"""Polymer -> filtration -> diagram -> P.H. points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Diagram, Polymer, PHPoints, diameter, ph_points
from .delaunay_alpha import (DEFAULT_JITTER, DegenerateInputError, FilteredComplex,
                             alpha_filtration, delaunay, truncate_filtration)
from .persistence import compute_persistence, to_epsilon_units

# intervals shorter than this many jitter magnitudes are below resolution
RESOLUTION_JITTERS = 10.0


@dataclass(frozen=True, eq=False)
class Analysis:
    alpha: Diagram
    epsilon: Diagram
    complex: FilteredComplex
    delta: float

    def points(self, degree: Optional[int] = None) -> PHPoints:
        return ph_points(self.epsilon, degree)


def drop_short(d: Diagram, min_lifetime: float) -> Diagram:
    keep = d.deaths - d.births > min_lifetime
    return Diagram(d.degrees[keep], d.births[keep], d.deaths[keep], d.convention, d.radius,
                   d.essential_count, d.truncated[keep], d.pair_count)


def _flat_filtration(pts: np.ndarray, jitter_scale: float, seed: int):
    """Alpha filtration of points whose affine hull is lower-dimensional.

    Alpha values only depend on distances inside the hull, so the points are
    expressed in orthonormal hull coordinates: a path when they are collinear,
    a planar triangulation when they are coplanar in 3D.
    """
    c = pts - pts.mean(0)
    _, sv, vt = np.linalg.svd(c, full_matrices=False)
    rank = int((sv > 1e-9 * max(sv[0], 1e-300)).sum()) if len(sv) else 0
    if rank >= pts.shape[1]:
        raise DegenerateInputError("points are affinely degenerate after jitter")
    if rank == 2:
        tri = delaunay(c @ vt[:2].T, jitter_scale, seed)
        return alpha_filtration(tri), tri.jitter_applied
    n = len(pts)
    order = np.argsort(c @ vt[0]) if rank == 1 else np.arange(n)
    gaps = np.linalg.norm(np.diff(pts[order], axis=0), axis=1)
    if rank == 0 and n > 1:
        raise DegenerateInputError("repeated points")
    simplices = [(i,) for i in range(n)] + [tuple(e) for e in zip(order[:-1], order[1:])]
    values = [0.0] * n + list(gaps / 2)
    return FilteredComplex.from_simplices(simplices, values), 0.0


def analyze_points(centers, r: float = 0.0, alpha_max: Optional[float] = None,
                   jitter_scale: float = DEFAULT_JITTER, seed: int = 0) -> Analysis:
    """Persistence of the union of r-balls around ``centers``.

    ``alpha_max`` defaults to the diameter of the union, beyond which every
    class has died; pass ``math.inf`` to keep the whole triangulation.
    """
    pts = np.asarray(centers, dtype=float)
    poly = Polymer(pts, r)
    delta = diameter(poly)
    try:
        tri = delaunay(pts, jitter_scale, seed)
        fc, jitter = alpha_filtration(tri), tri.jitter_applied
    except DegenerateInputError:
        fc, jitter = _flat_filtration(pts, jitter_scale, seed)
    fc = truncate_filtration(fc, delta if alpha_max is None else alpha_max)
    alpha = drop_short(compute_persistence(fc), RESOLUTION_JITTERS * jitter)
    return Analysis(alpha, to_epsilon_units(alpha, r), fc, delta)


def analyze_polymer(p: Polymer, alpha_max: Optional[float] = None,
                    jitter_scale: float = DEFAULT_JITTER) -> Analysis:
    return analyze_points(p.centers, p.ball_radius, alpha_max, jitter_scale, p.seed)
