"""Point samples with closed-form persistence diagrams."""

from __future__ import annotations

import math

import numpy as np

from ..core import Convention, Diagram, is_noise


def _diagram(rows, r=0.0, essential=(1, 0)) -> Diagram:
    rows = [(k, b, d) for k, b, d in rows if not is_noise(b, d)]
    if not rows:
        return Diagram([], [], [], Convention.EPSILON, r, essential)
    deg, b, d = zip(*rows)
    return Diagram(deg, b, d, Convention.EPSILON, r, essential)


def arc_diagram(r: float, theta: float) -> Diagram:
    """Diagram of a circular arc of radius r spanning the angle pi + 2*theta."""
    if r <= 0 or not 0 < theta <= math.pi / 2:
        raise ValueError("need r > 0 and 0 < theta <= pi/2")
    return _diagram([(1, r * math.cos(theta), r)])


def arc_points(r: float, theta: float, n: int) -> np.ndarray:
    """n evenly spaced points on that arc, endpoints included."""
    phi = np.linspace(-theta, math.pi + theta, n)
    return r * np.column_stack([np.cos(phi), np.sin(phi)])


SIERPINSKI_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])


def sierpinski_levels(rho: float, k: int) -> tuple[float, float]:
    """Birth and death of the level-k holes of the generalized Sierpinski triangle."""
    b = rho ** k * (0.5 - rho)
    d = rho ** k * math.sqrt(1 / 3 - rho + rho ** 2 - rho ** 3 + rho ** 4)
    return b, d


def sierpinski_points(rho: float, depth: int) -> tuple[np.ndarray, Diagram]:
    """Vertices of the 3^(depth-1) smallest triangles, plus the fractal's diagram.

    The diagram lists the holes of levels 0 <= k < depth - 1; a finite sample
    only reproduces the coarser of them exactly.
    """
    if not 0 < rho <= 0.5:
        raise ValueError("rho must lie in (0, 1/2]")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    pts = SIERPINSKI_VERTICES.copy()
    for _ in range(depth - 1):
        pts = np.concatenate([v + rho * (pts - v) for v in SIERPINSKI_VERTICES])
    if rho == 0.5:
        # neighbouring triangles share corners
        pts = np.unique(np.round(pts, 12), axis=0)
    rows = []
    for k in range(depth - 1):
        b, d = sierpinski_levels(rho, k)
        rows += [(1, b, d)] * 3 ** k
        rows += [(0, 0.0, b)] * (2 * 3 ** k)
    return pts, _diagram(rows)


def comb_set(rho: float, ell: int, depth: int) -> tuple[np.ndarray, Diagram]:
    """Finite piece of the real-line set with ell^k gaps at scale k.

    Gaps at level k are 4*rho^k so that the ell^k components they separate
    merge at eps = 2*rho^k and the P.H. points sit at (rho^k, pi/2).
    """
    if not 0 < rho < 1 or ell < 1 or int(ell) != ell:
        raise ValueError("need 0 < rho < 1 and integer ell >= 1")
    gaps = np.concatenate([np.full(ell ** k, 4 * rho ** k) for k in range(1, depth + 1)])
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    deaths = np.concatenate([np.full(ell ** k, 2 * rho ** k) for k in range(1, depth + 1)])
    diag = Diagram(np.zeros(len(deaths), np.int64), np.zeros(len(deaths)), deaths,
                   Convention.EPSILON, 0.0, (1,))
    return x[:, None], diag
