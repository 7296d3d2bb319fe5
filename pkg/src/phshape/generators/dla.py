"""Off-lattice diffusion-limited aggregation of unit balls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import Polymer, PolymerKind
from ._rng import numba_seed
from .branched import _hash_cells, _unit

RADIUS = 1.0
NEAR_RINGS = 2


@dataclass(frozen=True)
class DlaConfig:
    """Walkers start on a sphere of radius launch_factor*(cluster radius + 2r)
    and are relaunched once they pass kill_factor times that radius.

    A walker sticks once its gap to the cluster drops below stick_tol*r; it is
    then projected onto exact tangency with the nearest ball.
    """
    n_balls: int
    ambient_dim: int = 2
    launch_factor: float = 2.0
    kill_factor: float = 10.0
    seed: int = 0
    stick_tol: float = 1e-6

    def __post_init__(self):
        if self.n_balls < 1:
            raise ValueError("n_balls must be >= 1")
        if self.ambient_dim not in (2, 3):
            raise ValueError("ambient_dim must be 2 or 3")
        if not self.launch_factor > 1:
            raise ValueError("launch_factor must be > 1")
        if not self.kill_factor > self.launch_factor:
            raise ValueError("kill_factor must exceed launch_factor")
        if not 0 < self.stick_tol < 1:
            raise ValueError("stick_tol must lie in (0, 1)")


@njit(cache=True)
def _nearest(w, pos, cell, mask, head, nxt, rings):
    """Nearest center among the cells within ``rings`` of w's cell."""
    dim = w.shape[0]
    c0 = np.int64(np.floor(w[0] / cell))
    c1 = np.int64(np.floor(w[1] / cell))
    c2 = np.int64(np.floor(w[2] / cell)) if dim == 3 else np.int64(0)
    rz = rings if dim == 3 else 0
    best = np.inf
    arg = -1
    for i in range(-rings, rings + 1):
        for j in range(-rings, rings + 1):
            for k in range(-rz, rz + 1):
                v = head[_hash_cells(c0 + i, c1 + j, c2 + k, mask)]
                while v >= 0:
                    d2 = 0.0
                    for d in range(dim):
                        s = w[d] - pos[v, d]
                        d2 += s * s
                    if d2 < best:
                        best = d2
                        arg = v
                    v = nxt[v]
    return np.sqrt(best), arg


@njit(cache=True)
def _grow(n, dim, launch_factor, kill_factor, stick_tol, seed, r):
    np.random.seed(seed)
    pos = np.zeros((n, dim))
    edges = np.empty((max(n - 1, 0), 2), np.int64)
    cell = 4 * r
    size = 1
    while size < 2 * n:
        size *= 2
    mask = size - 1
    head = np.full(size, -1, np.int64)
    nxt = np.full(n, -1, np.int64)
    head[_hash_cells(0, 0, 0, mask)] = 0
    cluster_r = 0.0
    near = NEAR_RINGS * cell - 2 * r
    tol = stick_tol * r
    steps = 0
    relaunches = 0
    w = np.empty(dim)
    for k in range(1, n):
        launch = launch_factor * (cluster_r + 2 * r)
        w[:] = launch * _unit(dim)
        while True:
            steps += 1
            rho = np.sqrt((w * w).sum())
            if rho > kill_factor * launch:
                relaunches += 1
                w[:] = launch * _unit(dim)
                continue
            far = rho - cluster_r - 2 * r
            if far > near:
                step = far
            else:
                dmin, j = _nearest(w, pos, cell, mask, head, nxt, NEAR_RINGS)
                gap = dmin - 2 * r
                if gap <= tol:
                    for d in range(dim):
                        pos[k, d] = pos[j, d] + 2 * r * (w[d] - pos[j, d]) / dmin
                    edges[k - 1, 0] = j
                    edges[k - 1, 1] = k
                    c0 = np.int64(np.floor(pos[k, 0] / cell))
                    c1 = np.int64(np.floor(pos[k, 1] / cell))
                    c2 = np.int64(np.floor(pos[k, 2] / cell)) if dim == 3 else np.int64(0)
                    h = _hash_cells(c0, c1, c2, mask)
                    nxt[k] = head[h]
                    head[h] = k
                    cluster_r = max(cluster_r, np.sqrt((pos[k] * pos[k]).sum()))
                    break
                step = max(far, min(gap, near))
            w += step * _unit(dim)
    return pos, edges, steps, relaunches


def grow_cluster(cfg: DlaConfig):
    """Returns (centers, edges, walker steps, relaunches)."""
    return _grow(cfg.n_balls, cfg.ambient_dim, cfg.launch_factor, cfg.kill_factor, cfg.stick_tol,
                 numba_seed(cfg.seed), RADIUS)


def gen_brownian_tree(cfg: DlaConfig) -> Polymer:
    pos, edges, _, _ = grow_cluster(cfg)
    return Polymer(pos, RADIUS, PolymerKind.BROWNIAN_TREE, cfg.seed, edges)
