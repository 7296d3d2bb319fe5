"""Square-lattice self-avoiding walks by the pivot algorithm.

Long walks are stored in a binary tree whose nodes hold the end point,
bounding box and a lattice symmetry for the right child (the SAW-tree of
Clisby).  A pivot rotates the tree so that the pivot site splits the root,
changes the root's symmetry and tests the two halves for intersection by
descending only into overlapping bounding boxes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from ..core import Polymer, PolymerKind
from ._rng import numba_seed

# dihedral group of the square as integer matrices [[a, b], [c, d]]; 0 is the identity
SYMMETRIES = np.array([
    [1, 0, 0, 1], [0, -1, 1, 0], [-1, 0, 0, -1], [0, 1, -1, 0],
    [1, 0, 0, -1], [-1, 0, 0, 1], [0, 1, 1, 0], [0, -1, -1, 0],
], dtype=np.int64)


def _tables():
    mats = SYMMETRIES.reshape(8, 2, 2)
    index = {tuple(m.ravel()): k for k, m in enumerate(mats)}
    mul = np.array([[index[tuple((mats[a] @ mats[b]).ravel())] for b in range(8)] for a in range(8)])
    inv = np.array([int(np.argmax(mul[a] == 0)) for a in range(8)])
    return mul.astype(np.int64), inv.astype(np.int64)


MUL, INV = _tables()


@dataclass(frozen=True)
class SawConfig:
    n_edges: int
    warmup_accepted_pivots: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_edges < 1:
            raise ValueError("n_edges must be >= 1")

    @property
    def warmup(self) -> int:
        w = self.warmup_accepted_pivots
        return 10 * self.n_edges if w is None else int(w)

    @property
    def tail(self) -> int:
        """Attempted pivots run after the warmup; a fixed count keeps the uniform law."""
        return max(10 * self.n_edges, 1000)


def pivot_step(walk: np.ndarray, site_index: int, symmetry: int) -> Optional[np.ndarray]:
    """Apply lattice symmetry ``symmetry`` (1..7) to the part of ``walk`` after ``site_index``.

    Returns the new walk, or None when the result is not self-avoiding.
    """
    if not 1 <= symmetry <= 7:
        raise ValueError("symmetry must be one of the 7 non-identity elements (1..7)")
    walk = np.asarray(walk, dtype=np.int64)
    n = len(walk) - 1
    if not 0 <= site_index <= n:
        raise ValueError(f"site_index must lie in [0, {n}]")
    g = SYMMETRIES[symmetry].reshape(2, 2)
    pivot = walk[site_index]
    tail = pivot + (walk[site_index + 1:] - pivot) @ g.T
    head = {tuple(p) for p in walk[: site_index + 1].tolist()}
    seen = set()
    for p in tail.tolist():
        t = tuple(p)
        if t in head or t in seen:
            return None
        seen.add(t)
    return np.concatenate([walk[: site_index + 1], tail])


def is_self_avoiding(walk: np.ndarray) -> bool:
    w = np.asarray(walk)
    steps = np.abs(np.diff(w, axis=0)).sum(1)
    return bool(np.all(steps == 1)) and len({tuple(p) for p in w.tolist()}) == len(w)


# ---------------------------------------------------------------- SAW-tree

SYMS = SYMMETRIES
MULT = MUL
INVS = INV


@njit(cache=True)
def _apply(s, x, y):
    return SYMS[s, 0] * x + SYMS[s, 1] * y, SYMS[s, 2] * x + SYMS[s, 3] * y


@njit(cache=True)
def _box_apply(s, box, ox, oy):
    # image of an axis-aligned box under symmetry s, then translated
    x0, y0 = _apply(s, box[0], box[2])
    x1, y1 = _apply(s, box[1], box[3])
    return min(x0, x1) + ox, max(x0, x1) + ox, min(y0, y1) + oy, max(y0, y1) + oy


@njit(cache=True)
def _merge(ns, lf, rt, sy, X, bx, node):
    L = lf[node]
    R = rt[node]
    g = sy[node]
    ns[node] = ns[L] + ns[R]
    rx, ry = _apply(g, X[R, 0], X[R, 1])
    X[node, 0] = X[L, 0] + rx
    X[node, 1] = X[L, 1] + ry
    bx0, bx1, by0, by1 = _box_apply(g, bx[R], X[L, 0], X[L, 1])
    bx[node, 0] = min(bx[L, 0], bx0)
    bx[node, 1] = max(bx[L, 1], bx1)
    bx[node, 2] = min(bx[L, 2], by0)
    bx[node, 3] = max(bx[L, 3], by1)


@njit(cache=True)
def _build_straight(nsites):
    """Balanced tree for the straight walk; leaves are 0..nsites-1."""
    m = 2 * nsites - 1
    ns = np.zeros(m, np.int64)
    lf = np.full(m, -1, np.int64)
    rt = np.full(m, -1, np.int64)
    sy = np.zeros(m, np.int64)
    X = np.zeros((m, 2), np.int64)
    bx = np.zeros((m, 4), np.int64)
    for i in range(nsites):
        ns[i] = 1
        X[i, 0] = 1
        bx[i, 0] = 1
        bx[i, 1] = 1
    if nsites == 1:
        return ns, lf, rt, sy, X, bx, 0
    # bottom-up pairing keeps the tree balanced
    level = np.arange(nsites)
    nxt = nsites
    while len(level) > 1:
        new = np.empty((len(level) + 1) // 2, np.int64)
        for k in range(len(level) // 2):
            node = nxt
            nxt += 1
            lf[node] = level[2 * k]
            rt[node] = level[2 * k + 1]
            _merge(ns, lf, rt, sy, X, bx, node)
            new[k] = node
        if len(level) % 2:
            new[-1] = level[-1]
        level = new
    return ns, lf, rt, sy, X, bx, level[0]


@njit(cache=True)
def _rotate_right(ns, lf, rt, sy, X, bx, P):
    L = lf[P]
    LL = lf[L]
    LR = rt[L]
    R = rt[P]
    gL = sy[L]
    g = sy[P]
    lf[L] = LR
    rt[L] = R
    sy[L] = MULT[INVS[gL], g]
    _merge(ns, lf, rt, sy, X, bx, L)
    lf[P] = LL
    rt[P] = L
    sy[P] = gL


@njit(cache=True)
def _rotate_left(ns, lf, rt, sy, X, bx, P):
    L = lf[P]
    R = rt[P]
    RL = lf[R]
    RR = rt[R]
    gR = sy[R]
    g = sy[P]
    lf[R] = L
    rt[R] = RL
    sy[R] = g
    _merge(ns, lf, rt, sy, X, bx, R)
    lf[P] = R
    rt[P] = RR
    sy[P] = MULT[g, gR]


@njit(cache=True)
def _split_root(ns, lf, rt, sy, X, bx, root, nleft, path, kinds):
    """Rotate until the root's left child holds ``nleft`` sites; returns the path length."""
    depth = 0
    node = root
    k = nleft
    while ns[lf[node]] != k:
        path[depth] = node
        if k < ns[lf[node]]:
            kinds[depth] = 0          # right rotation here
            node = lf[node]
        else:
            kinds[depth] = 1          # left rotation here
            k -= ns[lf[node]]
            node = rt[node]
        depth += 1
    for q in range(depth - 1, -1, -1):
        if kinds[q] == 0:
            _rotate_right(ns, lf, rt, sy, X, bx, path[q])
        else:
            _rotate_left(ns, lf, rt, sy, X, bx, path[q])
    return depth


@njit(cache=True)
def _unsplit(ns, lf, rt, sy, X, bx, depth, path, kinds):
    for q in range(depth):
        if kinds[q] == 0:
            _rotate_left(ns, lf, rt, sy, X, bx, path[q])
        else:
            _rotate_right(ns, lf, rt, sy, X, bx, path[q])


@njit(cache=True)
def _intersect(ns, lf, rt, sy, X, bx, A, B, ox, oy, g, stack):
    """Do the sites of node A (identity frame) and node B (offset, symmetry g) collide?"""
    # stack rows: nodeA, axo, ayo, ga, nodeB, bxo, byo, gb
    stack[0, 0] = A
    stack[0, 1] = 0
    stack[0, 2] = 0
    stack[0, 3] = 0
    stack[0, 4] = B
    stack[0, 5] = ox
    stack[0, 6] = oy
    stack[0, 7] = g
    top = 1
    while top > 0:
        top -= 1
        a = stack[top, 0]
        ax = stack[top, 1]
        ay = stack[top, 2]
        ga = stack[top, 3]
        b = stack[top, 4]
        qx = stack[top, 5]
        qy = stack[top, 6]
        gb = stack[top, 7]
        a0, a1, a2, a3 = _box_apply(ga, bx[a], ax, ay)
        b0, b1, b2, b3 = _box_apply(gb, bx[b], qx, qy)
        if a1 < b0 or b1 < a0 or a3 < b2 or b3 < a2:
            continue
        if ns[a] == 1 and ns[b] == 1:
            return True
        if top + 2 >= stack.shape[0]:
            return True  # cannot happen for depth-bounded trees; be safe
        if ns[a] >= ns[b]:
            # split a; its right child lies nearer the pivot, so push it last
            L = lf[a]
            R = rt[a]
            lx, ly = _apply(ga, X[L, 0], X[L, 1])
            stack[top, 0] = L
            stack[top, 1] = ax
            stack[top, 2] = ay
            stack[top, 3] = ga
            stack[top, 4] = b
            stack[top, 5] = qx
            stack[top, 6] = qy
            stack[top, 7] = gb
            stack[top + 1, 0] = R
            stack[top + 1, 1] = ax + lx
            stack[top + 1, 2] = ay + ly
            stack[top + 1, 3] = MULT[ga, sy[a]]
            stack[top + 1, 4] = b
            stack[top + 1, 5] = qx
            stack[top + 1, 6] = qy
            stack[top + 1, 7] = gb
        else:
            L = lf[b]
            R = rt[b]
            lx, ly = _apply(gb, X[L, 0], X[L, 1])
            stack[top, 0] = a
            stack[top, 1] = ax
            stack[top, 2] = ay
            stack[top, 3] = ga
            stack[top, 4] = R
            stack[top, 5] = qx + lx
            stack[top, 6] = qy + ly
            stack[top, 7] = MULT[gb, sy[b]]
            stack[top + 1, 0] = a
            stack[top + 1, 1] = ax
            stack[top + 1, 2] = ay
            stack[top + 1, 3] = ga
            stack[top + 1, 4] = L
            stack[top + 1, 5] = qx
            stack[top + 1, 6] = qy
            stack[top + 1, 7] = gb
        top += 2
    return False


@njit(cache=True)
def _tree_pivot(ns, lf, rt, sy, X, bx, root, site, h, path, kinds, stack):
    """Pivot the sites after ``site`` by symmetry h; returns True if accepted."""
    depth = _split_root(ns, lf, rt, sy, X, bx, root, site + 1, path, kinds)
    r = root
    old = sy[r]
    sy[r] = MULT[h, old]
    L = lf[r]
    hit = _intersect(ns, lf, rt, sy, X, bx, L, rt[r], X[L, 0], X[L, 1], sy[r], stack)
    if hit:
        sy[r] = old
    else:
        _merge(ns, lf, rt, sy, X, bx, r)
    _unsplit(ns, lf, rt, sy, X, bx, depth, path, kinds)
    return not hit


@njit(cache=True)
def _tree_sites(ns, lf, rt, sy, X, bx, root):
    n = ns[root]
    out = np.empty((n, 2), np.int64)
    stack = np.empty((256, 4), np.int64)
    stack[0, 0] = root
    stack[0, 1] = 0
    stack[0, 2] = 0
    stack[0, 3] = 0
    top = 1
    k = n
    # right-first so sites come off in reverse order
    while top > 0:
        top -= 1
        node = stack[top, 0]
        ox = stack[top, 1]
        oy = stack[top, 2]
        g = stack[top, 3]
        if ns[node] == 1:
            x, y = _apply(g, 1, 0)
            k -= 1
            out[k, 0] = ox + x
            out[k, 1] = oy + y
            continue
        L = lf[node]
        lx, ly = _apply(g, X[L, 0], X[L, 1])
        stack[top, 0] = L
        stack[top, 1] = ox
        stack[top, 2] = oy
        stack[top, 3] = g
        stack[top + 1, 0] = rt[node]
        stack[top + 1, 1] = ox + lx
        stack[top + 1, 2] = oy + ly
        stack[top + 1, 3] = MULT[g, sy[node]]
        top += 2
    for i in range(n - 1, -1, -1):
        out[i, 0] -= out[0, 0]
        out[i, 1] -= out[0, 1]
    return out


@njit(cache=True)
def _run_tree(n_edges, accepted_target, max_attempts, seed, proposals, tail_attempts):
    np.random.seed(seed)
    ns, lf, rt, sy, X, bx, root = _build_straight(n_edges + 1)
    path = np.empty(1024, np.int64)
    kinds = np.empty(1024, np.int64)
    stack = np.empty((4096, 8), np.int64)
    accepted = 0
    attempts = 0
    tail = -1
    use_given = proposals.shape[0] > 0
    while attempts < max_attempts:
        if tail < 0 and accepted >= accepted_target:
            tail = tail_attempts
        if tail == 0:
            break
        if use_given:
            if attempts >= proposals.shape[0]:
                break
            site = proposals[attempts, 0]
            h = proposals[attempts, 1]
        else:
            site = np.random.randint(0, n_edges)
            h = np.random.randint(1, 8)
        attempts += 1
        if tail > 0:
            tail -= 1
        if _tree_pivot(ns, lf, rt, sy, X, bx, root, site, h, path, kinds, stack):
            accepted += 1
    return _tree_sites(ns, lf, rt, sy, X, bx, root), accepted, attempts


def run_pivot_chain(n_edges: int, accepted: int, seed: int = 0,
                    proposals: Optional[np.ndarray] = None, max_attempts: Optional[int] = None,
                    tail_attempts: int = 0):
    """Run the tree-based pivot chain from the straight walk.

    Stops ``tail_attempts`` attempted pivots after the ``accepted``-th accepted
    one.  Stopping right at an acceptance would sample walks in proportion to
    their acceptance rate, so generators pass a positive tail.  Returns
    (walk, accepted, attempts).  With ``proposals`` given as rows of
    (site, symmetry) those are used in order instead of random draws.
    """
    if n_edges < 1:
        raise ValueError("n_edges must be >= 1")
    props = np.zeros((0, 2), np.int64) if proposals is None else np.asarray(proposals, np.int64)
    if max_attempts is None:
        max_attempts = max(1000 * max(accepted, 1), 10 ** 6) + tail_attempts if n_edges > 1 else 0
    return _run_tree(n_edges, accepted, max_attempts, numba_seed(seed), props, int(tail_attempts))


def saw_to_polymer(walk: np.ndarray, seed: int = 0) -> Polymer:
    """Each unit edge becomes three tangent balls of radius 1/4 (shared vertices once)."""
    w = np.asarray(walk, dtype=float)
    n = len(w) - 1
    centers = np.empty((2 * n + 1, 2))
    centers[0::2] = w
    centers[1::2] = 0.5 * (w[:-1] + w[1:])
    idx = np.arange(2 * n)
    adjacency = np.column_stack([idx, idx + 1])
    return Polymer(centers, 0.25, PolymerKind.SELF_AVOIDING_WALK, seed, adjacency)


def gen_saw_walk(cfg: SawConfig) -> np.ndarray:
    if cfg.n_edges == 1:
        return np.array([[0, 0], [1, 0]], np.int64)
    walk, acc, _ = run_pivot_chain(cfg.n_edges, cfg.warmup, cfg.seed, tail_attempts=cfg.tail)
    if acc < cfg.warmup:
        raise RuntimeError(f"pivot chain stalled after {acc} accepted pivots")
    return walk


def gen_saw(cfg: SawConfig) -> Polymer:
    return saw_to_polymer(gen_saw_walk(cfg), cfg.seed)
