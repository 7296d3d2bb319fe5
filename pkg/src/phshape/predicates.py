"""Robust orientation and in-sphere predicates.

Each predicate evaluates the determinant in floating point together with a
static error bound (Shewchuk's A-level bounds); only when the sign is not
certified does it fall back to exact rational arithmetic.  Inputs are plain
doubles, so ``Fraction(float)`` is exact and the fallback is exact too.

Sign conventions (same as Shewchuk's ``predicates.c``):

* ``orient2d(a, b, c) > 0``  iff a, b, c are counter-clockwise.
* ``incircle(a, b, c, d) > 0`` iff d is inside the circle through a, b, c
  (a, b, c counter-clockwise).
* ``orient3d(a, b, c, d) > 0`` iff d lies below the plane of a, b, c seen
  counter-clockwise from above.
* ``insphere(a, b, c, d, e) > 0`` iff e is inside the sphere through
  a, b, c, d when ``orient3d(a, b, c, d) > 0``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from numba import njit, objmode

_EPS = 2.0 ** -53
CCW_ERRBOUND_A = (3.0 + 16.0 * _EPS) * _EPS
ICC_ERRBOUND_A = (10.0 + 96.0 * _EPS) * _EPS
O3D_ERRBOUND_A = (7.0 + 56.0 * _EPS) * _EPS
ISP_ERRBOUND_A = (16.0 + 224.0 * _EPS) * _EPS


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
    return _sign((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = map(Fraction, (ax, ay, bx, by, cx, cy, dx, dy))
    adx, ady, bdx, bdy, cdx, cdy = ax - dx, ay - dy, bx - dx, by - dy, cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return _sign(det)


def orient3d_exact(a, b, c, d) -> int:
    a, b, c, d = ([Fraction(float(v)) for v in p] for p in (a, b, c, d))
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]
    det = (adz * (bdx * cdy - cdx * bdy)
           + bdz * (cdx * ady - adx * cdy)
           + cdz * (adx * bdy - bdx * ady))
    return _sign(det)


def insphere_exact(a, b, c, d, e) -> int:
    rows = []
    ef = [Fraction(float(v)) for v in e]
    for p in (a, b, c, d):
        q = [Fraction(float(v)) - w for v, w in zip(p, ef)]
        rows.append(q + [q[0] * q[0] + q[1] * q[1] + q[2] * q[2]])
    return _sign(_det4(rows))


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _det4(m):
    total = 0
    for j in range(4):
        minor = [[m[i][k] for k in range(4) if k != j] for i in range(1, 4)]
        term = m[0][j] * _det3(minor)
        total += term if j % 2 == 0 else -term
    return total


@njit(cache=True)
def orient2d(ax, ay, bx, by, cx, cy):
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    errbound = CCW_ERRBOUND_A * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    if detleft == 0.0 and detright == 0.0:
        return 0
    with objmode(s="int64"):
        s = orient2d_exact(ax, ay, bx, by, cx, cy)
    return s


@njit(cache=True)
def incircle(ax, ay, bx, by, cx, cy, dx, dy):
    adx = ax - dx
    bdx = bx - dx
    cdx = cx - dx
    ady = ay - dy
    bdy = by - dy
    cdy = cy - dy
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady
    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    errbound = ICC_ERRBOUND_A * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    with objmode(s="int64"):
        s = incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)
    return s


@njit(cache=True)
def orient3d(a, b, c, d):
    adx = a[0] - d[0]
    bdx = b[0] - d[0]
    cdx = c[0] - d[0]
    ady = a[1] - d[1]
    bdy = b[1] - d[1]
    cdy = c[1] - d[1]
    adz = a[2] - d[2]
    bdz = b[2] - d[2]
    cdz = c[2] - d[2]
    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady
    det = (adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy)
           + cdz * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    errbound = O3D_ERRBOUND_A * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    with objmode(s="int64"):
        s = orient3d_exact(a, b, c, d)
    return s


@njit(cache=True)
def insphere(a, b, c, d, e):
    aex = a[0] - e[0]
    bex = b[0] - e[0]
    cex = c[0] - e[0]
    dex = d[0] - e[0]
    aey = a[1] - e[1]
    bey = b[1] - e[1]
    cey = c[1] - e[1]
    dey = d[1] - e[1]
    aez = a[2] - e[2]
    bez = b[2] - e[2]
    cez = c[2] - e[2]
    dez = d[2] - e[2]

    aexbey = aex * bey
    bexaey = bex * aey
    ab = aexbey - bexaey
    bexcey = bex * cey
    cexbey = cex * bey
    bc = bexcey - cexbey
    cexdey = cex * dey
    dexcey = dex * cey
    cd = cexdey - dexcey
    dexaey = dex * aey
    aexdey = aex * dey
    da = dexaey - aexdey
    aexcey = aex * cey
    cexaey = cex * aey
    ac = aexcey - cexaey
    bexdey = bex * dey
    dexbey = dex * bey
    bd = bexdey - dexbey

    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da

    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez

    det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd)

    aezp = abs(aez)
    bezp = abs(bez)
    cezp = abs(cez)
    dezp = abs(dez)
    abp = abs(aexbey) + abs(bexaey)
    bcp = abs(bexcey) + abs(cexbey)
    cdp = abs(cexdey) + abs(dexcey)
    dap = abs(dexaey) + abs(aexdey)
    acp = abs(aexcey) + abs(cexaey)
    bdp = abs(bexdey) + abs(dexbey)
    permanent = ((cdp * bezp + bdp * cezp + bcp * dezp) * alift
                 + (dap * cezp + acp * dezp + cdp * aezp) * blift
                 + (abp * dezp + bdp * aezp + dap * bezp) * clift
                 + (bcp * aezp + acp * bezp + abp * cezp) * dlift)
    errbound = ISP_ERRBOUND_A * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    with objmode(s="int64"):
        s = insphere_exact(a, b, c, d, e)
    return s


def orientation(points: np.ndarray) -> int:
    """Exact orientation sign of a 2D triangle or 3D tetrahedron."""
    p = np.asarray(points, dtype=float)
    if p.shape == (3, 2):
        return orient2d_exact(*p[0], *p[1], *p[2])
    if p.shape == (4, 3):
        return orient3d_exact(*p)
    raise ValueError(f"need 3 points in 2D or 4 in 3D, got {p.shape}")
