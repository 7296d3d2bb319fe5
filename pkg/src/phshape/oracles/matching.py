"""Tolerance matching of two persistence diagrams."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core import Diagram

_BIG = 1e30


@dataclass
class MatchReport:
    ok: bool
    tol: float
    worst: float = 0.0
    problems: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def summary(self) -> str:
        head = f"{'match' if self.ok else 'NO MATCH'} at tol={self.tol:g} (worst {self.worst:.3g})"
        return "\n".join([head] + [f"  {p}" for p in self.problems[:20]])


def _match_degree(a: np.ndarray, b: np.ndarray, tol: float):
    na, nb = len(a), len(b)
    n = na + nb
    if n == 0:
        return [], 0.0
    cost = np.full((n, n), _BIG)
    if na and nb:
        sup = np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))
        cost[:na, :nb] = np.where(sup <= tol, sup, _BIG)
    # diagonal slots: interval i of a may vanish if short enough
    half_a = 0.5 * (a[:, 1] - a[:, 0])
    half_b = 0.5 * (b[:, 1] - b[:, 0])
    cost[:na, nb:] = np.where(np.eye(na, dtype=bool), np.where(half_a <= tol, half_a, _BIG)[:, None], _BIG)
    cost[na:, :nb] = np.where(np.eye(nb, dtype=bool), np.where(half_b <= tol, half_b, _BIG)[None, :], _BIG)
    cost[na:, nb:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    problems = []
    worst = 0.0
    for i, j in zip(rows, cols):
        c = cost[i, j]
        if c >= _BIG:
            if i < na:
                problems.append(("a", tuple(a[i])))
            if j < nb:
                problems.append(("b", tuple(b[j])))
        else:
            worst = max(worst, c)
    return problems, worst


def match_diagrams(d1: Diagram, d2: Diagram, tol: float) -> MatchReport:
    """Succeeds iff every interval is paired within sup distance ``tol``.

    An interval may stay unpaired when its lifetime is at most 2*tol.
    """
    report = MatchReport(True, tol)
    degrees = sorted(set(d1.degrees.tolist()) | set(d2.degrees.tolist()))
    for k in degrees:
        problems, worst = _match_degree(d1.in_degree(k), d2.in_degree(k), tol)
        report.worst = max(report.worst, worst)
        for side, (b, d) in problems:
            report.ok = False
            report.problems.append(f"degree {k}: interval ({b:.6g}, {d:.6g}) of diagram {side} unmatched")
    return report
