"""Counting functions, dimension fits and aspect statistics of P.H. points."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .core import FULL_WINDOW, HALF_PI, AspectWindow, PHPoints

DEFAULT_KNOTS = 200
MIN_POINTS = 10
MIN_DISTINCT = 3
DEFAULT_ASPECT_BINS = np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, HALF_PI])


class InsufficientDataError(ValueError):
    pass


class EmptyWindowError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FCurve:
    """F(x) = (number of points with size >= x and aspect in the window) / samples.

    ``sizes`` is sorted descending, so ``counts[j]`` is F at ``sizes[j]``
    when sizes are distinct.
    """

    degree: int
    window: AspectWindow
    sizes: np.ndarray
    samples: int = 1
    r: float = 0.0
    delta: float = math.inf

    def __post_init__(self):
        s = np.sort(np.asarray(self.sizes, dtype=float))[::-1].copy()
        s.flags.writeable = False
        object.__setattr__(self, "sizes", s)
        if self.samples < 1:
            raise ValueError("samples must be >= 1")

    @property
    def counts(self) -> np.ndarray:
        return np.arange(1, len(self.sizes) + 1) / self.samples

    def __call__(self, x):
        asc = self.sizes[::-1]
        x = np.asarray(x, dtype=float)
        return (len(asc) - np.searchsorted(asc, x, side="left")) / self.samples

    def distinct_in(self, lo: float, hi: float) -> int:
        s = self.sizes
        return len(np.unique(s[(s >= lo) & (s <= hi)]))

    def support(self) -> tuple[float, float]:
        if len(self.sizes) == 0:
            return (math.nan, math.nan)
        return (float(self.sizes[-1]), float(self.sizes[0]))


def f_curve(points: PHPoints, degree: int, window: AspectWindow = FULL_WINDOW, samples: int = 1,
            r: float = 0.0, delta: float = math.inf) -> FCurve:
    sel = points.select(degree)
    keep = window.contains(sel.aspects)
    return FCurve(degree, window, sel.sizes[keep], samples, r, delta)


@dataclass
class FitReport:
    window: tuple
    exponent: float
    intercept: float
    stderr: float
    r2: float
    concavity: float
    n_points_in_window: int
    n_knots: int = DEFAULT_KNOTS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _regress(lx: np.ndarray, ly: np.ndarray):
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(lx) - 2
    sxx = float(((lx - lx.mean()) ** 2).sum())
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0 else math.nan
    return float(coef[0]), float(coef[1]), stderr, r2


def concavity(lx: np.ndarray, ly: np.ndarray) -> float:
    """Second derivative of the least-squares quadratic through (log x, log F).

    Natural logarithms on both axes, so exp(-(log x)^2) scores exactly -2.
    """
    if len(lx) < 3:
        return math.nan
    c2 = np.polyfit(lx - lx.mean(), ly, 2)[0]
    return float(2 * c2)


def fit_dimension(fc: FCurve, window: Sequence[float], n_knots: int = DEFAULT_KNOTS) -> FitReport:
    """Slope of log F against log x on log-uniform knots spanning the window."""
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise EmptyWindowError(f"invalid window [{lo}, {hi}]")
    n_in = int(((fc.sizes >= lo) & (fc.sizes <= hi)).sum())
    distinct = fc.distinct_in(lo, hi)
    if n_in < MIN_POINTS or distinct < MIN_DISTINCT:
        raise InsufficientDataError(
            f"{n_in} points ({distinct} distinct sizes) in [{lo:g}, {hi:g}]; "
            f"need {MIN_POINTS} points and {MIN_DISTINCT} distinct sizes")
    knots = np.geomspace(lo, hi, n_knots)
    F = fc(knots)
    if F[-1] <= 0:
        raise InsufficientDataError(f"F vanishes at the top of the window x={hi:g}")
    return fit_samples(knots, F, n_in)


def fit_samples(x, F, n_points: int = -1) -> FitReport:
    """Log-log regression of positive samples F(x)."""
    x = np.asarray(x, dtype=float)
    F = np.asarray(F, dtype=float)
    if len(x) < 3 or np.any(F <= 0) or np.any(x <= 0):
        raise InsufficientDataError("need at least three positive samples")
    lx, ly = np.log(x), np.log(F)
    slope, icept, se, r2 = _regress(lx, ly)
    return FitReport((float(x[0]), float(x[-1])), -slope, icept, se, r2, concavity(lx, ly),
                     n_points if n_points >= 0 else len(x), len(x))


def auto_window(fc: FCurve, r: float, delta: float, lo_mult: float = 4.0,
                hi_frac: float = 0.25) -> tuple[float, float]:
    """Default [lo_mult*r, hi_frac*delta] clipped to the observed sizes."""
    if r < 0 or not delta > 0:
        raise ValueError("need r >= 0 and delta > 0")
    smin, smax = fc.support()
    if len(fc.sizes) == 0:
        raise EmptyWindowError("no P.H. points")
    lo = lo_mult * r if r > 0 else smin
    hi = hi_frac * delta
    clo, chi = max(lo, smin), min(hi, smax)
    if (clo, chi) != (lo, hi):
        warnings.warn(f"fit window [{lo:g}, {hi:g}] clipped to observed sizes [{clo:g}, {chi:g}]",
                      stacklevel=2)
    if not clo < chi:
        raise EmptyWindowError(f"empty fit window [{clo:g}, {chi:g}]")
    return (clo, chi)


@dataclass
class SelfSimilarity:
    consistent: bool
    concavity: float
    r2: float
    concavity_threshold: float
    r2_threshold: float
    fit: FitReport

    @property
    def verdict(self) -> str:
        return "consistent" if self.consistent else "inconsistent"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit"] = self.fit.to_dict()
        d["verdict"] = self.verdict
        return d


def self_similarity_test(fc: FCurve, window: Sequence[float], concavity_threshold: float = 0.05,
                         r2_threshold: float = 0.98, n_knots: int = DEFAULT_KNOTS) -> SelfSimilarity:
    """A power law is straight in log-log: small curvature and a good linear fit."""
    fit = fit_dimension(fc, window, n_knots)
    ok = abs(fit.concavity) < concavity_threshold and fit.r2 >= r2_threshold
    return SelfSimilarity(bool(ok), fit.concavity, fit.r2, concavity_threshold, r2_threshold, fit)


@dataclass(frozen=True, eq=False)
class DensityHistogram:
    x_edges: np.ndarray
    y_edges: np.ndarray
    density: np.ndarray
    samples: int

    @property
    def mass(self) -> float:
        return float(self.density.sum())

    def y_marginal(self, x_lo: float = 0.0, x_hi: float = math.inf) -> np.ndarray:
        """Aspect profile of the cells whose x-bin lies within [x_lo, x_hi]."""
        keep = (self.x_edges[:-1] >= x_lo) & (self.x_edges[1:] <= x_hi)
        return self.density[keep].sum(axis=0)


def density_histogram(points: PHPoints, samples: int = 1, x_edges=None, y_edges=None,
                      x_bins: int = 20, y_bins: int = 8) -> DensityHistogram:
    """2D histogram of (size, aspect) with log-spaced size bins, divided by ``samples``.

    Default edges cover every point; with explicit edges points outside are dropped.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    x, y = points.sizes, points.aspects
    if x_edges is None:
        if len(x) == 0:
            x_edges = np.geomspace(1.0, 10.0, x_bins + 1)
        else:
            lo, hi = float(x.min()), float(x.max())
            if lo == hi:
                lo, hi = lo / 1.01, hi * 1.01
            x_edges = np.geomspace(lo, hi, x_bins + 1)
    if y_edges is None:
        y_edges = np.linspace(0.0, HALF_PI, y_bins + 1)
    x_edges = np.asarray(x_edges, dtype=float)
    y_edges = np.asarray(y_edges, dtype=float)
    counts, _, _ = np.histogram2d(x, y, bins=[x_edges, y_edges])
    return DensityHistogram(x_edges, y_edges, counts / samples, samples)


@dataclass(frozen=True, eq=False)
class AspectChart:
    """Per-bin ratio of the fraction of points of a to that of b; NaN where b is empty."""

    edges: np.ndarray
    frac_a: np.ndarray
    frac_b: np.ndarray
    ratios: np.ndarray

    def rows(self):
        for k in range(len(self.ratios)):
            yield (float(self.edges[k]), float(self.edges[k + 1]), float(self.frac_a[k]),
                   float(self.frac_b[k]), float(self.ratios[k]))


def aspect_ratio_chart(points_a: PHPoints, points_b: PHPoints,
                       bin_edges=DEFAULT_ASPECT_BINS) -> AspectChart:
    if len(points_a) == 0 or len(points_b) == 0:
        raise ValueError("both point sets must be nonempty")
    edges = np.asarray(bin_edges, dtype=float)
    pa = np.histogram(points_a.aspects, edges)[0] / len(points_a)
    pb = np.histogram(points_b.aspects, edges)[0] / len(points_b)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(pb > 0, pa / np.where(pb > 0, pb, 1.0), np.nan)
    return AspectChart(edges, pa, pb, ratios)


@dataclass(frozen=True)
class SandwichBounds:
    """A1 + B1 x^-d <= F(x) <= A2 + B2 x^-d for an exactly self-similar diagram.

    With F(rho^k c) = F(c) + ell + ... + ell^k and d = log ell / log(1/rho),
    A = F(c) - ell/(ell-1) and B = ell/(ell-1) c^d; B1 = B rho^d, B2 = B rho^-d.
    Valid for x in [rho^depth c, c].
    """

    rho: float
    ell: int
    c: float = 1.0
    F_c: float = 0.0
    d: float = field(init=False)
    A: float = field(init=False)
    B1: float = field(init=False)
    B2: float = field(init=False)

    def __post_init__(self):
        if not (0 < self.rho < 1) or self.ell < 2:
            raise ValueError("need 0 < rho < 1 and ell >= 2")
        d = math.log(self.ell) / math.log(1 / self.rho)
        B = self.ell / (self.ell - 1) * self.c ** d
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "A", self.F_c - self.ell / (self.ell - 1))
        object.__setattr__(self, "B1", B * self.rho ** d)
        object.__setattr__(self, "B2", B * self.rho ** -d)

    def lower(self, x):
        return self.A + self.B1 * np.asarray(x, dtype=float) ** -self.d

    def upper(self, x):
        return self.A + self.B2 * np.asarray(x, dtype=float) ** -self.d

    def holds(self, fc: FCurve, x, rtol: float = 1e-12) -> bool:
        F = fc(x)
        slack = rtol * np.maximum(1.0, np.abs(F))
        return bool(np.all(self.lower(x) <= F + slack) and np.all(F <= self.upper(x) + slack))
