"""Design grids, sampled functions, the empirical squared loss, and
piecewise-linear interpolation utilities.

The grid is the common currency of the package: every loss, fit and
construction is evaluated at a fixed set of design points
x_1 < ... < x_n in [0, 1] whose consecutive spacings satisfy
c1 <= n (x_i - x_{i-1}) <= c2 for positive constants c1, c2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DesignGrid",
    "SampledFunction",
    "Observations",
    "PiecewiseLinearFn",
    "make_grid",
    "l2_loss",
    "interval_count",
    "interpolant",
    "integral_l2",
    "lp_norm",
    "check_pointwise_bound",
]


def _finite_1d(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


@dataclass(frozen=True)
class DesignGrid:
    """Sorted design points in [0, 1] with normalized spacing constants.

    c1 and c2 are the smallest and largest values of n * (x_i - x_{i-1})
    over consecutive points; both are positive and c1 <= c2.
    """

    points: np.ndarray
    n: int
    c1: float
    c2: float

    @classmethod
    def from_points(cls, points) -> "DesignGrid":
        pts = _finite_1d(points, "points")
        n = pts.size
        if n < 2:
            raise ValueError("a design grid needs at least two points")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise ValueError("design points must lie in [0, 1]")
        gaps = np.diff(pts)
        if np.any(gaps <= 0.0):
            raise ValueError("design points must be strictly increasing")
        pts = pts.copy()
        pts.setflags(write=False)
        return cls(points=pts, n=n, c1=float(n * gaps.min()), c2=float(n * gaps.max()))

    def __eq__(self, other) -> bool:
        return isinstance(other, DesignGrid) and np.array_equal(self.points, other.points)

    def __hash__(self):  # frozen dataclass with array field: hash by identity data
        return hash((self.n, float(self.points[0]), float(self.points[-1]), self.c1, self.c2))


def make_grid(kind: str, n: int, seed: int = 0) -> DesignGrid:
    """Build a design grid of the given kind.

    "uniform" places x_i = i/n, so c1 = c2 = 1.  "jittered" perturbs the
    uniform spacings by at most +-25% and rescales so x_n = 1; the draw is
    repeated (deterministically in ``seed``) in the rare event that the
    rescaled spacings leave [0.5, 1.5].
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if kind == "uniform":
        return DesignGrid.from_points(np.arange(1, n + 1) / n)
    if kind == "jittered":
        for attempt in range(100):
            rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
            spacings = 1.0 + rng.uniform(-0.25, 0.25, size=n)
            pts = np.cumsum(spacings)
            pts /= pts[-1]
            grid = DesignGrid.from_points(pts)
            if 0.5 <= grid.c1 and grid.c2 <= 1.5:
                return grid
        raise RuntimeError("jittered grid generation failed to satisfy spacing bounds")
    raise ValueError(f"unknown grid kind {kind!r}; expected 'uniform' or 'jittered'")


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function at the points of a design grid."""

    grid: DesignGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _finite_1d(self.values, "values")
        if vals.size != self.grid.n:
            raise ValueError(
                f"values length {vals.size} does not match grid size {self.grid.n}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: DesignGrid, fn: Callable) -> "SampledFunction":
        return cls(grid, np.asarray(fn(grid.points), dtype=float))


@dataclass(frozen=True)
class Observations:
    """Noisy responses y_i at the design points, with noise level sigma > 0."""

    grid: DesignGrid
    y: np.ndarray
    sigma: float

    def __post_init__(self):
        y = _finite_1d(self.y, "y")
        if y.size != self.grid.n:
            raise ValueError(f"y length {y.size} does not match grid size {self.grid.n}")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)


def _check_shared_grid(f: SampledFunction, g: SampledFunction) -> None:
    if f.grid.n != g.grid.n or not np.array_equal(f.grid.points, g.grid.points):
        raise ValueError("sampled functions live on different grids")


def l2_loss(f: SampledFunction, g: SampledFunction) -> float:
    """Average squared difference (1/n) sum_i (f(x_i) - g(x_i))^2.

    Summation is numpy's pairwise scheme, stable for n up to 1e6.
    """
    _check_shared_grid(f, g)
    diff = f.values - g.values
    return float(np.sum(diff * diff) / f.grid.n)


def interval_count(grid: DesignGrid, a: float, b: float) -> int:
    """Number of design points in the closed interval [a, b].

    For eligible intervals the count m obeys the spacing sandwich
    n(b-a)/c2 - 1 <= m <= n(b-a)/c1 + 1.
    """
    if not (0.0 <= a < b <= 1.0):
        raise ValueError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    left = int(np.searchsorted(grid.points, a, side="left"))
    right = int(np.searchsorted(grid.points, b, side="right"))
    return right - left


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function given by knots and knot values."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = _finite_1d(self.knots, "knots")
        vals = _finite_1d(self.values, "values")
        if knots.size != vals.size:
            raise ValueError("knots and values must have equal length")
        if knots.size < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(knots) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        knots = knots.copy()
        vals = vals.copy()
        knots.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", vals)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            raise ValueError(f"evaluation outside domain [{lo}, {hi}]")
        return np.interp(x, self.knots, self.values)

    def is_convex(self, tol: float = 1e-12) -> bool:
        slopes = np.diff(self.values) / np.diff(self.knots)
        if slopes.size < 2:
            return True
        scale = max(1.0, float(np.abs(slopes).max()))
        return bool(np.all(np.diff(slopes) >= -tol * scale))


def interpolant(f: SampledFunction) -> PiecewiseLinearFn:
    """Piecewise-linear interpolant of a sampled function, knots at the grid."""
    return PiecewiseLinearFn(f.grid.points, f.values)


def _refined_breakpoints(f: PiecewiseLinearFn, g: PiecewiseLinearFn, a: float, b: float) -> np.ndarray:
    inner = np.union1d(f.knots, g.knots)
    inner = inner[(inner > a) & (inner < b)]
    return np.concatenate(([a], inner, [b]))


def integral_l2(f: PiecewiseLinearFn, g: PiecewiseLinearFn, a: float, b: float) -> float:
    """Exact integral of (f - g)^2 over [a, b] for piecewise-linear f, g.

    On a segment of length h where the difference runs linearly from alpha
    to beta the integral equals h/3 * (alpha^2 + alpha*beta + beta^2).
    """
    flo, fhi = f.domain
    glo, ghi = g.domain
    slack = 1e-12
    if a < max(flo, glo) - slack or b > min(fhi, ghi) + slack:
        raise ValueError("[a, b] must lie inside the domains of both functions")
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    xs = _refined_breakpoints(f, g, a, b)
    diff = f(xs) - g(xs)
    h = np.diff(xs)
    alpha = diff[:-1]
    beta = diff[1:]
    return float(np.sum(h / 3.0 * (alpha * alpha + alpha * beta + beta * beta)))


def _segment_abs_power_integral(alpha: float, beta: float, h: float, p: float) -> float:
    # |linear|^p over one segment; exact for p in {1, 2}, Simpson otherwise.
    if p == 2.0:
        return h / 3.0 * (alpha * alpha + alpha * beta + beta * beta)
    if p == 1.0:
        if alpha * beta >= 0.0:
            return h * (abs(alpha) + abs(beta)) / 2.0
        return h * (alpha * alpha + beta * beta) / (2.0 * (abs(alpha) + abs(beta)))
    panels = 64
    t = np.linspace(0.0, 1.0, 2 * panels + 1)
    vals = np.abs(alpha + (beta - alpha) * t) ** p
    weights = np.ones_like(t)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / (6.0 * panels) * np.dot(weights, vals))


def lp_norm(f: PiecewiseLinearFn, p: float) -> float:
    """(integral of |f|^p over its domain)^(1/p) for p >= 1."""
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    total = 0.0
    for i in range(f.knots.size - 1):
        total += _segment_abs_power_integral(
            float(f.values[i]), float(f.values[i + 1]), float(f.knots[i + 1] - f.knots[i]), p
        )
    return total ** (1.0 / p)


def _values_are_convex(grid: DesignGrid, values: np.ndarray, tol: float) -> bool:
    x = grid.points
    slopes = np.diff(values) / np.diff(x)
    return bool(np.all(np.diff(slopes) >= -tol))


def check_pointwise_bound(f: SampledFunction, p: float, y: float, tol: float = 1e-9) -> bool:
    """Pointwise envelope check for an Lp-normalized convex interpolant.

    For a convex function with integral of |f|^p at most 1, the value at
    y in (0, 1) is bounded by 2 (1+p)^(1/p) max(y^(-1/p), (1-y)^(-1/p)).
    The caller is responsible for the normalization (see ``lp_norm``);
    this predicate evaluates the interpolant of ``f`` at y and compares.
    """
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if not (0.0 < y < 1.0):
        raise ValueError(f"y must lie in (0, 1), got {y}")
    if not _values_are_convex(f.grid, f.values, tol):
        raise ValueError("sampled values are not convex")
    tilde = interpolant(f)
    lo, hi = tilde.domain
    value = abs(float(tilde(min(max(y, lo), hi))))
    bound = 2.0 * (1.0 + p) ** (1.0 / p) * max(y ** (-1.0 / p), (1.0 - y) ** (-1.0 / p))
    return value <= bound
