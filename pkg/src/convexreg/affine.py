"""Piecewise-affine convex functions and the adaptation functionals that
measure how well a convex function is approximated by few affine pieces.

The minimizations over all piecewise-affine convex functions are replaced
by minimizations over the family of equispaced-knot interpolants of the
target (plus the ordinary least squares line), which is the family the
supporting theory is built from.  Every returned value is therefore an
upper bound on the corresponding infimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cone import is_convex_feasible
from .grid import SampledFunction, _finite_1d

__all__ = [
    "PiecewiseAffineConvex",
    "canonicalize",
    "best_affine_fit",
    "knot_interpolant",
    "candidate_family",
    "adaptation_envelope",
    "local_ball_size_upper",
]

SLOPE_TOL = 1e-12


@dataclass(frozen=True)
class PiecewiseAffineConvex:
    """Convex piecewise-affine function with a minimal number of pieces.

    Slopes between consecutive knots are nondecreasing and no two adjacent
    segments share a slope, so ``k`` equals the stored piece count.
    Construct through ``canonicalize``.
    """

    knots: np.ndarray
    values: np.ndarray
    k: int

    def __post_init__(self):
        knots = _finite_1d(self.knots, "knots").copy()
        vals = _finite_1d(self.values, "values").copy()
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
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise ValueError(f"evaluation outside domain [{lo}, {hi}]")
        return np.interp(x, self.knots, self.values)


def canonicalize(knots, values, tol: float = SLOPE_TOL) -> PiecewiseAffineConvex:
    """Merge adjacent segments with equal slopes into a minimal convex fn.

    Raises ValueError when the slopes decrease, i.e. the input is not
    convex.  Slope equality and monotonicity are judged at relative
    tolerance ``tol``.
    """
    knots = _finite_1d(knots, "knots")
    values = _finite_1d(values, "values")
    if knots.size != values.size:
        raise ValueError("knots and values must have equal length")
    if knots.size < 2:
        raise ValueError("need at least two knots")
    if np.any(np.diff(knots) <= 0.0):
        raise ValueError("knots must be strictly increasing")
    slopes = np.diff(values) / np.diff(knots)
    scale = max(1.0, float(np.abs(slopes).max()))
    if np.any(np.diff(slopes) < -tol * scale):
        raise ValueError("slopes decrease: the function is not convex")
    keep = [0]
    for i in range(1, slopes.size):
        if slopes[i] - slopes[keep[-1]] > tol * scale:
            keep.append(i)
    # interior knots that survive are the left endpoints of kept segments
    knot_idx = [0, *keep[1:], knots.size - 1]
    new_knots = knots[knot_idx]
    new_values = values[knot_idx]
    return PiecewiseAffineConvex(new_knots, new_values, k=len(keep))


def best_affine_fit(f: SampledFunction) -> tuple[float, float, float]:
    """Ordinary least squares line through the sampled values.

    Returns (slope, intercept, affine_distance) where affine_distance is
    the root of the average squared residual, i.e. the distance of f from
    the affine functions in the empirical metric.
    """
    x = f.grid.points
    v = f.values
    xbar = x.mean()
    vbar = v.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    sxy = float(np.sum((x - xbar) * (v - vbar)))
    slope = sxy / sxx
    intercept = vbar - slope * xbar
    residual = v - (intercept + slope * x)
    distance = float(np.sqrt(np.sum(residual * residual) / f.grid.n))
    return slope, intercept, distance


def knot_interpolant(phi0: Callable, m: int, a: float, b: float) -> PiecewiseAffineConvex:
    """Linear interpolant of a convex function at m+1 equispaced knots.

    When phi0 has second derivative bounded by kappa2 on [a, b] the
    sup-norm error is at most (b-a)^2 kappa2 / (8 m^2).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    knots = np.linspace(a, b, m + 1)
    values = np.asarray(phi0(knots), dtype=float)
    return canonicalize(knots, values)


def _extended_interpolant(f: SampledFunction) -> Callable:
    # piecewise-linear interpolant of the samples, extended linearly
    # beyond the grid span with the end-segment slopes (keeps convexity)
    x = f.grid.points
    v = f.values
    s_left = (v[1] - v[0]) / (x[1] - x[0])
    s_right = (v[-1] - v[-2]) / (x[-1] - x[-2])

    def handle(t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, x, v)
        out = np.where(t < x[0], v[0] + s_left * (t - x[0]), out)
        out = np.where(t > x[-1], v[-1] + s_right * (t - x[-1]), out)
        return out

    return handle


def candidate_family(phi0: SampledFunction, max_k: int) -> list[tuple[int, float]]:
    """Piece counts and empirical squared errors of the candidate family.

    Candidates are the equispaced-knot interpolants of phi0 on [0, 1] for
    1..max_k pieces plus the ordinary least squares line.  Returns
    (k(alpha), l2(phi0, alpha)) per candidate; k is the canonical piece
    count, which may be smaller than requested.
    """
    if max_k < 1:
        raise ValueError(f"max_k must be >= 1, got {max_k}")
    x = phi0.grid.points
    v = phi0.values
    n = phi0.grid.n
    out: list[tuple[int, float]] = []

    slope, intercept, _ = best_affine_fit(phi0)
    line = intercept + slope * x
    out.append((1, float(np.sum((v - line) ** 2) / n)))

    handle = _extended_interpolant(phi0)
    for pieces in range(1, max_k + 1):
        alpha = knot_interpolant(handle, pieces, 0.0, 1.0)
        fitted = alpha(x)
        out.append((alpha.k, float(np.sum((v - fitted) ** 2) / n)))
    return out


def adaptation_envelope(phi0: SampledFunction, sigma: float, max_k: int) -> tuple[int, float]:
    """Upper bound on the adaptation trade-off min over alpha of
    l2(phi0, alpha) + sigma^2 k(alpha)^{5/4} / n.

    Minimizes over the candidate family only, so the result bounds the
    true infimum over all piecewise-affine convex functions from above.
    Returns (best piece count, value).
    """
    if not is_convex_feasible(phi0.values, phi0.grid):
        raise ValueError("phi0 must be convex-feasible on its grid")
    n = phi0.grid.n
    best_k = 1
    best_value = np.inf
    for k, err in candidate_family(phi0, max_k):
        value = err + sigma * sigma * float(k) ** 1.25 / n
        if value < best_value:
            best_value = value
            best_k = k
    return best_k, float(best_value)


def local_ball_size_upper(r: float, phi0: SampledFunction, max_k: int) -> float:
    """Upper bound on the local-ball size functional
    inf over alpha of k(alpha)^{5/2} (r^2 + l2(phi0, alpha))^{1/2}.

    Equals r exactly when phi0 is affine; never exceeds
    sqrt(r^2 + affine_distance^2) thanks to the least squares candidate.
    """
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    best = np.inf
    for k, err in candidate_family(phi0, max_k):
        value = float(k) ** 2.5 * np.sqrt(r * r + err)
        if value < best:
            best = value
    return float(best)
