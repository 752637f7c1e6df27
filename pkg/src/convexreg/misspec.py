"""Convex projection of a non-convex regression function.

When the true regression function is not convex the least squares
estimator targets its convex projection: the closest convex-feasible
vector at the design points.  The projection is unique and satisfies the
Pythagorean inequality

    l2(f0, phi) >= l2(f0, proj) + l2(proj, phi)  for every convex phi,

and the projection of a concave function is affine at the design points.
"""

from __future__ import annotations

import numpy as np

from .affine import best_affine_fit
from .cone import ConvexFit, is_convex_feasible, project
from .grid import SampledFunction, l2_loss

__all__ = [
    "convex_projection",
    "pythagorean_check",
    "concave_projection_affine_check",
]


def convex_projection(f0: SampledFunction) -> ConvexFit:
    """Projection of the sampled values onto the cone of convex sequences."""
    return project(f0.values, f0.grid)


def pythagorean_check(f0: SampledFunction, phi: SampledFunction, tol: float = 1e-10) -> bool:
    """Check l2(f0, phi) - l2(f0, proj) - l2(proj, phi) >= -tol for the
    convex projection of f0.  phi must be convex-feasible."""
    if not is_convex_feasible(phi.values, phi.grid):
        raise ValueError("phi must be convex-feasible on its grid")
    proj = SampledFunction(f0.grid, convex_projection(f0).theta)
    gap = l2_loss(f0, phi) - l2_loss(f0, proj) - l2_loss(proj, phi)
    return gap >= -tol


def concave_projection_affine_check(f0: SampledFunction, tol: float = 1e-7) -> bool:
    """For concave-feasible data with n > 2, the projection's fitted
    values are collinear in x: the deviation from their own least squares
    line stays within tol."""
    if f0.grid.n <= 2:
        raise ValueError("need n > 2 design points")
    if not is_convex_feasible(-f0.values, f0.grid):
        raise ValueError("f0 must be concave-feasible (its negation convex)")
    fit = convex_projection(f0)
    fitted = SampledFunction(f0.grid, fit.theta)
    slope, intercept, _ = best_affine_fit(fitted)
    line = intercept + slope * f0.grid.points
    return bool(np.abs(fit.theta - line).max() <= tol)
