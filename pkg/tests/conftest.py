import numpy as np
import pytest

from convexreg import DesignGrid, make_grid
from convexreg.cone import ConvexityConstraints, ConvexFit


def random_convex_values(grid: DesignGrid, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random convex-feasible values of magnitude O(scale): nonnegative
    slope increments with a fixed total curvature budget plus a random
    affine part."""
    n = grid.n
    increments = rng.uniform(0.0, 2.0, size=max(n - 2, 0))
    total = increments.sum()
    if total > 0.0:
        increments *= 4.0 * scale / total
    base_slope = rng.normal() * scale
    slopes = base_slope + np.concatenate(([0.0], np.cumsum(increments)))
    values = rng.normal() * scale + np.concatenate(([0.0], np.cumsum(slopes * np.diff(grid.points))))
    return values


def assert_kkt(fit: ConvexFit, y: np.ndarray, tol: float = 1e-8) -> None:
    """Re-derive the full KKT certificate of a fit from scratch."""
    cons = ConvexityConstraints.from_grid(fit.grid)
    theta = fit.theta
    if fit.grid.n > 2:
        d = cons.evaluate(theta)
        assert d.min() >= -tol, f"primal violation {d.min()}"
    if fit.duals.size:
        assert fit.duals.min() >= -tol, f"negative dual {fit.duals.min()}"
    spread = np.zeros(fit.grid.n)
    for row, dual in zip(fit.active, fit.duals):
        spread[row] += cons.lo[row] * dual
        spread[row + 1] += cons.mid[row] * dual
        spread[row + 2] += cons.hi[row] * dual
    assert np.abs(theta - y - spread).max() <= tol, "stationarity violated"
    if fit.active:
        d = cons.evaluate(theta)
        slack = np.abs(fit.duals * d[list(fit.active)]).max()
        assert slack <= tol, f"complementary slackness {slack}"


@pytest.fixture
def grid3() -> DesignGrid:
    return DesignGrid.from_points([0.0, 0.5, 1.0])


@pytest.fixture
def uniform100() -> DesignGrid:
    return make_grid("uniform", 100)
