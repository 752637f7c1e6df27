"""Least squares projection onto the cone of convex sequences.

A vector theta in R^n is convex-feasible on a grid when every interior
slope change

    d_i(theta) = (theta_{i+1} - theta_i)/(x_{i+1} - x_i)
               - (theta_i - theta_{i-1})/(x_i - x_{i-1})

is nonnegative.  ``project`` computes the Euclidean projection of a data
vector onto this cone with an active-set method: the working set of
equality rows is solved through a banded augmented KKT system (bandwidth 3
after interleaving primal and dual unknowns), the most violated constraint
is added while any remains, and dual feasibility is restored after every
addition by a Lawson-Hanson ratio test that drops blocking rows.  Ties
break toward the smallest index so the output is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import solve_banded

from .grid import DesignGrid, PiecewiseLinearFn, _finite_1d

__all__ = [
    "SolverError",
    "ConvexityConstraints",
    "ConvexFit",
    "DykstraResult",
    "is_convex_feasible",
    "project",
    "project_bruteforce",
    "project_dykstra",
    "canonical_lse",
]

DEFAULT_TOL = 1e-9

_BRUTEFORCE_MAX_N = 14


class SolverError(RuntimeError):
    """Active-set iteration exceeded its budget without reaching KKT."""


@dataclass(frozen=True)
class ConvexityConstraints:
    """The n-2 interior slope-change functionals of a grid.

    Row r (0-based) constrains interior point r+1 and has the three
    nonzero coefficients (lo, mid, hi) on theta_{r}, theta_{r+1},
    theta_{r+2}.
    """

    grid: DesignGrid
    lo: np.ndarray
    mid: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_grid(cls, grid: DesignGrid) -> "ConvexityConstraints":
        h = np.diff(grid.points)
        inv_left = 1.0 / h[:-1]
        inv_right = 1.0 / h[1:]
        lo = inv_left
        mid = -(inv_left + inv_right)
        hi = inv_right
        for arr in (lo, mid, hi):
            arr.setflags(write=False)
        return cls(grid=grid, lo=lo, mid=mid, hi=hi)

    @property
    def n_rows(self) -> int:
        return self.grid.n - 2

    def evaluate(self, theta: np.ndarray) -> np.ndarray:
        return self.lo * theta[:-2] + self.mid * theta[1:-1] + self.hi * theta[2:]

    def as_matrix(self) -> np.ndarray:
        n = self.grid.n
        a = np.zeros((n - 2, n))
        rows = np.arange(n - 2)
        a[rows, rows] = self.lo
        a[rows, rows + 1] = self.mid
        a[rows, rows + 2] = self.hi
        return a


def is_convex_feasible(theta, grid: DesignGrid, tol: float = DEFAULT_TOL) -> bool:
    """True when all interior slope changes are >= -tol."""
    theta = _finite_1d(theta, "theta")
    if theta.size != grid.n:
        raise ValueError(f"theta length {theta.size} does not match grid size {grid.n}")
    if grid.n == 2:
        return True
    d = ConvexityConstraints.from_grid(grid).evaluate(theta)
    return bool(np.all(d >= -tol))


@dataclass(frozen=True)
class ConvexFit:
    """Cone projection output together with its KKT certificate.

    ``active`` holds 0-based constraint rows with d_r(theta) = 0, ``duals``
    the matching nonnegative multipliers.  ``primal_residual`` is the worst
    constraint violation, ``dual_residual`` the stationarity residual
    max |theta - y - A_active^T duals|, and ``comp_slack`` the worst
    complementary-slackness product.
    """

    grid: DesignGrid
    theta: np.ndarray
    active: tuple[int, ...]
    duals: np.ndarray
    primal_residual: float
    dual_residual: float
    comp_slack: float
    iterations: int

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).copy()
        duals = np.asarray(self.duals, dtype=float).copy()
        theta.setflags(write=False)
        duals.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "duals", duals)


def _equality_projection(y: np.ndarray, cons: ConvexityConstraints, work: np.ndarray, refine: bool = False):
    """Project y onto {theta : d_i(theta) = 0 for i in the working set}.

    ``work`` holds interior point indices (1..n-2).  Solves the augmented
    system [[I, -A_W^T], [A_W, 0]] [theta; mu] = [y; 0] as a banded LU
    factorization; interleaving theta_j and mu_i by position keeps the
    bandwidth at 3 for any working set.  With ``refine`` one step of
    iterative refinement is applied, which tightens the KKT residuals of
    large-magnitude inputs to a few ulps.
    """
    n = y.size
    w = work.size
    if w == 0:
        return y.copy(), np.empty(0)

    mask = np.zeros(n, dtype=np.int64)
    mask[work] = 1
    cnt = np.cumsum(mask)
    pos_theta = np.arange(n) + cnt
    pos_mu = work + cnt[work] - 1

    size = n + w
    ab = np.zeros((7, size))
    rhs = np.zeros(size)

    ab[3, pos_theta] = 1.0
    rhs[pos_theta] = y

    lo = cons.lo[work - 1]
    mid = cons.mid[work - 1]
    hi = cons.hi[work - 1]
    pm1 = pos_theta[work - 1]
    p0 = pos_theta[work]
    pp1 = pos_theta[work + 1]

    # constraint rows A_W theta = 0
    ab[3 + pos_mu - pm1, pm1] = lo
    ab[3 + pos_mu - p0, p0] = mid
    ab[3 + pos_mu - pp1, pp1] = hi
    # stationarity coupling theta - A_W^T mu = y
    ab[3 + pm1 - pos_mu, pos_mu] = -lo
    ab[3 + p0 - pos_mu, pos_mu] = -mid
    ab[3 + pp1 - pos_mu, pos_mu] = -hi

    z = solve_banded((3, 3), ab, rhs, overwrite_ab=not refine, overwrite_b=False, check_finite=False)
    if refine:
        theta = z[pos_theta]
        mu = z[pos_mu]
        residual = np.zeros(size)
        residual[pos_theta] = y - (theta - _scatter_transpose(cons, work, mu, n))
        residual[pos_mu] = -(lo * theta[work - 1] + mid * theta[work] + hi * theta[work + 1])
        z = z + solve_banded((3, 3), ab, residual, overwrite_ab=True, overwrite_b=True, check_finite=False)
    return z[pos_theta], z[pos_mu]


def _scatter_transpose(cons: ConvexityConstraints, work: np.ndarray, mu: np.ndarray, n: int) -> np.ndarray:
    """A_W^T mu for a working set of interior point indices."""
    out = np.zeros(n)
    if work.size:
        out[work - 1] += cons.lo[work - 1] * mu
        out[work] += cons.mid[work - 1] * mu
        out[work + 1] += cons.hi[work - 1] * mu
    return out


def _certificate(y, cons, theta, work, mu, iterations) -> ConvexFit:
    n = y.size
    if n == 2:
        d_min = 0.0
        comp = 0.0
    else:
        d = cons.evaluate(theta)
        d_min = float(d.min())
        comp = float(np.abs(mu * d[work - 1]).max()) if work.size else 0.0
    spread = _scatter_transpose(cons, work, mu, n)
    stationarity = float(np.abs(theta - y - spread).max())
    return ConvexFit(
        grid=cons.grid,
        theta=theta,
        active=tuple(int(i) - 1 for i in work),
        duals=mu,
        primal_residual=max(0.0, -d_min),
        dual_residual=stationarity,
        comp_slack=comp,
        iterations=iterations,
    )


def project(y, grid: DesignGrid, tol: float = DEFAULT_TOL, max_iters: int | None = None) -> ConvexFit:
    """Euclidean projection of y onto the cone of convex sequences.

    Returns the unique fitted values together with the active set, dual
    multipliers and KKT residuals.  For n = 2 the projection is the
    identity.

    The active set starts from the constraints violated by the data and
    then grows by the most violated constraint per step; dual feasibility
    is restored after every addition with a Lawson-Hanson ratio test,
    which drops at least one blocking row per pass and makes termination
    finite even on degenerate (tied) inputs.  Ties break toward the
    smallest index.  SolverError on budget exhaustion (100 n + 1000 by
    default) signals a solver bug, not a property of the data.
    """
    y = _finite_1d(y, "y")
    if y.size != grid.n:
        raise ValueError(f"y length {y.size} does not match grid size {grid.n}")
    n = grid.n
    cons = ConvexityConstraints.from_grid(grid)
    empty = np.empty(0, dtype=np.int64)
    if n == 2:
        return _certificate(y, cons, y.copy(), empty, np.empty(0), 0)

    d = cons.evaluate(y)
    in_passive = d < -tol
    if not in_passive.any():
        return _certificate(y, cons, y.copy(), empty, np.empty(0), 0)

    budget = max_iters if max_iters is not None else 100 * n + 1000
    iterations = 0
    mu = np.zeros(cons.n_rows)
    theta = y.copy()

    def restore_dual_feasibility():
        # Re-solve the equality projection on the passive set; while some
        # multiplier wants to go negative, step toward it only as far as
        # dual feasibility allows and drop the blocking rows.
        nonlocal iterations, theta
        while True:
            iterations += 1
            if iterations > budget:
                raise SolverError(
                    f"active-set projection did not converge within {budget} iterations"
                )
            work = np.flatnonzero(in_passive) + 1
            if work.size == 0:
                theta = y.copy()
                mu[:] = 0.0
                return
            theta_new, nu = _equality_projection(y, cons, work)
            rows = work - 1
            blocking = nu < -tol
            if not blocking.any():
                mu[:] = 0.0
                mu[rows] = nu
                theta = theta_new
                return
            current = mu[rows]
            ratios = np.full(nu.shape, np.inf)
            ratios[blocking] = current[blocking] / (current[blocking] - nu[blocking])
            alpha = float(ratios.min())
            stepped = np.maximum(current + alpha * (nu - current), 0.0)
            drop = blocking & (ratios <= alpha)
            stepped[drop] = 0.0
            mu[rows] = stepped
            in_passive[rows[drop]] = False

    restore_dual_feasibility()
    while True:
        d = cons.evaluate(theta)
        outside = np.where(in_passive, 0.0, d)
        j = int(np.argmin(outside))
        if outside[j] >= -tol:
            work = np.flatnonzero(in_passive) + 1
            theta, duals = _equality_projection(y, cons, work, refine=True)
            return _certificate(y, cons, theta, work, duals, iterations)
        in_passive[j] = True
        restore_dual_feasibility()


def project_bruteforce(y, grid: DesignGrid, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Exhaustive projection oracle: enumerate every candidate active set.

    For each subset of constraint rows, solve the equality-constrained
    least squares problem with dense linear algebra and return the first
    candidate passing full KKT verification.  Only for n <= 14.
    """
    y = _finite_1d(y, "y")
    if y.size != grid.n:
        raise ValueError(f"y length {y.size} does not match grid size {grid.n}")
    n = grid.n
    if n > _BRUTEFORCE_MAX_N:
        raise ValueError(f"unsupported size: brute-force oracle requires n <= {_BRUTEFORCE_MAX_N}")
    if n == 2:
        return y.copy()
    a = ConvexityConstraints.from_grid(grid).as_matrix()
    m = n - 2
    for mask in range(1 << m):
        rows = [r for r in range(m) if (mask >> r) & 1]
        if not rows:
            theta = y.copy()
        else:
            a_s = a[rows]
            gram = a_s @ a_s.T
            mu = -np.linalg.solve(gram, a_s @ y)
            if np.any(mu < -tol):
                continue
            theta = y + a_s.T @ mu
        if np.all(a @ theta >= -tol):
            return theta
    raise RuntimeError("no candidate active set satisfied the KKT conditions")


@dataclass(frozen=True)
class DykstraResult:
    theta: np.ndarray
    iterations: int


@numba.njit(cache=True)
def _dykstra_cycles(theta, coef, lo, mid, hi, norm2, max_iters, tol):
    m = coef.size
    cycles = 0
    for _ in range(max_iters):
        cycles += 1
        change = 0.0
        for i in range(m):
            c = coef[i]
            u0 = theta[i] + c * lo[i]
            u1 = theta[i + 1] + c * mid[i]
            u2 = theta[i + 2] + c * hi[i]
            v = lo[i] * u0 + mid[i] * u1 + hi[i] * u2
            c_new = v / norm2[i] if v < 0.0 else 0.0
            d0 = u0 - c_new * lo[i] - theta[i]
            d1 = u1 - c_new * mid[i] - theta[i + 1]
            d2 = u2 - c_new * hi[i] - theta[i + 2]
            theta[i] += d0
            theta[i + 1] += d1
            theta[i + 2] += d2
            coef[i] = c_new
            change = max(change, abs(d0), abs(d1), abs(d2))
        if change <= tol:
            break
    return cycles


def project_dykstra(y, grid: DesignGrid, max_iters: int = 100_000, tol: float = 1e-12) -> DykstraResult:
    """Cyclic Dykstra projections onto the half-spaces {d_i >= 0}.

    Iterates full cycles over the n-2 constraints until the largest
    single-step change within a cycle drops to tol or max_iters cycles are
    spent.  Converges to the same point as ``project``; the adjacent
    half-spaces are nearly parallel, so convergence is slow and this
    routine serves as an independent cross-check, not as the main solver.
    """
    y = _finite_1d(y, "y")
    if y.size != grid.n:
        raise ValueError(f"y length {y.size} does not match grid size {grid.n}")
    if grid.n == 2:
        return DykstraResult(theta=y.copy(), iterations=0)
    cons = ConvexityConstraints.from_grid(grid)
    norm2 = cons.lo * cons.lo + cons.mid * cons.mid + cons.hi * cons.hi
    theta = y.copy()
    coef = np.zeros(cons.n_rows)
    cycles = _dykstra_cycles(
        theta, coef, np.asarray(cons.lo), np.asarray(cons.mid), np.asarray(cons.hi),
        norm2, int(max_iters), float(tol),
    )
    return DykstraResult(theta=theta, iterations=int(cycles))


def canonical_lse(fit: ConvexFit) -> PiecewiseLinearFn:
    """The continuous piecewise-linear convex interpolant of the fit."""
    return PiecewiseLinearFn(fit.grid.points, fit.theta)
