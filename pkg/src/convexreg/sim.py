"""Monte Carlo estimation of the least squares risk at the design points.

Noise streams are counter-based (Philox keyed by global seed, sample size
and replication index), so every replication is reproducible in isolation
and results do not depend on how replications are scheduled across
workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import LowerBoundReport, assouad_lower_bound
from .cone import is_convex_feasible, project
from .grid import DesignGrid, make_grid
from .packing import CurvatureClass
from .truths import TruthFunction, get_truth

__all__ = [
    "ExperimentConfig",
    "RiskRow",
    "RiskCurve",
    "RateFit",
    "simulate_once",
    "estimate_risk",
    "rate_exponent",
    "compare_to_lower_bound",
]

GRID_KINDS = ("uniform", "jittered")


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one risk experiment.

    sigma = 0 is allowed and produces noiseless (zero-risk) runs, useful
    as a determinism check.
    """

    truth: str
    n_list: tuple[int, ...]
    sigma: float
    reps: int
    seed: int
    grid_kind: str = "uniform"

    def __post_init__(self):
        get_truth(self.truth)
        n_list = tuple(int(n) for n in self.n_list)
        if not n_list:
            raise ValueError("n_list must not be empty")
        if any(n < 3 for n in n_list):
            raise ValueError("all sample sizes must be >= 3")
        if list(n_list) != sorted(n_list):
            raise ValueError("n_list must be sorted ascending")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.grid_kind not in GRID_KINDS:
            raise ValueError(f"grid_kind must be one of {GRID_KINDS}")
        object.__setattr__(self, "n_list", n_list)


@dataclass(frozen=True)
class RiskRow:
    n: int
    mean_risk: float
    std_error: float
    reps: int


@dataclass(frozen=True)
class RiskCurve:
    rows: tuple[RiskRow, ...]

    @property
    def ns(self) -> np.ndarray:
        return np.array([row.n for row in self.rows])

    @property
    def means(self) -> np.ndarray:
        return np.array([row.mean_risk for row in self.rows])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([row.std_error for row in self.rows])


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def _noise_stream(rep_seed: Sequence[int] | int) -> np.random.Generator:
    if isinstance(rep_seed, (int, np.integer)):
        key = (int(rep_seed),)
    else:
        key = tuple(int(v) for v in rep_seed)
    seq = np.random.SeedSequence(entropy=key[0], spawn_key=key[1:])
    return np.random.Generator(np.random.Philox(seq))


def _target_values(truth: TruthFunction, grid: DesignGrid) -> np.ndarray:
    values = np.asarray(truth(grid.points), dtype=float)
    if is_convex_feasible(values, grid):
        return values
    return project(values, grid).theta


def simulate_once(
    truth: TruthFunction | str,
    grid: DesignGrid,
    sigma: float,
    rep_seed: Sequence[int] | int,
    target: np.ndarray | None = None,
) -> float:
    """One replication: draw Gaussian noise, fit the projection, return
    the average squared loss from the (possibly projected) truth.

    For non-convex truths the loss is measured from the convex projection
    of the noiseless values, which is the quantity the misspecified risk
    bounds control.  Identical (seed, rep) keys reproduce bit for bit.
    """
    if isinstance(truth, str):
        truth = get_truth(truth)
    stream = _noise_stream(rep_seed)
    truth_values = np.asarray(truth(grid.points), dtype=float)
    y = truth_values + stream.normal(0.0, sigma, size=grid.n)
    fit = project(y, grid)
    if target is None:
        target = _target_values(truth, grid)
    diff = fit.theta - target
    return float(np.sum(diff * diff) / grid.n)


def estimate_risk(config: ExperimentConfig, workers: int = 1) -> RiskCurve:
    """Monte Carlo risk curve over the configured sample sizes.

    Deterministic given the config seed, independent of ``workers``:
    every replication draws from its own keyed stream and results are
    aggregated in replication order.
    """
    truth = get_truth(config.truth)
    rows = []
    for n in config.n_list:
        grid = make_grid(config.grid_kind, n, config.seed)
        target = _target_values(truth, grid)
        risks = np.empty(config.reps)

        def run(rep: int, grid=grid, target=target, n=n) -> None:
            risks[rep] = simulate_once(
                truth, grid, config.sigma, (config.seed, n, rep), target=target
            )

        if workers <= 1:
            for rep in range(config.reps):
                run(rep)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run, range(config.reps)))
        mean = float(risks.mean())
        se = float(risks.std(ddof=1) / math.sqrt(config.reps)) if config.reps > 1 else 0.0
        rows.append(RiskRow(n=n, mean_risk=mean, std_error=se, reps=config.reps))
    return RiskCurve(rows=tuple(rows))


def rate_exponent(curve: RiskCurve) -> RateFit:
    """Least squares fit of log(mean risk) against log(n).

    Rows with zero mean risk are dropped; at least two usable rows are
    required.
    """
    usable = [row for row in curve.rows if row.mean_risk > 0.0]
    if len(usable) < 2:
        raise ValueError("need at least two rows with positive mean risk")
    x = np.log([row.n for row in usable])
    y = np.log([row.mean_risk for row in usable])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)


def compare_to_lower_bound(curve: RiskCurve, report: LowerBoundReport) -> bool:
    """Check the curve never undercuts the minimax lower bound.

    The bound is re-evaluated at each row's sample size from the report
    inputs (it is a pure power law in n); rows in the invalid regime are
    skipped.  True when mean - 2 * std_error >= bound everywhere.
    """
    ns = [row.n for row in curve.rows]
    if report.inputs.n not in ns:
        raise ValueError(
            f"report computed at n={report.inputs.n}, not among curve sizes {ns}"
        )
    inp = report.inputs
    cls = CurvatureClass(inp.a, inp.b, inp.kappa1, inp.kappa2)
    for row in curve.rows:
        at_n = assouad_lower_bound(cls, inp.c1, inp.c2, inp.sigma, row.n)
        if not at_n.valid:
            continue
        if row.mean_risk - 2.0 * row.std_error < at_n.value:
            return False
    return True
