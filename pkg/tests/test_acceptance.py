"""Acceptance suite: one test per criterion, each printing a PASS line
with the measured quantities when it succeeds.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines; the
whole module is sized to finish in a few minutes on a laptop.
"""

import math
import time

import numpy as np
import pytest

from convexreg import (
    CurvatureClass,
    DesignGrid,
    SampledFunction,
    assouad_lower_bound,
    build_packing,
    bump_interpolants,
    check_pointwise_bound,
    compare_to_lower_bound,
    concave_projection_affine_check,
    entropy_scaling_estimate,
    estimate_risk,
    integral_l2,
    interpolant,
    interval_count,
    l2_loss,
    lp_norm,
    make_grid,
    phi_tau,
    project,
    project_bruteforce,
    pythagorean_check,
    rate_exponent,
)
from convexreg.cli import main as cli_main
from convexreg.sim import ExperimentConfig
from convexreg.truths import get_truth, polynomial_truth
from conftest import assert_kkt, random_convex_values

RATE_SEED = 6  # fixed seed of the Monte Carlo rate checks
RATE_NS = (50, 100, 200, 400, 800)


@pytest.fixture(scope="module")
def x2_rate_curve():
    cfg = ExperimentConfig(truth="x2", n_list=RATE_NS, sigma=0.3, reps=200, seed=RATE_SEED)
    start = time.perf_counter()
    curve = estimate_risk(cfg)
    return curve, time.perf_counter() - start


@pytest.fixture(scope="module")
def hinge_rate_curve():
    cfg = ExperimentConfig(truth="hinge", n_list=RATE_NS, sigma=0.3, reps=200, seed=RATE_SEED)
    start = time.perf_counter()
    curve = estimate_risk(cfg)
    return curve, time.perf_counter() - start


def test_criterion_01_solver_oracle_equivalence():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 11))
        grid = make_grid("uniform", n)
        y = rng.normal(size=n) * 2.0
        fast = project(y, grid)
        slow = project_bruteforce(y, grid)
        worst = max(worst, float(np.abs(fast.theta - slow).max()))
        assert_kkt(fast, y, tol=1e-8)
    elapsed = time.perf_counter() - start
    assert worst <= 1e-8
    assert elapsed < 10.0
    print(f"PASS 01 solver-oracle equivalence: max diff {worst:.2e} over 200 instances in {elapsed:.1f}s")


def test_criterion_02_kkt_certificates():
    rng = np.random.default_rng(102)
    count = 0
    worst = {"primal": 0.0, "dual": 0.0, "slack": 0.0}
    for _ in range(100):
        n = int(rng.integers(3, 1000))
        kind = "uniform" if rng.random() < 0.5 else "jittered"
        grid = make_grid(kind, n, int(rng.integers(1000)))
        style = rng.random()
        if style < 0.4:
            y = rng.normal(size=n) * 3.0
        elif style < 0.7:
            y = get_truth("hinge")(grid.points) + rng.normal(size=n) * 0.3
        else:
            y = -random_convex_values(grid, rng)
        fit = project(y, grid)
        assert_kkt(fit, np.asarray(y, dtype=float), tol=1e-8)
        worst["primal"] = max(worst["primal"], fit.primal_residual)
        worst["dual"] = max(worst["dual"], fit.dual_residual)
        worst["slack"] = max(worst["slack"], fit.comp_slack)
        count += 1
    print(
        f"PASS 02 KKT certificates: {count} fits, residuals primal {worst['primal']:.1e} "
        f"dual {worst['dual']:.1e} slack {worst['slack']:.1e} (all <= 1e-8)"
    )


def test_criterion_03_hand_derived_fixtures():
    grid = DesignGrid.from_points([0.0, 0.5, 1.0])
    tent = project([0.0, 1.0, 0.0], grid).theta
    assert np.abs(tent - 1.0 / 3.0).max() <= 1e-10
    cap = project([-0.25, 0.0, -0.25], grid).theta
    assert np.abs(cap - (-1.0 / 6.0)).max() <= 1e-10
    print(
        f"PASS 03 hand-derived fixtures: tent -> {tent[0]:.12f}, concave -> {cap[0]:.12f} "
        "(both within 1e-10)"
    )


def test_criterion_04_worst_case_rate(x2_rate_curve):
    curve, elapsed = x2_rate_curve
    fit = rate_exponent(curve)
    assert -0.95 <= fit.slope <= -0.65
    assert elapsed < 300.0
    print(f"PASS 04 square-truth rate: slope {fit.slope:.4f} in [-0.95, -0.65], {elapsed:.0f}s")


def test_criterion_05_adaptation_rate(x2_rate_curve, hinge_rate_curve):
    hinge_curve, elapsed = hinge_rate_curve
    hinge_fit = rate_exponent(hinge_curve)
    x2_fit = rate_exponent(x2_rate_curve[0])
    gap = abs(hinge_fit.slope) - abs(x2_fit.slope)
    assert -1.20 <= hinge_fit.slope <= -0.80
    assert gap >= 0.05
    assert elapsed < 300.0
    print(
        f"PASS 05 adaptation rate: hinge slope {hinge_fit.slope:.4f} in [-1.20, -0.80], "
        f"gap over square truth {gap:.4f} >= 0.05"
    )


def test_criterion_06_packing_separation():
    truth = get_truth("x2")
    cls = CurvatureClass(0.0, 1.0, 2.0, 2.0)
    grid = make_grid("uniform", 4096)
    margins = []
    for m in (4, 8, 16, 32):
        packing = build_packing(truth, cls, m, grid, seed=m)
        assert packing.min_pairwise_l2 >= packing.bound  # zero tolerance
        assert packing.code.size >= math.ceil(math.exp(m / 8.0))
        assert packing.code.min_hamming >= math.ceil(m / 4.0)
        margins.append(packing.min_pairwise_l2 / packing.bound)
    print(
        "PASS 06 packing separation: zero violations for m in {4,8,16,32}, "
        f"measured/bound ratios {['%.2f' % r for r in margins]}"
    )


def test_criterion_07_entropy_scaling():
    truth = get_truth("x2")
    cls = CurvatureClass(0.0, 1.0, 2.0, 2.0)
    grid = make_grid("uniform", 8192)
    result = entropy_scaling_estimate(truth, cls, [4, 8, 16, 32, 64], grid, seed=7)
    assert 0.4 <= result.slope <= 0.6
    print(f"PASS 07 entropy scaling: slope {result.slope:.4f} in [0.4, 0.6] over m up to 64")


def test_criterion_08_minimax_consistency():
    cls = CurvatureClass(0.0, 1.0, 2.0, 2.0)
    reference = assouad_lower_bound(cls, 1.0, 1.0, 1.0, 1000)
    assert reference.value == pytest.approx(1.28e-6, rel=5e-3)
    assert reference.valid

    cfg = ExperimentConfig(truth="x2", n_list=(100, 400, 1600), sigma=1.0, reps=20, seed=RATE_SEED)
    curve = estimate_risk(cfg)
    report = assouad_lower_bound(cls, 1.0, 1.0, 1.0, 1600)
    assert compare_to_lower_bound(curve, report)
    floor = min(row.mean_risk - 2 * row.std_error for row in curve.rows)
    print(
        f"PASS 08 minimax consistency: bound {reference.value:.3e} at n=1000; Monte Carlo "
        f"curve stays above its per-n bounds (min margin risk {floor:.2e})"
    )


def test_criterion_09_misspecification():
    rng = np.random.default_rng(109)
    for _ in range(500):
        n = int(rng.integers(5, 51))
        grid = make_grid("uniform", n)
        f0 = SampledFunction(grid, rng.normal(size=n) * 2.0)
        phi = SampledFunction(grid, random_convex_values(grid, rng))
        assert pythagorean_check(f0, phi, tol=1e-10)
    for n in (5, 50, 500):
        grid = make_grid("uniform", n)
        f0 = SampledFunction.from_callable(grid, get_truth("concave_parabola"))
        assert concave_projection_affine_check(f0, tol=1e-7)
    print(
        "PASS 09 misspecification: 500 Pythagorean trials >= -1e-10; concave projections "
        "affine within 1e-7 for n in {5, 50, 500}"
    )


def test_criterion_10_support_inequality_suite():
    rng = np.random.default_rng(110)

    # interval counting sandwich
    for _ in range(500):
        kind = "uniform" if rng.random() < 0.5 else "jittered"
        n = int(rng.integers(10, 500))
        grid = make_grid(kind, n, int(rng.integers(1000)))
        width = 2.0 * grid.c2 / n
        if width >= 1.0:
            continue
        a = rng.uniform(0.0, 1.0 - width)
        b = rng.uniform(a + width, 1.0)
        m = interval_count(grid, a, b)
        assert n * (b - a) / grid.c2 - 1 <= m <= n * (b - a) / grid.c1 + 1

    # interpolation sandwich with constants 1/c2 and 6/c1
    for _ in range(500):
        kind = "uniform" if rng.random() < 0.5 else "jittered"
        n = int(rng.integers(3, 150))
        grid = make_grid(kind, n, int(rng.integers(1000)))
        f = SampledFunction(grid, rng.normal(size=n))
        g = SampledFunction(grid, rng.normal(size=n))
        integral = integral_l2(interpolant(f), interpolant(g), grid.points[0], grid.points[-1])
        loss = l2_loss(f, g)
        assert integral / grid.c2 <= loss * (1 + 1e-12)
        assert loss <= 6.0 / grid.c1 * integral * (1 + 1e-12)

    # pointwise boundedness of normalized convex interpolants
    for _ in range(500):
        n = int(rng.integers(5, 100))
        grid = DesignGrid.from_points(np.linspace(0.0, 1.0, n))
        values = random_convex_values(grid, rng, scale=float(rng.uniform(0.2, 4.0)))
        p = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        norm = lp_norm(interpolant(SampledFunction(grid, values)), p)
        if norm > 1e-9:
            values = values / norm
        assert check_pointwise_bound(SampledFunction(grid, values), p, float(rng.uniform(0.01, 0.99)))

    # chord deviation bounds for curvature-class centers
    truths = [
        (get_truth("x2"), None),
        (get_truth("exp"), None),
        (polynomial_truth([0.0, 0.0, 2.5], name="steep_parabola"), None),
        (get_truth("x4"), 0.1),  # needs a > 0 for positive curvature
    ]
    for _ in range(500):
        truth, a_min = truths[int(rng.integers(len(truths)))]
        lo = a_min if a_min is not None else 0.0
        a = float(rng.uniform(lo, 0.7))
        b = float(rng.uniform(a + 0.2, 1.0))
        kappa1, kappa2 = truth.second_derivative_range(a, b)
        cls = CurvatureClass(a, b, kappa1, kappa2)
        kind = "uniform" if rng.random() < 0.5 else "jittered"
        seed = int(rng.integers(1000))
        n_floor = math.ceil(4.0 * 1.5 / (b - a))  # jittered c2 <= 1.5
        n = int(rng.integers(n_floor, 4 * n_floor))
        grid = make_grid(kind, n, seed)
        assert grid.n >= 4.0 * grid.c2 / (b - a)
        (chord,) = bump_interpolants(truth, 1, cls)
        member = phi_tau(truth, [chord], [1], grid)
        phi0 = SampledFunction.from_callable(grid, truth)
        excess = l2_loss(member, phi0)
        lower = kappa1**2 * (b - a) ** 5 / (4096.0 * grid.c2)
        upper = kappa2**2 * (b - a) ** 5 / (32.0 * grid.c1)
        assert lower <= excess <= upper

    print(
        "PASS 10 support inequalities: counting, interpolation, boundedness and "
        "chord-deviation checks each passed 500 randomized trials with zero violations"
    )


def test_criterion_11_cli_determinism(tmp_path):
    args = [
        "risk", "--truth", "x2", "--sigma", "0.3", "--n", "25,50",
        "--reps", "10", "--seed", "4",
    ]
    payloads = []
    for threads in ("1", "4", "8"):
        out = tmp_path / f"risk_t{threads}.csv"
        assert cli_main(args + ["--threads", threads, "--out", str(out)]) == 0
        payloads.append(out.read_bytes())
    repeat = tmp_path / "risk_again.csv"
    assert cli_main(args + ["--threads", "4", "--out", str(repeat)]) == 0
    payloads.append(repeat.read_bytes())
    assert all(p == payloads[0] for p in payloads[1:])
    print("PASS 11 determinism: byte-identical risk CSVs under 1, 4, 8 threads and on re-run")
