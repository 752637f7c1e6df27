import numpy as np
import pytest

from convexreg import (
    SampledFunction,
    adaptation_envelope,
    best_affine_fit,
    canonicalize,
    knot_interpolant,
    local_ball_size_upper,
    make_grid,
)
from convexreg.cone import is_convex_feasible


class TestCanonicalize:
    def test_collinear_merges_to_one_piece(self):
        alpha = canonicalize([0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
        assert alpha.k == 1
        np.testing.assert_allclose(alpha.knots, [0.0, 1.0])

    def test_kink_keeps_two_pieces(self):
        alpha = canonicalize([0.0, 0.5, 1.0], [1.0, 0.0, 1.0])
        assert alpha.k == 2

    def test_partial_merge(self):
        alpha = canonicalize([0.0, 0.25, 0.5, 1.0], [0.0, 0.0, 0.0, 1.0])
        assert alpha.k == 2
        np.testing.assert_allclose(alpha.knots, [0.0, 0.5, 1.0])

    def test_decreasing_slopes_rejected(self):
        with pytest.raises(ValueError):
            canonicalize([0.0, 0.5, 1.0], [0.0, 1.0, 0.0])

    def test_evaluation(self):
        alpha = canonicalize([0.0, 0.5, 1.0], [1.0, 0.0, 1.0])
        assert float(alpha(0.25)) == pytest.approx(0.5)


class TestBestAffineFit:
    def test_affine_recovered(self):
        grid = make_grid("uniform", 25)
        f = SampledFunction(grid, -1.5 + 0.3 * grid.points)
        slope, intercept, distance = best_affine_fit(f)
        assert slope == pytest.approx(0.3, abs=1e-12)
        assert intercept == pytest.approx(-1.5, abs=1e-12)
        assert distance == pytest.approx(0.0, abs=1e-12)

    def test_square_hand_computed(self, grid3):
        f = SampledFunction.from_callable(grid3, lambda x: x * x)
        slope, intercept, distance = best_affine_fit(f)
        assert slope == pytest.approx(1.0, rel=1e-12)
        assert intercept == pytest.approx(-1.0 / 12.0, rel=1e-12)
        assert distance == pytest.approx(np.sqrt(1.0 / 72.0), rel=1e-12)

    def test_affine_shift_invariance(self):
        grid = make_grid("uniform", 40)
        f = SampledFunction(grid, grid.points**2)
        g = SampledFunction(grid, grid.points**2 + 3.0 - 2.0 * grid.points)
        assert best_affine_fit(f)[2] == pytest.approx(best_affine_fit(g)[2], rel=1e-10)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(3, 80))
            grid = make_grid("jittered", n, int(rng.integers(100)))
            f = SampledFunction(grid, rng.normal(size=n))
            slope, intercept, _ = best_affine_fit(f)
            residual = f.values - (intercept + slope * grid.points)
            assert abs(np.mean(residual)) <= 1e-10
            assert abs(np.mean(residual * grid.points)) <= 1e-10


class TestKnotInterpolant:
    def test_affine_exact(self):
        alpha = knot_interpolant(lambda x: 2.0 * x - 0.5, 7, 0.0, 1.0)
        assert alpha.k == 1
        xs = np.linspace(0.0, 1.0, 101)
        np.testing.assert_allclose(alpha(xs), 2.0 * xs - 0.5, atol=1e-14)

    def test_square_m2_fixture(self):
        alpha = knot_interpolant(lambda x: x * x, 2, 0.0, 1.0)
        np.testing.assert_allclose(alpha.knots, [0.0, 0.5, 1.0])
        np.testing.assert_allclose(alpha(np.array([0.0, 0.5, 1.0])), [0.0, 0.25, 1.0])
        xs = np.linspace(0.0, 1.0, 10001)
        sup_err = np.abs(alpha(xs) - xs * xs).max()
        assert sup_err == pytest.approx(1.0 / 16.0, abs=1e-12)

    def test_square_m4_error_bound(self):
        alpha = knot_interpolant(lambda x: x * x, 4, 0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 10001)
        assert np.abs(alpha(xs) - xs * xs).max() <= 1.0 / 64.0 + 1e-12

    @pytest.mark.parametrize(
        "fn,kappa2",
        [(lambda x: x * x, 2.0), (np.exp, np.e), (lambda x: x**4, 12.0)],
    )
    @pytest.mark.parametrize("m", [1, 3, 8])
    def test_sup_error_bound_smooth(self, fn, kappa2, m):
        alpha = knot_interpolant(fn, m, 0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 10001)
        bound = kappa2 / (8.0 * m * m)
        assert np.abs(alpha(xs) - fn(xs)).max() <= bound + 1e-12

    def test_output_convex_feasible(self):
        grid = make_grid("uniform", 64)
        alpha = knot_interpolant(np.exp, 5, 0.0, 1.0)
        assert is_convex_feasible(alpha(grid.points), grid)

    def test_m_below_one(self):
        with pytest.raises(ValueError):
            knot_interpolant(lambda x: x, 0, 0.0, 1.0)


class TestAdaptationEnvelope:
    def test_affine_truth(self):
        grid = make_grid("uniform", 200)
        f = SampledFunction(grid, 1.0 + 0.2 * grid.points)
        best_k, value = adaptation_envelope(f, sigma=0.7, max_k=10)
        assert best_k == 1
        assert value == pytest.approx(0.7**2 / 200.0, rel=1e-12)

    def test_two_piece_truth_exact(self):
        grid = make_grid("uniform", 100)
        f = SampledFunction(grid, np.maximum(0.0, 2.0 * grid.points - 1.0))
        _, value = adaptation_envelope(f, sigma=1.0, max_k=8)
        assert value <= 2.0**1.25 / 100.0 * (1 + 1e-12)

    def test_nonincreasing_in_max_k(self):
        grid = make_grid("uniform", 150)
        f = SampledFunction(grid, grid.points**2)
        values = [adaptation_envelope(f, sigma=1.0, max_k=k)[1] for k in (1, 2, 4, 8, 16, 32)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_square_truth_candidates(self):
        grid = make_grid("uniform", 1000)
        f = SampledFunction(grid, grid.points**2)
        best_k, value = adaptation_envelope(f, sigma=1.0, max_k=32)
        assert 0.0 < value < np.inf
        # every candidate beats neither the approximation nor variance term alone
        assert value >= 1.0 / 1000.0  # at least sigma^2 k^{5/4}/n with k = 1

    def test_nonconvex_rejected(self, grid3):
        with pytest.raises(ValueError):
            adaptation_envelope(SampledFunction(grid3, [0.0, 1.0, 0.0]), 1.0, 4)


class TestLocalBallSize:
    def test_affine_gives_r(self):
        grid = make_grid("uniform", 120)
        f = SampledFunction(grid, 0.3 - 0.1 * grid.points)
        for r in (0.01, 0.5, 2.0):
            assert local_ball_size_upper(r, f, 8) == r

    def test_nondecreasing_in_r(self):
        grid = make_grid("uniform", 80)
        f = SampledFunction(grid, grid.points**2)
        rs = np.linspace(0.01, 2.0, 25)
        vals = [local_ball_size_upper(float(r), f, 8) for r in rs]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_three_piece_representable(self):
        grid = make_grid("uniform", 90)
        # kinks at 1/3 and 2/3: exactly representable by the 3-piece candidate
        x = grid.points
        vals = np.maximum.reduce([-x + 0.2, 0.2 * x, 2.0 * x - 1.2])
        f = SampledFunction(grid, vals)
        r = 0.05
        assert local_ball_size_upper(r, f, 6) <= r * 3.0**2.5 * (1 + 1e-9)

    def test_affine_candidate_cap(self):
        grid = make_grid("uniform", 70)
        f = SampledFunction(grid, np.exp(grid.points))
        _, _, distance = best_affine_fit(f)
        r = 0.1
        assert local_ball_size_upper(r, f, 12) <= np.sqrt(r * r + distance * distance) * (1 + 1e-12)

    def test_r_positive_required(self):
        grid = make_grid("uniform", 10)
        with pytest.raises(ValueError):
            local_ball_size_upper(0.0, SampledFunction(grid, grid.points), 4)
