import math

import numpy as np
import pytest
from scipy.integrate import quad

from lambdafield import (PathCrossing, RobotShape, collision_pdf,
                         constant_velocity, expected_risk, momentum_risk,
                         path_collision_probability, swept_cells)


def straight_poses(x0, x1, y, step=0.05):
    return [(x, y, 0.0) for x in np.arange(x0, x1 + step / 2, step)]


class TestSweptCells:
    def test_axis_aligned_narrow_footprint(self, observed_free_grid):
        shape = RobotShape(0.1, 0.2, 20.0)
        crossing = swept_cells(observed_free_grid,
                               straight_poses(0.5, 1.5, 0.55), shape)
        assert len(crossing) == 10
        np.testing.assert_allclose(crossing.areas, 0.01, atol=1e-12)

    def test_zero_length_path(self, observed_free_grid):
        shape = RobotShape(0.1, 0.2, 20.0)
        crossing = swept_cells(observed_free_grid, [(1.0, 1.0, 0.0)], shape)
        assert len(crossing) == 0
        assert path_collision_probability(crossing) == 0.0

    def test_total_area_matches_width_times_length(self, observed_free_grid, rng):
        shape = RobotShape(0.35, 0.2, 20.0)
        for _ in range(10):
            # random gentle polyline away from the border
            n = 12
            xs = np.linspace(0.8, 3.0, n) + rng.normal(0, 0.01, n)
            ys = 2.0 + np.cumsum(rng.normal(0, 0.02, n))
            poses = list(zip(xs, ys, np.zeros(n)))
            length = float(np.sum(np.hypot(np.diff(xs), np.diff(ys))))
            crossing = swept_cells(observed_free_grid, poses, shape)
            assert crossing.total_area == pytest.approx(
                shape.width * length, rel=0.02)

    def test_reentered_cell_counted_once(self, observed_free_grid):
        shape = RobotShape(0.1, 0.2, 20.0)
        there = straight_poses(0.5, 1.5, 0.55)
        back = straight_poses(0.5, 1.5, 0.55)[::-1]
        crossing = swept_cells(observed_free_grid, there + back, shape)
        assert len(crossing) == len(set(crossing.cells.tolist()))

    def test_path_exits_grid_rejected(self, observed_free_grid):
        shape = RobotShape(0.1, 0.2, 20.0)
        with pytest.raises(ValueError):
            swept_cells(observed_free_grid, straight_poses(3.5, 4.5, 0.55), shape)

    def test_cumulative_area_strictly_increasing(self, observed_free_grid):
        shape = RobotShape(0.3, 0.2, 20.0)
        crossing = swept_cells(observed_free_grid,
                               straight_poses(0.5, 2.5, 1.17), shape)
        assert (np.diff(crossing.cumulative_areas()) > 0).all()


class TestCollisionPdf:
    def test_density_at_origin_is_lambda(self):
        crossing = PathCrossing.from_lambdas([2.0], [0.04])
        assert collision_pdf(crossing, 0.0) == pytest.approx(2.0, abs=1e-15)

    def test_integrates_to_collision_probability(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 12))
            crossing = PathCrossing.from_lambdas(rng.random(n) * 5.0,
                                                 rng.random(n) * 0.05 + 0.005)
            cum = crossing.cumulative_areas()
            total = sum(quad(lambda a: collision_pdf(crossing, a),
                             cum[i], cum[i + 1])[0] for i in range(n))
            assert total == pytest.approx(path_collision_probability(crossing),
                                          abs=1e-8)

    def test_cdf_jumps_through_dense_cell(self):
        # a dense cell in the middle drives the CDF close to one
        crossing = PathCrossing.from_lambdas([0.1, 200.0, 0.1], [0.04] * 3)
        cum = crossing.cumulative_areas()
        cdf_before = quad(lambda a: collision_pdf(crossing, a), 0, cum[1])[0]
        cdf_after = quad(lambda a: collision_pdf(crossing, a), 0, cum[2])[0]
        assert cdf_before < 0.01
        assert cdf_after > 0.99

    def test_out_of_range_rejected(self):
        crossing = PathCrossing.from_lambdas([1.0], [0.04])
        with pytest.raises(ValueError):
            collision_pdf(crossing, -0.01)
        with pytest.raises(ValueError):
            collision_pdf(crossing, 0.05)


class TestPathCollisionProbability:
    def test_four_small_cells(self):
        lam = -math.log(0.9) / 0.04
        crossing = PathCrossing.from_lambdas([lam] * 4, [0.04] * 4)
        assert path_collision_probability(crossing) == pytest.approx(
            1.0 - 0.9 ** 4, abs=1e-12)

    def test_two_double_cells_same_intensity(self):
        lam = -math.log(0.9) / 0.04
        fine = PathCrossing.from_lambdas([lam] * 4, [0.04] * 4)
        coarse = PathCrossing.from_lambdas([lam] * 2, [0.08] * 2)
        assert path_collision_probability(coarse) == pytest.approx(
            path_collision_probability(fine), abs=1e-12)

    def test_monotone_under_appending_cells(self, rng):
        lam = rng.random(15) * 3.0
        areas = rng.random(15) * 0.05 + 0.001
        probs = [path_collision_probability(
            PathCrossing.from_lambdas(lam[:n], areas[:n]))
            for n in range(16)]
        assert all(a <= b for a, b in zip(probs, probs[1:]))


class TestExpectedRisk:
    def test_unit_risk_equals_collision_probability(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 30))
            crossing = PathCrossing.from_lambdas(rng.random(n) * 4.0,
                                                 rng.random(n) * 0.05 + 0.001)
            assert expected_risk(crossing, lambda a: 1.0) == pytest.approx(
                path_collision_probability(crossing), abs=1e-12)

    def test_zero_intensity_gives_zero(self):
        crossing = PathCrossing.from_lambdas([0.0] * 5, [0.04] * 5)
        assert expected_risk(crossing, lambda a: 10.0) == 0.0

    def test_bounded_by_max_risk_times_probability(self, rng):
        crossing = PathCrossing.from_lambdas(rng.random(10) * 3.0,
                                             rng.random(10) * 0.04 + 0.001)
        risk = expected_risk(crossing, lambda a: 2.0 + a)
        cap = (2.0 + crossing.total_area) * path_collision_probability(crossing)
        assert 0.0 <= risk <= cap

    def test_bound_choice_is_monotone_for_constant_risk(self, observed_free_grid):
        observed_free_grid.hits[400:440] = 2
        shape = RobotShape(0.3, 0.2, 20.0)
        crossing = swept_cells(observed_free_grid,
                               straight_poses(0.5, 3.0, 1.05), shape)
        risks = [expected_risk(crossing, lambda a: 1.0, b)
                 for b in ("lower", "mle", "upper")]
        assert risks[0] <= risks[1] <= risks[2]


class TestMomentumRisk:
    def test_constant_speed(self):
        shape = RobotShape(0.4, 0.6, 20.0)
        risk = momentum_risk(shape, constant_velocity(0.5))
        assert risk(0.0) == pytest.approx(10.0)
        assert risk(0.3) == pytest.approx(10.0)

    def test_abscissa_conversion(self):
        shape = RobotShape(0.4, 0.6, 20.0)
        ramp = lambda s: min(s, 1.0)  # 0 -> 1 over one meter
        risk = momentum_risk(shape, ramp)
        assert risk(0.4 * 0.5) == pytest.approx(20.0 * 0.5)

    def test_single_hazard_cell_pipeline(self):
        # constant speed through one cell: E[risk] = m v P(coll)
        shape = RobotShape(0.4, 0.6, 20.0)
        crossing = PathCrossing.from_lambdas([3.0], [0.08])
        risk = expected_risk(crossing,
                             momentum_risk(shape, constant_velocity(0.7)))
        assert risk == pytest.approx(
            20.0 * 0.7 * path_collision_probability(crossing), abs=1e-12)

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            constant_velocity(-0.1)
