import numpy as np
import pytest

from sdsolve.dual import SupportInterval
from sdsolve.metrics import (MetricError, cvi, cvi_exact_k2, empirical_fk,
                             evaluate_solution, obj_ratio)
from sdsolve.problems import PortfolioProblem
from sdsolve.scenario import SampleStream, ScenarioBatch, build_smoothed_empirical

from oracles import grid_shortfall_mean, grid_step_mean


class TestEmpiricalFk:
    def test_cdf_fraction(self):
        assert empirical_fk([1, 2, 3], 2.0, 1) == pytest.approx(2 / 3)

    def test_shortfall_mean(self):
        assert empirical_fk([0, 2], 3.0, 2) == pytest.approx(2.0)

    def test_below_min_is_zero(self):
        for order in (1, 2):
            assert empirical_fk([1.0, 2.0], 0.5, order) == 0.0

    def test_nondecreasing_in_eta(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            samples = rng.standard_normal(15)
            grid = np.linspace(-3, 3, 200)
            for order in (1, 2):
                vals = empirical_fk(samples, grid, order)
                assert (np.diff(vals) >= -1e-15).all()

    def test_empty_rejected(self):
        with pytest.raises(MetricError):
            empirical_fk([], 0.0, 1)


class TestCviGrid:
    def test_identical_samples_zero(self):
        samples = [0.1, 0.7, -0.3]
        interval = SupportInterval(-1.0, 1.0)
        for order in (1, 2):
            assert cvi(order, samples, samples, interval) == 0.0

    def test_k2_dominated_constant(self):
        # X = {0}, Y = {1}: F2 difference is eta on [0,1], violated for eta > 0
        value = cvi(2, [0.0], [1.0], SupportInterval(0.0, 1.0), grid_points=101)
        assert value == pytest.approx(100 / 101)

    def test_k1_dominant_constant(self):
        # X = {2} dominates Y = {0} on [0,1]: CDF of X is 0 there
        assert cvi(1, [2.0], [0.0], SupportInterval(0.0, 1.0)) == 0.0

    def test_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            x = rng.standard_normal(8)
            y = rng.standard_normal(8)
            v = cvi(2, x, y, SupportInterval(-3, 3), grid_points=97)
            assert 0.0 <= v <= 1.0

    def test_degenerate_interval_rejected(self):
        with pytest.raises(MetricError):
            cvi(1, [0.0], [1.0], SupportInterval(1.0, 1.0))

    def test_first_order_dominance_implies_both_zero(self):
        # X first-order dominates Y on the whole grid => CVI@1 = CVI@2 = 0
        rng = np.random.default_rng(2)
        for _ in range(20):
            y = rng.standard_normal(10)
            x = y + rng.uniform(0.5, 1.0, size=10)  # shifts up pointwise
            interval = SupportInterval(float(min(x.min(), y.min())),
                                       float(max(x.max(), y.max())))
            grid = np.linspace(interval.lower, interval.upper, 500)
            assert (grid_step_mean(x, grid) <= grid_step_mean(y, grid) + 1e-12).all()
            assert cvi(1, x, y, interval) == 0.0
            assert cvi(2, x, y, interval) == 0.0


class TestCviExact:
    def test_identical_zero(self):
        samples = [0.2, -0.4, 1.0]
        assert cvi_exact_k2(samples, samples, SupportInterval(-1, 2)) == 0.0

    def test_unit_measure(self):
        assert cvi_exact_k2([0.0], [1.0], SupportInterval(0.0, 1.0)) == pytest.approx(1.0)

    def test_grid_estimator_converges(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = rng.standard_normal(rng.integers(2, 8))
            y = rng.standard_normal(rng.integers(2, 8))
            interval = SupportInterval(-3.0, 3.0)
            exact = cvi_exact_k2(x, y, interval)
            kinks = x.size + y.size
            for m in (100, 1000, 10_000):
                est = cvi(2, x, y, interval, grid_points=m)
                assert abs(est - exact) <= (kinks + 1) / m

    def test_matches_dense_grid_measure(self):
        # crude oracle: fraction of a fine grid with positive shortfall gap
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.standard_normal(6)
            y = rng.standard_normal(6)
            interval = SupportInterval(-2.5, 2.5)
            grid = np.linspace(interval.lower, interval.upper, 200_001)
            gap = grid_shortfall_mean(x, grid) - grid_shortfall_mean(y, grid)
            crude = (gap > 0).mean()
            exact = cvi_exact_k2(x, y, interval)
            assert abs(exact - crude) < 1e-4


class TestObjRatio:
    def test_zero_gap(self):
        assert obj_ratio(10.65, 10.65) == 0.0

    def test_example(self):
        assert obj_ratio(10.0, 10.65) == pytest.approx(abs(10.0 - 10.65) / 10.65)

    def test_zero_optimum_rejected(self):
        with pytest.raises(MetricError):
            obj_ratio(1.0, 0.0)


class TestEvaluateSolution:
    def test_reference_weights_give_zero_cvi(self):
        rows = np.random.default_rng(5).standard_normal((40, 3)) * 0.1
        source = build_smoothed_empirical(ScenarioBatch(rows), 0.0)
        problem = PortfolioProblem(source, order=2)
        batch = problem.draw(problem.spawn_streams(SampleStream(0)), 100)
        report = evaluate_solution(problem, problem.reference_weights, batch)
        assert report.cvi1 == [0.0] and report.cvi2 == [0.0]
        d = report.to_dict()
        assert d["cvi1_mean"] == 0.0 and d["obj_ratio"] is None
        assert d["grid_points"] == 1000

    def test_optimum_produces_ratio(self):
        rows = np.eye(2) * 0.1
        problem = PortfolioProblem(
            build_smoothed_empirical(ScenarioBatch(rows), 0.0), order=2)
        batch = problem.batch_from_rows(rows)
        report = evaluate_solution(problem, [0.5, 0.5], batch, optimum=0.05)
        assert report.obj_ratio == pytest.approx(0.0)
