import numpy as np
import pytest

from sdsolve.dual import violation_thresholds
from sdsolve.problems import (PortfolioProblem, ProblemError, TransportProblem,
                              portfolio_objective_grad, portfolio_outcomes,
                              project_rows, project_simplex, transport_cost,
                              transport_objective_grad, transport_outcomes)
from sdsolve.scenario import (SampleStream, ScenarioBatch, build_gaussian_mixture,
                              build_smoothed_empirical)

from oracles import gradient_fd


def empirical_source(rows, bandwidth=0.0):
    return build_smoothed_empirical(ScenarioBatch(np.atleast_2d(rows)), bandwidth)


class TestSimplexProjection:
    def test_already_feasible(self):
        np.testing.assert_allclose(project_simplex([0.5, 0.5]), [0.5, 0.5])

    def test_vertex(self):
        np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])

    def test_symmetric(self):
        np.testing.assert_allclose(project_simplex([1.0, 1.0]), [0.5, 0.5])

    def test_idempotent_and_feasible(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            v = rng.standard_normal(rng.integers(1, 9)) * 10
            p = project_simplex(v)
            assert (p >= 0).all()
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(project_simplex(p), p, atol=1e-12)

    def test_optimality_against_random_feasible_points(self):
        # the projection must beat 10^4 random feasible points in distance
        rng = np.random.default_rng(1)
        for _ in range(5):
            v = rng.standard_normal(5) * 3
            p = project_simplex(v)
            dist = np.linalg.norm(v - p)
            other = rng.dirichlet(np.ones(5), size=10_000)
            dists = np.linalg.norm(other - v, axis=1)
            assert dist <= dists.min() + 1e-9

    def test_rows_independent(self):
        out = project_rows(np.array([[2.0, 0.0], [1.0, 1.0]]))
        np.testing.assert_allclose(out, [[1.0, 0.0], [0.5, 0.5]])

    def test_zero_row_becomes_uniform(self):
        out = project_rows(np.zeros((1, 4)))
        np.testing.assert_allclose(out, np.full((1, 4), 0.25))

    def test_row_stochastic_unchanged(self):
        z = np.array([[0.2, 0.8], [0.7, 0.3]])
        np.testing.assert_allclose(project_rows(z), z, atol=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ProblemError):
            project_simplex([np.nan, 0.0])


class TestPortfolioPieces:
    def test_objective_grad_is_column_means(self):
        batch = np.array([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(portfolio_objective_grad(batch), [0.5, 0.5])

    def test_objective_grad_single_row(self):
        np.testing.assert_allclose(portfolio_objective_grad([[0.1, 0.2]]), [0.1, 0.2])

    def test_objective_grad_zeros(self):
        np.testing.assert_allclose(portfolio_objective_grad(np.zeros((3, 2))), [0, 0])

    def test_outcomes_vertex_selects_column(self):
        np.testing.assert_allclose(portfolio_outcomes([1.0, 0.0], [[3.0, 9.0]]), [3.0])

    def test_outcomes_mixture(self):
        assert portfolio_outcomes([0.5, 0.5], [[2.0, 4.0]])[0] == pytest.approx(3.0)

    def test_outcomes_dim_mismatch(self):
        with pytest.raises(ProblemError, match="mismatch"):
            portfolio_outcomes([1.0], [[1.0, 2.0]])

    def test_coupled_reference_equals_outcomes_at_reference_weights(self):
        rows = np.random.default_rng(2).standard_normal((20, 3)) * 0.1
        problem = PortfolioProblem(empirical_source(rows), order=2)
        batch = problem.draw(problem.spawn_streams(SampleStream(0)), 40)
        outcomes = portfolio_outcomes(problem.reference_weights, batch.returns)
        np.testing.assert_allclose(outcomes, batch.references)


class TestTransportPieces:
    def test_objective_grad_formula(self):
        # all-ones costs, mean demand (1, 2), one warehouse
        grad = transport_objective_grad(np.ones((2, 1)), np.array([[1.0, 2.0]]))
        np.testing.assert_allclose(grad, [[-1.0], [-2.0]])

    def test_objective_grad_zero_costs(self):
        grad = transport_objective_grad(np.zeros((2, 2)), np.ones((4, 2)))
        np.testing.assert_allclose(grad, np.zeros((2, 2)))

    def test_objective_grad_linear_in_demand(self):
        costs = np.array([[1.0, 2.0], [3.0, 4.0]])
        demand = np.array([[1.0, 2.0], [3.0, 1.0]])
        g1 = transport_objective_grad(costs, demand)
        g2 = transport_objective_grad(costs, 2 * demand)
        np.testing.assert_allclose(g2, 2 * g1)

    def test_outcomes_full_routing(self):
        z = np.array([[1.0, 0.0], [1.0, 0.0]])
        demand = np.array([[3.0, 5.0]])
        out = transport_outcomes(z, demand)
        np.testing.assert_allclose(out[:, 0], [8.0])
        np.testing.assert_allclose(out[:, 1], [0.0])

    def test_outcomes_identity_routing(self):
        z = np.eye(2)
        out = transport_outcomes(z, np.array([[3.0, 5.0]]))
        np.testing.assert_allclose(out, [[3.0, 5.0]])

    def test_mass_conservation(self):
        rng = np.random.default_rng(3)
        demand = rng.uniform(0, 10, size=(30, 4))
        for _ in range(10):
            z = project_rows(rng.standard_normal((4, 3)))
            out = transport_outcomes(z, demand)
            np.testing.assert_allclose(out.sum(axis=1), demand.sum(axis=1),
                                       atol=1e-10)

    def test_cost_value(self):
        costs = np.array([[2.0]])
        z = np.array([[1.0]])
        demand = np.array([[3.0], [5.0]])
        assert transport_cost(z, costs, demand) == pytest.approx(8.0)


def make_transport_problem(order=2, supply_shift=0.0, seed=4):
    rng = np.random.default_rng(seed)
    m, nw = 4, 3
    costs = rng.uniform(0.5, 2.0, size=(m, nw))
    demand = rng.uniform(1.0, 3.0, size=(50, m))
    supply = rng.uniform(2.0, 4.0, size=(50, nw)) + supply_shift
    return TransportProblem(costs, empirical_source(demand),
                            empirical_source(supply), order=order)


class TestProblemProtocol:
    def test_portfolio_initial_feasible(self):
        problem = PortfolioProblem(empirical_source(np.eye(3)), order=2)
        z0 = problem.initial_point()
        np.testing.assert_allclose(z0, problem.project(z0))
        assert z0.sum() == pytest.approx(1.0)

    def test_transport_initial_feasible(self):
        problem = make_transport_problem()
        z0 = problem.initial_point()
        np.testing.assert_allclose(z0, problem.project(z0), atol=1e-12)

    def test_portfolio_objective_matches_mean(self):
        rows = np.random.default_rng(5).standard_normal((30, 3)) * 0.1
        problem = PortfolioProblem(empirical_source(rows), order=2)
        batch = problem.draw(problem.spawn_streams(SampleStream(1)), 64)
        z = project_simplex(np.array([0.2, 0.5, 0.3]))
        assert problem.objective_value(z, batch) == pytest.approx(
            float((batch.returns @ z).mean()))

    def test_outcome_gradient_finite_difference_portfolio(self):
        rng = np.random.default_rng(6)
        rows = rng.standard_normal((25, 4)) * 0.1
        problem = PortfolioProblem(empirical_source(rows), order=2)
        batch = problem.draw(problem.spawn_streams(SampleStream(2)), 50)
        weights = rng.random(50)
        term = problem.constraint_terms(problem.initial_point(), batch)[0]
        analytic = term.gradient(weights)

        def surrogate(z):
            return float(weights @ (batch.returns @ z)) / 50

        fd = gradient_fd(surrogate, problem.initial_point(), 1e-6)
        np.testing.assert_allclose(analytic, fd, rtol=1e-6, atol=1e-9)

    def test_outcome_gradient_finite_difference_transport(self):
        rng = np.random.default_rng(7)
        problem = make_transport_problem(seed=7)
        batch = problem.draw(problem.spawn_streams(SampleStream(3)), 40)
        z = problem.initial_point()
        terms = problem.constraint_terms(z, batch)
        for j, term in enumerate(terms):
            weights = rng.random(40)
            analytic = term.gradient(weights)

            def surrogate(zz, _j=j):
                return float(weights @ (batch.demand @ zz[:, _j])) / 40

            fd = gradient_fd(surrogate, z, 1e-6)
            np.testing.assert_allclose(analytic, fd, rtol=1e-6, atol=1e-9)

    def test_transport_orientation_supply_dominant(self):
        # supply uniformly above assigned demand => every threshold set empty
        problem = make_transport_problem(supply_shift=50.0)
        batch = problem.draw(problem.spawn_streams(SampleStream(4)), 60)
        z = problem.initial_point()
        for term in problem.constraint_terms(z, batch):
            assert not term.decision_dominates
            np.testing.assert_array_equal(term.dominant, term.references)
            ts = violation_thresholds(term.order, term.dominant, term.dominated)
            assert ts.size == 0

    def test_portfolio_decision_dominates(self):
        problem = PortfolioProblem(empirical_source(np.eye(2)), order=1)
        batch = problem.draw(problem.spawn_streams(SampleStream(5)), 10)
        term = problem.constraint_terms(problem.initial_point(), batch)[0]
        assert term.decision_dominates and term.sign == 1.0

    def test_independent_reference_source(self):
        rows = np.random.default_rng(8).standard_normal((10, 2)) * 0.1
        ref_rows = np.full((5, 1), -0.5)
        problem = PortfolioProblem(empirical_source(rows), order=2,
                                   reference_source=empirical_source(ref_rows))
        batch = problem.draw(problem.spawn_streams(SampleStream(6)), 30)
        np.testing.assert_allclose(batch.references, -0.5)

    def test_reference_weights_validated(self):
        with pytest.raises(ProblemError):
            PortfolioProblem(empirical_source(np.eye(2)), reference_weights=[0.7, 0.7])

    def test_transport_source_dims_validated(self):
        costs = np.ones((3, 2))
        with pytest.raises(ProblemError, match="demand"):
            TransportProblem(costs, empirical_source(np.ones((5, 2))),
                             empirical_source(np.ones((5, 2))))

    def test_batch_from_rows_portfolio(self):
        rows = np.array([[0.1, 0.2], [0.3, 0.0]])
        problem = PortfolioProblem(empirical_source(rows), order=2)
        batch = problem.batch_from_rows(rows)
        np.testing.assert_allclose(batch.references, rows.mean(axis=1))
        with pytest.raises(ProblemError):
            problem.batch_from_rows(np.ones((2, 3)))

    def test_batch_from_rows_transport(self):
        problem = make_transport_problem()
        joint = np.ones((6, problem.n_regions + problem.n_warehouses))
        batch = problem.batch_from_rows(joint)
        assert batch.demand.shape == (6, problem.n_regions)
        assert batch.supply.shape == (6, problem.n_warehouses)
