import numpy as np
import pytest

from sdsolve.baseline import (LinearProgram, LpError, build_sdlp, greedy_portfolio,
                              greedy_transport, sdlp_portfolio, simplex_solve,
                              verify_optimal, write_lp_text)
from sdsolve.dual import violation_thresholds

from oracles import lp_oracle


class TestSimplexBasics:
    def test_bounded_optimal(self):
        res = simplex_solve(LinearProgram(c=[1.0], a_ub=[[1.0]], b_ub=[1.0]))
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(1.0)
        assert res.value == pytest.approx(1.0)

    def test_infeasible(self):
        res = simplex_solve(LinearProgram(c=[1.0], a_ub=[[1.0]], b_ub=[-1.0]))
        assert res.status == "infeasible"
        assert res.x is None

    def test_unbounded(self):
        res = simplex_solve(LinearProgram(c=[1.0]))
        assert res.status == "unbounded"

    def test_free_variable_unbounded(self):
        lp = LinearProgram(c=[1.0], a_ub=[[0.0]], b_ub=[1.0],
                           nonneg=np.array([False]))
        assert simplex_solve(lp).status == "unbounded"

    def test_free_variable_optimal(self):
        # maximize -x with free x and x >= -3 (written as -x <= 3)
        lp = LinearProgram(c=[-1.0], a_ub=[[-1.0]], b_ub=[3.0],
                           nonneg=np.array([False]))
        res = simplex_solve(lp)
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(-3.0)

    def test_equality_constraint(self):
        lp = LinearProgram(c=[1.0, 2.0], a_eq=[[1.0, 1.0]], b_eq=[1.0])
        res = simplex_solve(lp)
        assert res.status == "optimal"
        np.testing.assert_allclose(res.x, [0.0, 1.0], atol=1e-9)

    def test_iteration_limit(self):
        lp = LinearProgram(c=[1.0, 1.0], a_ub=[[1.0, 1.0]], b_ub=[1.0])
        assert simplex_solve(lp, max_pivots=0).status == "iteration-limit"

    def test_verify_rejects_nonoptimal(self):
        res = simplex_solve(LinearProgram(c=[1.0]))
        with pytest.raises(LpError):
            verify_optimal(LinearProgram(c=[1.0]), res)

    def test_malformed_rejected(self):
        with pytest.raises(LpError):
            LinearProgram(c=[1.0], a_ub=[[1.0, 2.0]], b_ub=[1.0])
        with pytest.raises(LpError):
            LinearProgram(c=[np.inf])

    def test_lp_text_dump(self, tmp_path):
        lp = LinearProgram(c=[1.0, -2.0], a_ub=[[1.0, 1.0]], b_ub=[3.0],
                           a_eq=[[0.0, 1.0]], b_eq=[1.0])
        path = tmp_path / "dump.lp"
        write_lp_text(lp, path)
        text = path.read_text()
        assert text.startswith("maximize 1.0 -2.0")
        assert "<= 3.0" in text and "== 1.0" in text and "nonneg 1 1" in text


def random_lp(rng):
    """Small random LP with nonnegative variables and mixed status."""
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 8))
    a_ub = rng.standard_normal((m, n))
    b_ub = rng.standard_normal(m) + 0.5
    rows = [a_ub]
    bs = [b_ub]
    if rng.random() < 0.6:
        # norm cap keeps many instances bounded
        rows.append(np.ones((1, n)))
        bs.append(np.array([float(rng.uniform(1.0, 6.0))]))
    a_eq = b_eq = None
    if rng.random() < 0.3:
        a_eq = rng.standard_normal((1, n))
        b_eq = rng.standard_normal(1)
    c = rng.standard_normal(n)
    return LinearProgram(c=c, a_ub=np.vstack(rows), b_ub=np.concatenate(bs),
                         a_eq=a_eq, b_eq=b_eq)


class TestSimplexAgainstEnumeration:
    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(20250808)
        statuses = {"optimal": 0, "infeasible": 0, "unbounded": 0}
        for _ in range(200):
            lp = random_lp(rng)
            res = simplex_solve(lp)
            status, value = lp_oracle(lp)
            assert res.status == status, f"simplex {res.status} vs oracle {status}"
            statuses[status] += 1
            if status == "optimal":
                assert res.value == pytest.approx(value, abs=1e-8)
                verify_optimal(lp, res, tol=1e-8)
        # the generator must actually exercise every status
        assert min(statuses.values()) >= 5


class TestSdlp:
    def test_single_scenario_hand_lp(self):
        lp = build_sdlp(np.array([[2.0]]), np.array([1.0]))
        assert lp.n_vars == 2  # z plus one shortfall variable
        res = simplex_solve(lp)
        assert res.status == "optimal"
        assert res.x[0] == pytest.approx(1.0)
        assert res.value == pytest.approx(2.0)
        assert res.x[1] == pytest.approx(0.0)  # shortfall slack unused

    def test_row_counts_match_contract(self):
        scenarios = np.random.default_rng(0).standard_normal((6, 3))
        reference = np.random.default_rng(1).standard_normal(4)
        lp = build_sdlp(scenarios, reference)
        assert lp.n_vars == 3 + 6 * 4
        assert lp.b_ub.size == 6 * 4 + 4
        assert lp.b_eq.size == 1

    def test_inactive_constraints_give_greedy(self):
        # reference far below every scenario outcome: SDLP = greedy optimum
        rng = np.random.default_rng(2)
        scenarios = rng.uniform(0.5, 1.5, size=(10, 3))
        reference = np.full(10, -5.0)
        z, res = sdlp_portfolio(scenarios, reference)
        greedy = greedy_portfolio(scenarios)
        assert res.value == pytest.approx(float(scenarios.mean(axis=0).max()))
        np.testing.assert_allclose(z, greedy, atol=1e-9)

    def test_two_scenario_enumeration(self):
        scenarios = np.array([[0.2, 0.0], [0.0, 0.1]])
        reference = scenarios @ [0.5, 0.5]
        lp = build_sdlp(scenarios, reference)
        res = simplex_solve(lp)
        status, value = lp_oracle(lp)
        assert res.status == status == "optimal"
        assert res.value == pytest.approx(value, abs=1e-8)

    def test_solution_dominates_on_build_scenarios(self):
        rng = np.random.default_rng(3)
        for trial in range(5):
            d = int(rng.integers(2, 6))
            m = int(rng.integers(4, 20))
            scenarios = 0.1 + rng.standard_normal((m, d)) * 0.15
            reference = scenarios @ np.full(d, 1.0 / d)
            z, res = sdlp_portfolio(scenarios, reference)
            assert res.status == "optimal"
            thresholds = violation_thresholds(2, scenarios @ z, reference)
            assert thresholds.size == 0

    def test_probability_validation(self):
        with pytest.raises(LpError):
            build_sdlp(np.ones((2, 1)), np.ones(2), scenario_probs=[0.5, 0.6])
        with pytest.raises(LpError):
            build_sdlp(np.ones((2, 1)), np.ones(2), reference_probs=[1.0])


class TestGreedy:
    def test_portfolio_argmax(self):
        np.testing.assert_allclose(greedy_portfolio([[0.1, 0.2]]), [0.0, 1.0])

    def test_portfolio_tie_lowest_index(self):
        np.testing.assert_allclose(greedy_portfolio([[0.1, 0.1]]), [1.0, 0.0])

    def test_portfolio_single_asset(self):
        np.testing.assert_allclose(greedy_portfolio([[0.3]]), [1.0])

    def test_transport_min_cost(self):
        np.testing.assert_allclose(greedy_transport([[3.0, 1.0]]), [[0.0, 1.0]])

    def test_transport_tie_lowest_index(self):
        np.testing.assert_allclose(greedy_transport([[1.0, 1.0], [2.0, 2.0]]),
                                   [[1.0, 0.0], [1.0, 0.0]])

    def test_transport_identity(self):
        costs = np.array([[0.1, 5.0], [5.0, 0.1]])
        np.testing.assert_allclose(greedy_transport(costs), np.eye(2))

    def test_greedy_upper_bounds_feasible_portfolio(self):
        rng = np.random.default_rng(4)
        scenarios = 0.1 + rng.standard_normal((12, 4)) * 0.1
        reference = scenarios @ np.full(4, 0.25)
        z_lp, res = sdlp_portfolio(scenarios, reference)
        greedy_value = float(scenarios.mean(axis=0) @ greedy_portfolio(scenarios))
        assert greedy_value >= res.value - 1e-9

    def test_greedy_lower_bounds_transport_cost(self):
        rng = np.random.default_rng(5)
        costs = rng.uniform(0.5, 2.0, size=(5, 3))
        demand_mean = rng.uniform(1.0, 4.0, size=5)
        z_greedy = greedy_transport(costs)
        greedy_cost = float(demand_mean @ (costs * z_greedy).sum(axis=1))
        for _ in range(50):
            z = rng.dirichlet(np.ones(3), size=5)
            cost = float(demand_mean @ (costs * z).sum(axis=1))
            assert cost >= greedy_cost - 1e-9
