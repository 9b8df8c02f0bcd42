"""Benchmark problem families behind one small solver-facing protocol.

Two families are provided:

* ``PortfolioProblem`` — allocate weights on the probability simplex to
  maximize expected return while the portfolio return dominates a
  reference return (order 1 or 2).
* ``TransportProblem`` — route regional demand to warehouses (each
  region's split lives on the simplex) to minimize expected cost while
  every warehouse's supply dominates the demand assigned to it.

A problem exposes: a feasible-set projection, an initial point, seeded
batch drawing, a sample-average objective (value and gradient), and per
constraint a ``ConstraintTerm`` bundling outcome/reference samples with
a gradient assembler.  The solver needs nothing else.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .scenario import SampleStream, sample_batch


class ProblemError(ValueError):
    """Inconsistent problem description or mismatched dimensions."""


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x : x >= 0, sum x = 1} by sort-and-threshold."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.isfinite(v).all():
        raise ProblemError("cannot project non-finite vector")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > cumulative)[0][-1]
    shift = cumulative[rho] / (rho + 1.0)
    return np.maximum(v - shift, 0.0)


def project_rows(mat: np.ndarray) -> np.ndarray:
    """Project each row of a matrix onto the simplex independently."""
    mat = np.asarray(mat, dtype=float)
    return np.vstack([project_simplex(row) for row in mat])


@dataclass(frozen=True)
class ConstraintTerm:
    """One dominance constraint evaluated on one batch.

    ``outcomes`` are the decision-dependent samples g(z, scenario_i) and
    ``gradient`` maps per-sample weights w to (1/N) * sum_i w_i * dg/dz,
    shaped like the decision.  When ``decision_dominates`` is False the
    decision sits on the dominated side and its penalty gradient enters
    the solver update with a flipped sign.
    """

    order: int
    decision_dominates: bool
    outcomes: np.ndarray
    references: np.ndarray
    gradient: Callable[[np.ndarray], np.ndarray]

    @property
    def dominant(self) -> np.ndarray:
        return self.outcomes if self.decision_dominates else self.references

    @property
    def dominated(self) -> np.ndarray:
        return self.references if self.decision_dominates else self.outcomes

    @property
    def sign(self) -> float:
        return 1.0 if self.decision_dominates else -1.0


def portfolio_outcomes(z, returns) -> np.ndarray:
    """Per-scenario portfolio returns: row . z for each scenario row."""
    returns = np.asarray(returns, dtype=float)
    z = np.asarray(z, dtype=float).ravel()
    if returns.shape[1] != z.size:
        raise ProblemError(
            f"dimension mismatch: {z.size} weights vs {returns.shape[1]} assets"
        )
    return returns @ z


def portfolio_objective_grad(returns) -> np.ndarray:
    """Gradient of the mean portfolio return: column means (z-independent)."""
    return np.asarray(returns, dtype=float).mean(axis=0)


def transport_outcomes(z, demand) -> np.ndarray:
    """Demand assigned per warehouse: column j is demand @ z[:, j], per sample."""
    demand = np.asarray(demand, dtype=float)
    z = np.asarray(z, dtype=float)
    if demand.shape[1] != z.shape[0]:
        raise ProblemError(
            f"dimension mismatch: {z.shape[0]} plan rows vs {demand.shape[1]} regions"
        )
    return demand @ z


def transport_objective_grad(costs, demand) -> np.ndarray:
    """Ascent gradient of the maximization form -E[sum h_ij z_ij xi_i]."""
    costs = np.asarray(costs, dtype=float)
    demand = np.asarray(demand, dtype=float)
    if demand.shape[1] != costs.shape[0]:
        raise ProblemError(
            f"dimension mismatch: {costs.shape[0]} cost rows vs {demand.shape[1]} regions"
        )
    return -costs * demand.mean(axis=0)[:, None]


def transport_cost(z, costs, demand) -> float:
    """Mean transport cost of plan z over the demand samples."""
    demand = np.atleast_2d(np.asarray(demand, dtype=float))
    per_region = (np.asarray(costs, dtype=float) * np.asarray(z, dtype=float)).sum(axis=1)
    return float((demand @ per_region).mean())


@dataclass(frozen=True)
class PortfolioBatch:
    returns: np.ndarray    # (n, d)
    references: np.ndarray  # (n,)


class PortfolioProblem:
    """Expected-return maximization with a dominance-constrained return.

    The reference return is either coupled (the same scenario row mapped
    through fixed reference weights, the default) or drawn from an
    independent source.
    """

    def __init__(self, source, order: int = 2, reference_weights=None,
                 reference_source=None):
        self.source = source
        self.n_assets = source.dim
        self.order = int(order)
        if self.order not in (1, 2):
            raise ProblemError(f"constraint order must be 1 or 2, got {order}")
        if reference_weights is None:
            reference_weights = np.full(self.n_assets, 1.0 / self.n_assets)
        reference_weights = np.asarray(reference_weights, dtype=float).ravel()
        if reference_weights.size != self.n_assets:
            raise ProblemError(
                f"reference weights have {reference_weights.size} entries "
                f"for {self.n_assets} assets"
            )
        if np.any(reference_weights < -1e-12) or abs(reference_weights.sum() - 1.0) > 1e-9:
            raise ProblemError("reference weights must lie on the simplex")
        self.reference_weights = reference_weights
        self.reference_source = reference_source
        self.n_constraints = 1
        self.decision_shape = (self.n_assets,)

    def initial_point(self) -> np.ndarray:
        return np.full(self.n_assets, 1.0 / self.n_assets)

    def project(self, z) -> np.ndarray:
        return project_simplex(z)

    def spawn_streams(self, stream: SampleStream):
        return tuple(stream.spawn(2))  # scenario stream, reference stream

    def draw(self, streams, n: int) -> PortfolioBatch:
        scenario_stream, reference_stream = streams
        returns = sample_batch(self.source, n, scenario_stream).data
        if self.reference_source is None:
            references = returns @ self.reference_weights
        else:
            ref = sample_batch(self.reference_source, n, reference_stream).data
            if ref.shape[1] == self.n_assets:
                references = ref @ self.reference_weights
            elif ref.shape[1] == 1:
                references = ref[:, 0]
            else:
                raise ProblemError(
                    f"reference source dimension {ref.shape[1]} matches neither "
                    f"1 nor the asset count {self.n_assets}"
                )
        return PortfolioBatch(returns, references)

    def batch_from_rows(self, rows: np.ndarray) -> PortfolioBatch:
        """Batch from external scenario rows (d columns; d+1 when the
        reference is independent, the last column holding its draws)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if self.reference_source is None:
            if rows.shape[1] != self.n_assets:
                raise ProblemError(
                    f"expected {self.n_assets} columns, got {rows.shape[1]}"
                )
            return PortfolioBatch(rows, rows @ self.reference_weights)
        if rows.shape[1] != self.n_assets + 1:
            raise ProblemError(
                f"expected {self.n_assets} return columns plus one reference "
                f"column, got {rows.shape[1]}"
            )
        return PortfolioBatch(rows[:, :-1], rows[:, -1])

    def objective_value(self, z, batch: PortfolioBatch) -> float:
        return float(portfolio_outcomes(z, batch.returns).mean())

    def objective_grad(self, z, batch: PortfolioBatch) -> np.ndarray:
        return portfolio_objective_grad(batch.returns)

    def constraint_terms(self, z, batch: PortfolioBatch) -> list[ConstraintTerm]:
        returns = batch.returns
        outcomes = portfolio_outcomes(z, returns)

        def gradient(weights, _r=returns):
            return _r.T @ np.asarray(weights, dtype=float) / _r.shape[0]

        return [ConstraintTerm(self.order, True, outcomes, batch.references, gradient)]


@dataclass(frozen=True)
class TransportBatch:
    demand: np.ndarray  # (n, regions)
    supply: np.ndarray  # (n, warehouses)


class TransportProblem:
    """Cost minimization with supply-dominates-assigned-demand constraints.

    The decision is a row-stochastic plan: entry (i, j) is the share of
    region i's demand routed to warehouse j.  One dominance constraint
    per warehouse, with the decision on the dominated side.
    """

    def __init__(self, costs, demand_source, supply_source, order: int = 2):
        costs = np.asarray(costs, dtype=float)
        if costs.ndim != 2:
            raise ProblemError("cost matrix must be 2-d")
        if not np.isfinite(costs).all() or np.any(costs < 0):
            raise ProblemError("costs must be finite and nonnegative")
        self.costs = costs
        self.n_regions, self.n_warehouses = costs.shape
        if demand_source.dim != self.n_regions:
            raise ProblemError(
                f"demand source is {demand_source.dim}-d for {self.n_regions} regions"
            )
        if supply_source.dim != self.n_warehouses:
            raise ProblemError(
                f"supply source is {supply_source.dim}-d for {self.n_warehouses} warehouses"
            )
        self.demand_source = demand_source
        self.supply_source = supply_source
        self.order = int(order)
        if self.order not in (1, 2):
            raise ProblemError(f"constraint order must be 1 or 2, got {order}")
        self.n_constraints = self.n_warehouses
        self.decision_shape = (self.n_regions, self.n_warehouses)

    def initial_point(self) -> np.ndarray:
        return np.full(self.decision_shape, 1.0 / self.n_warehouses)

    def project(self, z) -> np.ndarray:
        return project_rows(z)

    def spawn_streams(self, stream: SampleStream):
        return tuple(stream.spawn(2))  # demand stream, supply stream

    def draw(self, streams, n: int) -> TransportBatch:
        demand_stream, supply_stream = streams
        demand = sample_batch(self.demand_source, n, demand_stream).data
        supply = sample_batch(self.supply_source, n, supply_stream).data
        return TransportBatch(demand, supply)

    def batch_from_rows(self, rows: np.ndarray) -> TransportBatch:
        """Batch from external joint rows: demand columns then supply columns."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        width = self.n_regions + self.n_warehouses
        if rows.shape[1] != width:
            raise ProblemError(
                f"expected {self.n_regions} demand + {self.n_warehouses} supply "
                f"columns, got {rows.shape[1]}"
            )
        return TransportBatch(rows[:, :self.n_regions], rows[:, self.n_regions:])

    def objective_value(self, z, batch: TransportBatch) -> float:
        return -transport_cost(z, self.costs, batch.demand)

    def objective_grad(self, z, batch: TransportBatch) -> np.ndarray:
        return transport_objective_grad(self.costs, batch.demand)

    def constraint_terms(self, z, batch: TransportBatch) -> list[ConstraintTerm]:
        demand = batch.demand
        assigned = transport_outcomes(z, demand)
        n = demand.shape[0]
        terms = []
        for j in range(self.n_warehouses):
            def gradient(weights, _j=j, _demand=demand, _n=n):
                grad = np.zeros(self.decision_shape)
                grad[:, _j] = _demand.T @ np.asarray(weights, dtype=float) / _n
                return grad

            terms.append(ConstraintTerm(self.order, False, assigned[:, j],
                                        batch.supply[:, j], gradient))
        return terms
