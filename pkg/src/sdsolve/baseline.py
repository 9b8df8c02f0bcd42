"""Exact baselines: a dense two-phase simplex, the second-order
scenario LP, and the unconstrained greedy heuristics.

The LP solver is deliberately self-contained: a dense tableau,
two phases with implicit artificial columns, Dantzig pricing for speed
with an automatic switch to Bland's rule whenever the objective stalls,
which restores the anti-cycling guarantee.  Row updates skip zero
multipliers, which keeps the large but sparse scenario LPs affordable
without leaving the dense-tableau method.

The scenario LP encodes second-order dominance of the portfolio return
over a discrete reference through shortfall variables s[i, k]:

    maximize   sum_i p_i * (row_i . z)
    subject to sum_i p_i s[i, k] <= sum_j q_j (y_k - y_j)_+   for all k
               s[i, k] + row_i . z >= y_k                     for all i, k
               sum z = 1,  z >= 0,  s >= 0
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LpError(ValueError):
    """Malformed linear program."""


@dataclass
class LinearProgram:
    """maximize c @ x  s.t.  a_ub @ x <= b_ub,  a_eq @ x == b_eq,
    x_i >= 0 where nonneg[i] (free otherwise)."""

    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    nonneg: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        if n == 0:
            raise LpError("objective must have at least one variable")

        def norm(a, b, label):
            if a is None:
                return np.zeros((0, n)), np.zeros(0)
            a = np.atleast_2d(np.asarray(a, dtype=float))
            b = np.asarray(b, dtype=float).ravel()
            if a.shape != (b.size, n):
                raise LpError(f"{label} rows have shape {a.shape}, expected ({b.size}, {n})")
            return a, b

        self.a_ub, self.b_ub = norm(self.a_ub, self.b_ub, "inequality")
        self.a_eq, self.b_eq = norm(self.a_eq, self.b_eq, "equality")
        if self.nonneg is None:
            self.nonneg = np.ones(n, dtype=bool)
        else:
            self.nonneg = np.asarray(self.nonneg, dtype=bool).ravel()
            if self.nonneg.size != n:
                raise LpError("nonneg flags must match the variable count")
        for arr in (self.c, self.a_ub, self.b_ub, self.a_eq, self.b_eq):
            if not np.isfinite(arr).all():
                raise LpError("linear program contains non-finite coefficients")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray | None
    value: float | None
    pivots: int


_RATIO_TOL = 1e-10


class _Tableau:
    """Dense simplex tableau with the objective as its last row.

    The objective row holds reduced costs (enter while any exceeds tol);
    its right-hand entry holds the negated objective value.  Artificial
    columns are never stored: they never re-enter, so only their basis
    membership matters, tracked as indices >= the stored width.
    """

    def __init__(self, body, rhs, basis, n_cols):
        m = body.shape[0]
        self.data = np.zeros((m + 1, n_cols + 1))
        self.data[:m, :n_cols] = body
        self.data[:m, -1] = rhs
        self.m = m
        self.n_cols = n_cols
        self.basis = basis
        self.pivots = 0
        self.stalled = 0
        self.devex = np.ones(n_cols)

    @property
    def rhs(self):
        return self.data[:self.m, -1]

    @property
    def obj(self):
        return self.data[-1]

    def set_objective(self, costs):
        """Load reduced costs for `maximize costs @ x` given the current basis."""
        self.data[-1] = 0.0
        self.data[-1, :self.n_cols] = costs
        for r in range(self.m):
            b = self.basis[r]
            if b < self.n_cols and costs[b] != 0.0:
                self.data[-1] -= costs[b] * self.data[r]
        self.devex[:] = 1.0  # fresh pricing framework per phase

    def pivot(self, row, col):
        column = self.data[:, col].copy()
        pivot_row = self.data[row] / column[row]
        pivot_row[col] = 1.0
        column[row] = 0.0
        # devex reference weights, updated from the pivot row
        weights = pivot_row[:self.n_cols] ** 2 * self.devex[col]
        np.maximum(self.devex, weights, out=self.devex)
        if self.devex.max() > 1e12:
            self.devex[:] = 1.0  # reset the reference framework
        # skip exact zeros only: the elimination stays mathematically
        # identical to the full dense update while exploiting the
        # sparsity this problem class keeps throughout
        rows = np.flatnonzero(column)
        if rows.size:
            cols = np.flatnonzero(pivot_row)
            if cols.size * 2 > pivot_row.size:
                self.data[rows] -= np.outer(column[rows], pivot_row)
            else:
                sub = np.ix_(rows, cols)
                self.data[sub] = self.data[sub] - np.outer(column[rows],
                                                           pivot_row[cols])
        self.data[row] = pivot_row
        # the entering column is a unit vector now
        self.data[:, col] = 0.0
        self.data[row, col] = 1.0
        self.basis[row] = col
        self.pivots += 1

    def choose_entering(self, tol, bland):
        reduced = self.obj[:self.n_cols]
        if bland:
            idx = np.flatnonzero(reduced > tol)
            return int(idx[0]) if idx.size else -1
        # devex pricing: largest reduced cost in the reference-weight norm
        score = np.where(reduced > tol, reduced * reduced / self.devex, -1.0)
        j = int(np.argmax(score))
        return j if reduced[j] > tol else -1

    def choose_leaving(self, col, bland):
        column = self.data[:self.m, col]
        rhs = np.maximum(self.rhs, 0.0)
        mask = column > _RATIO_TOL
        if not mask.any():
            return -1
        rows = np.flatnonzero(mask)
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12]
        if bland or ties.size == 1:
            # Bland: smallest basis index among minimum-ratio rows
            return int(ties[np.argmin(self.basis[ties])])
        # prefer kicking artificials out, then the numerically largest
        # pivot element (small pivots amplify rounding error)
        art = ties[self.basis[ties] >= self.n_cols]
        pool = art if art.size else ties
        return int(pool[np.argmax(column[pool])])

    def run(self, tol, max_pivots, bland_after=64):
        """Pivot until optimal; returns 'optimal', 'unbounded' or 'iteration-limit'."""
        while self.pivots < max_pivots:
            bland = self.stalled >= bland_after
            col = self.choose_entering(tol, bland)
            if col < 0:
                return "optimal"
            row = self.choose_leaving(col, bland)
            if row < 0:
                return "unbounded"
            before = self.obj[-1]
            self.pivot(row, col)
            if self.obj[-1] < before - 1e-12:
                self.stalled = 0
            else:
                self.stalled += 1
        return "iteration-limit"


def _standard_form(lp: LinearProgram):
    """Expand free variables, add slacks, normalize signs.

    Returns (body, rhs, variable split map, structural column count,
    artificial-needed row mask).
    """
    split = [(i, 1.0) for i in range(lp.n_vars)]
    split += [(i, -1.0) for i in range(lp.n_vars) if not lp.nonneg[i]]
    n_struct = len(split)
    m_ub, m_eq = lp.b_ub.size, lp.b_eq.size
    m = m_ub + m_eq
    n_cols = n_struct + m_ub
    body = np.zeros((m, n_cols))
    rhs = np.empty(m)
    for pos, (var, sign) in enumerate(split):
        body[:m_ub, pos] = sign * lp.a_ub[:, var]
        body[m_ub:, pos] = sign * lp.a_eq[:, var]
    body[:m_ub, n_struct:n_struct + m_ub] = np.eye(m_ub)
    rhs[:m_ub] = lp.b_ub
    rhs[m_ub:] = lp.b_eq
    flip = rhs < 0
    body[flip] *= -1.0
    rhs[flip] *= -1.0
    needs_artificial = np.ones(m, dtype=bool)
    needs_artificial[:m_ub] = flip[:m_ub]  # unflipped <= rows keep their slack basic
    return body, rhs, split, n_struct, needs_artificial


def simplex_solve(lp: LinearProgram, max_pivots: int = 1_000_000,
                  tol: float = 1e-8) -> LpResult:
    """Two-phase dense simplex; optimal results carry a reduced-cost certificate."""
    body, rhs, split, n_struct, needs_artificial = _standard_form(lp)
    m = body.shape[0]
    n_cols = body.shape[1]

    basis = np.empty(m, dtype=int)
    slack_of_row = np.arange(n_struct, n_cols)
    for r in range(m):
        basis[r] = n_cols + r if needs_artificial[r] else slack_of_row[r]

    tab = _Tableau(body, rhs, basis, n_cols)

    if needs_artificial.any():
        # phase 1: maximize -(sum of artificials); reduced costs are the
        # column sums over artificial-basic rows
        tab.data[-1] = 0.0
        for r in np.flatnonzero(needs_artificial):
            tab.data[-1] += tab.data[r]
        status = tab.run(tol, max_pivots)
        if status == "iteration-limit":
            return LpResult("iteration-limit", None, None, tab.pivots)
        if status == "unbounded":
            raise LpError("phase 1 reported unbounded; numerically inconsistent input")
        # measure infeasibility directly from the basic artificial values
        # rather than the maintained objective slot
        art_rows = np.flatnonzero(tab.basis >= tab.n_cols)
        infeasibility = float(np.maximum(tab.rhs[art_rows], 0.0).sum()) \
            if art_rows.size else 0.0
        scale = max(1.0, np.abs(rhs).max() if rhs.size else 1.0)
        if infeasibility > tol * scale:
            return LpResult("infeasible", None, None, tab.pivots)
        # drive any leftover artificials (at value zero) out of the basis
        keep = np.ones(tab.m, dtype=bool)
        for r in range(tab.m):
            if tab.basis[r] < tab.n_cols:
                continue
            row = tab.data[r, :tab.n_cols]
            candidates = np.flatnonzero(np.abs(row) > 1e-9)
            if candidates.size:
                tab.pivot(r, int(candidates[0]))
            else:
                keep[r] = False  # redundant row
        if not keep.all():
            tab.data = np.vstack([tab.data[:tab.m][keep], tab.data[-1:]])
            tab.basis = tab.basis[keep]
            tab.m = int(keep.sum())

    costs = np.zeros(n_cols)
    for pos, (var, sign) in enumerate(split):
        costs[pos] = sign * lp.c[var]
    tab.set_objective(costs)
    status = tab.run(tol, max_pivots)
    if status != "optimal":
        return LpResult(status, None, None, tab.pivots)

    x_cols = np.zeros(n_cols)
    x_cols[tab.basis] = np.maximum(tab.rhs, 0.0)
    x = np.zeros(lp.n_vars)
    for pos, (var, sign) in enumerate(split):
        x[var] += sign * x_cols[pos]
    value = float(lp.c @ x)
    return LpResult("optimal", x, value, tab.pivots)


def verify_optimal(lp: LinearProgram, result: LpResult, tol: float = 1e-8) -> float:
    """Maximum feasibility/objective residual of an optimal result."""
    if result.status != "optimal":
        raise LpError(f"cannot verify a result with status {result.status!r}")
    x = result.x
    residual = 0.0
    if lp.b_ub.size:
        residual = max(residual, float((lp.a_ub @ x - lp.b_ub).max()))
    if lp.b_eq.size:
        residual = max(residual, float(np.abs(lp.a_eq @ x - lp.b_eq).max()))
    if lp.nonneg.any():
        residual = max(residual, float((-x[lp.nonneg]).max()))
    residual = max(residual, abs(float(lp.c @ x) - result.value))
    if residual > tol:
        raise LpError(f"optimal result fails verification: residual {residual:.3e}")
    return residual


def write_lp_text(lp: LinearProgram, path) -> None:
    """Plain-text dump: objective row, then <= rows, then == rows, then bounds."""
    def fmt(values):
        return " ".join(repr(float(v)) for v in values)

    with open(path, "w", encoding="utf-8") as handle:
        handle.write("maximize " + fmt(lp.c) + "\n")
        for row, b in zip(lp.a_ub, lp.b_ub):
            handle.write(fmt(row) + f" <= {float(b)!r}\n")
        for row, b in zip(lp.a_eq, lp.b_eq):
            handle.write(fmt(row) + f" == {float(b)!r}\n")
        handle.write("nonneg " + " ".join("1" if f else "0" for f in lp.nonneg) + "\n")


def build_sdlp(scenarios, reference, scenario_probs=None,
               reference_probs=None) -> LinearProgram:
    """Second-order dominance LP on finite scenario/reference supports.

    ``scenarios`` is the (M, d) outcome-coefficient matrix (row i gives
    the linear map of the i-th scenario), ``reference`` the K reference
    atoms.  Probabilities default to uniform.  Variable order: the d
    decision weights first, then s[i, k] at position d + i*K + k.
    """
    scenarios = np.atleast_2d(np.asarray(scenarios, dtype=float))
    reference = np.asarray(reference, dtype=float).ravel()
    n_scen, dim = scenarios.shape
    n_ref = reference.size
    if n_scen < 1 or n_ref < 1:
        raise LpError("need at least one scenario and one reference atom")

    def probs(p, size, label):
        if p is None:
            return np.full(size, 1.0 / size)
        p = np.asarray(p, dtype=float).ravel()
        if p.size != size:
            raise LpError(f"{label} probabilities have size {p.size}, expected {size}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise LpError(f"{label} probabilities must be nonnegative and sum to 1")
        return p

    p = probs(scenario_probs, n_scen, "scenario")
    q = probs(reference_probs, n_ref, "reference")

    n_vars = dim + n_scen * n_ref
    budgets = np.maximum(reference[:, None] - reference[None, :], 0.0) @ q

    n_rows = n_ref + n_scen * n_ref
    a_ub = np.zeros((n_rows, n_vars))
    b_ub = np.empty(n_rows)
    # budget rows: sum_i p_i s[i, k] <= sum_j q_j (y_k - y_j)_+
    for k in range(n_ref):
        a_ub[k, dim + k::n_ref] = p
        b_ub[k] = budgets[k]
    # shortfall rows: -(row_i . z) - s[i, k] <= -y_k
    row = n_ref
    for i in range(n_scen):
        for k in range(n_ref):
            a_ub[row, :dim] = -scenarios[i]
            a_ub[row, dim + i * n_ref + k] = -1.0
            b_ub[row] = -reference[k]
            row += 1

    c = np.concatenate([p @ scenarios, np.zeros(n_scen * n_ref)])
    a_eq = np.zeros((1, n_vars))
    a_eq[0, :dim] = 1.0
    return LinearProgram(c, a_ub, b_ub, a_eq, np.array([1.0]))


def sdlp_portfolio(scenarios, reference, scenario_probs=None, reference_probs=None,
                   max_pivots: int = 1_000_000):
    """Build and solve the scenario LP; returns (weights, LpResult).

    The returned weights are clipped to the simplex (the LP meets its
    constraints only to solver tolerance).
    """
    lp = build_sdlp(scenarios, reference, scenario_probs, reference_probs)
    result = simplex_solve(lp, max_pivots=max_pivots)
    if result.status != "optimal":
        return None, result
    verify_optimal(lp, result, tol=1e-7)
    dim = np.atleast_2d(scenarios).shape[1]
    z = np.clip(result.x[:dim], 0.0, None)
    z /= z.sum()
    return z, result


def greedy_portfolio(returns) -> np.ndarray:
    """All weight on the highest-mean column (ties go to the lowest index)."""
    returns = np.atleast_2d(np.asarray(returns, dtype=float))
    z = np.zeros(returns.shape[1])
    z[int(np.argmax(returns.mean(axis=0)))] = 1.0
    return z


def greedy_transport(costs) -> np.ndarray:
    """Route each region wholly to its cheapest warehouse (ties to lowest index)."""
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    z = np.zeros_like(costs)
    z[np.arange(costs.shape[0]), np.argmin(costs, axis=1)] = 1.0
    return z
