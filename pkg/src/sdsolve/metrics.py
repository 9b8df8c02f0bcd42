"""Solution evaluation: empirical distribution functions, CVI, obj-ratio.

The constraint violation index (CVI) of order k is the fraction of an
evaluation interval on which the empirical k-th order dominance
inequality fails.  The grid estimator works for both orders; for order
2 an exact variant integrates the piecewise-linear crossing structure
directly and serves as the estimator's oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dual import SupportInterval, support_interval


class MetricError(ValueError):
    """Degenerate evaluation input (empty samples, zero-width interval)."""


def empirical_fk(samples, eta, order: int):
    """Empirical k-th order distribution function at eta.

    Order 1 is the empirical CDF with a non-strict comparison; order 2
    is the mean shortfall ``mean((eta - x)_+)``.  Vectorized over eta.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise MetricError("need at least one sample")
    eta = np.asarray(eta, dtype=float)
    if order == 1:
        vals = (samples <= eta[..., None]).mean(axis=-1)
    elif order == 2:
        vals = np.maximum(eta[..., None] - samples, 0.0).mean(axis=-1)
    else:
        raise MetricError(f"order must be 1 or 2, got {order}")
    return vals if eta.ndim else float(vals)


def _violation_tol(x_samples, y_samples, tol):
    if tol is not None:
        return tol
    scale = max(float(np.abs(x_samples).max()), float(np.abs(y_samples).max()))
    return 1e-12 * max(1.0, scale)


def cvi(order: int, x_samples, y_samples, interval: SupportInterval,
        grid_points: int = 1000, tol=None) -> float:
    """Fraction of an inclusive uniform grid where X fails to dominate Y.

    The strict comparison carries a small numerical guard (see
    ``violation_thresholds``); pass tol=0.0 for the exact indicator.
    """
    if grid_points < 2:
        raise MetricError("grid needs at least 2 points")
    if interval.width == 0:
        raise MetricError("evaluation interval has zero width")
    x_samples = np.asarray(x_samples, dtype=float).ravel()
    y_samples = np.asarray(y_samples, dtype=float).ravel()
    if x_samples.size == 0 or y_samples.size == 0:
        raise MetricError("need at least one sample on each side")
    tol = _violation_tol(x_samples, y_samples, tol)
    grid = np.linspace(interval.lower, interval.upper, grid_points)
    fx = empirical_fk(x_samples, grid, order)
    fy = empirical_fk(y_samples, grid, order)
    return float(np.count_nonzero(fx > fy + tol) / grid_points)


def _positive_measure(dp: float, dq: float, length: float) -> float:
    # measure of {eta : linear(eta) > 0} on a segment with endpoint values dp, dq
    if dp > 0 and dq > 0:
        return length
    if dp <= 0 and dq <= 0:
        return 0.0
    if dp > 0:
        return length * dp / (dp - dq)
    return length * dq / (dq - dp)


def cvi_exact_k2(x_samples, y_samples, interval: SupportInterval,
                 tol=None) -> float:
    """Exact order-2 CVI: Lebesgue measure of the violation set, normalized.

    Both empirical shortfall curves are piecewise linear with kinks only
    at sample points, so the violation region is a finite union of
    intervals recovered by solving linear crossings between kinks.  The
    numerical guard ``tol`` (auto-scaled by default, 0.0 for exact)
    keeps float dust on exactly-tight curves from counting as violation.
    """
    if interval.width == 0:
        raise MetricError("evaluation interval has zero width")
    x_samples = np.asarray(x_samples, dtype=float).ravel()
    y_samples = np.asarray(y_samples, dtype=float).ravel()
    if x_samples.size == 0 or y_samples.size == 0:
        raise MetricError("need at least one sample on each side")
    tol = _violation_tol(x_samples, y_samples, tol)
    a, b = interval.lower, interval.upper
    kinks = np.unique(np.concatenate([x_samples, y_samples]))
    kinks = kinks[(kinks > a) & (kinks < b)]
    points = np.concatenate([[a], kinks, [b]])
    diff = (empirical_fk(x_samples, points, 2)
            - empirical_fk(y_samples, points, 2) - tol)
    measure = 0.0
    for i in range(points.size - 1):
        measure += _positive_measure(diff[i], diff[i + 1], points[i + 1] - points[i])
    return measure / (b - a)


def obj_ratio(objective: float, optimum: float) -> float:
    """Relative optimality gap |objective - optimum| / optimum."""
    if optimum == 0:
        raise MetricError("reference optimum must be nonzero")
    return abs(objective - optimum) / optimum


@dataclass
class EvaluationReport:
    """Evaluation of one solution on one held-out batch."""

    objective: float
    cvi1: list[float]
    cvi2: list[float]
    intervals: list[tuple[float, float]]
    grid_points: int
    obj_ratio: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "objective": self.objective,
            "cvi1": list(self.cvi1),
            "cvi2": list(self.cvi2),
            "cvi1_mean": float(np.mean(self.cvi1)),
            "cvi2_mean": float(np.mean(self.cvi2)),
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "grid_points": self.grid_points,
            "obj_ratio": self.obj_ratio,
        }
        out.update(self.extras)
        return out


def evaluate_solution(problem, z, batch, grid_points: int = 1000,
                      interval_override: SupportInterval | None = None,
                      optimum: float | None = None) -> EvaluationReport:
    """Score a feasible decision on held-out data.

    Reports the sample-average objective and, per constraint, CVI@1 and
    CVI@2 over the evaluation interval (by default the min/max envelope
    of that constraint's held-out outcome and reference samples).
    """
    z = np.asarray(z, dtype=float)
    objective = problem.objective_value(z, batch)
    cvi1, cvi2, intervals = [], [], []
    for term in problem.constraint_terms(z, batch):
        if interval_override is not None:
            interval = interval_override
        else:
            interval = support_interval(np.concatenate([term.dominant, term.dominated]))
        if interval.width == 0:
            # identical constant samples on both sides: nothing to violate
            cvi1.append(0.0)
            cvi2.append(0.0)
            intervals.append((interval.lower, interval.upper))
            continue
        cvi1.append(cvi(1, term.dominant, term.dominated, interval, grid_points))
        cvi2.append(cvi(2, term.dominant, term.dominated, interval, grid_points))
        intervals.append((interval.lower, interval.upper))
    ratio = None if optimum is None else obj_ratio(objective, optimum)
    return EvaluationReport(objective, cvi1, cvi2, intervals, grid_points, ratio)
