"""Sample-based dual functions for dominance constraints.

For a batch of outcome and reference samples, the empirical dominance
test either holds (no penalty) or fails at a finite set of thresholds.
That threshold set supports a scalar utility-style dual function:

* order 1: an average of smoothed step functions
  ``-tanh((threshold - x) / temperature)``, one per threshold;
* order 2: an average of hinges ``-(threshold - x)_+``.

Both are nondecreasing, the order-2 dual is concave, and both carry an
exact derivative used to assemble the solver's ascent direction.  An
empty threshold set means the constraint is satisfied on this batch and
the dual is identically zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORDERS = (1, 2)


@dataclass(frozen=True)
class SupportInterval:
    """Closed interval [lower, upper] containing the relevant outcomes."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("support interval bounds must be finite")
        if self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ThresholdSet:
    """Sorted, deduplicated violation thresholds for one constraint and batch."""

    order: int
    values: np.ndarray

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order}")
        vals = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return self.values.size

    def __bool__(self) -> bool:
        return self.size > 0


@dataclass(frozen=True)
class DualFunction:
    """Order-tagged dual with thresholds and (order 1 only) a temperature."""

    order: int
    thresholds: np.ndarray
    temperature: float | None = None

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order}")
        vals = np.sort(np.asarray(self.thresholds, dtype=float).ravel())
        object.__setattr__(self, "thresholds", vals)
        if self.order == 1:
            if self.temperature is None or self.temperature <= 0:
                raise ValueError("order-1 dual needs a positive temperature")

    @property
    def size(self) -> int:
        return self.thresholds.size


def count_at_or_below(samples, eta) -> int:
    """Number of samples x with eta >= x (ties count)."""
    samples = np.asarray(samples, dtype=float).ravel()
    return int(np.count_nonzero(eta >= samples))


def total_shortfall(samples, eta) -> float:
    """Sum of (eta - x)_+ over the samples."""
    samples = np.asarray(samples, dtype=float).ravel()
    return float(np.maximum(eta - samples, 0.0).sum())


def _mean_step(sorted_samples, etas):
    # fraction of samples <= eta, vectorized over etas
    counts = np.searchsorted(sorted_samples, etas, side="right")
    return counts / sorted_samples.size


def _mean_shortfall(sorted_samples, etas):
    # mean of (eta - x)_+, vectorized over etas; piecewise linear in eta
    counts = np.searchsorted(sorted_samples, etas, side="right")
    prefix = np.concatenate(([0.0], np.cumsum(sorted_samples)))
    return (counts * etas - prefix[counts]) / sorted_samples.size


def violation_thresholds(order, dominant, dominated, tol=None) -> ThresholdSet:
    """Thresholds among the sample values where empirical dominance fails.

    ``dominant`` holds the samples of the side required to dominate;
    callers resolve the constraint orientation before this point.  The
    comparison is strict and uses per-sample means, so sample vectors of
    different lengths are compared on equal footing.  An empty result
    means empirical dominance of the given order holds on this batch.

    ``tol`` guards the strict comparison against float noise on
    exactly-tight constraints (e.g. LP solutions); by default it scales
    with the sample magnitudes.  Pass 0.0 for the exact comparison.
    """
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order}")
    dominant = np.asarray(dominant, dtype=float).ravel()
    dominated = np.asarray(dominated, dtype=float).ravel()
    if dominant.size == 0 or dominated.size == 0:
        raise ValueError("both sample vectors must be nonempty")
    candidates = np.unique(np.concatenate([dominant, dominated]))
    if tol is None:
        tol = 1e-12 * max(1.0, float(np.abs(candidates).max()))
    dom_sorted = np.sort(dominant)
    sub_sorted = np.sort(dominated)
    if order == 1:
        gap = _mean_step(dom_sorted, candidates) - _mean_step(sub_sorted, candidates)
    else:
        gap = _mean_shortfall(dom_sorted, candidates) - _mean_shortfall(sub_sorted, candidates)
    return ThresholdSet(order, candidates[gap > tol])


def dual_value(u: DualFunction, x):
    """Evaluate the dual at x (scalar or array). Empty thresholds give 0."""
    x = np.asarray(x, dtype=float)
    if u.size == 0:
        return np.zeros_like(x) if x.ndim else 0.0
    if u.order == 1:
        vals = -np.tanh((u.thresholds - x[..., None]) / u.temperature).mean(axis=-1)
    else:
        counts = np.searchsorted(u.thresholds, x, side="right")
        prefix = np.concatenate(([0.0], np.cumsum(u.thresholds)))
        total = prefix[-1]
        # sum over thresholds above x of (threshold - x)
        vals = -((total - prefix[counts]) - x * (u.size - counts)) / u.size
    return vals if x.ndim else float(vals)


def dual_derivative(u: DualFunction, x):
    """Exact derivative of ``dual_value`` at x.

    For order 2 the value at a threshold itself is the right derivative,
    so an x sitting exactly on a hinge contributes nothing for it.
    """
    x = np.asarray(x, dtype=float)
    if u.size == 0:
        return np.zeros_like(x) if x.ndim else 0.0
    if u.order == 1:
        t = np.tanh((u.thresholds - x[..., None]) / u.temperature)
        vals = (1.0 - t * t).mean(axis=-1) / u.temperature
    else:
        counts = np.searchsorted(u.thresholds, x, side="right")
        vals = (u.size - counts) / u.size
    return vals if x.ndim else float(vals)


def support_interval(values, margin: float = 0.0) -> SupportInterval:
    """Enclosing interval of the values, padded by margin * range per side."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("need at least one value")
    lo, hi = float(values.min()), float(values.max())
    pad = margin * (hi - lo)
    return SupportInterval(lo - pad, hi + pad)


def default_temperature(interval: SupportInterval) -> float:
    """Smoothing scale for order-1 duals: 5% of the support width, floored."""
    return max(0.05 * interval.width, 1e-6)


def make_dual(thresholds: ThresholdSet, temperature: float | None = None) -> DualFunction:
    if thresholds.order == 1 and temperature is None:
        raise ValueError("order-1 dual needs a temperature")
    return DualFunction(thresholds.order, thresholds.values, temperature)
