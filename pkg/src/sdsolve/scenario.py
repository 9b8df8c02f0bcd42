"""Scenario data model: CSV ingestion, synthetic generators, seeded sampling.

Scenarios are the Monte-Carlo currency of the whole package: an (n, d)
block of real numbers, one joint draw of the random inputs per row
(asset returns for portfolios, demand/supply units for transport).

Sampling is deterministic given a seed.  All randomness flows through
PCG64 generators derived from ``numpy.random.SeedSequence``, so the same
(source, seed, n) triple reproduces the same batch bit for bit, and
spawned child streams never overlap with their parent.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class ScenarioError(ValueError):
    """Bad scenario data or an invalid generator configuration."""


@dataclass(frozen=True)
class ScenarioBatch:
    """An (n, d) block of finite reals, one scenario per row."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 2:
            raise ScenarioError(f"scenario data must be 2-d, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ScenarioError("scenario batch needs at least one row")
        if not np.isfinite(arr).all():
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ScenarioError(f"non-finite value at row {bad[0]}, column {bad[1]}")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


class SampleStream:
    """Private sampling state for one consumer.

    A stream owns its generator outright; it must not be shared across
    threads.  ``spawn`` derives independent child streams, so parallel
    workers (or distinct data roles within one run) each get their own
    non-overlapping sequence.
    """

    def __init__(self, seed=None, *, _sequence=None):
        if _sequence is None:
            _sequence = np.random.SeedSequence(seed)
        self._sequence = _sequence
        self.rng = np.random.Generator(np.random.PCG64(_sequence))

    def spawn(self, n: int) -> list["SampleStream"]:
        return [SampleStream(_sequence=child) for child in self._sequence.spawn(n)]


def _parse_cell(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(
            f"non-numeric cell {text!r} at row {row}, column {col}"
        ) from None


def load_scenarios_csv(path) -> ScenarioBatch:
    """Load a scenario batch from a comma-separated file.

    One scenario per row, decimal-point reals, UTF-8.  The first row is
    treated as a header iff any of its cells is non-numeric.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    with handle:
        rows = [row for row in csv.reader(handle) if row and any(c.strip() for c in row)]
    if not rows:
        raise ScenarioError(f"no data rows in {path}")

    def is_numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    start = 1 if any(not is_numeric(c) for c in rows[0]) else 0
    body = rows[start:]
    if not body:
        raise ScenarioError(f"no data rows in {path}")
    width = len(body[0])
    data = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise ScenarioError(
                f"ragged row {i + start + 1}: expected {width} columns, got {len(row)}"
            )
        for j, cell in enumerate(row):
            data[i, j] = _parse_cell(cell.strip(), i + start + 1, j + 1)
    return ScenarioBatch(data)


def save_scenarios_csv(batch: ScenarioBatch, path) -> None:
    """Write a batch in the same format ``load_scenarios_csv`` reads."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        for row in batch.data:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class GaussianMixtureSource:
    """Mixture of multivariate Gaussians, one (weight, mean, factor) per mode.

    Covariances are stored through their lower-triangular factors L with
    sigma = L @ L.T, so positive-semidefiniteness holds by construction.
    """

    weights: np.ndarray
    means: np.ndarray    # (modes, dim)
    factors: np.ndarray  # (modes, dim, dim), lower triangular

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        factors = np.asarray(self.factors, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ScenarioError("mixture needs at least one mode")
        if np.any(w < 0):
            raise ScenarioError("mixture weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ScenarioError("mixture weights must not all be zero")
        w = w / total
        if factors.ndim != 3:
            raise ScenarioError("covariance factors must be a (modes, dim, dim) stack")
        if means.shape[0] != w.size or factors.shape[0] != w.size:
            raise ScenarioError("weights, means and factors disagree on mode count")
        if factors.shape[1:] != (means.shape[1], means.shape[1]):
            raise ScenarioError(
                f"dimension mismatch: means are {means.shape[1]}-d but factors are "
                f"{factors.shape[1]}x{factors.shape[2]}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        modes = rng.choice(self.weights.size, size=n, p=self.weights)
        noise = rng.standard_normal((n, self.dim))
        out = np.empty((n, self.dim))
        for k in range(self.weights.size):
            mask = modes == k
            if mask.any():
                out[mask] = noise[mask] @ self.factors[k].T + self.means[k]
        return out

    def mean(self) -> np.ndarray:
        return self.weights @ self.means


@dataclass(frozen=True)
class SmoothedEmpiricalSource:
    """Resample base rows uniformly, then add independent Gaussian noise.

    With zero bandwidth this is exactly bootstrap resampling, which is
    how CSV-backed sources behave by default.
    """

    base: np.ndarray       # (n, dim)
    bandwidth: np.ndarray  # (dim,)

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        if base.ndim != 2 or base.shape[0] < 1:
            raise ScenarioError("smoothed-empirical source needs a nonempty base batch")
        bw = np.broadcast_to(np.asarray(self.bandwidth, dtype=float), (base.shape[1],)).copy()
        if np.any(bw < 0):
            raise ScenarioError("bandwidths must be nonnegative")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "bandwidth", bw)

    @property
    def dim(self) -> int:
        return self.base.shape[1]

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.integers(0, self.base.shape[0], size=n)
        out = self.base[idx]
        if np.any(self.bandwidth > 0):
            out = out + rng.standard_normal((n, self.dim)) * self.bandwidth
        return out

    def mean(self) -> np.ndarray:
        return self.base.mean(axis=0)


def build_gaussian_mixture(modes) -> GaussianMixtureSource:
    """Build a mixture source from (weight, mean, factor) triples."""
    if not modes:
        raise ScenarioError("mixture needs at least one mode")
    weights = np.array([m[0] for m in modes], dtype=float)
    means = np.array([np.atleast_1d(m[1]) for m in modes], dtype=float)
    dim = means.shape[1]
    factors = np.empty((len(modes), dim, dim))
    for k, (_, _, factor) in enumerate(modes):
        f = np.atleast_2d(np.asarray(factor, dtype=float))
        if f.shape != (dim, dim):
            raise ScenarioError(
                f"dimension mismatch in mode {k}: mean is {dim}-d, factor is {f.shape}"
            )
        factors[k] = np.tril(f)
    return GaussianMixtureSource(weights, means, factors)


def build_smoothed_empirical(base: ScenarioBatch, bandwidth) -> SmoothedEmpiricalSource:
    return SmoothedEmpiricalSource(base.data, bandwidth)


def sample_batch(source, n: int, stream: SampleStream) -> ScenarioBatch:
    """Draw n scenarios, advancing the stream past them."""
    if n < 1:
        raise ScenarioError(f"sample count must be >= 1, got {n}")
    return ScenarioBatch(source.draw(stream.rng, n))


def random_pd_factor(dim: int, scale: float, seed) -> np.ndarray:
    """Random lower-triangular factor L with strictly positive diagonal.

    L @ L.T is positive-definite by construction; ``scale`` sets the
    overall magnitude.
    """
    if dim < 1:
        raise ScenarioError("dimension must be >= 1")
    if scale <= 0:
        raise ScenarioError("scale must be positive")
    rng = SampleStream(seed).rng
    factor = np.tril(rng.standard_normal((dim, dim)) * scale, k=-1)
    factor[np.diag_indices(dim)] = scale * (0.5 + rng.random(dim))
    return factor


def poisson_mode_mixture(dim: int, n_modes: int = 3, mean_rate: float = 10.0,
                         cov_scale: float = 1.0, seed=0,
                         mean_scale: float = 1.0) -> GaussianMixtureSource:
    """Multi-modal Gaussian source with Poisson-placed mode centers.

    Each mode's mean vector has coordinates drawn from a Poisson
    distribution with the given rate (then multiplied by ``mean_scale``,
    which is how supply sources get sized to cover expected demand);
    covariances come from random positive-definite factors.
    """
    if n_modes < 1:
        raise ScenarioError("need at least one mode")
    root = SampleStream(seed)
    rng = root.rng
    modes = []
    for k in range(n_modes):
        mean = rng.poisson(mean_rate, size=dim).astype(float) * mean_scale
        factor = random_pd_factor(dim, cov_scale, seed=rng.integers(0, 2**63 - 1))
        modes.append((1.0 / n_modes, mean, factor))
    return build_gaussian_mixture(modes)
