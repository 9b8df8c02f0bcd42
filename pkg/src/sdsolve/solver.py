"""Projected stochastic ascent under sampled dominance penalties.

Each iteration draws a fresh batch, rebuilds the violation thresholds
and dual function for every constraint, and takes a projected step
along the objective gradient plus the (sign-resolved, normalized) dual
penalty gradients.  The step-weighted running average of the iterates
is maintained alongside the final point, and a per-iteration trace
records the batch objective estimate and threshold-set sizes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import dual
from .scenario import SampleStream

SCHEDULES = ("constant", "inv_sqrt_t")


class SolverError(RuntimeError):
    """Raised when an update cannot be computed (non-finite gradients)."""


@dataclass(frozen=True)
class SolverConfig:
    iterations: int
    batch_size: int
    step_size: float
    schedule: str = "constant"
    temperature: float | str = "auto"
    penalty: float = 1.0
    seed: int = 0
    trace_every: int = 1
    init_jitter: float = 0.0
    record_iterates: bool = False
    time_limit: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.step_size < 0:
            # a zero base step is a legal no-op run (useful as a smoke case)
            raise ValueError("step_size must be nonnegative")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.temperature != "auto" and (not np.isreal(self.temperature)
                                           or float(self.temperature) <= 0):
            raise ValueError("temperature must be 'auto' or a positive number")
        if self.penalty < 0:
            raise ValueError("penalty must be nonnegative")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.init_jitter < 0:
            raise ValueError("init_jitter must be nonnegative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive when set")


@dataclass
class IterateTrace:
    """Per-recorded-iteration log: step index, step size, objective, |thresholds|."""

    t: np.ndarray
    gamma: np.ndarray
    objective: np.ndarray
    mu_sizes: np.ndarray           # (rows, n_constraints)
    iterates: list | None = None   # optional decision snapshots

    def rows(self):
        for i in range(self.t.size):
            yield (int(self.t[i]), float(self.gamma[i]), float(self.objective[i]),
                   [int(v) for v in self.mu_sizes[i]])


@dataclass(frozen=True)
class Solution:
    z_final: np.ndarray
    z_averaged: np.ndarray
    iterations: int
    wall_clock_seconds: float
    truncated: bool = False


def step_size(t: int, config: SolverConfig) -> float:
    """Step at iteration t: constant gamma0/sqrt(T), or decaying gamma0/sqrt(t)."""
    if config.schedule == "constant":
        return config.step_size / np.sqrt(config.iterations)
    return config.step_size / np.sqrt(t)


def averaged_iterate(gammas, iterates) -> np.ndarray:
    """Step-weighted mean of the iterates; plain mean under a constant step."""
    gammas = np.asarray(gammas, dtype=float).ravel()
    if gammas.size == 0:
        raise ValueError("cannot average an empty trace")
    stack = np.stack([np.asarray(z, dtype=float) for z in iterates])
    if stack.shape[0] != gammas.size:
        raise ValueError("one step size per iterate required")
    weights = gammas / gammas.sum()
    return np.tensordot(weights, stack, axes=1)


def _resolve_temperature(config, term):
    if config.temperature != "auto":
        return float(config.temperature)
    pool = np.concatenate([term.outcomes, term.references])
    return dual.default_temperature(dual.support_interval(pool))


def solve(problem, config: SolverConfig, stream: SampleStream | None = None):
    """Run the full loop and return (Solution, IterateTrace).

    A caller may pass a pre-spawned stream to embed the run in a larger
    seeded experiment; by default the stream derives from config.seed.
    """
    started = time.perf_counter()
    if stream is None:
        stream = SampleStream(config.seed)
    init_stream, data_stream = stream.spawn(2)
    draw_streams = problem.spawn_streams(data_stream)

    z = problem.initial_point()
    if config.init_jitter > 0:
        z = z + config.init_jitter * init_stream.rng.standard_normal(z.shape)
    z = problem.project(z)

    avg_num = np.zeros_like(z)
    avg_den = 0.0
    rec_t, rec_gamma, rec_obj, rec_mu = [], [], [], []
    rec_z = [] if config.record_iterates else None
    truncated = False
    iterations_run = 0

    for t in range(1, config.iterations + 1):
        if config.time_limit is not None and time.perf_counter() - started > config.time_limit:
            truncated = True
            break
        batch = problem.draw(draw_streams, config.batch_size)
        grad = problem.objective_grad(z, batch)
        if not np.isfinite(grad).all():
            raise SolverError(f"non-finite objective gradient at iteration {t}")
        mu_sizes = []
        for j, term in enumerate(problem.constraint_terms(z, batch)):
            thresholds = dual.violation_thresholds(term.order, term.dominant,
                                                   term.dominated)
            mu_sizes.append(thresholds.size)
            if not thresholds:
                continue
            temperature = _resolve_temperature(config, term) if term.order == 1 else None
            u = dual.make_dual(thresholds, temperature)
            weights = dual.dual_derivative(u, term.outcomes)
            contribution = config.penalty * term.sign * term.gradient(weights)
            if not np.isfinite(contribution).all():
                raise SolverError(
                    f"non-finite gradient at iteration {t} (constraint {j})"
                )
            grad = grad + contribution

        gamma = step_size(t, config)
        z = problem.project(z + gamma * grad)
        avg_num += gamma * z
        avg_den += gamma
        iterations_run = t

        if t % config.trace_every == 0 or t == config.iterations:
            rec_t.append(t)
            rec_gamma.append(gamma)
            rec_obj.append(problem.objective_value(z, batch))
            rec_mu.append(mu_sizes)
            if rec_z is not None:
                rec_z.append(z.copy())

    if avg_den == 0.0:
        # no weighted mass: zero steps or a time limit shorter than one
        # iteration; every visited point is the start point
        z_avg = z.copy()
    else:
        z_avg = avg_num / avg_den
    trace = IterateTrace(
        t=np.asarray(rec_t, dtype=int),
        gamma=np.asarray(rec_gamma, dtype=float),
        objective=np.asarray(rec_obj, dtype=float),
        mu_sizes=np.asarray(rec_mu, dtype=int).reshape(len(rec_t), -1),
        iterates=rec_z,
    )
    solution = Solution(
        z_final=z,
        z_averaged=z_avg,
        iterations=iterations_run,
        wall_clock_seconds=time.perf_counter() - started,
        truncated=truncated,
    )
    return solution, trace
