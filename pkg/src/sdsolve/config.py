"""Run configuration: strict JSON parsing and problem construction.

Configs are JSON objects with four blocks (``problem``, ``solver``,
``evaluation``, optional ``baselines``) plus ``seeds`` and an optional
``output_dir``.  Parsing is strict: unknown fields are rejected, and
every error message carries a JSON pointer to the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import scenario
from .problems import PortfolioProblem, TransportProblem
from .solver import SolverConfig

SDLP_SAMPLE_SIZES = (32, 64, 128, 256, 512)
_MISSING = object()


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class _Node:
    """One JSON object during strict parsing; tracks consumed keys."""

    def __init__(self, data, pointer=""):
        if not isinstance(data, dict):
            raise ConfigError(pointer, f"expected an object, got {type(data).__name__}")
        self.data = data
        self.pointer = pointer
        self.seen = set()

    def child(self, key):
        self.seen.add(key)
        if key not in self.data:
            raise ConfigError(self.pointer, f"missing required field {key!r}")
        return _Node(self.data[key], f"{self.pointer}/{key}")

    def optional_child(self, key):
        if key not in self.data:
            return None
        return self.child(key)

    def take(self, key, default=_MISSING):
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if default is _MISSING:
            raise ConfigError(self.pointer, f"missing required field {key!r}")
        return default

    def finish(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError(self.pointer, f"unknown field {unknown[0]!r}")

    def error(self, key, message):
        raise ConfigError(f"{self.pointer}/{key}", message)


def _number(node, key, default=_MISSING, minimum=None, positive=False):
    value = node.take(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        node.error(key, f"expected a number, got {value!r}")
    value = float(value)
    if positive and value <= 0:
        node.error(key, "must be positive")
    if minimum is not None and value < minimum:
        node.error(key, f"must be >= {minimum}")
    return value


def _integer(node, key, default=_MISSING, minimum=None):
    value = node.take(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        node.error(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        node.error(key, f"must be >= {minimum}")
    return value


def parse_source(node: _Node):
    """Build a sampleable source from its JSON spec."""
    kind = node.take("kind")
    if kind in ("csv", "inline"):
        if kind == "csv":
            batch = scenario.load_scenarios_csv(node.take("path"))
        else:
            data = np.asarray(node.take("data"), dtype=float)
            batch = scenario.ScenarioBatch(np.atleast_2d(data))
        bandwidth = node.take("bandwidth", 0.0)
        node.finish()
        return scenario.build_smoothed_empirical(batch, bandwidth)
    if kind == "gaussian_mixture":
        weights = node.take("weights")
        means = node.take("means")
        factors = node.take("factors")
        node.finish()
        return scenario.build_gaussian_mixture(list(zip(weights, means, factors)))
    if kind == "random_mixture":
        dim = _integer(node, "dim", minimum=1)
        modes = _integer(node, "modes", 3, minimum=1)
        mean_rate = _number(node, "mean_rate", 10.0, positive=True)
        cov_scale = _number(node, "cov_scale", 1.0, positive=True)
        mean_scale = _number(node, "mean_scale", 1.0, positive=True)
        seed = _integer(node, "seed")
        node.finish()
        return scenario.poisson_mode_mixture(dim, modes, mean_rate, cov_scale,
                                             seed, mean_scale)
    raise ConfigError(f"{node.pointer}/kind", f"unknown source kind {kind!r}")


@dataclass
class ProblemConfig:
    kind: str
    order: int
    source_specs: dict = field(default_factory=dict)
    reference_kind: str = "coupled"
    reference_weights: list | None = None
    costs: np.ndarray | None = None

    def build(self):
        """Construct a fresh problem instance (sources are immutable)."""
        if self.kind == "portfolio":
            source = self.source_specs["source"]
            ref_source = self.source_specs.get("reference_source")
            return PortfolioProblem(source, self.order, self.reference_weights,
                                    ref_source)
        return TransportProblem(self.costs, self.source_specs["demand_source"],
                                self.source_specs["supply_source"], self.order)


def _parse_constraint(node: _Node, expected_orientation: str):
    order = _integer(node, "order", 2)
    if order not in (1, 2):
        node.error("order", "must be 1 or 2")
    orientation = node.take("orientation", expected_orientation)
    if orientation != expected_orientation:
        node.error("orientation",
                   f"this problem family supports only {expected_orientation!r}")
    return order, node


def _parse_problem(node: _Node) -> ProblemConfig:
    kind = node.take("kind")
    if kind == "portfolio":
        source = parse_source(node.child("source"))
        declared = node.take("assets", None)
        if declared is not None and declared != source.dim:
            node.error("assets",
                       f"declared {declared} assets but the source is {source.dim}-d")
        constraint = node.optional_child("constraint")
        order, reference_kind, reference_source = 2, "coupled", None
        weights = None
        if constraint is not None:
            order, constraint = _parse_constraint(constraint, "decision_dominates")
            ref_node = constraint.optional_child("reference")
            if ref_node is not None:
                reference_kind = ref_node.take("kind", "coupled")
                if reference_kind not in ("coupled", "independent"):
                    ref_node.error("kind", "must be 'coupled' or 'independent'")
                weights = ref_node.take("weights", None)
                if reference_kind == "independent":
                    reference_source = parse_source(ref_node.child("source"))
                ref_node.finish()
            constraint.finish()
        node.finish()
        specs = {"source": source}
        if reference_source is not None:
            specs["reference_source"] = reference_source
        return ProblemConfig(kind, order, specs, reference_kind, weights)
    if kind == "transport":
        costs_raw = node.take("costs")
        if isinstance(costs_raw, dict):
            costs_node = _Node(costs_raw, f"{node.pointer}/costs")
            costs = scenario.load_scenarios_csv(costs_node.take("csv")).data
            costs_node.finish()
        else:
            costs = np.atleast_2d(np.asarray(costs_raw, dtype=float))
        demand = parse_source(node.child("demand_source"))
        supply = parse_source(node.child("supply_source"))
        constraint = node.optional_child("constraint")
        order = 2
        if constraint is not None:
            order, constraint = _parse_constraint(constraint, "reference_dominates")
            constraint.finish()
        node.finish()
        return ProblemConfig(kind, order,
                             {"demand_source": demand, "supply_source": supply},
                             costs=costs)
    raise ConfigError(f"{node.pointer}/kind",
                      f"unknown problem kind {kind!r} (expected portfolio or transport)")


def _parse_solver(node: _Node) -> SolverConfig:
    record = node.take("record_iterates", False)
    if not isinstance(record, bool):
        node.error("record_iterates", "must be a boolean")
    kwargs = dict(
        iterations=_integer(node, "iterations", minimum=1),
        batch_size=_integer(node, "batch_size", minimum=1),
        step_size=_number(node, "step_size", minimum=0.0),
        schedule=node.take("schedule", "constant"),
        penalty=_number(node, "penalty", 1.0, minimum=0.0),
        trace_every=_integer(node, "trace_every", 1, minimum=1),
        init_jitter=_number(node, "init_jitter", 0.0, minimum=0.0),
        record_iterates=record,
        time_limit=_number(node, "time_limit", None, positive=True),
    )
    temperature = node.take("temperature", "auto")
    if temperature != "auto":
        if isinstance(temperature, bool) or not isinstance(temperature, (int, float)) \
                or temperature <= 0:
            node.error("temperature", "must be 'auto' or a positive number")
        temperature = float(temperature)
    kwargs["temperature"] = temperature
    node.finish()
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(node.pointer, str(exc)) from exc


@dataclass
class EvaluationConfig:
    holdout: int = 1000
    grid_points: int = 1000
    interval: tuple[float, float] | None = None
    seed: int = 1000003
    optimum: float | None = None


@dataclass
class BaselineConfig:
    sdlp: bool = False
    sdlp_samples: int = 64
    greedy: bool = False


@dataclass
class RunConfig:
    problem: ProblemConfig
    solver: SolverConfig
    evaluation: EvaluationConfig
    baselines: BaselineConfig
    seeds: list[int]
    output_dir: str | None
    raw: dict

    def solver_for_seed(self, seed: int) -> SolverConfig:
        from dataclasses import replace
        return replace(self.solver, seed=seed)


def parse_config(data: dict) -> RunConfig:
    root = _Node(data)
    problem = _parse_problem(root.child("problem"))
    solver_cfg = _parse_solver(root.child("solver"))

    eval_node = root.optional_child("evaluation")
    evaluation = EvaluationConfig()
    if eval_node is not None:
        evaluation = EvaluationConfig(
            holdout=_integer(eval_node, "holdout", 1000, minimum=1),
            grid_points=_integer(eval_node, "grid_points", 1000, minimum=2),
            seed=_integer(eval_node, "seed", 1000003),
            optimum=_number(eval_node, "optimum", None),
        )
        interval = eval_node.take("interval", None)
        if interval is not None:
            if (not isinstance(interval, list) or len(interval) != 2
                    or interval[0] >= interval[1]):
                eval_node.error("interval", "must be [lower, upper] with lower < upper")
            evaluation.interval = (float(interval[0]), float(interval[1]))
        eval_node.finish()

    base_node = root.optional_child("baselines")
    baselines = BaselineConfig()
    if base_node is not None:
        greedy = base_node.take("greedy", False)
        if not isinstance(greedy, bool):
            base_node.error("greedy", "must be a boolean")
        baselines.greedy = greedy
        sdlp_node = base_node.optional_child("sdlp")
        if sdlp_node is not None:
            enabled = sdlp_node.take("enabled", True)
            if not isinstance(enabled, bool):
                sdlp_node.error("enabled", "must be a boolean")
            samples = _integer(sdlp_node, "samples", 64, minimum=1)
            if samples not in SDLP_SAMPLE_SIZES:
                sdlp_node.error("samples", f"must be one of {SDLP_SAMPLE_SIZES}")
            sdlp_node.finish()
            baselines.sdlp = enabled
            baselines.sdlp_samples = samples
        if baselines.sdlp and problem.kind == "transport":
            raise ConfigError("/baselines/sdlp",
                              "sdlp unsupported for reference-dominates orientation")
        base_node.finish()

    seeds = root.take("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or any(isinstance(s, bool) or not isinstance(s, int) for s in seeds)):
        raise ConfigError("/seeds", "must be a nonempty list of integers")

    output_dir = root.take("output_dir", None)
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("/output_dir", "must be a string path")
    root.finish()
    return RunConfig(problem, solver_cfg, evaluation, baselines,
                     list(seeds), output_dir, data)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON in {path}: {exc}") from exc
    try:
        return parse_config(data)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError("", str(exc)) from exc
