"""Experiment orchestration: seeded runs, baselines, reports, traces.

All file writes are atomic (temp file + rename).  Reports are JSON with
sorted keys; rerunning with the same config and seeds reproduces them
byte for byte except for the single ``created`` timestamp.
"""
from __future__ import annotations

import csv
import datetime
import json
import os
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import baseline as baseline_mod
from . import metrics, solver
from .config import RunConfig
from .dual import SupportInterval, violation_thresholds
from .scenario import SampleStream


class RunError(RuntimeError):
    """A run failed after configuration was accepted."""


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_json_atomic(payload: dict, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        json.dump(_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")
    os.replace(tmp, path)


def write_trace_csv(trace: solver.IterateTrace, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    n_constraints = trace.mu_sizes.shape[1] if trace.mu_sizes.size else 0
    with open(tmp, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "gamma", "objective_estimate"]
                        + [f"mu_size_{j}" for j in range(n_constraints)])
        for t, gamma, objective, mu in trace.rows():
            writer.writerow([t, repr(gamma), repr(objective)] + mu)
    os.replace(tmp, path)


def _interval_override(config: RunConfig):
    if config.evaluation.interval is None:
        return None
    lo, hi = config.evaluation.interval
    return SupportInterval(lo, hi)


def holdout_batch(problem, config: RunConfig):
    """The shared held-out evaluation batch for this config."""
    stream = SampleStream(config.evaluation.seed)
    return problem.draw(problem.spawn_streams(stream), config.evaluation.holdout)


def _evaluate(problem, z, batch, config: RunConfig):
    report = metrics.evaluate_solution(
        problem, z, batch,
        grid_points=config.evaluation.grid_points,
        interval_override=_interval_override(config),
        optimum=config.evaluation.optimum,
    )
    if problem.__class__.__name__ == "TransportProblem":
        report.extras["cost"] = -report.objective
    return report


def _baselines_for_seed(problem, config: RunConfig, stream: SampleStream, batch):
    """Run enabled baselines on one seed's data; evaluate on the holdout batch."""
    out = {}
    if not (config.baselines.sdlp or config.baselines.greedy):
        return out
    build = problem.draw(problem.spawn_streams(stream), config.baselines.sdlp_samples)
    if config.baselines.sdlp:
        z_lp, result = baseline_mod.sdlp_portfolio(build.returns, build.references)
        if result.status != "optimal":
            raise RunError(f"sdlp baseline did not solve: status {result.status}")
        build_violations = violation_thresholds(
            2, z_lp @ build.returns.T, build.references).size
        out["sdlp"] = {
            "z": z_lp,
            "lp_value": result.value,
            "pivots": result.pivots,
            "build_violation_count": int(build_violations),
            "evaluation": _evaluate(problem, z_lp, batch, config).to_dict(),
        }
    if config.baselines.greedy:
        if problem.__class__.__name__ == "PortfolioProblem":
            z_greedy = baseline_mod.greedy_portfolio(build.returns)
        else:
            z_greedy = baseline_mod.greedy_transport(problem.costs)
        out["greedy"] = {
            "z": z_greedy,
            "evaluation": _evaluate(problem, z_greedy, batch, config).to_dict(),
        }
    return out


def _aggregate(per_seed: list[dict]) -> dict:
    def stats(values):
        arr = np.asarray(values, dtype=float)
        return {"mean": float(arr.mean()), "std": float(arr.std())}

    keys = ("objective", "cvi1_mean", "cvi2_mean")
    agg = {}
    evals = [entry["evaluation"] for entry in per_seed if entry.get("evaluation")]
    if evals:
        for key in keys:
            agg[key] = stats([ev[key] for ev in evals])
    for name in ("sdlp", "greedy"):
        rows = [entry["baselines"][name]["evaluation"] for entry in per_seed
                if entry.get("baselines", {}).get(name)]
        if rows:
            agg[name] = {key: stats([ev[key] for ev in rows]) for key in keys}
    return agg


def run_solve(config: RunConfig, out_dir, quiet: bool = False,
              render: bool = True) -> dict:
    """One solver run per seed, plus enabled baselines; writes all outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = config.problem.build()
    batch = holdout_batch(problem, config)
    per_seed = []
    for seed in config.seeds:
        try:
            root = SampleStream(seed)
            solver_stream, baseline_stream = root.spawn(2)
            solution, trace = solver.solve(problem, config.solver_for_seed(seed),
                                           stream=solver_stream)
            evaluation = _evaluate(problem, solution.z_averaged, batch, config)
            entry = {
                "seed": seed,
                "solution": {
                    "z_final": solution.z_final,
                    "z_averaged": solution.z_averaged,
                    "iterations": solution.iterations,
                    "wall_clock_seconds": solution.wall_clock_seconds,
                    "truncated": solution.truncated,
                },
                "evaluation": evaluation.to_dict(),
                "baselines": _baselines_for_seed(problem, config, baseline_stream,
                                                 batch),
            }
        except Exception as exc:
            raise RunError(f"seed {seed}: {exc}") from exc
        per_seed.append(entry)
        write_trace_csv(trace, out_dir / f"trace_seed{seed}.csv")
        if render:
            from . import figures
            figures.render_trace_figure(trace, out_dir / f"trace_seed{seed}.png",
                                        title=f"seed {seed}")
        if not quiet:
            print(f"seed {seed}: objective {evaluation.objective:.6g}, "
                  f"cvi2 {float(np.mean(evaluation.cvi2)):.4g}")
    report = {
        "kind": "solve",
        "config": config.raw,
        "per_seed": per_seed,
        "aggregate": _aggregate(per_seed),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_json_atomic(report, out_dir / "report.json")
    if render:
        from . import figures
        figures.render_report_figure(_jsonable(report), out_dir / "report.png")
    return report


def run_baselines(config: RunConfig, out_dir, quiet: bool = False,
                  render: bool = True) -> dict:
    """Baselines only, on the same per-seed streams and holdout as run_solve."""
    if not (config.baselines.sdlp or config.baselines.greedy):
        raise RunError("no baseline enabled in config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = config.problem.build()
    batch = holdout_batch(problem, config)
    per_seed = []
    for seed in config.seeds:
        try:
            root = SampleStream(seed)
            _, baseline_stream = root.spawn(2)
            entry = {
                "seed": seed,
                "baselines": _baselines_for_seed(problem, config, baseline_stream,
                                                 batch),
            }
        except Exception as exc:
            raise RunError(f"seed {seed}: {exc}") from exc
        per_seed.append(entry)
        if not quiet:
            names = ", ".join(sorted(entry["baselines"]))
            print(f"seed {seed}: baselines {names} done")
    report = {
        "kind": "baseline",
        "config": config.raw,
        "per_seed": per_seed,
        "aggregate": _aggregate(per_seed),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_json_atomic(report, out_dir / "baselines.json")
    if render:
        from . import figures
        figures.render_report_figure(_jsonable(report), out_dir / "baselines.png")
    return report


def evaluate_decision(config: RunConfig, z, rows) -> dict:
    """Evaluate a decision vector/matrix on externally supplied scenario rows."""
    problem = config.problem.build()
    z = np.asarray(z, dtype=float)
    expected = problem.decision_shape
    if z.shape != expected and z.size == int(np.prod(expected)):
        z = z.reshape(expected)
    if z.shape != expected:
        raise RunError(f"decision has shape {z.shape}, expected {expected}")
    if np.any(z < 0):
        raise RunError("decision is infeasible: negative entry")
    sums = z.sum() if z.ndim == 1 else z.sum(axis=1)
    if not np.allclose(sums, 1.0, atol=1e-8):
        raise RunError("decision is infeasible: rows must sum to 1")
    batch = problem.batch_from_rows(np.atleast_2d(np.asarray(rows, dtype=float)))
    return _evaluate(problem, z, batch, config).to_dict()
