"""Command-line entry point.

Subcommands:
  solve     run the dominance-constrained solver per seed and report
  baseline  run the enabled baselines (scenario LP, greedy) per seed
  generate  materialize scenarios from a source config to CSV
  evaluate  score a stored decision on a scenario CSV

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import runner, scenario
from .config import ConfigError, _Node, _integer, load_config, parse_source


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError("/seeds", f"cannot parse seed list {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdsolve",
        description="Optimization under stochastic dominance constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help):
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help=out_help)
        p.add_argument("--seeds", default=None,
                       help="comma-separated seed override, e.g. 1,2,3")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")
        p.add_argument("--no-figures", action="store_true",
                       help="skip rendering figures next to the outputs")

    common(sub.add_parser("solve", help="run the solver per seed"),
           "output directory (default: config output_dir or '.')")
    common(sub.add_parser("baseline", help="run the enabled baselines per seed"),
           "output directory (default: config output_dir or '.')")

    gen = sub.add_parser("generate", help="write scenario samples to CSV")
    gen.add_argument("--config", required=True, help="path to the generator config")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--quiet", action="store_true")

    ev = sub.add_parser("evaluate", help="evaluate a stored decision")
    ev.add_argument("--config", required=True, help="path to the JSON run config")
    ev.add_argument("--solution", required=True,
                    help="JSON file with a 'z' decision entry")
    ev.add_argument("--scenarios", required=True, help="scenario CSV to evaluate on")
    ev.add_argument("--out", default=None, help="output directory (default '.')")
    ev.add_argument("--quiet", action="store_true")
    return parser


def _resolve_out(args, config) -> Path:
    if args.out is not None:
        return Path(args.out)
    if getattr(config, "output_dir", None):
        return Path(config.output_dir)
    return Path(".")


def _cmd_solve(args) -> int:
    config = load_config(args.config)
    if args.seeds:
        config.seeds = _parse_seeds(args.seeds)
    report = runner.run_solve(config, _resolve_out(args, config),
                              quiet=args.quiet, render=not args.no_figures)
    if not args.quiet:
        agg = report["aggregate"].get("objective", {})
        print(f"wrote report for {len(config.seeds)} seed(s); "
              f"objective mean {agg.get('mean', float('nan')):.6g}")
    return 0


def _cmd_baseline(args) -> int:
    config = load_config(args.config)
    if args.seeds:
        config.seeds = _parse_seeds(args.seeds)
    runner.run_baselines(config, _resolve_out(args, config),
                         quiet=args.quiet, render=not args.no_figures)
    return 0


def _cmd_generate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("", f"cannot read generator config: {exc}") from exc
    node = _Node(data)
    source = parse_source(node.child("source"))
    samples = _integer(node, "samples", minimum=1)
    seed = _integer(node, "seed", 0)
    node.finish()
    batch = scenario.sample_batch(source, samples, scenario.SampleStream(seed))
    scenario.save_scenarios_csv(batch, args.out)
    if not args.quiet:
        print(f"wrote {batch.n} x {batch.dim} scenarios to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    config = load_config(args.config)
    try:
        with open(args.solution, encoding="utf-8") as handle:
            payload = json.load(handle)
        z = np.asarray(payload["z"], dtype=float)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise runner.RunError(f"cannot read solution file {args.solution}: {exc}")
    rows = scenario.load_scenarios_csv(args.scenarios).data
    result = runner.evaluate_decision(config, z, rows)
    out_dir = _resolve_out(args, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    runner.write_json_atomic(result, out_dir / "evaluation.json")
    if not args.quiet:
        print(f"objective {result['objective']:.6g}, "
              f"cvi1 {result['cvi1_mean']:.4g}, cvi2 {result['cvi2_mean']:.4g}")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "baseline": _cmd_baseline,
    "generate": _cmd_generate,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, scenario.ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
