"""Command-line interface.

Subcommands:
    list             show the built-in benchmarks
    run              execute one experiment grid from a config or defaults
    suite            run the baseline suite (static grid + random) per benchmark
    analyze          compute difficulty profiles and radar plot data
    validate-config  check a config file or an instance CSV

Exit codes are a stable scripting contract: 0 success, 1 usage or
configuration error, 2 partial failure (some cells failed), 3 I/O error.

The default output root is ``$CTRLBENCH_OUT`` (falling back to
``./ctrlbench-out``).  Every ``run`` output directory is self-describing:
it contains the frozen resolved config, the traces, and the summary CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import analysis, registry
from .config import (
    BenchmarkConfig,
    config_hash,
    default_config,
    load_config,
    save_config,
)
from .errors import CtrlBenchError
from .instances import read_instances
from .policies import POLICY_GRAMMAR, applicable_policy_ids, make_policy, static_grid
from .runner import ExperimentPlan, run_suite

_TOP_LEVEL_OVERRIDES = {"seed", "episode_cutoff", "reward_quality"}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise CtrlBenchError(f"usage error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ctrlbench",
        description="Benchmarks for step-wise control of algorithm parameters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="show the built-in benchmarks")

    run = sub.add_parser("run", help="run an experiment grid")
    _add_config_args(run)
    run.add_argument("--policy", action="append", default=[], metavar="SPEC",
                     help=f"policy string (repeatable); grammar: {POLICY_GRAMMAR}")
    run.add_argument("--seeds", default="0..9",
                     help='seed list: "0..9", "0,3,7", or a single integer')
    run.add_argument("--episodes-per-instance", type=int, default=1)
    run.add_argument("--output", "-o", default=None, help="output root directory")
    run.add_argument("--log-observations", action="store_true",
                     help="include observations in trace records")
    run.add_argument("--jobs", type=int, default=1,
                     help="max concurrent (policy, seed) cells")

    suite = sub.add_parser("suite", help="run the baseline suite")
    suite.add_argument("--benchmark", action="append", default=[],
                       help="benchmark id (repeatable; default: all built-ins)")
    suite.add_argument("--seeds", default="0..9")
    suite.add_argument("--grid-count", type=int, default=50,
                       help="static grid size for continuous action spaces")
    suite.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       dest="overrides", help="config override (repeatable)")
    suite.add_argument("--output", "-o", default=None)
    suite.add_argument("--jobs", type=int, default=1)

    analyze = sub.add_parser("analyze", help="compute difficulty profiles")
    analyze.add_argument("--benchmark", action="append", default=[],
                         help="benchmark id (repeatable; default: all built-ins)")
    analyze.add_argument("--config", action="append", default=[],
                         help="config file instead of a built-in default (repeatable)")
    analyze.add_argument("--full", action="store_true",
                         help="10 seeds x 10 repeats instead of the reduced 3 x 3")
    analyze.add_argument("--refresh", action="store_true",
                         help="recompute even if a cached profile exists")
    analyze.add_argument("--output", "-o", default=None)

    validate = sub.add_parser("validate-config", help="validate a config or instance file")
    validate.add_argument("--config", default=None, help="config JSON file")
    validate.add_argument("--instances", default=None, help="instance CSV file")
    validate.add_argument("--benchmark", default=None,
                          help="benchmark id (required with --instances)")
    validate.add_argument("--split", default="train", choices=("train", "test"))
    return parser


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="config JSON file")
    sub.add_argument("--benchmark", default=None, help="built-in benchmark id")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     dest="overrides",
                     help="override a config entry (with --benchmark only); "
                          "unknown keys go to benchmark_params")


def _parse_seeds(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        low_text, high_text = text.split("..", 1)
        low, high = int(low_text), int(high_text)
        if high < low:
            raise CtrlBenchError(f"empty seed range {text!r}")
        return tuple(range(low, high + 1))
    return tuple(int(part) for part in text.split(","))


def _parse_overrides(pairs: Sequence[str]) -> dict[str, Any]:
    top: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise CtrlBenchError(f"override {pair!r} is not KEY=VALUE")
        key, text = pair.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        if key in _TOP_LEVEL_OVERRIDES:
            top[key] = value
        else:
            params[key] = value
    if params:
        top["benchmark_params"] = params
    return top


def _resolve_config(args: argparse.Namespace) -> BenchmarkConfig:
    if args.config and args.benchmark:
        raise CtrlBenchError("pass either --config or --benchmark, not both")
    if args.config:
        if getattr(args, "overrides", []):
            raise CtrlBenchError("--set requires --benchmark (edit the file instead)")
        return load_config(args.config)
    if args.benchmark:
        overrides = _parse_overrides(getattr(args, "overrides", []))
        return default_config(args.benchmark, overrides)
    raise CtrlBenchError("one of --config or --benchmark is required")


def _output_root(value: str | None) -> Path:
    if value is not None:
        return Path(value)
    return Path(os.environ.get("CTRLBENCH_OUT", "ctrlbench-out"))


def cmd_list(_args: argparse.Namespace) -> int:
    registry.ensure_loaded()
    for benchmark_id in registry.benchmark_ids():
        config = default_config(benchmark_id)
        state_cat, action_cat = analysis.space_categories(config)
        space = config.action_space
        if space.is_continuous:
            action_text = "continuous"
        else:
            action_text = str(space.n_choices())
        count = config.benchmark_params.get("instance_count", "?")
        print(
            f"{benchmark_id:<10} actions: {action_text} (cat {action_cat})  "
            f"state: {config.observation_space.dimension} dims (cat {state_cat})  "
            f"cutoff: {config.episode_cutoff}  "
            f"reward_quality: {config.reward_quality}  "
            f"instances: {count} per split  "
            f"policies: {', '.join(applicable_policy_ids(config))}"
        )
    return 0


def _report_failures(report) -> None:
    for cell in report.failures:
        print(f"FAILED cell policy={cell.policy_id} seed={cell.seed}: {cell.error}",
              file=sys.stderr)


def cmd_run(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    if not args.policy:
        raise CtrlBenchError(f"at least one --policy is required; grammar: {POLICY_GRAMMAR}")
    for text in args.policy:  # fail fast on bad policy strings
        make_policy(text, config)
    plan = ExperimentPlan(
        benchmark_config=config,
        policies=tuple(args.policy),
        seeds=_parse_seeds(args.seeds),
        episodes_per_instance=args.episodes_per_instance,
        output_dir=str(_output_root(args.output)),
        log_observations=args.log_observations,
        jobs=args.jobs,
    )
    report = run_suite(plan)
    assert report.run_dir is not None
    save_config(config, report.run_dir / "config.frozen.json")
    print(f"run_id: {report.run_id}")
    print(f"output: {report.run_dir}")
    print(f"config_hash: {config_hash(config)}")
    if report.report_path is not None:
        print(report.report_path.read_text(encoding="utf-8"), end="")
    _report_failures(report)
    return 2 if report.failures else 0


def _suite_policies(config: BenchmarkConfig, grid_count: int) -> tuple[str, ...]:
    policies = [p.policy_id for p in static_grid(config, grid_count)]
    policies.append("random:0")
    return tuple(policies)


def cmd_suite(args: argparse.Namespace) -> int:
    registry.ensure_loaded()
    benchmarks = args.benchmark or list(registry.benchmark_ids())
    overrides = _parse_overrides(args.overrides)
    seeds = _parse_seeds(args.seeds)
    out_root = _output_root(args.output)
    worst = 0
    for benchmark_id in benchmarks:
        config = default_config(benchmark_id, dict(overrides))
        plan = ExperimentPlan(
            benchmark_config=config,
            policies=_suite_policies(config, args.grid_count),
            seeds=seeds,
            output_dir=str(out_root / benchmark_id),
            jobs=args.jobs,
        )
        report = run_suite(plan)
        assert report.run_dir is not None
        save_config(config, report.run_dir / "config.frozen.json")
        print(f"{benchmark_id}: run_id {report.run_id} -> {report.run_dir}")
        _report_failures(report)
        if report.failures:
            worst = 2
    return worst


def cmd_analyze(args: argparse.Namespace) -> int:
    registry.ensure_loaded()
    configs: list[BenchmarkConfig] = []
    for path in args.config:
        configs.append(load_config(path))
    for benchmark_id in args.benchmark:
        configs.append(default_config(benchmark_id))
    if not configs:
        configs = [default_config(b) for b in registry.benchmark_ids()]
    if args.full:
        seeds, repeats = analysis.FULL_SEEDS, analysis.FULL_REPEATS
    else:
        seeds, repeats = analysis.REDUCED_SEEDS, analysis.REDUCED_REPEATS
    out_dir = _output_root(args.output) / "analysis"
    profiles = []
    for config in configs:
        cache_path = out_dir / f"{config.benchmark_id}.profile.json"
        profile = None
        if cache_path.exists() and not args.refresh:
            profile = analysis.load_profile(cache_path, config)
        if profile is None:
            profile = analysis.compute_profile(config, seeds=seeds, repeats=repeats)
            analysis.save_profile(cache_path, profile, config)
        profiles.append(profile)
    radar = analysis.emit_radar(profiles)
    radar_path = out_dir / "radar.csv"
    radar_path.parent.mkdir(parents=True, exist_ok=True)
    radar_path.write_text(radar, encoding="utf-8")
    print(radar, end="")
    print(f"radar data written to {radar_path}", file=sys.stderr)
    return 0


def cmd_validate_config(args: argparse.Namespace) -> int:
    if args.config is None and args.instances is None:
        raise CtrlBenchError("pass --config FILE and/or --instances FILE")
    if args.config is not None:
        config = load_config(args.config)
        print(f"config OK: benchmark {config.benchmark_id}, "
              f"hash {config_hash(config)}")
    if args.instances is not None:
        if args.benchmark is None:
            raise CtrlBenchError("--instances requires --benchmark")
        instance_set = read_instances(args.instances, args.benchmark, args.split)
        print(f"instances OK: {len(instance_set)} {args.split} instances "
              f"for {args.benchmark}")
    return 0


_HANDLERS = {
    "list": cmd_list,
    "run": cmd_run,
    "suite": cmd_suite,
    "analyze": cmd_analyze,
    "validate-config": cmd_validate_config,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except CtrlBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
