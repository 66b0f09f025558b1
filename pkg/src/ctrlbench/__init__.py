"""ctrlbench: benchmarks for step-wise control of algorithm parameters.

Four self-contained benchmarks (sigmoid tracking, restart-sequence
prediction, step-size control of an evolution strategy, learning-rate
control of a small neural network) behind one episodic environment
protocol, plus a policy zoo, a seeded experiment runner with JSONL
traces, and a six-dimension difficulty analyzer.

Quick start::

    import ctrlbench

    config = ctrlbench.default_config("luby")
    env = ctrlbench.make_environment(config)
    policy = ctrlbench.make_policy("optimal", config)
    policy.bind(env)

    observation = env.reset()
    done, total = False, 0.0
    step = 0
    while not done:
        result = env.step(policy.act(observation, step))
        observation, done = result.observation, result.done
        total += result.reward
        step += 1
"""

from __future__ import annotations

from . import registry as _registry
from .analysis import (
    DifficultyProfile,
    compute_profile,
    dynamicity_score,
    emit_radar,
    heterogeneity_score,
    noise_score,
    space_categories,
)
from .config import (
    BenchmarkConfig,
    InstanceSource,
    config_from_json_dict,
    config_hash,
    default_config,
    load_config,
    save_config,
)
from .environment import Environment, StepResult, make_environment
from .errors import (
    ActionError,
    CellExecutionError,
    ConfigError,
    CtrlBenchError,
    IncompleteGridError,
    IntegrityError,
    ParseError,
    StaleCacheError,
    StateError,
)
from .instances import (
    InstanceSet,
    generate_instance_set,
    read_instances,
    resolve_instance_set,
    write_instances,
)
from .policies import (
    Policy,
    RandomPolicy,
    RepeatRandomPolicy,
    StaticPolicy,
    make_policy,
    parse_policy,
    static_grid,
)
from .runner import (
    ExperimentPlan,
    SuiteReport,
    estimate_return,
    run_cell,
    run_episode,
    run_suite,
)
from .spaces import SpaceSpec, continuous, discrete, multi_discrete
from .traces import (
    EpisodeSummary,
    StepLogRecord,
    TraceLogger,
    derive_episode_summaries,
    reload_trace,
    to_plot_data,
)

__version__ = "0.1.0"

_registry.ensure_loaded()


def benchmark_ids() -> tuple[str, ...]:
    """Identifiers of the built-in benchmarks."""
    return _registry.benchmark_ids()


__all__ = [
    "__version__",
    "benchmark_ids",
    # config
    "BenchmarkConfig",
    "InstanceSource",
    "config_from_json_dict",
    "config_hash",
    "default_config",
    "load_config",
    "save_config",
    # environment
    "Environment",
    "StepResult",
    "make_environment",
    # errors
    "ActionError",
    "CellExecutionError",
    "ConfigError",
    "CtrlBenchError",
    "IncompleteGridError",
    "IntegrityError",
    "ParseError",
    "StaleCacheError",
    "StateError",
    # instances
    "InstanceSet",
    "generate_instance_set",
    "read_instances",
    "resolve_instance_set",
    "write_instances",
    # policies
    "Policy",
    "RandomPolicy",
    "RepeatRandomPolicy",
    "StaticPolicy",
    "make_policy",
    "parse_policy",
    "static_grid",
    # runner
    "ExperimentPlan",
    "SuiteReport",
    "estimate_return",
    "run_cell",
    "run_episode",
    "run_suite",
    # spaces
    "SpaceSpec",
    "continuous",
    "discrete",
    "multi_discrete",
    # traces
    "EpisodeSummary",
    "StepLogRecord",
    "TraceLogger",
    "derive_episode_summaries",
    "reload_trace",
    "to_plot_data",
    # analysis
    "DifficultyProfile",
    "compute_profile",
    "dynamicity_score",
    "emit_radar",
    "heterogeneity_score",
    "noise_score",
    "space_categories",
]
