"""Trace records: JSONL fidelity, strict reload, summaries, plot exports."""
from __future__ import annotations

import json
import math

import pytest

from ctrlbench.errors import ConfigError, IntegrityError, ParseError
from ctrlbench.traces import (
    PLOT_KINDS,
    EpisodeSummary,
    StepLogRecord,
    TraceLogger,
    derive_episode_summaries,
    iter_run_traces,
    merge_traces,
    record_from_json_dict,
    reload_trace,
    to_plot_data,
)


def make_record(**overrides) -> StepLogRecord:
    data = dict(
        run_id="abc123",
        benchmark="luby",
        config_hash="f" * 64,
        policy_id="random:0",
        seed=3,
        instance_id="luby_train_001",
        episode=0,
        step=0,
        action=2,
        reward=-1.0,
        observation=None,
        wall_time_ns=1500,
    )
    data.update(overrides)
    return StepLogRecord(**data)


def test_round_trip_preserves_floats_bit_for_bit(tmp_path) -> None:
    records = [
        make_record(action=0.1, reward=0.1 + 0.2, observation=(1.5, -2.25, 1e-17)),
        make_record(step=1, action=(7, 1), reward=-1.0 / 3.0),
        make_record(step=2, action=3, reward=0.0),
    ]
    path = tmp_path / "trace.jsonl"
    with TraceLogger(path) as logger:
        for record in records:
            logger.append(record)
        logger.end_episode()
    assert reload_trace(path) == records


def test_json_line_key_order_and_compactness() -> None:
    with_obs = make_record(observation=(0.5,)).to_json_line()
    pairs = json.loads(with_obs, object_pairs_hook=lambda p: [k for k, _ in p])
    assert pairs == [
        "run_id", "benchmark", "config_hash", "policy_id", "seed",
        "instance_id", "episode", "step", "action", "reward",
        "observation", "wall_time_ns",
    ]
    without_obs = make_record().to_json_line()
    pairs = json.loads(without_obs, object_pairs_hook=lambda p: [k for k, _ in p])
    assert pairs[-1] == "wall_time_ns"
    assert "observation" not in pairs
    assert ": " not in without_obs and ", " not in without_obs


def test_action_encoding_forms() -> None:
    assert json.loads(make_record(action=3).to_json_line())["action"] == 3
    assert json.loads(make_record(action=0.5).to_json_line())["action"] == 0.5
    assert json.loads(make_record(action=(1, 2)).to_json_line())["action"] == [1, 2]
    with pytest.raises(ConfigError, match="boolean"):
        make_record(action=True).to_json_line()
    # tuples decode back to tuples
    line = make_record(action=(1, 2)).to_json_line()
    assert record_from_json_dict(json.loads(line)).action == (1, 2)


def test_strict_decode_rejects_missing_and_unknown_keys() -> None:
    data = json.loads(make_record().to_json_line())
    short = dict(data)
    del short["reward"]
    with pytest.raises(ParseError, match=r"missing keys \['reward'\]") as exc_info:
        record_from_json_dict(short, path="trace.jsonl", line=4)
    assert "trace.jsonl:4" in str(exc_info.value)
    extra = dict(data)
    extra["mystery"] = 1
    with pytest.raises(ParseError, match=r"unknown keys \['mystery'\]"):
        record_from_json_dict(extra, path="trace.jsonl", line=9)


def test_logger_buffers_until_episode_end(tmp_path) -> None:
    path = tmp_path / "deep" / "nested" / "trace.jsonl"
    logger = TraceLogger(path)
    logger.append(make_record())
    assert path.read_text() == ""  # buffered
    logger.end_episode()
    assert len(path.read_text().splitlines()) == 1
    logger.append(make_record(step=1))
    logger.close()  # flushes the tail
    assert len(path.read_text().splitlines()) == 2
    with pytest.raises(ConfigError, match="closed"):
        logger.append(make_record(step=2))
    with pytest.raises(ConfigError, match="closed"):
        logger.end_episode()
    logger.close()  # idempotent


def test_reload_errors(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        reload_trace(tmp_path / "nope.jsonl")

    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert reload_trace(empty) == []

    blanks = tmp_path / "blanks.jsonl"
    line = make_record().to_json_line()
    blanks.write_text(f"\n{line}\n   \n{make_record(step=1).to_json_line()}\n\n")
    assert len(reload_trace(blanks)) == 2

    malformed = tmp_path / "malformed.jsonl"
    malformed.write_text(f"{line}\n{{not json\n")
    with pytest.raises(ParseError, match="malformed JSON") as exc_info:
        reload_trace(malformed)
    assert exc_info.value.line == 2

    non_object = tmp_path / "array.jsonl"
    non_object.write_text("[1,2,3]\n")
    with pytest.raises(ParseError, match="not a JSON object"):
        reload_trace(non_object)

    duplicate = tmp_path / "dup.jsonl"
    other = make_record(step=1).to_json_line()
    duplicate.write_text(f"{line}\n{other}\n{line}\n")
    with pytest.raises(IntegrityError, match="duplicate record") as exc_info:
        reload_trace(duplicate)
    assert "line 3" in str(exc_info.value)


def test_summaries_use_exact_summation() -> None:
    rewards = [1e16, 1.0, -1e16]
    records = [
        make_record(step=i, reward=r, wall_time_ns=10 * (i + 1))
        for i, r in enumerate(rewards)
    ]
    (summary,) = derive_episode_summaries(records)
    assert summary.cumulative_reward == 1.0  # naive left-to-right sum gives 0.0
    assert sum(rewards) == 0.0
    assert summary.steps_taken == 3
    assert summary.wall_time_ns == 60
    assert summary.key() == ("random:0", 3, "luby_train_001", 0)


def test_summaries_group_by_episode_coordinates() -> None:
    records = [
        make_record(instance_id=instance, episode=episode, step=step, reward=1.0)
        for instance in ("a", "b")
        for episode in (0, 1)
        for step in (0, 1, 2)
    ]
    summaries = derive_episode_summaries(records)
    assert len(summaries) == 4
    assert {s.key() for s in summaries} == {
        ("random:0", 3, instance, episode)
        for instance in ("a", "b") for episode in (0, 1)
    }
    assert all(s.cumulative_reward == 3.0 and s.steps_taken == 3 for s in summaries)


def test_plot_data_policy_performance() -> None:
    records = [
        make_record(policy_id="A", seed=0, step=0, reward=1.0),
        make_record(policy_id="A", seed=0, episode=1, step=0, reward=3.0),
        make_record(policy_id="A", seed=1, step=0, reward=4.0),
    ]
    half = 1.96 * 1.0 / math.sqrt(2)
    expected = (
        "policy,seeds,mean,std,ci95_low,ci95_high\n"
        f"A,2,3.0,1.0,{(3.0 - half)!r},{(3.0 + half)!r}\n"
    )
    assert to_plot_data(records, "policy_performance") == expected


def test_plot_data_per_instance_and_trajectory() -> None:
    records = [
        make_record(instance_id="i1", episode=0, step=0, reward=1.0),
        make_record(instance_id="i1", episode=1, step=0, reward=3.0),
        make_record(instance_id="i2", episode=0, step=0, reward=5.0),
    ]
    per_instance = to_plot_data(records, "per_instance")
    assert per_instance == (
        "instance_id,episodes,mean_cum_reward\ni1,2,2.0\ni2,1,5.0\n"
    )

    mixed = [
        make_record(step=0, action=3),
        make_record(step=1, action=0.5),
        make_record(step=2, action=(1, 2)),
    ]
    trajectory = to_plot_data(mixed, "action_trajectory")
    lines = trajectory.splitlines()
    assert lines[0] == "policy,seed,instance_id,episode,step,action"
    assert lines[1].endswith(",0,3")
    assert lines[2].endswith(",1,0.5")
    assert lines[3].endswith(',2,"1,2"')

    with pytest.raises(ConfigError, match="unknown plot kind"):
        to_plot_data(records, "histogram")
    with pytest.raises(ConfigError, match="no records"):
        to_plot_data([], "per_instance")
    assert PLOT_KINDS == ("policy_performance", "per_instance", "action_trajectory")


def test_merge_traces_cross_file_integrity(tmp_path) -> None:
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    record = make_record()
    a.write_text(record.to_json_line() + "\n")
    # same coordinates under a different policy id is fine
    b.write_text(make_record(policy_id="static:1").to_json_line() + "\n")
    merged = merge_traces([a, b])
    assert len(merged) == 2

    c = tmp_path / "c.jsonl"
    c.write_text(record.to_json_line() + "\n")
    with pytest.raises(IntegrityError, match="across traces"):
        merge_traces([a, c])


def test_iter_run_traces_sorted(tmp_path) -> None:
    (tmp_path / "b.jsonl").write_text("")
    (tmp_path / "a.jsonl").write_text("")
    (tmp_path / "notes.txt").write_text("")
    names = [p.name for p in iter_run_traces(tmp_path)]
    assert names == ["a.jsonl", "b.jsonl"]


def test_episode_summary_defaults() -> None:
    summary = EpisodeSummary(
        policy_id="p", seed=0, instance_id="i", episode=0,
        cumulative_reward=1.5, steps_taken=2,
    )
    assert summary.wall_time_ns == 0
