"""Instance sets: generation, split independence, CSV round-trips, errors."""
from __future__ import annotations

from pathlib import Path

import pytest

from ctrlbench import registry
from ctrlbench.config import default_config
from ctrlbench.errors import ConfigError, ParseError
from ctrlbench.instances import (
    DEFAULT_INSTANCES_PER_SPLIT,
    InstanceSet,
    fmt_float,
    generate_instance_set,
    read_instances,
    resolve_instance_set,
    write_instances,
)

registry.ensure_loaded()

ALL_BENCHMARKS = ("cmaes", "luby", "sgd", "sigmoid")


def test_default_sets_have_100_instances_per_split() -> None:
    assert DEFAULT_INSTANCES_PER_SPLIT == 100
    for benchmark_id in ALL_BENCHMARKS:
        config = default_config(benchmark_id)
        for split in ("train", "test"):
            assert len(generate_instance_set(config, split)) == 100


def test_generation_is_deterministic_per_seed() -> None:
    config = default_config("sigmoid")
    a = generate_instance_set(config, "train")
    b = generate_instance_set(config, "train")
    assert a.instances == b.instances
    other_seed = generate_instance_set(default_config("sigmoid", {"seed": 1}), "train")
    assert a.instances != other_seed.instances


def test_train_and_test_splits_are_disjoint() -> None:
    for benchmark_id in ALL_BENCHMARKS:
        config = default_config(benchmark_id)
        train = generate_instance_set(config, "train")
        test = generate_instance_set(config, "test")
        assert set(train.instance_ids).isdisjoint(test.instance_ids)
        assert train.instances != test.instances


def test_instance_ids_are_unique() -> None:
    for benchmark_id in ALL_BENCHMARKS:
        config = default_config(benchmark_id)
        ids = generate_instance_set(config, "train").instance_ids
        assert len(set(ids)) == len(ids)


def test_instance_count_override() -> None:
    config = default_config("luby", {"benchmark_params": {"instance_count": 7}})
    assert len(generate_instance_set(config, "train")) == 7


def test_csv_round_trip_is_exact(tmp_path: Path) -> None:
    for benchmark_id in ALL_BENCHMARKS:
        config = default_config(benchmark_id)
        for split in ("train", "test"):
            original = generate_instance_set(config, split)
            path = tmp_path / f"{benchmark_id}_{split}.csv"
            write_instances(path, original)
            reloaded = read_instances(path, benchmark_id, split)
            assert reloaded == original


def test_csv_write_is_byte_stable(tmp_path: Path) -> None:
    original = generate_instance_set(default_config("cmaes"), "train")
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    write_instances(a, original)
    write_instances(b, original)
    assert a.read_bytes() == b.read_bytes()


def test_fmt_float_round_trips_exactly() -> None:
    for value in (0.1, -3.75, 1e-17, 123456.789012345, 2.0**-40):
        assert float(fmt_float(value)) == value


def test_read_missing_file() -> None:
    with pytest.raises(FileNotFoundError, match="missing.csv"):
        read_instances("missing.csv", "luby", "train")


def test_read_empty_file_reports_line_1(tmp_path: Path) -> None:
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ParseError) as excinfo:
        read_instances(path, "luby", "train")
    assert excinfo.value.line == 1


def test_read_header_only_file_is_an_error(tmp_path: Path) -> None:
    path = tmp_path / "header.csv"
    path.write_text("instance_id,start_shift,noise_scale\n", encoding="utf-8")
    with pytest.raises(ParseError, match="no instances"):
        read_instances(path, "luby", "train")


def test_malformed_cell_reports_its_line(tmp_path: Path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text(
        "instance_id,start_shift,noise_scale\n"
        "luby_train_000,3,0.0\n"
        "luby_train_001,pear,0.0\n",
        encoding="utf-8",
    )
    with pytest.raises(ParseError) as excinfo:
        read_instances(path, "luby", "train")
    assert excinfo.value.line == 3
    assert "start_shift" in str(excinfo.value)
    assert "bad.csv:3" in str(excinfo.value)


def test_wrong_cell_count_reports_its_line(tmp_path: Path) -> None:
    path = tmp_path / "short.csv"
    path.write_text(
        "instance_id,start_shift,noise_scale\nluby_train_000,3\n", encoding="utf-8"
    )
    with pytest.raises(ParseError) as excinfo:
        read_instances(path, "luby", "train")
    assert excinfo.value.line == 2


def test_duplicate_header_columns_rejected(tmp_path: Path) -> None:
    path = tmp_path / "dup.csv"
    path.write_text("instance_id,start_shift,start_shift\n", encoding="utf-8")
    with pytest.raises(ParseError, match="duplicate column"):
        read_instances(path, "luby", "train")


def test_instance_set_validation() -> None:
    with pytest.raises(ConfigError):
        InstanceSet(benchmark_id="luby", split="validation", instances=(object(),))
    with pytest.raises(ConfigError):
        InstanceSet(benchmark_id="luby", split="train", instances=())


def test_resolve_instance_set_both_kinds(tmp_path: Path) -> None:
    config = default_config("luby", {"benchmark_params": {"instance_count": 5}})
    generated = resolve_instance_set(config)
    assert len(generated) == 5
    train = tmp_path / "train.csv"
    test = tmp_path / "test.csv"
    write_instances(train, generated)
    write_instances(test, generate_instance_set(config, "test"))
    file_config = config.with_overrides(
        {
            "instance_source": {
                "kind": "file",
                "split": "train",
                "train_path": str(train),
                "test_path": str(test),
            }
        }
    )
    from_file = resolve_instance_set(file_config)
    assert from_file.instances == generated.instances


def test_test_split_selection_changes_instances() -> None:
    config = default_config("sigmoid")
    test_config = config.with_overrides(
        {"instance_source": {"kind": "generator", "split": "test"}}
    )
    train_set = resolve_instance_set(config)
    test_set = resolve_instance_set(test_config)
    assert train_set.split == "train"
    assert test_set.split == "test"
    assert train_set.instances != test_set.instances
