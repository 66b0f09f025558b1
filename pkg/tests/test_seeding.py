"""Stream derivation: determinism, key hygiene, and seed validation."""
from __future__ import annotations

import zlib

import numpy as np
import pytest

from ctrlbench.errors import ConfigError
from ctrlbench.seeding import (
    MAX_SEED,
    SPLIT_TAGS,
    STREAM_DERIVED,
    STREAM_EPISODE,
    STREAM_INSTANCES,
    STREAM_POLICY,
    check_seed,
    key_of,
    sequence,
    stream,
)


def test_stream_is_deterministic() -> None:
    a = stream(7, STREAM_EPISODE, 1, 2, 3).uniform(size=8)
    b = stream(7, STREAM_EPISODE, 1, 2, 3).uniform(size=8)
    assert np.array_equal(a, b)


def test_different_tags_give_independent_streams() -> None:
    draws = {
        tag: tuple(stream(0, tag, 5).uniform(size=4))
        for tag in (STREAM_INSTANCES, STREAM_EPISODE, STREAM_DERIVED, STREAM_POLICY)
    }
    assert len(set(draws.values())) == 4


def test_stream_tags_are_distinct_constants() -> None:
    tags = {STREAM_INSTANCES, STREAM_EPISODE, STREAM_DERIVED, STREAM_POLICY}
    assert len(tags) == 4
    assert SPLIT_TAGS == {"train": 0, "test": 1}


def test_key_order_matters() -> None:
    a = stream(0, 1, 2).uniform()
    b = stream(0, 2, 1).uniform()
    assert a != b


def test_string_keys_hash_via_crc32() -> None:
    seq_str = sequence(3, "x0")
    seq_num = sequence(3, zlib.crc32(b"x0"))
    assert list(seq_str.entropy) == list(seq_num.entropy)


def test_key_of_rejects_bool_and_negative() -> None:
    with pytest.raises(ConfigError):
        key_of(True)
    with pytest.raises(ConfigError):
        key_of(-1)
    with pytest.raises(ConfigError):
        key_of(1.5)  # type: ignore[arg-type]
    assert key_of(0) == 0
    assert key_of("tag") == zlib.crc32(b"tag")


def test_check_seed_accepts_full_64_bit_range() -> None:
    assert check_seed(0) == 0
    assert check_seed(MAX_SEED) == MAX_SEED


def test_check_seed_rejects_bad_values() -> None:
    with pytest.raises(ConfigError):
        check_seed(-1)
    with pytest.raises(ConfigError):
        check_seed(MAX_SEED + 1)
    with pytest.raises(ConfigError):
        check_seed(True)
    with pytest.raises(ConfigError):
        check_seed(1.0)  # type: ignore[arg-type]
    with pytest.raises(ConfigError, match="run_seed"):
        check_seed("x", field="run_seed")  # type: ignore[arg-type]
