"""Learning-rate control benchmark on a small neural network.

The controller sets the learning rate of an Adam-driven multilayer
perceptron (64 inputs, two hidden layers of 16 ReLU units, 10 softmax
classes).  An action a in [0, 10] selects ``lr = 10**(-a)``; one control
step applies 10 mini-batch updates of batch size 64.  Reward is the
negated validation loss (mean negative log-likelihood over the
validation examples).  Everything is float64 and fully deterministic
given the instance seeds: identical configurations and action sequences
reproduce trajectories bit for bit.

Observation layout (dimension 7):
    [discounted mean of predictive-change variance,
     discounted uncertainty of predictive-change variance,
     discounted mean of loss variance,
     discounted uncertainty of loss variance,
     current learning rate, training loss, validation loss]
Both variance statistics are measured on a fixed probe batch -- the
first 64 validation examples, evaluated inside the per-step validation
pass -- so they are not confounded by mini-batch resampling.  The
discount factor is 0.9 and each uncertainty is the square root of the
discounted variance.  The training-loss slot holds the mean loss of the
last mini-batch before its update was applied; at reset it is evaluated
on the first 64 training examples.

The default dataset is synthetic: 10 Gaussian blobs in 64 dimensions,
1024 train and 256 validation examples generated from the instance
seeds.  An IDX-format loader is provided for externally supplied
datasets whose flattened image size matches the network input.

The environment trains through a private, fully preallocated workspace
whose arithmetic is bit-for-bit equivalent to the public
``forward_backward`` and ``adam_update`` operations; those public
functions remain the reference implementation.

Instance CSV columns: ``instance_id, dataset_id, train_seed, test_seed``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .. import registry
from ..config import FORMAT_VERSION, BenchmarkConfig, config_from_json_dict
from ..environment import Environment
from ..errors import ConfigError, ParseError
from ..instances import parse_int
from ..registry import BenchmarkDefinition, ParamSpec
from ..seeding import stream

INPUT_DIM = 64
HIDDEN = 16
CLASSES = 10
BATCH_SIZE = 64
UPDATES_PER_STEP = 10
DEFAULT_CUTOFF = 100
DISCOUNT = 0.9
PROBE_SIZE = 64
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

N_TRAIN = 1024
N_VAL = 256

# flat parameter layout: (name, shape, fan_in)
_LAYOUT = (
    ("W1", (INPUT_DIM, HIDDEN), INPUT_DIM),
    ("b1", (HIDDEN,), INPUT_DIM),
    ("W2", (HIDDEN, HIDDEN), HIDDEN),
    ("b2", (HIDDEN,), HIDDEN),
    ("W3", (HIDDEN, CLASSES), HIDDEN),
    ("b3", (CLASSES,), HIDDEN),
)
PARAM_COUNT = sum(int(np.prod(shape)) for _, shape, _ in _LAYOUT)


def _views(flat: np.ndarray) -> dict[str, np.ndarray]:
    views: dict[str, np.ndarray] = {}
    offset = 0
    for name, shape, _ in _LAYOUT:
        size = int(np.prod(shape))
        views[name] = flat[offset : offset + size].reshape(shape)
        offset += size
    return views


def init_parameters(rng: np.random.Generator) -> np.ndarray:
    """Uniform fan-in-scaled weight init, zero biases, as one flat vector."""
    flat = np.zeros(PARAM_COUNT)
    views = _views(flat)
    for name, shape, fan_in in _LAYOUT:
        if name.startswith("W"):
            bound = 1.0 / math.sqrt(fan_in)
            views[name][...] = rng.uniform(-bound, bound, shape)
    return flat


def forward_probs(flat: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Class probability vectors for a batch of inputs."""
    v = _views(flat)
    h1 = np.maximum(inputs @ v["W1"] + v["b1"], 0.0)
    h2 = np.maximum(h1 @ v["W2"] + v["b2"], 0.0)
    logits = h2 @ v["W3"] + v["b3"]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def example_losses(flat: np.ndarray, inputs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-example negative log-likelihoods."""
    v = _views(flat)
    h1 = np.maximum(inputs @ v["W1"] + v["b1"], 0.0)
    h2 = np.maximum(h1 @ v["W2"] + v["b2"], 0.0)
    logits = h2 @ v["W3"] + v["b3"]
    maxes = logits.max(axis=1)
    lse = np.log(np.exp(logits - maxes[:, None]).sum(axis=1)) + maxes
    return lse - logits[np.arange(len(labels)), labels]


def forward_backward(
    flat: np.ndarray, inputs: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-example losses and the exact gradient of the mean loss.

    The gradient is taken with respect to the flat parameter vector.
    Non-finite inputs or parameters raise ConfigError.
    """
    if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(flat))):
        raise ConfigError("non-finite inputs to forward_backward")
    v = _views(flat)
    batch = len(labels)
    a1 = inputs @ v["W1"] + v["b1"]
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ v["W2"] + v["b2"]
    h2 = np.maximum(a2, 0.0)
    logits = h2 @ v["W3"] + v["b3"]
    maxes = logits.max(axis=1, keepdims=True)
    shifted = logits - maxes
    exp = np.exp(shifted)
    sums = exp.sum(axis=1, keepdims=True)
    rows = np.arange(batch)
    losses = np.log(sums[:, 0]) - shifted[rows, labels]

    grad = np.zeros(PARAM_COUNT)
    g = _views(grad)
    dlogits = exp / sums
    dlogits[rows, labels] -= 1.0
    dlogits /= batch
    g["W3"][...] = h2.T @ dlogits
    g["b3"][...] = dlogits.sum(axis=0)
    dh2 = dlogits @ v["W3"].T
    dh2 *= a2 > 0.0
    g["W2"][...] = h1.T @ dh2
    g["b2"][...] = dh2.sum(axis=0)
    dh1 = dh2 @ v["W2"].T
    dh1 *= a1 > 0.0
    g["W1"][...] = inputs.T @ dh1
    g["b1"][...] = dh1.sum(axis=0)
    return losses, grad


def adam_update(
    flat: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray,
    step: int, lr: float,
) -> None:
    """In-place Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8)."""
    m *= ADAM_BETA1
    m += (1.0 - ADAM_BETA1) * grad
    v *= ADAM_BETA2
    v += (1.0 - ADAM_BETA2) * (grad * grad)
    m_hat = m / (1.0 - ADAM_BETA1**step)
    v_hat = v / (1.0 - ADAM_BETA2**step)
    flat -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


@dataclass(frozen=True)
class Dataset:
    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray

    @property
    def probe_x(self) -> np.ndarray:
        return self.val_x[:PROBE_SIZE]

    @property
    def probe_y(self) -> np.ndarray:
        return self.val_y[:PROBE_SIZE]


_DATASET_CACHE: dict[tuple[int, int], Dataset] = {}


def make_blob_dataset(train_seed: int, test_seed: int) -> Dataset:
    """Ten 64-d Gaussian blobs; geometry/train from train_seed, val from test_seed."""
    key = (train_seed, test_seed)
    cached = _DATASET_CACHE.get(key)
    if cached is not None:
        return cached
    train_rng = stream(train_seed, "sgd_data")
    centers = train_rng.normal(0.0, 1.0, (CLASSES, INPUT_DIM))
    train_y = train_rng.integers(CLASSES, size=N_TRAIN)
    train_x = centers[train_y] + train_rng.normal(0.0, 1.0, (N_TRAIN, INPUT_DIM))
    val_rng = stream(test_seed, "sgd_val")
    val_y = val_rng.integers(CLASSES, size=N_VAL)
    val_x = centers[val_y] + val_rng.normal(0.0, 1.0, (N_VAL, INPUT_DIM))
    dataset = Dataset(train_x=train_x, train_y=train_y, val_x=val_x, val_y=val_y)
    if len(_DATASET_CACHE) >= 256:
        _DATASET_CACHE.clear()
    _DATASET_CACHE[key] = dataset
    return dataset


def load_idx(path: str | Path) -> np.ndarray:
    """Read one IDX file (big-endian magic, dims, ubyte payload)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"IDX file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < 4:
        raise ParseError("truncated IDX header", path=str(path))
    zero1, zero2, dtype, ndim = struct.unpack(">BBBB", raw[:4])
    if zero1 != 0 or zero2 != 0:
        raise ParseError("bad IDX magic (first two bytes must be zero)", path=str(path))
    if dtype != 0x08:
        raise ParseError(f"unsupported IDX dtype 0x{dtype:02x} (only ubyte)", path=str(path))
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise ParseError("truncated IDX dimension header", path=str(path))
    dims = struct.unpack(f">{ndim}I", raw[4:header_end])
    expected = int(np.prod(dims))
    payload = np.frombuffer(raw, dtype=np.uint8, offset=header_end)
    if payload.size != expected:
        raise ParseError(
            f"IDX payload has {payload.size} bytes, header promises {expected}",
            path=str(path),
        )
    return payload.reshape(dims)


def load_idx_dataset(train_images: str, train_labels: str,
                     val_images: str, val_labels: str) -> Dataset:
    """Dataset from four IDX files; images are scaled to [0, 1] and flattened."""
    def prepare(images_path: str, labels_path: str) -> tuple[np.ndarray, np.ndarray]:
        images = load_idx(images_path)
        labels = load_idx(labels_path)
        if images.ndim < 2:
            raise ParseError("image file must have at least 2 dimensions", path=images_path)
        if labels.ndim != 1:
            raise ParseError("label file must be 1-dimensional", path=labels_path)
        if images.shape[0] != labels.shape[0]:
            raise ParseError(
                f"{images.shape[0]} images vs {labels.shape[0]} labels", path=images_path
            )
        flat = images.reshape(images.shape[0], -1).astype(float) / 255.0
        if flat.shape[1] != INPUT_DIM:
            raise ConfigError(
                f"flattened image size {flat.shape[1]} does not match the "
                f"network input dimension {INPUT_DIM}"
            )
        if labels.max(initial=0) >= CLASSES:
            raise ParseError(f"labels must be < {CLASSES}", path=labels_path)
        return flat, labels.astype(np.int64)

    train_x, train_y = prepare(train_images, train_labels)
    val_x, val_y = prepare(val_images, val_labels)
    return Dataset(train_x=train_x, train_y=train_y, val_x=val_x, val_y=val_y)


@dataclass(frozen=True)
class SgdInstance:
    """Dataset reference plus the two seeds that pin all training randomness."""

    instance_id: str
    dataset_id: str
    train_seed: int
    test_seed: int

    def __post_init__(self) -> None:
        if self.train_seed < 0 or self.test_seed < 0:
            raise ConfigError(f"instance {self.instance_id}: seeds must be >= 0")


class _Workspace:
    """Preallocated buffers for the environment's training loop.

    ``update`` mirrors forward_backward + adam_update operation for
    operation so its results are bit-for-bit identical; ``evaluate``
    mirrors example_losses over the validation set and reads the probe
    statistics out of the same pass.
    """

    def __init__(self, n_val: int) -> None:
        self.flat = np.zeros(PARAM_COUNT)
        self.grad = np.zeros(PARAM_COUNT)
        self.p = _views(self.flat)
        self.g = _views(self.grad)
        self.adam_m = np.zeros(PARAM_COUNT)
        self.adam_v = np.zeros(PARAM_COUNT)
        self.tmp1 = np.empty(PARAM_COUNT)
        self.tmp2 = np.empty(PARAM_COUNT)
        b = BATCH_SIZE
        self.x = np.empty((b, INPUT_DIM))
        self.y = np.empty(b, dtype=np.int64)
        self.row_base = np.arange(b) * CLASSES
        self.idx = np.empty(b, dtype=np.int64)
        self.a1 = np.empty((b, HIDDEN))
        self.a2 = np.empty((b, HIDDEN))
        self.logits = np.empty((b, CLASSES))
        self.maxes = np.empty(b)
        self.sums = np.empty(b)
        self.h1 = np.empty((b, HIDDEN))
        self.h2 = np.empty((b, HIDDEN))
        self.mask = np.empty((b, HIDDEN))
        self.v_h1 = np.empty((n_val, HIDDEN))
        self.v_h2 = np.empty((n_val, HIDDEN))
        self.v_logits = np.empty((n_val, CLASSES))
        self.v_maxes = np.empty(n_val)
        self.v_sums = np.empty(n_val)
        self.v_idx: np.ndarray | None = None  # row_base + val_y, set per dataset

    def reset_parameters(self, flat: np.ndarray) -> None:
        self.flat[...] = flat
        self.adam_m.fill(0.0)
        self.adam_v.fill(0.0)

    def update(self, train_x: np.ndarray, train_y: np.ndarray,
               batch: np.ndarray, lr: float, adam_step: int,
               want_loss: bool = True) -> float:
        """One mini-batch Adam update; returns the batch's mean loss.

        With ``want_loss=False`` the loss reduction is skipped (the
        parameter update is unaffected) and 0.0 is returned.
        """
        p, g = self.p, self.g
        np.take(train_x, batch, axis=0, out=self.x)
        np.take(train_y, batch, out=self.y)
        x = self.x
        np.add(self.row_base, self.y, out=self.idx)
        idx = self.idx
        a1, a2, logits = self.a1, self.a2, self.logits

        np.matmul(x, p["W1"], out=a1)
        a1 += p["b1"]
        np.maximum(a1, 0.0, out=self.h1)
        h1 = self.h1
        np.matmul(h1, p["W2"], out=a2)
        a2 += p["b2"]
        np.maximum(a2, 0.0, out=self.h2)
        h2 = self.h2
        np.matmul(h2, p["W3"], out=logits)
        logits += p["b3"]

        flat_logits = logits.reshape(-1)
        logits.max(axis=1, out=self.maxes)
        logits -= self.maxes[:, None]             # logits = shifted
        loss = 0.0
        if want_loss:
            true_shifted = flat_logits[idx]
            np.exp(logits, out=logits)            # logits = exp(shifted)
            logits.sum(axis=1, out=self.sums)
            loss = float(np.mean(np.log(self.sums) - true_shifted))
        else:
            np.exp(logits, out=logits)
            logits.sum(axis=1, out=self.sums)

        logits /= self.sums[:, None]              # logits = probabilities
        flat_logits[idx] -= 1.0
        logits /= BATCH_SIZE                      # logits = dlogits
        np.matmul(h2.T, logits, out=g["W3"])
        logits.sum(axis=0, out=g["b3"])
        np.matmul(logits, p["W3"].T, out=self.h2)  # h2 is dead, reuse as dh2
        dh2 = self.h2
        np.greater(a2, 0.0, out=self.mask)
        dh2 *= self.mask
        np.matmul(h1.T, dh2, out=g["W2"])
        dh2.sum(axis=0, out=g["b2"])
        np.matmul(dh2, p["W2"].T, out=self.h1)     # h1 is dead, reuse as dh1
        dh1 = self.h1
        np.greater(a1, 0.0, out=self.mask)
        dh1 *= self.mask
        np.matmul(x.T, dh1, out=g["W1"])
        dh1.sum(axis=0, out=g["b1"])

        # Adam, following adam_update's expression tree exactly
        m, v, grad = self.adam_m, self.adam_v, self.grad
        t1, t2 = self.tmp1, self.tmp2
        m *= ADAM_BETA1
        np.multiply(grad, 1.0 - ADAM_BETA1, out=t1)
        m += t1
        v *= ADAM_BETA2
        np.multiply(grad, grad, out=t1)
        t1 *= 1.0 - ADAM_BETA2
        v += t1
        np.divide(m, 1.0 - ADAM_BETA1**adam_step, out=t1)
        t1 *= lr
        np.divide(v, 1.0 - ADAM_BETA2**adam_step, out=t2)
        np.sqrt(t2, out=t2)
        t2 += ADAM_EPS
        t1 /= t2
        self.flat -= t1
        return loss

    def set_val_labels(self, val_y: np.ndarray) -> None:
        self.v_idx = np.arange(len(val_y)) * CLASSES + val_y

    def evaluate(self, val_x: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Validation pass: (mean loss, probe probabilities, probe losses).

        Requires set_val_labels.  The probe values are read from the
        first PROBE_SIZE rows of this same pass.  The per-example losses
        match example_losses on the full validation set bit for bit.
        """
        p = self.p
        np.matmul(val_x, p["W1"], out=self.v_h1)
        self.v_h1 += p["b1"]
        np.maximum(self.v_h1, 0.0, out=self.v_h1)
        np.matmul(self.v_h1, p["W2"], out=self.v_h2)
        self.v_h2 += p["b2"]
        np.maximum(self.v_h2, 0.0, out=self.v_h2)
        np.matmul(self.v_h2, p["W3"], out=self.v_logits)
        self.v_logits += p["b3"]

        logits = self.v_logits
        assert self.v_idx is not None
        true_logits = logits.reshape(-1)[self.v_idx]
        logits.max(axis=1, out=self.v_maxes)
        logits -= self.v_maxes[:, None]
        np.exp(logits, out=logits)
        logits.sum(axis=1, out=self.v_sums)
        lse = np.log(self.v_sums) + self.v_maxes
        losses = lse - true_logits
        probe_probs = logits[:PROBE_SIZE] / self.v_sums[:PROBE_SIZE, None]
        return float(losses.mean()), probe_probs, losses[:PROBE_SIZE]


class SgdEnv(Environment):
    """Learning-rate control of Adam on a fixed small network."""

    def __init__(self, config: BenchmarkConfig, instance_set=None) -> None:
        super().__init__(config, instance_set)
        if self.action_space.kind != "continuous" or self.action_space.dimension != 1:
            raise ConfigError("sgd requires a 1-d continuous action space",
                              field="action_space")
        self._dataset: Dataset | None = None
        self._work: _Workspace | None = None
        self._adam_t = 0
        self._order: np.ndarray | None = None
        self._order_pos = 0
        self._batch_rng: np.random.Generator | None = None
        self._prev_probe_probs: np.ndarray | None = None
        self._stats = np.zeros(4)  # pc_mean, pc_var, lv_mean, lv_var
        self._lr = 0.0
        self._train_loss = 0.0
        self._val_loss = 0.0

    def _dataset_for(self, instance: SgdInstance) -> Dataset:
        if instance.dataset_id == "synthetic_blobs":
            return make_blob_dataset(instance.train_seed, instance.test_seed)
        if instance.dataset_id == "idx":
            params = self.config.benchmark_params
            paths = [params.get(k) for k in
                     ("train_images", "train_labels", "val_images", "val_labels")]
            if any(p is None for p in paths):
                raise ConfigError(
                    "dataset_id 'idx' requires benchmark_params train_images, "
                    "train_labels, val_images, val_labels",
                    field="benchmark_params",
                )
            return load_idx_dataset(*paths)
        raise ConfigError(
            f"unknown dataset_id {instance.dataset_id!r} "
            "(expected 'synthetic_blobs' or 'idx')"
        )

    def _begin_episode(self, instance: SgdInstance, rng: np.random.Generator) -> np.ndarray:
        dataset = self._dataset_for(instance)
        self._dataset = dataset
        if self._work is None or self._work.v_logits.shape[0] != len(dataset.val_y):
            self._work = _Workspace(len(dataset.val_y))
        work = self._work
        work.set_val_labels(dataset.val_y)
        work.reset_parameters(init_parameters(stream(instance.train_seed, "sgd_init")))
        self._adam_t = 0
        self._batch_rng = stream(instance.train_seed, "sgd_batches")
        self._order = self._batch_rng.permutation(len(dataset.train_y))
        self._order_pos = 0
        val_loss, probe_probs, _ = work.evaluate(dataset.val_x)
        self._prev_probe_probs = probe_probs
        self._stats = np.zeros(4)
        self._lr = 0.0
        self._train_loss = float(
            example_losses(work.flat, dataset.train_x[:PROBE_SIZE],
                           dataset.train_y[:PROBE_SIZE]).mean()
        )
        self._val_loss = val_loss
        return self._observation()

    def _next_batch(self) -> np.ndarray:
        assert self._order is not None and self._batch_rng is not None
        if self._order_pos + BATCH_SIZE > len(self._order):
            self._order = self._batch_rng.permutation(len(self._order))
            self._order_pos = 0
        batch = self._order[self._order_pos : self._order_pos + BATCH_SIZE]
        self._order_pos += BATCH_SIZE
        return batch

    def _transition(
        self, action: Any, rng: np.random.Generator
    ) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        assert self._dataset is not None and self._work is not None
        lr = 10.0 ** (-float(action))
        dataset = self._dataset
        work = self._work
        loss = self._train_loss
        for k in range(UPDATES_PER_STEP):
            batch = self._next_batch()
            self._adam_t += 1
            loss = work.update(dataset.train_x, dataset.train_y, batch, lr,
                               self._adam_t, want_loss=k == UPDATES_PER_STEP - 1)
        self._lr = lr
        self._train_loss = loss
        val_loss, probe_probs, probe_losses = work.evaluate(dataset.val_x)
        self._val_loss = val_loss

        assert self._prev_probe_probs is not None
        delta = probe_probs - self._prev_probe_probs
        change = np.sqrt((delta * delta).sum(axis=1))
        self._prev_probe_probs = probe_probs
        self._update_stat(0, float(change.var()))
        self._update_stat(2, float(probe_losses.var()))

        info = {"learning_rate": lr}
        return self._observation(), -val_loss, False, info

    def _update_stat(self, base: int, value: float) -> None:
        # discounted mean and discounted variance (uncertainty = its sqrt)
        mean = DISCOUNT * self._stats[base] + (1.0 - DISCOUNT) * value
        var = DISCOUNT * self._stats[base + 1] + (1.0 - DISCOUNT) * (value - mean) ** 2
        self._stats[base] = mean
        self._stats[base + 1] = var

    def _observation(self) -> np.ndarray:
        obs = np.empty(7)
        obs[0] = self._stats[0]
        obs[1] = math.sqrt(self._stats[1])
        obs[2] = self._stats[2]
        obs[3] = math.sqrt(self._stats[3])
        obs[4] = self._lr
        obs[5] = self._train_loss
        obs[6] = self._val_loss
        return obs


# seed pools: the train split draws train/test seeds from [0, 2^30) and
# [2^30, 2^31); the test split from [2^31, 2^31 + 2^30) and up - disjoint
# by construction.
_POOL = 2**30


class SgdCodec:
    """CSV codec and generator for sgd instances."""

    COLUMNS = ["instance_id", "dataset_id", "train_seed", "test_seed"]

    def columns(self, instances) -> list[str]:
        return list(self.COLUMNS)

    def encode_row(self, instance: SgdInstance, columns: list[str]) -> list[str]:
        return [
            instance.instance_id, instance.dataset_id,
            str(instance.train_seed), str(instance.test_seed),
        ]

    def decode_row(self, row: dict[str, str], *, line: int, path: str) -> SgdInstance:
        for column in self.COLUMNS:
            if column not in row:
                raise ParseError(f"missing column {column!r}", path=path, line=1)
        return SgdInstance(
            instance_id=row["instance_id"],
            dataset_id=row["dataset_id"],
            train_seed=parse_int(row["train_seed"], column="train_seed", line=line, path=path),
            test_seed=parse_int(row["test_seed"], column="test_seed", line=line, path=path),
        )

    def generate(self, rng: np.random.Generator, index: int, split: str,
                 params: dict[str, Any]) -> SgdInstance:
        offset = 0 if split == "train" else 2 * _POOL
        train_seed = int(rng.integers(0, _POOL)) + offset
        test_seed = int(rng.integers(0, _POOL)) + offset + _POOL
        return SgdInstance(
            instance_id=f"sgd_{split}_{index:03d}",
            dataset_id=str(params.get("dataset_id", "synthetic_blobs")),
            train_seed=train_seed,
            test_seed=test_seed,
        )


def _make_default_config(overrides: dict[str, Any]) -> BenchmarkConfig:
    params = dict(overrides.pop("benchmark_params", {}) or {})
    inf = float("inf")
    obs_bounds = [
        [0.0, inf], [0.0, inf], [0.0, inf], [0.0, inf],
        [0.0, 1.0], [0.0, inf], [0.0, inf],
    ]
    data = {
        "format_version": FORMAT_VERSION,
        "benchmark_id": "sgd",
        "seed": 0,
        "episode_cutoff": DEFAULT_CUTOFF,
        "reward_quality": 2,
        "action_space": {"kind": "continuous", "bounds": [[0.0, 10.0]]},
        "observation_space": {"kind": "continuous", "bounds": obs_bounds},
        "instance_source": {"kind": "generator", "split": "train"},
        "benchmark_params": params,
    }
    data.update(overrides)
    return config_from_json_dict(data)


def _validate_config(config: BenchmarkConfig) -> None:
    if config.observation_space.dimension != 7:
        raise ConfigError("sgd observations have dimension 7", field="observation_space")


_PARAM_SCHEMA = {
    "dataset_id": ParamSpec(type=str, default="synthetic_blobs",
                            check=lambda v: v in ("synthetic_blobs", "idx")),
    "train_images": ParamSpec(type=(str, type(None)), default=None),
    "train_labels": ParamSpec(type=(str, type(None)), default=None),
    "val_images": ParamSpec(type=(str, type(None)), default=None),
    "val_labels": ParamSpec(type=(str, type(None)), default=None),
    "instance_count": ParamSpec(type=int, default=100, check=lambda v: v >= 1),
}

registry.register(
    BenchmarkDefinition(
        benchmark_id="sgd",
        make_default_config=_make_default_config,
        env_class=SgdEnv,
        codec=SgdCodec(),
        param_schema=_PARAM_SCHEMA,
        deterministic=True,
        default_reward_quality=2,
        validate_config=_validate_config,
    )
)
