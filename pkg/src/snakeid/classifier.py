"""Linear classifier on embedding vectors: NLL loss, Adam, deterministic split.

All arithmetic is float64 numpy; given the same config, seed and data the
final parameters are bit-identical across runs. The model file format (magic
SLM1) stores float32, matching the embedding stores.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .embedstore import VectorStore
from .errors import (
    DimensionError,
    EmptyTrainingSet,
    FormatError,
    LabelRangeError,
    MissingFeature,
    NumericalError,
    TruncatedFile,
)
from .manifest import ClassIndexMap, Manifest

MODEL_MAGIC = b"SLM1"
_MODEL_HEADER = struct.Struct("<4sII")

FEATURE_KINDS = ("cls", "dct")


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Class weights W (K x D) and bias b (K)."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
            raise DimensionError(f"inconsistent parameter shapes W={W.shape} b={b.shape}")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise NumericalError("non-finite model parameters")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def num_classes(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True, eq=False)
class AdamState:
    """First/second moment accumulators and step count for W and b."""

    m_W: np.ndarray
    v_W: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initial(cls, model: LinearModel, lr: float = 1e-3) -> "AdamState":
        return cls(
            m_W=np.zeros_like(model.W),
            v_W=np.zeros_like(model.W),
            m_b=np.zeros_like(model.b),
            v_b=np.zeros_like(model.b),
            lr=lr,
        )


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    batch_size: int = 64
    epochs: int = 20
    lr: float = 1e-3
    val_fraction: float = 0.2
    feature_kind: str = "cls"

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.feature_kind not in FEATURE_KINDS:
            raise ValueError(f"feature_kind must be one of {FEATURE_KINDS}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float | None
    val_accuracy: float | None


def forward(model: LinearModel, x) -> np.ndarray:
    """logits = W x + b for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise DimensionError(f"input shape {x.shape} does not match model dim {model.dim}")
    return model.W @ x + model.b


def forward_batch(model: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise DimensionError(f"batch shape {X.shape} does not match model dim {model.dim}")
    return X @ model.W.T + model.b


def log_softmax(logits) -> np.ndarray:
    """Max-shifted log-softmax along the last axis; exp of the result sums to 1."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise NumericalError("non-finite logits")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def nll_loss(logprobs, targets) -> float:
    """Mean negative log-likelihood of the target class per row."""
    lp = np.asarray(logprobs, dtype=np.float64)
    t = np.asarray(targets, dtype=np.int64)
    if lp.ndim != 2 or t.ndim != 1 or lp.shape[0] != t.shape[0]:
        raise DimensionError(f"logprobs {lp.shape} incompatible with targets {t.shape}")
    if lp.shape[0] == 0:
        raise DimensionError("empty batch")
    k = lp.shape[1]
    if t.size and (t.min() < 0 or t.max() >= k):
        bad = t[(t < 0) | (t >= k)][0]
        raise LabelRangeError(f"target {bad} outside 0..{k - 1}")
    return float(-np.mean(lp[np.arange(len(t)), t]))


def gradients(model: LinearModel, X, targets) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of mean NLL(log_softmax(forward)) wrt W and b.

    With p = softmax(logits): dlogits_i = (p_i - onehot(t_i)) / B,
    dW = sum_i dlogits_i outer x_i, db = sum_i dlogits_i.
    """
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(targets, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != t.shape[0]:
        raise DimensionError(f"batch {X.shape} incompatible with targets {t.shape}")
    logits = forward_batch(model, X)
    k = model.num_classes
    if t.size and (t.min() < 0 or t.max() >= k):
        bad = t[(t < 0) | (t >= k)][0]
        raise LabelRangeError(f"target {bad} outside 0..{k - 1}")
    p = np.exp(log_softmax(logits))
    p[np.arange(len(t)), t] -= 1.0
    p /= len(t)
    return p.T @ X, p.sum(axis=0)


def adam_step(
    model: LinearModel, state: AdamState, grads: tuple[np.ndarray, np.ndarray]
) -> tuple[LinearModel, AdamState]:
    """One bias-corrected Adam update; returns the new model and state."""
    dW, db = grads
    if dW.shape != model.W.shape or db.shape != model.b.shape:
        raise DimensionError(f"gradient shapes {dW.shape}/{db.shape} do not match model")
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    m_W = b1 * state.m_W + (1 - b1) * dW
    v_W = b2 * state.v_W + (1 - b2) * dW**2
    m_b = b1 * state.m_b + (1 - b1) * db
    v_b = b2 * state.v_b + (1 - b2) * db**2
    mhat_W = m_W / (1 - b1**t)
    vhat_W = v_W / (1 - b2**t)
    mhat_b = m_b / (1 - b1**t)
    vhat_b = v_b / (1 - b2**t)
    new_model = LinearModel(
        W=model.W - state.lr * mhat_W / (np.sqrt(vhat_W) + state.eps),
        b=model.b - state.lr * mhat_b / (np.sqrt(vhat_b) + state.eps),
    )
    new_state = replace(state, m_W=m_W, v_W=v_W, m_b=m_b, v_b=v_b, t=t)
    return new_model, new_state


def split_train_val(
    manifest: Manifest, val_fraction: float, seed: int
) -> tuple[frozenset[int], frozenset[int]]:
    """Partition train-split observation ids into train/val sides.

    Observation-level so images of one animal never straddle the split;
    |val| = round(val_fraction * #observations). Deterministic given seed.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    obs = sorted({r.observation_id for r in manifest.rows if r.split == "train"})
    if not obs:
        raise EmptyTrainingSet("manifest has no train rows")
    n_val = int(round(val_fraction * len(obs)))
    if n_val >= len(obs):
        raise EmptyTrainingSet(
            f"val_fraction {val_fraction} leaves no training observations"
        )
    order = np.random.default_rng(seed).permutation(len(obs))
    val = frozenset(obs[i] for i in order[:n_val])
    train = frozenset(obs[i] for i in order[n_val:])
    return train, val


def init_model(dim: int, num_classes: int, rng: np.random.Generator) -> LinearModel:
    """Uniform(-1/sqrt(D), 1/sqrt(D)) initialization from the given generator."""
    scale = 1.0 / np.sqrt(dim)
    W = rng.uniform(-scale, scale, size=(num_classes, dim))
    b = rng.uniform(-scale, scale, size=num_classes)
    return LinearModel(W, b)


def _gather_features(
    features: VectorStore, rows, cmap: ClassIndexMap
) -> tuple[np.ndarray, np.ndarray]:
    X = np.empty((len(rows), features.dim), dtype=np.float64)
    y = np.empty(len(rows), dtype=np.int64)
    for i, r in enumerate(rows):
        if r.image_id not in features:
            raise MissingFeature(f"no feature vector for image_id {r.image_id}")
        X[i] = features.vector_for(r.image_id)
        y[i] = cmap.to_index(r.class_id)
    return X, y


def _evaluate(model: LinearModel, X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    logits = forward_batch(model, X)
    lp = log_softmax(logits)
    loss = nll_loss(lp, y)
    acc = float(np.mean(np.argmax(logits, axis=1) == y))
    return loss, acc


def train(
    features: VectorStore,
    manifest: Manifest,
    cmap: ClassIndexMap,
    config: TrainConfig,
) -> tuple[LinearModel, list[EpochStats]]:
    """Shuffled minibatch Adam on NLL over the manifest's train split.

    Returns the final-epoch model (no early stopping) and the per-epoch
    history. Fully deterministic given config.seed, the data and the map.
    """
    train_obs, val_obs = split_train_val(manifest, config.val_fraction, config.seed)
    train_rows = [r for r in manifest.rows if r.observation_id in train_obs]
    val_rows = [r for r in manifest.rows if r.observation_id in val_obs]
    X_tr, y_tr = _gather_features(features, train_rows, cmap)
    X_val, y_val = _gather_features(features, val_rows, cmap)

    rng = np.random.default_rng(config.seed)
    model = init_model(features.dim, cmap.num_classes, rng)
    state = AdamState.initial(model, lr=config.lr)

    history: list[EpochStats] = []
    n = len(X_tr)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = gradients(model, X_tr[batch], y_tr[batch])
            model, state = adam_step(model, state, grads)
        train_loss, train_acc = _evaluate(model, X_tr, y_tr)
        if len(X_val):
            val_loss, val_acc = _evaluate(model, X_val, y_val)
        else:
            val_loss, val_acc = None, None
        history.append(EpochStats(epoch, train_loss, train_acc, val_loss, val_acc))
    return model, history


def write_model(model: LinearModel) -> bytes:
    header = _MODEL_HEADER.pack(MODEL_MAGIC, model.num_classes, model.dim)
    w = model.W.astype("<f4").tobytes()
    b = model.b.astype("<f4").tobytes()
    return header + w + b


def read_model(data: bytes) -> LinearModel:
    if len(data) < _MODEL_HEADER.size:
        raise TruncatedFile(f"file too short for header: {len(data)} bytes")
    magic, k, d = _MODEL_HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    expected = _MODEL_HEADER.size + 4 * (k * d + k)
    if len(data) != expected:
        raise TruncatedFile(f"K={k} D={d} needs {expected} bytes, file has {len(data)}")
    off = _MODEL_HEADER.size
    W = np.frombuffer(data, dtype="<f4", count=k * d, offset=off).reshape(k, d)
    b = np.frombuffer(data, dtype="<f4", count=k, offset=off + 4 * k * d)
    return LinearModel(W.astype(np.float64), b.astype(np.float64))


def load_model(path) -> LinearModel:
    with open(path, "rb") as fh:
        return read_model(fh.read())


def save_model(model: LinearModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_model(model))
