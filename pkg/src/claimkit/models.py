"""From-scratch linear classifiers trained by seeded mini-batch gradient descent.

Two families share one loss (class-weighted multinomial cross-entropy with
an L2 penalty on the softmax weights): a sparse bag-of-n-grams logistic
regression, and an averaged hashed-n-gram embedding model whose bucket
vectors are learned jointly with the softmax layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Sentence
from .features import bucket_counts

__all__ = [
    "TrainConfig",
    "LinearModel",
    "FastTextModel",
    "balanced_weights",
    "train",
    "train_fasttext_like",
    "predict_proba",
    "softmax",
    "loss_and_grad",
    "fasttext_loss_and_grad",
    "sentence_bucket_matrix",
]


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings; the step decays as lr / (1 + decay * epoch)."""

    l2: float = 1e-4
    learning_rate: float = 0.5
    decay: float = 0.02
    epochs: int = 100
    batch_size: int | None = 64
    seed: int = 0
    class_weights: Mapping[Hashable, float] | None = None

    def __post_init__(self) -> None:
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.class_weights is not None and any(w <= 0 for w in self.class_weights.values()):
            raise ValueError("class weights must be positive")


@dataclass
class LinearModel:
    """Multinomial logistic regression over a fixed feature layout."""

    classes: tuple
    weights: np.ndarray  # C x F
    bias: np.ndarray  # C
    l2: float
    seed: int
    loss_history: list[float] = field(default_factory=list)

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    def class_index(self) -> dict:
        return {c: i for i, c in enumerate(self.classes)}


@dataclass
class FastTextModel:
    """Softmax over the average of learned hashed n-gram bucket vectors."""

    classes: tuple
    buckets: int
    dim: int
    bucket_matrix: np.ndarray  # B x d
    weights: np.ndarray  # C x d
    bias: np.ndarray  # C
    l2: float
    seed: int
    loss_history: list[float] = field(default_factory=list)

    def embed(self, sentence: Sentence) -> np.ndarray:
        counts = bucket_counts(sentence.tokens, self.buckets)
        if not counts:
            return np.zeros(self.dim)
        total = sum(counts.values())
        acc = np.zeros(self.dim)
        for b, c in counts.items():
            acc += self.bucket_matrix[b] * (c / total)
        return acc


def balanced_weights(y: Sequence[Hashable]) -> dict:
    """Per-class weights N / (K * n_c), inversely proportional to frequency."""
    if len(y) == 0:
        raise ValueError("empty label sequence")
    counts: dict[Hashable, int] = {}
    for label in y:
        counts[label] = counts.get(label, 0) + 1
    n, k = len(y), len(counts)
    return {label: n / (k * c) for label, c in counts.items()}


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _as_matrix(X) -> sp.csr_matrix | np.ndarray:
    if sp.issparse(X):
        return X.tocsr()
    return np.asarray(X, dtype=np.float64)


def _check_finite(X) -> None:
    data = X.data if sp.issparse(X) else X
    if data.size and not np.all(np.isfinite(data)):
        raise ValueError("non-finite feature values")


def loss_and_grad(
    W: np.ndarray,
    b: np.ndarray,
    X,
    y_idx: np.ndarray,
    sample_weights: np.ndarray,
    l2: float,
    scale: int | None = None,
):
    """Weighted cross-entropy + (l2/2)*||W||^2 and its gradients.

    ``scale`` divides the data term (the batch size during mini-batch steps);
    defaults to the number of rows.
    """
    n = X.shape[0]
    scale = n if scale is None else scale
    logits = X @ W.T + b
    probs = softmax(logits)
    picked = probs[np.arange(n), y_idx]
    data_loss = -(sample_weights * np.log(np.clip(picked, 1e-300, None))).sum() / scale
    loss = data_loss + 0.5 * l2 * float((W * W).sum())
    G = probs
    G[np.arange(n), y_idx] -= 1.0
    G *= sample_weights[:, None]
    G /= scale
    grad_W = (X.T @ G).T + l2 * W
    grad_b = G.sum(axis=0)
    return loss, grad_W, grad_b


def _resolve_classes(y: Sequence[Hashable], classes: Sequence[Hashable] | None) -> tuple:
    if classes is None:
        classes = sorted(set(y), key=str)
    classes = tuple(classes)
    if len(classes) < 2:
        raise ValueError(f"need >= 2 distinct classes, got {list(classes)}")
    missing = set(y) - set(classes)
    if missing:
        raise ValueError(f"labels outside the class list: {sorted(missing, key=str)}")
    return classes


def _sample_weights(y: Sequence[Hashable], cfg: TrainConfig) -> np.ndarray:
    if cfg.class_weights is None:
        return np.ones(len(y))
    return np.array([cfg.class_weights[label] for label in y], dtype=np.float64)


def train(
    X,
    y: Sequence[Hashable],
    cfg: TrainConfig | None = None,
    classes: Sequence[Hashable] | None = None,
) -> LinearModel:
    """Fit a multinomial logistic regression with seeded, reproducible descent.

    Weights start at zero; the seed only controls mini-batch order, so the
    epoch-end loss trace is a pure function of (X, y, cfg).
    """
    cfg = cfg or TrainConfig()
    X = _as_matrix(X)
    if X.shape[0] != len(y) or len(y) == 0:
        raise ValueError("X and y must be non-empty and aligned")
    _check_finite(X)
    cls = _resolve_classes(y, classes)
    cls_index = {c: i for i, c in enumerate(cls)}
    y_idx = np.array([cls_index[label] for label in y], dtype=np.int64)
    sample_w = _sample_weights(y, cfg)

    n, f = X.shape
    W = np.zeros((len(cls), f))
    b = np.zeros(len(cls))
    rng = np.random.default_rng(cfg.seed)
    batch = n if cfg.batch_size is None else min(cfg.batch_size, n)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate / (1.0 + cfg.decay * epoch)
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            _, gW, gb = loss_and_grad(W, b, X[rows], y_idx[rows], sample_w[rows], cfg.l2)
            W -= lr * gW
            b -= lr * gb
        epoch_loss, _, _ = loss_and_grad(W, b, X, y_idx, sample_w, cfg.l2)
        history.append(float(epoch_loss))
    return LinearModel(cls, W, b, cfg.l2, cfg.seed, history)


def predict_proba(model: LinearModel, x) -> np.ndarray:
    """Class probabilities for one feature vector or a feature matrix."""
    single = False
    if sp.issparse(x):
        X = x.tocsr()
    else:
        X = np.asarray(x, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
            single = True
    if X.shape[1] != model.num_features:
        raise ValueError(
            f"feature layout mismatch: model expects {model.num_features}, got {X.shape[1]}"
        )
    probs = softmax(X @ model.weights.T + model.bias)
    return probs[0] if single else probs


# ---------------------------------------------------------------------------
# fastText-style averaged embedding model
# ---------------------------------------------------------------------------


def sentence_bucket_matrix(token_lists: Sequence[Sequence[str]], buckets: int) -> sp.csr_matrix:
    """Rows average n-gram buckets: M[i, b] = count_i(b) / total_i."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for tokens in token_lists:
        counts = bucket_counts(tokens, buckets)
        total = sum(counts.values())
        for bucket in sorted(counts):
            indices.append(bucket)
            data.append(counts[bucket] / total)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(token_lists), buckets),
    )


def fasttext_loss_and_grad(
    E: np.ndarray,
    W: np.ndarray,
    b: np.ndarray,
    M: sp.csr_matrix,
    y_idx: np.ndarray,
    sample_weights: np.ndarray,
    l2: float,
    scale: int | None = None,
):
    """Joint loss over bucket vectors E and softmax layer (W, b)."""
    n = M.shape[0]
    scale = n if scale is None else scale
    S = M @ E
    logits = S @ W.T + b
    probs = softmax(logits)
    picked = probs[np.arange(n), y_idx]
    data_loss = -(sample_weights * np.log(np.clip(picked, 1e-300, None))).sum() / scale
    loss = data_loss + 0.5 * l2 * float((W * W).sum())
    G = probs
    G[np.arange(n), y_idx] -= 1.0
    G *= sample_weights[:, None]
    G /= scale
    grad_W = G.T @ S + l2 * W
    grad_b = G.sum(axis=0)
    grad_E = M.T @ (G @ W)
    return loss, grad_E, grad_W, grad_b


def train_fasttext_like(
    sentences: Sequence[Sentence],
    y: Sequence[Hashable],
    dims: int = 50,
    buckets: int = 1 << 16,
    cfg: TrainConfig | None = None,
    classes: Sequence[Hashable] | None = None,
) -> FastTextModel:
    """Jointly learn bucket vectors and the softmax layer over their average."""
    cfg = cfg or TrainConfig()
    if len(sentences) != len(y) or len(y) == 0:
        raise ValueError("sentences and y must be non-empty and aligned")
    cls = _resolve_classes(y, classes)
    cls_index = {c: i for i, c in enumerate(cls)}
    y_idx = np.array([cls_index[label] for label in y], dtype=np.int64)
    sample_w = _sample_weights(y, cfg)
    M = sentence_bucket_matrix([s.tokens for s in sentences], buckets)

    rng = np.random.default_rng(cfg.seed)
    E = rng.uniform(-0.5 / dims, 0.5 / dims, size=(buckets, dims))
    W = np.zeros((len(cls), dims))
    b = np.zeros(len(cls))
    n = M.shape[0]
    batch = n if cfg.batch_size is None else min(cfg.batch_size, n)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate / (1.0 + cfg.decay * epoch)
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            _, gE, gW, gb = fasttext_loss_and_grad(
                E, W, b, M[rows], y_idx[rows], sample_w[rows], cfg.l2
            )
            E -= lr * gE
            W -= lr * gW
            b -= lr * gb
        epoch_loss, _, _, _ = fasttext_loss_and_grad(E, W, b, M, y_idx, sample_w, cfg.l2)
        history.append(float(epoch_loss))
    return FastTextModel(cls, buckets, dims, E, W, b, cfg.l2, cfg.seed, history)


def predict_proba_fasttext(model: FastTextModel, sentences: Sequence[Sentence]) -> np.ndarray:
    M = sentence_bucket_matrix([s.tokens for s in sentences], model.buckets)
    S = M @ model.bucket_matrix
    return softmax(S @ model.weights.T + model.bias)
