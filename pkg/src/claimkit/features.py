"""Sentence featurization: binary n-gram presence and dense embeddings.

Two dense families are supported: a frequency-weighted word-vector average
with first-principal-component removal (for pretrained vectors), and a
hashed-bucket n-gram average whose vectors are trained jointly with the
classifier.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Sentence

__all__ = [
    "iter_ngrams",
    "NgramVocab",
    "FeatureVector",
    "EmbeddingTable",
    "build_vocab",
    "featurize",
    "sif_embed",
    "fit_principal_component",
    "fnv1a64",
    "hash_bucket",
    "hashed_avg_embed",
    "bucket_counts",
    "random_bucket_matrix",
    "embedding_matrix",
    "design_matrix",
]

DEFAULT_VOCAB_SIZE = 30_000
DEFAULT_SIF_A = 1e-3
DEFAULT_BUCKETS = 2_000_000


def iter_ngrams(tokens: Sequence[str]) -> Iterator[str]:
    """Unigrams then bigrams (space-joined), in sentence order."""
    for tok in tokens:
        yield tok
    for a, b in zip(tokens, tokens[1:]):
        yield f"{a} {b}"


@dataclass
class NgramVocab:
    """Frequency-capped n-gram index built from the training split only."""

    index: dict[str, int]
    frequencies: dict[str, int]
    size_cap: int

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, ngram: str) -> bool:
        return ngram in self.index

    def ngram_at(self, idx: int) -> str:
        if not hasattr(self, "_by_index"):
            self._by_index = {i: g for g, i in self.index.items()}
        return self._by_index[idx]

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for ngram, idx in sorted(self.index.items(), key=lambda kv: kv[1]):
                fh.write(f"{ngram}\t{idx}\t{self.frequencies[ngram]}\n")

    @staticmethod
    def load(path: str | Path) -> "NgramVocab":
        index: dict[str, int] = {}
        freqs: dict[str, int] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                ngram, idx, freq = line.rstrip("\n").split("\t")
                index[ngram] = int(idx)
                freqs[ngram] = int(freq)
        return NgramVocab(index, freqs, size_cap=max(len(index), DEFAULT_VOCAB_SIZE))


def build_vocab(
    train_sentences: Iterable[Sentence], size_cap: int = DEFAULT_VOCAB_SIZE
) -> NgramVocab:
    """Keep the ``size_cap`` most frequent unigrams+bigrams.

    Ties break by frequency descending then n-gram ascending; indices are
    assigned in that order, so identical training sets produce identical
    vocab files.
    """
    counts: Counter[str] = Counter()
    empty = True
    for sentence in train_sentences:
        empty = False
        counts.update(iter_ngrams(sentence.tokens))
    if empty:
        raise ValueError("cannot build a vocabulary from an empty training set")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size_cap]
    index = {ngram: i for i, (ngram, _) in enumerate(ranked)}
    return NgramVocab(index, dict(ranked), size_cap)


@dataclass
class FeatureVector:
    """Sparse n-gram presence indices plus an optional dense block."""

    sparse_indices: tuple[int, ...]
    dense: np.ndarray | None = None


# ---------------------------------------------------------------------------
# SIF-weighted embeddings
# ---------------------------------------------------------------------------


def fit_principal_component(embeddings: np.ndarray, max_iter: int = 500, tol: float = 1e-14) -> np.ndarray | None:
    """Dominant right singular direction of the centered embedding matrix.

    Found by power iteration on the centered Gram matrix; the sign is fixed
    by making the largest-magnitude coordinate positive. Returns None when
    fewer than two non-zero rows are available (removal is then skipped).
    """
    X = np.asarray(embeddings, dtype=np.float64)
    usable = X[np.linalg.norm(X, axis=1) > 0]
    if usable.shape[0] < 2:
        return None
    centered = usable - usable.mean(axis=0)
    gram = centered.T @ centered
    if not np.any(gram):
        return None
    start = centered[int(np.linalg.norm(centered, axis=1).argmax())]
    if np.linalg.norm(start) == 0:
        start = np.ones(X.shape[1])
    v = start / np.linalg.norm(start)
    for _ in range(max_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            break
        w /= norm
        if abs(abs(w @ v) - 1.0) < tol:
            v = w
            break
        v = w
    pivot = int(np.abs(v).argmax())
    if v[pivot] < 0:
        v = -v
    return v


class EmbeddingTable:
    """Pretrained word vectors with SIF weights and a removable component.

    Word probabilities come from the training corpus when fitted; before
    fitting they fall back to a Zipf-style estimate from the vector file's
    rank order.
    """

    def __init__(self, vectors: dict[str, np.ndarray], a: float = DEFAULT_SIF_A):
        if a <= 0:
            raise ValueError("SIF weight parameter a must be positive")
        if not vectors:
            raise ValueError("embedding table is empty")
        widths = {len(v) for v in vectors.values()}
        if len(widths) != 1:
            raise ValueError(f"inconsistent vector widths: {sorted(widths)}")
        self.vectors = {tok: np.asarray(vec, dtype=np.float64) for tok, vec in vectors.items()}
        self.dim = widths.pop()
        self.a = a
        self.component: np.ndarray | None = None
        # Zipf fallback: p proportional to 1/rank in file order.
        harmonic = sum(1.0 / r for r in range(1, len(vectors) + 1))
        self.word_probs: dict[str, float] = {
            tok: (1.0 / rank) / harmonic for rank, tok in enumerate(vectors, start=1)
        }
        self._fitted_probs = False

    @staticmethod
    def load(path: str | Path, a: float = DEFAULT_SIF_A) -> "EmbeddingTable":
        """Read a text vector file: ``token v1 .. vd`` per line, header optional."""
        vectors: dict[str, np.ndarray] = {}
        with Path(path).open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                parts = line.rstrip("\n").split()
                if not parts:
                    continue
                if lineno == 0 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    continue  # word2vec-style "count dim" header
                token, values = parts[0], parts[1:]
                vectors[token] = np.array([float(v) for v in values])
        return EmbeddingTable(vectors, a=a)

    def fit_word_probs(self, sentences: Iterable[Sentence]) -> None:
        """Estimate p(w) from training-corpus token counts."""
        counts: Counter[str] = Counter()
        for sentence in sentences:
            counts.update(sentence.tokens)
        total = sum(counts.values())
        if total == 0:
            return
        probs = {tok: counts[tok] / total for tok in self.vectors if tok in counts}
        if probs:
            # Tokens absent from the corpus keep a vanishing probability so
            # their SIF weight stays near 1.
            floor = 0.5 / total
            self.word_probs = {tok: probs.get(tok, floor) for tok in self.vectors}
            self._fitted_probs = True

    def raw_embed(self, tokens: Sequence[str]) -> np.ndarray:
        """SIF-weighted average before component removal."""
        acc = np.zeros(self.dim)
        hits = 0
        for tok in tokens:
            vec = self.vectors.get(tok)
            if vec is None:
                continue
            weight = self.a / (self.a + self.word_probs[tok])
            acc += weight * vec
            hits += 1
        if hits == 0:
            return acc
        return acc / hits

    def fit(self, sentences: Sequence[Sentence]) -> None:
        """Fit word probabilities and the principal component on training data."""
        self.fit_word_probs(sentences)
        raw = np.stack([self.raw_embed(s.tokens) for s in sentences]) if sentences else np.zeros((0, self.dim))
        self.component = fit_principal_component(raw)


def sif_embed(sentence: Sentence, emb: EmbeddingTable) -> np.ndarray:
    """Weighted word-vector average with the fitted component projected out."""
    v = emb.raw_embed(sentence.tokens)
    if emb.component is not None:
        u = emb.component
        v = v - u * (u @ v)
    return v


# ---------------------------------------------------------------------------
# Hashed n-gram embeddings
# ---------------------------------------------------------------------------

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes."""
    h = _FNV_OFFSET
    for byte in data.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_bucket(ngram: str, buckets: int) -> int:
    return fnv1a64(ngram) % buckets


def hashed_avg_embed(sentence: Sentence, bucket_matrix: np.ndarray) -> np.ndarray:
    """Average of bucket vectors over the sentence's unigrams+bigrams."""
    buckets = bucket_matrix.shape[0]
    ids = [hash_bucket(g, buckets) for g in iter_ngrams(sentence.tokens)]
    if not ids:
        return np.zeros(bucket_matrix.shape[1])
    return bucket_matrix[ids].mean(axis=0)


def bucket_counts(tokens: Sequence[str], buckets: int) -> dict[int, int]:
    """Bucket -> occurrence count for a token sequence's n-grams."""
    counts: dict[int, int] = {}
    for g in iter_ngrams(tokens):
        b = hash_bucket(g, buckets)
        counts[b] = counts.get(b, 0) + 1
    return counts


def random_bucket_matrix(buckets: int = 4096, dim: int = 32, seed: int = 0) -> np.ndarray:
    """Seeded random projection vectors, for clustering without a vector file."""
    rng = np.random.default_rng(seed)
    return rng.normal(size=(buckets, dim)) / np.sqrt(dim)


def embedding_matrix(
    sentences: Sequence[Sentence],
    emb: EmbeddingTable | None = None,
    buckets: int = 4096,
    dim: int = 32,
    seed: int = 0,
) -> np.ndarray:
    """Dense per-sentence embeddings: SIF when a table is given, hashed otherwise."""
    if emb is not None:
        return np.stack([sif_embed(s, emb) for s in sentences])
    R = random_bucket_matrix(buckets, dim, seed)
    return np.stack([hashed_avg_embed(s, R) for s in sentences])


# ---------------------------------------------------------------------------
# Feature assembly
# ---------------------------------------------------------------------------


def featurize(
    sentence: Sentence, vocab: NgramVocab, emb: EmbeddingTable | None = None
) -> FeatureVector:
    """Binary n-gram presence indices, plus the SIF embedding when given."""
    indices = sorted({vocab.index[g] for g in iter_ngrams(sentence.tokens) if g in vocab.index})
    dense = sif_embed(sentence, emb) if emb is not None else None
    return FeatureVector(tuple(indices), dense)


def design_matrix(
    sentences: Sequence[Sentence], vocab: NgramVocab, emb: EmbeddingTable | None = None
) -> sp.csr_matrix:
    """Stack featurized sentences into a CSR matrix (n-gram block + dense block)."""
    width = len(vocab) + (emb.dim if emb is not None else 0)
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for sentence in sentences:
        fv = featurize(sentence, vocab, emb)
        indices.extend(fv.sparse_indices)
        data.extend([1.0] * len(fv.sparse_indices))
        if fv.dense is not None:
            nz = np.flatnonzero(fv.dense)
            indices.extend((len(vocab) + int(i)) for i in nz)
            data.extend(float(fv.dense[i]) for i in nz)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(sentences), width),
    )
