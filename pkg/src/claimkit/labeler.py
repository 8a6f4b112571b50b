"""Weak-supervision labeling: conflict resolution, corpus labeling, clustering.

Candidates from the CKY matcher are reduced to at most one claim per
sentence by a configurable conflict policy, and unlabeled sentences can be
clustered by embedding similarity to surface new cue phrases for the
grammar-expansion loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cky import WeakLabel, cky_match
from .corpus import Sentence
from .grammar import CompiledGrammar
from .taxonomy import ClaimType, Taxonomy, default_taxonomy

__all__ = [
    "DEFAULT_POLICY",
    "resolve",
    "pick_winner",
    "label_corpus",
    "weak_label_corpus",
    "Cluster",
    "cluster_candidates",
    "write_labels_jsonl",
    "read_weak_labels_jsonl",
    "read_labels_jsonl",
]

# Tie-break order for conflicting candidates. Each criterion name maps to a
# sort key; earlier criteria dominate.
DEFAULT_POLICY: tuple[str, ...] = ("depth", "priority", "span", "rule_id")


def pick_winner(
    candidates: Iterable[WeakLabel],
    taxonomy: Taxonomy | None = None,
    priorities: Mapping[ClaimType, int] | None = None,
    policy: Sequence[str] = DEFAULT_POLICY,
) -> WeakLabel | None:
    """The winning candidate under the conflict policy, or None if empty.

    Default policy: deepest claim wins; ties go to the lower priority
    integer, then the longer matched span, then the lower rule id.
    """
    if taxonomy is None:
        taxonomy = default_taxonomy()
    priorities = priorities or {}
    candidates = list(candidates)
    if not candidates:
        return None

    def key(label: WeakLabel):
        parts: list = []
        for criterion in policy:
            if criterion == "depth":
                parts.append(-taxonomy.depth(label.claim))
            elif criterion == "priority":
                parts.append(priorities.get(label.claim, 0))
            elif criterion == "span":
                parts.append(-(label.span[1] - label.span[0]))
            elif criterion == "rule_id":
                parts.append(label.rule_id)
            else:
                raise ValueError(f"unknown policy criterion {criterion!r}")
        parts.append(label.claim.value)  # total order safeguard
        return tuple(parts)

    return min(candidates, key=key)


def resolve(
    candidates: Iterable[WeakLabel],
    taxonomy: Taxonomy | None = None,
    priorities: Mapping[ClaimType, int] | None = None,
    policy: Sequence[str] = DEFAULT_POLICY,
) -> ClaimType:
    """Reduce candidates to a single claim; no candidates means Neutral."""
    winner = pick_winner(candidates, taxonomy, priorities, policy)
    return ClaimType.NEUTRAL if winner is None else winner.claim


def weak_label_corpus(
    sentences: Iterable[Sentence],
    g: CompiledGrammar,
    taxonomy: Taxonomy | None = None,
    policy: Sequence[str] = DEFAULT_POLICY,
) -> dict[int, WeakLabel | None]:
    """Winning candidate (with provenance) per sentence; None means Neutral."""
    out: dict[int, WeakLabel | None] = {}
    for sentence in sentences:
        out[sentence.sentence_id] = pick_winner(
            cky_match(sentence, g), taxonomy, g.priorities, policy
        )
    return out


def label_corpus(
    sentences: Iterable[Sentence],
    g: CompiledGrammar,
    taxonomy: Taxonomy | None = None,
    policy: Sequence[str] = DEFAULT_POLICY,
) -> dict[int, ClaimType]:
    """Total, deterministic sentence_id -> claim mapping."""
    return {
        sid: (ClaimType.NEUTRAL if winner is None else winner.claim)
        for sid, winner in weak_label_corpus(sentences, g, taxonomy, policy).items()
    }


# ---------------------------------------------------------------------------
# Candidate clustering for the grammar-expansion loop
# ---------------------------------------------------------------------------


@dataclass
class Cluster:
    cluster_id: int
    sentence_ids: list[int]
    exemplar_id: int
    centroid: np.ndarray


def cluster_candidates(
    sentences: Sequence[Sentence],
    embeddings: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
) -> list[Cluster]:
    """Seeded k-means over sentence embeddings with cosine exemplars.

    Every sentence lands in exactly one cluster; the exemplar is the member
    nearest its centroid by cosine similarity. Deterministic under seed.
    """
    n = len(sentences)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds sentence count {n}")
    X = np.asarray(embeddings, dtype=np.float64)
    if X.shape[0] != n:
        raise ValueError("one embedding per sentence required")
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(n, size=k, replace=False)].copy()
    assignment = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dists = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = dists.argmin(axis=1)
        for c in range(k):
            mask = new_assignment == c
            if mask.any():
                centroids[c] = X[mask].mean(axis=0)
            else:
                # Reseed an empty cluster on the point farthest from its centroid.
                farthest = int(dists.min(axis=1).argmax())
                centroids[c] = X[farthest]
                new_assignment[farthest] = c
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment

    norms = np.linalg.norm(X, axis=1)
    clusters: list[Cluster] = []
    for c in range(k):
        member_idx = np.flatnonzero(assignment == c)
        centroid = centroids[c]
        cnorm = np.linalg.norm(centroid)
        sims = np.zeros(len(member_idx))
        for pos, i in enumerate(member_idx):
            denom = norms[i] * cnorm
            sims[pos] = (X[i] @ centroid) / denom if denom > 0 else -1.0
        exemplar = int(member_idx[int(sims.argmax())])
        clusters.append(
            Cluster(
                cluster_id=c,
                sentence_ids=[sentences[i].sentence_id for i in member_idx],
                exemplar_id=sentences[exemplar].sentence_id,
                centroid=centroid,
            )
        )
    return clusters


# ---------------------------------------------------------------------------
# Label persistence
# ---------------------------------------------------------------------------


def write_labels_jsonl(
    labels: Mapping[int, WeakLabel | None], path: str | Path
) -> None:
    """JSON-lines {sentence_id, claim, rule_id, span}, sorted by sentence_id."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for sid in sorted(labels):
            winner = labels[sid]
            if winner is None:
                record = {"sentence_id": sid, "claim": ClaimType.NEUTRAL.value,
                          "rule_id": None, "span": None}
            else:
                record = winner.to_record()
            fh.write(json.dumps(record) + "\n")


def read_labels_jsonl(path: str | Path) -> dict[int, ClaimType]:
    out: dict[int, ClaimType] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out[rec["sentence_id"]] = ClaimType(rec["claim"])
    return out


def read_weak_labels_jsonl(path: str | Path) -> dict[int, WeakLabel | None]:
    """Inverse of write_labels_jsonl, keeping span and rule provenance."""
    out: dict[int, WeakLabel | None] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec["rule_id"] is None:
                out[rec["sentence_id"]] = None
            else:
                out[rec["sentence_id"]] = WeakLabel(
                    rec["sentence_id"],
                    ClaimType(rec["claim"]),
                    tuple(rec["span"]),
                    rec["rule_id"],
                )
    return out
