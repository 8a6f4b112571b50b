"""CKY span matching over compiled rule grammars.

Rules fire on any contiguous token sub-span, not whole-sentence derivations:
for each claim the matcher reports the maximal derivable spans (spans not
strictly contained in another derivable span for the same claim), each with
the owning rule's provenance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .grammar import CompiledGrammar
from .taxonomy import ClaimType

__all__ = ["WeakLabel", "cky_match", "match_tokens"]


@dataclass(frozen=True)
class WeakLabel:
    """One claim candidate for a sentence, with matched span and provenance."""

    sentence_id: int
    claim: ClaimType
    span: tuple[int, int]
    rule_id: int

    def to_record(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "claim": self.claim.value,
            "rule_id": self.rule_id,
            "span": list(self.span),
        }


def _chart(tokens: Sequence[str], g: CompiledGrammar) -> list[list[frozenset[str] | set[str]]]:
    n = len(tokens)
    chart: list[list[set[str]]] = [[set() for _ in range(n + 1)] for _ in range(n + 1)]
    for i, token in enumerate(tokens):
        chart[i][i + 1] = set(g.symbols_for_token(token))
    for width in range(2, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            cell = chart[i][j]
            for k in range(i + 1, j):
                left = chart[i][k]
                right = chart[k][j]
                if not left or not right:
                    continue
                for b in left:
                    for c, a in g.binary_by_left.get(b, ()):
                        if c in right:
                            cell.add(a)
    return chart


def _maximal_spans(spans: set[tuple[int, int]]) -> set[tuple[int, int]]:
    out = set()
    for span in spans:
        contained = any(
            other != span and other[0] <= span[0] and span[1] <= other[1] for other in spans
        )
        if not contained:
            out.add(span)
    return out


def match_tokens(tokens: Sequence[str], g: CompiledGrammar, sentence_id: int = -1) -> list[WeakLabel]:
    """All (claim, maximal span) candidates derivable from the token sequence."""
    if not tokens or not g.claim_markers:
        return []
    chart = _chart(tokens, g)
    n = len(tokens)
    found: dict[ClaimType, dict[tuple[int, int], int]] = {}
    for i in range(n):
        for j in range(i + 1, n + 1):
            cell = chart[i][j]
            if not cell:
                continue
            for marker, info in g.claim_markers.items():
                if marker in cell:
                    per_claim = found.setdefault(info.claim, {})
                    span = (i, j)
                    prev = per_claim.get(span)
                    if prev is None or info.rule_id < prev:
                        per_claim[span] = info.rule_id
    labels: list[WeakLabel] = []
    for claim, spans in found.items():
        for span in _maximal_spans(set(spans)):
            labels.append(WeakLabel(sentence_id, claim, span, spans[span]))
    labels.sort(key=lambda w: (w.claim.value, w.span, w.rule_id))
    return labels


def cky_match(sentence, g: CompiledGrammar) -> list[WeakLabel]:
    """Match a Sentence (or any object with tokens and sentence_id)."""
    return match_tokens(sentence.tokens, g, sentence.sentence_id)
