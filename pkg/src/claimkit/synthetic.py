"""Synthetic regulatory-comment corpus with planted claim cues.

Each argumentative sentence embeds one cue phrase for its claim type inside
neutral filler text; neutral sentences are filler only. The cue phrases line
up with the starter grammar and lexicons shipped in ``claimkit/data``, so the
weak labeler, the trained classifiers, and weight inspection can all be
exercised end to end on a corpus with known ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Sentence
from .taxonomy import ClaimType

__all__ = ["SyntheticConfig", "CLASS_CUES", "synthetic_corpus"]


# Cue phrases planted per claim type. Each class's cue family (its distinct
# cue unigrams plus bigrams) stays at 10 or fewer items, so a trained model
# can rank every cue bigram inside the top-10 weights for that class even
# when collinear cue unigrams tie with them.
CLASS_CUES: dict[ClaimType, tuple[tuple[str, ...], ...]] = {
    ClaimType.EXPLICIT_SUPPORT: (
        ("i", "support"),
        ("strongly", "support"),
        ("we", "endorse"),
    ),
    ClaimType.LIKELY_SUPPORT: (
        ("good", "idea"),
        ("beneficial", "step"),
        ("long", "overdue"),
    ),
    ClaimType.EXPLICIT_OPPOSITION: (
        ("i", "oppose"),
        ("strongly", "oppose"),
        ("we", "object"),
    ),
    ClaimType.LIKELY_OPPOSITION: (
        ("bad", "idea"),
        ("harmful", "rule"),
        ("deeply", "flawed"),
    ),
    ClaimType.BURDENSOME: (
        ("too", "costly"),
        ("heavy", "burden"),
        ("compliance", "costs"),
    ),
    ClaimType.LACKS_FLEXIBILITY: (
        ("no", "flexibility"),
        ("inflexible", "mandate"),
        ("rigid", "requirement"),
    ),
    ClaimType.NOT_SUFFICIENT_TIME: (
        ("postpone", "the", "deadline"),
        ("not", "enough", "time"),
    ),
    ClaimType.CONFLICTING_INTERESTS: (
        ("conflict", "of", "interest"),
        ("competing", "interests"),
    ),
    ClaimType.DISPUTED_INFORMATION: (
        ("data", "is", "wrong"),
        ("disputed", "evidence"),
    ),
    ClaimType.LEGAL_CHALLENGE: (
        ("face", "lawsuit"),
        ("invite", "litigation"),
        ("unlawful", "rule"),
    ),
    ClaimType.OVERREACH: (
        ("exceeds", "authority"),
        ("regulatory", "overreach"),
    ),
    ClaimType.REQUESTS_CLARIFICATION: (
        ("please", "clarify"),
        ("needs", "clarification"),
        ("requires", "clarification"),
    ),
    ClaimType.LACKS_CLARITY: (
        ("unclear", "definition"),
        ("ambiguous", "language"),
        ("vague", "wording"),
    ),
    ClaimType.SEEKS_EXCLUSION: (
        ("carve", "out"),
        ("seek", "exemption"),
        ("exempt", "entities"),
    ),
    ClaimType.TOO_BROAD: (
        ("overly", "broad"),
        ("sweeping", "scope"),
    ),
    ClaimType.TOO_NARROW: (
        ("too", "narrow"),
        ("excludes", "many"),
    ),
}

# Relative frequencies of argumentative classes (larger = more common).
_CLASS_WEIGHTS: dict[ClaimType, int] = {
    ClaimType.LIKELY_OPPOSITION: 20,
    ClaimType.EXPLICIT_OPPOSITION: 14,
    ClaimType.LIKELY_SUPPORT: 12,
    ClaimType.EXPLICIT_SUPPORT: 9,
    ClaimType.BURDENSOME: 10,
    ClaimType.NOT_SUFFICIENT_TIME: 5,
    ClaimType.LACKS_FLEXIBILITY: 4,
    ClaimType.CONFLICTING_INTERESTS: 4,
    ClaimType.DISPUTED_INFORMATION: 4,
    ClaimType.LEGAL_CHALLENGE: 4,
    ClaimType.OVERREACH: 3,
    ClaimType.REQUESTS_CLARIFICATION: 6,
    ClaimType.LACKS_CLARITY: 4,
    ClaimType.SEEKS_EXCLUSION: 4,
    ClaimType.TOO_BROAD: 3,
    ClaimType.TOO_NARROW: 3,
}

# Background vocabulary; deliberately disjoint from every cue token above.
_FILLER = (
    "agency rulemaking notice covers electronic records management under part "
    "eleven and describes how manufacturers distributors and retailers file "
    "annual reports about ingredient listings labeling practices inspection "
    "schedules warehouse facilities transport logistics regional offices "
    "public dockets comment procedures submission windows review panels "
    "advisory committees economic analysis baseline estimates market sectors "
    "product categories packaging standards testing laboratories sampling "
    "protocols certification documents registration numbers identification "
    "codes tracking systems database entries quarterly summaries federal "
    "register notices docket folders signature pages contact details mailing "
    "addresses processing centers field inspectors enforcement officers "
    "program managers technical staff budget tables fiscal years calendar "
    "quarters implementation phases transition periods guidance materials "
    "reference materials appendix sections table headings figure captions "
    "page numbers paragraph markers clause items"
).split()


@dataclass(frozen=True)
class SyntheticConfig:
    n_sentences: int = 20_000
    neutral_fraction: float = 0.85
    min_filler: int = 6
    max_filler: int = 18
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_sentences < 100:
            raise ValueError("need at least 100 sentences")
        if not 0.0 < self.neutral_fraction < 1.0:
            raise ValueError("neutral_fraction must lie strictly between 0 and 1")
        if not 1 <= self.min_filler <= self.max_filler:
            raise ValueError("filler length range invalid")


def _class_counts(n_argument: int) -> dict[ClaimType, int]:
    total_weight = sum(_CLASS_WEIGHTS.values())
    targets = {c: n_argument * w / total_weight for c, w in _CLASS_WEIGHTS.items()}
    counts = {c: math.floor(t) for c, t in targets.items()}
    leftover = n_argument - sum(counts.values())
    order = sorted(
        _CLASS_WEIGHTS, key=lambda c: (-(targets[c] - counts[c]), c.value)
    )
    for c in order[:leftover]:
        counts[c] += 1
    return counts


def _filler(rng: np.random.Generator, lo: int, hi: int) -> list[str]:
    n = int(rng.integers(lo, hi + 1))
    return [_FILLER[i] for i in rng.integers(0, len(_FILLER), size=n)]


def synthetic_corpus(
    cfg: SyntheticConfig | None = None,
) -> tuple[list[Sentence], dict[int, ClaimType]]:
    """Generate sentences and their ground-truth claim labels.

    Sentence order is shuffled under the seed so classes interleave; ids are
    assigned after the shuffle and ascend 0..n-1.
    """
    cfg = cfg or SyntheticConfig()
    rng = np.random.default_rng(cfg.seed)
    n_neutral = round(cfg.n_sentences * cfg.neutral_fraction)
    n_argument = cfg.n_sentences - n_neutral
    counts = _class_counts(n_argument)

    drafts: list[tuple[ClaimType, list[str]]] = []
    for _ in range(n_neutral):
        drafts.append((ClaimType.NEUTRAL, _filler(rng, cfg.min_filler, cfg.max_filler)))
    for claim in sorted(counts, key=lambda c: c.value):
        cues = CLASS_CUES[claim]
        for _ in range(counts[claim]):
            tokens = _filler(rng, cfg.min_filler, cfg.max_filler)
            cue = cues[int(rng.integers(0, len(cues)))]
            at = int(rng.integers(0, len(tokens) + 1))
            tokens[at:at] = list(cue)
            drafts.append((claim, tokens))

    rng.shuffle(drafts)
    sentences: list[Sentence] = []
    labels: dict[int, ClaimType] = {}
    for sid, (claim, tokens) in enumerate(drafts):
        text = " ".join(tokens).capitalize() + "."
        comment_id = f"SYN-{sid // 8:05d}"
        sentences.append(Sentence.make(sid, comment_id, sid % 8, text))
        labels[sid] = claim
    return sentences, labels
