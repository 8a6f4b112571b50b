"""Comment ingestion, sentence segmentation, and near-duplicate removal.

The corpus layer turns raw comment submissions (from a regulations.gov-style
API or local JSON-lines files) into a deduplicated store of sentences that
every downstream stage consumes.
"""

from __future__ import annotations

import json
import re
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Comment",
    "Sentence",
    "DedupConfig",
    "FetchResult",
    "ApiClientConfig",
    "tokenize",
    "normalize_text",
    "make_count_filter",
    "fetch_comments",
    "segment_sentences",
    "segment_corpus",
    "similarity",
    "levenshtein",
    "dedup",
    "read_comments_jsonl",
    "write_comments_jsonl",
    "read_sentences_jsonl",
    "write_sentences_jsonl",
]


# Tokens are lowercased word runs; hyphens, apostrophes, and periods are kept
# when they sit between word characters so citations ("205.203") and compounds
# ("cost-benefit") survive as single tokens.
_TOKEN_RE = re.compile(r"\w+(?:[-.'’]\w+)*", re.UNICODE)

_WHITESPACE_RE = re.compile(r"\s+")


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase and split on whitespace/punctuation boundaries."""
    return tuple(_TOKEN_RE.findall(text.lower()))


def normalize_text(text: str) -> str:
    """Lowercase and collapse runs of whitespace to single spaces."""
    return _WHITESPACE_RE.sub(" ", text.strip()).lower()


@dataclass(frozen=True)
class Comment:
    """One public comment submission."""

    comment_id: str
    docket_id: str
    agency: str
    text: str
    received_at: str | None = None

    def to_record(self) -> dict:
        return {
            "comment_id": self.comment_id,
            "docket_id": self.docket_id,
            "agency": self.agency,
            "text": self.text,
            "received_at": self.received_at,
        }


@dataclass(frozen=True)
class Sentence:
    """A sentence-level unit of comment text with provenance."""

    sentence_id: int
    comment_id: str
    index_in_comment: int
    text: str
    tokens: tuple[str, ...] = field(default=())

    @staticmethod
    def make(sentence_id: int, comment_id: str, index_in_comment: int, text: str) -> "Sentence":
        return Sentence(sentence_id, comment_id, index_in_comment, text, tokenize(text))

    def to_record(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "comment_id": self.comment_id,
            "index_in_comment": self.index_in_comment,
            "text": self.text,
        }


@dataclass(frozen=True)
class DedupConfig:
    """Near-duplicate removal settings.

    A retained pair may be at most ``similarity_threshold`` similar; strictly
    more similar pairs collapse onto the earliest sentence_id.
    """

    similarity_threshold: float = 0.95

    def __post_init__(self) -> None:
        if not (0.0 < self.similarity_threshold <= 1.0):
            raise ValueError(
                f"similarity_threshold must be in (0, 1], got {self.similarity_threshold}"
            )


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


@dataclass
class FetchResult:
    """Comments that passed validation plus a skip report for the rest."""

    comments: list[Comment]
    skipped: int = 0
    skip_reasons: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ApiClientConfig:
    """Paged-GET client settings for a regulations.gov-style endpoint."""

    base_url: str
    api_key_header: str = "X-Api-Key"
    api_key: str | None = None
    page_size: int = 250
    requests_per_second: float = 4.0
    max_retries: int = 3


class FetchError(RuntimeError):
    """Raised when a source cannot be read; carries the source context."""


def make_count_filter(more_than: int | None = None, fewer_than: int | None = None) -> Callable[[int], bool]:
    """Predicate over per-docket comment counts with exclusive bounds."""

    def accept(count: int) -> bool:
        if more_than is not None and not count > more_than:
            return False
        if fewer_than is not None and not count < fewer_than:
            return False
        return True

    return accept


def _parse_comment_record(record: dict) -> Comment:
    comment_id = record["comment_id"]
    docket_id = record["docket_id"]
    text = record["text"]
    if not isinstance(comment_id, str) or not comment_id:
        raise ValueError("comment_id must be a non-empty string")
    if not isinstance(docket_id, str) or not docket_id:
        raise ValueError("docket_id must be a non-empty string")
    if not isinstance(text, str) or not text.strip():
        raise ValueError("text empty after whitespace normalization")
    return Comment(
        comment_id=comment_id,
        docket_id=docket_id,
        agency=str(record.get("agency", "")),
        text=text,
        received_at=record.get("received_at"),
    )


def _iter_source_records(source: str | Path, client: "ApiClient | None") -> Iterator[dict]:
    if isinstance(source, (str, Path)) and str(source).startswith(("http://", "https://")):
        if client is None:
            client = ApiClient(ApiClientConfig(base_url=str(source)))
        yield from client.iter_records()
        return
    path = Path(source)
    if not path.exists():
        raise FetchError(f"source not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                yield {"__malformed__": f"invalid JSON: {exc}"}


class ApiClient:
    """Minimal paged GET client; one request per page, rate limited."""

    def __init__(self, config: ApiClientConfig, session=None):
        self.config = config
        if session is None:
            import requests

            session = requests.Session()
        self._session = session
        self._last_request = 0.0

    def _throttle(self) -> None:
        min_gap = 1.0 / self.config.requests_per_second
        wait = self._last_request + min_gap - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()

    def _get_page(self, page: int) -> dict:
        headers = {}
        if self.config.api_key is not None:
            headers[self.config.api_key_header] = self.config.api_key
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            self._throttle()
            try:
                resp = self._session.get(
                    self.config.base_url,
                    params={"page": page, "page_size": self.config.page_size},
                    headers=headers,
                    timeout=30,
                )
                resp.raise_for_status()
                return resp.json()
            except Exception as exc:  # network/IO failures are retryable
                last_error = exc
        raise FetchError(f"GET {self.config.base_url} page {page} failed: {last_error}")

    def iter_records(self) -> Iterator[dict]:
        page = 1
        while True:
            payload = self._get_page(page)
            records = payload.get("comments", [])
            if not records:
                return
            yield from records
            if not payload.get("has_more", False):
                return
            page += 1


def fetch_comments(
    source: str | Path,
    docket_filter: Callable[[int], bool] | None = None,
    client: ApiClient | None = None,
) -> FetchResult:
    """Read comments from a file or API, keeping only qualifying dockets.

    ``docket_filter`` is a predicate over the number of comments in a docket;
    dockets failing it are dropped wholesale. Malformed records are skipped
    and counted rather than aborting the run. Attachments are never fetched;
    only direct text submissions appear in the source records.
    """
    result = FetchResult(comments=[])
    seen_ids: set[str] = set()
    parsed: list[Comment] = []
    docket_counts: dict[str, int] = defaultdict(int)
    for record in _iter_source_records(source, client):
        if "__malformed__" in record:
            result.skipped += 1
            result.skip_reasons.append(record["__malformed__"])
            continue
        try:
            comment = _parse_comment_record(record)
        except (KeyError, ValueError, TypeError) as exc:
            result.skipped += 1
            result.skip_reasons.append(f"{type(exc).__name__}: {exc}")
            continue
        if comment.comment_id in seen_ids:
            result.skipped += 1
            result.skip_reasons.append(f"duplicate comment_id: {comment.comment_id}")
            continue
        seen_ids.add(comment.comment_id)
        parsed.append(comment)
        docket_counts[comment.docket_id] += 1
    for comment in parsed:
        if docket_filter is not None and not docket_filter(docket_counts[comment.docket_id]):
            continue
        result.comments.append(comment)
    return result


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Common abbreviations whose trailing period never ends a sentence. Dotted
# citation forms like "C.F.R." are handled structurally (single letters).
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "rev", "gen", "rep", "sen", "gov",
    "jr", "sr", "st", "no", "nos", "sec", "secs", "fig", "figs", "vol",
    "vols", "ch", "chs", "para", "paras", "pp", "p", "approx", "dept",
    "div", "est", "inc", "corp", "co", "ltd", "vs", "v", "etc", "al",
    "eg", "ie", "cf", "fed", "reg", "stat", "pub", "amend", "art", "cl",
    "exec", "ord", "docket", "id",
}

_SENT_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]]*\s+")


def _is_abbreviation(prefix: str) -> bool:
    """Whether the word ending at a period should block a sentence split."""
    m = re.search(r"([\w.]+)$", prefix)
    if not m:
        return False
    word = m.group(1)
    # Dotted sequences ("C.F.R", "U.S") and single letters are abbreviations.
    bare = word.rstrip(".")
    if "." in bare:
        return True
    if len(bare) == 1 and bare.isalpha():
        return True
    return bare.lower().replace(".", "") in _ABBREVIATIONS


def _split_points(text: str) -> list[int]:
    points = []
    for m in _SENT_BOUNDARY_RE.finditer(text):
        terminator = text[m.start()]
        if terminator == ".":
            if _is_abbreviation(text[: m.start()]):
                continue
            # A period between digits ("205. 203" never happens; "3.5 "
            # boundaries only split when followed by an uppercase start).
            nxt = text[m.end() : m.end() + 1]
            if nxt and not (nxt.isupper() or nxt.isdigit() or nxt in "\"'("):
                continue
        points.append(m.end())
    return points


def segment_sentences(comment: Comment, next_id: int = 0) -> list[Sentence]:
    """Split a comment into sentences; degenerate text yields one sentence.

    Every non-whitespace character of the comment text lands in exactly one
    sentence. Sentence ids are assigned sequentially from ``next_id``.
    """
    text = comment.text
    if not text.strip():
        return []
    bounds = [0] + _split_points(text) + [len(text)]
    sentences: list[Sentence] = []
    for start, end in zip(bounds, bounds[1:]):
        piece = text[start:end].strip()
        if not piece:
            continue
        sentences.append(
            Sentence.make(next_id + len(sentences), comment.comment_id, len(sentences), piece)
        )
    return sentences


def segment_corpus(comments: Iterable[Comment]) -> list[Sentence]:
    """Segment every comment, assigning globally unique sentence ids."""
    out: list[Sentence] = []
    for comment in comments:
        out.extend(segment_sentences(comment, next_id=len(out)))
    return out


# ---------------------------------------------------------------------------
# Similarity and dedup
# ---------------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Character-level edit distance (insert/delete/substitute, all cost 1)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    # Row-wise DP; the in-row insertion dependency is resolved with the
    # running-minimum identity row[j] = min_i<=j (tmp[i] + (j - i)).
    m = len(b)
    offsets = np.arange(m + 1)
    prev = offsets.copy()
    b_codes = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32)
    for i, ch in enumerate(a, start=1):
        sub_cost = (b_codes != ord(ch)).astype(np.int64)
        tmp = np.empty(m + 1, dtype=np.int64)
        tmp[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + sub_cost, out=tmp[1:])
        prev = np.minimum.accumulate(tmp - offsets) + offsets
    return int(prev[m])


def similarity(a: Sentence | str, b: Sentence | str) -> float:
    """Normalized edit similarity in [0, 1] over normalized text.

    1 - distance / max_length, computed on lowercased, whitespace-collapsed
    text. Symmetric; identical strings score 1.0 (including two empties).
    """
    ta = normalize_text(a.text if isinstance(a, Sentence) else a)
    tb = normalize_text(b.text if isinstance(b, Sentence) else b)
    if ta == tb:
        return 1.0
    max_len = max(len(ta), len(tb))
    return 1.0 - levenshtein(ta, tb) / max_len


def dedup(sentences: Sequence[Sentence], cfg: DedupConfig | None = None) -> list[Sentence]:
    """Drop sentences strictly more similar than the threshold to a kept one.

    Greedy scan in sentence_id order: the first occurrence is the retained
    representative. Exact-hash and length-band pruning only skip comparisons
    that provably cannot exceed the threshold, so the result matches a full
    pairwise scan.
    """
    if cfg is None:
        cfg = DedupConfig()
    tau = cfg.similarity_threshold
    ordered = sorted(sentences, key=lambda s: s.sentence_id)
    kept: list[Sentence] = []
    kept_norms: list[str] = []
    exact: set[str] = set()
    by_length: dict[int, list[int]] = defaultdict(list)
    for sent in ordered:
        norm = normalize_text(sent.text)
        if tau < 1.0 and norm in exact:
            continue
        n = len(norm)
        is_dup = False
        # sim > tau requires |len(a)-len(b)| <= (1-tau) * max_len.
        for length, indices in by_length.items():
            if abs(length - n) > (1.0 - tau) * max(length, n):
                continue
            for idx in indices:
                other = kept_norms[idx]
                if other == norm:
                    sim = 1.0
                else:
                    sim = 1.0 - levenshtein(norm, other) / max(len(norm), len(other))
                if sim > tau:
                    is_dup = True
                    break
            if is_dup:
                break
        if is_dup:
            continue
        by_length[n].append(len(kept))
        kept_norms.append(norm)
        exact.add(norm)
        kept.append(sent)
    return kept


# ---------------------------------------------------------------------------
# JSON-lines persistence
# ---------------------------------------------------------------------------


def write_comments_jsonl(comments: Iterable[Comment], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for comment in comments:
            fh.write(json.dumps(comment.to_record(), ensure_ascii=False) + "\n")


def read_comments_jsonl(path: str | Path) -> list[Comment]:
    result = fetch_comments(path)
    if result.skipped:
        raise ValueError(f"{path}: {result.skipped} malformed records: {result.skip_reasons[:3]}")
    return result.comments


def write_sentences_jsonl(sentences: Iterable[Sentence], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(json.dumps(sent.to_record(), ensure_ascii=False) + "\n")


def read_sentences_jsonl(path: str | Path) -> list[Sentence]:
    sentences = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            sentences.append(
                Sentence.make(
                    rec["sentence_id"], rec["comment_id"], rec["index_in_comment"], rec["text"]
                )
            )
    return sentences
