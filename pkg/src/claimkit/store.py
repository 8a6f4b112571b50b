"""Single-directory workspace persistence.

Layout (all under one root):
    corpus/comments.jsonl      raw comments
    corpus/sentences.jsonl     segmented sentences
    corpus/vectors.txt         optional pretrained word vectors
    labels/current.jsonl       active weak labels (atomic swap on relabel)
    labels/v{N}.jsonl          labels produced under grammar version N
    labels/state.json          {"grammar_version": N}
    grammar/v{N}/              immutable grammar+lexicon snapshots
    models/                    saved model bundles
    reports/                   evaluation reports and trial logs

Grammar versions are append-only: files under grammar/v{N} are written once
at creation and never modified.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .cky import WeakLabel
from .corpus import (
    Comment,
    Sentence,
    read_comments_jsonl,
    read_sentences_jsonl,
    write_comments_jsonl,
    write_sentences_jsonl,
)
from .grammar import (
    Lexicon,
    RuleGrammar,
    load_grammar,
    load_lexicon_dir,
    parse_grammar,
    parse_lexicon,
)
from .labeler import read_weak_labels_jsonl, write_labels_jsonl

__all__ = ["Workspace", "DuplicatePhraseError", "SUBDIRS"]

SUBDIRS = ("corpus", "labels", "grammar", "models", "reports")


class DuplicatePhraseError(ValueError):
    """Phrase already present in the target lexicon."""


class Workspace:
    """Filesystem-backed project state; one writer at a time by convention."""

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
            for sub in SUBDIRS:
                (self.root / sub).mkdir(exist_ok=True)
        elif not self.root.is_dir():
            raise FileNotFoundError(f"workspace directory not found: {self.root}")

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    # -- corpus --------------------------------------------------------------

    @property
    def comments_path(self) -> Path:
        return self.path("corpus", "comments.jsonl")

    @property
    def sentences_path(self) -> Path:
        return self.path("corpus", "sentences.jsonl")

    @property
    def vectors_path(self) -> Path:
        return self.path("corpus", "vectors.txt")

    def write_comments(self, comments: Iterable[Comment]) -> None:
        write_comments_jsonl(comments, self.comments_path)

    def read_comments(self) -> list[Comment]:
        return read_comments_jsonl(self.comments_path)

    def write_sentences(self, sentences: Iterable[Sentence]) -> None:
        write_sentences_jsonl(sentences, self.sentences_path)

    def read_sentences(self) -> list[Sentence]:
        return read_sentences_jsonl(self.sentences_path)

    # -- labels ---------------------------------------------------------------

    @property
    def labels_path(self) -> Path:
        return self.path("labels", "current.jsonl")

    def write_labels(
        self, labels: Mapping[int, WeakLabel | None], grammar_version: int | None = None
    ) -> None:
        """Persist labels; the active file is swapped in one rename."""
        if grammar_version is not None:
            write_labels_jsonl(labels, self.path("labels", f"v{grammar_version}.jsonl"))
        tmp = self.path("labels", ".current.tmp")
        write_labels_jsonl(labels, tmp)
        os.replace(tmp, self.labels_path)
        if grammar_version is not None:
            state = self.path("labels", "state.json")
            state.write_text(
                json.dumps({"grammar_version": grammar_version}) + "\n", encoding="utf-8"
            )

    def read_labels(self) -> dict[int, WeakLabel | None] | None:
        if not self.labels_path.exists():
            return None
        return read_weak_labels_jsonl(self.labels_path)

    def labels_state(self) -> dict | None:
        state = self.path("labels", "state.json")
        if not state.exists():
            return None
        return json.loads(state.read_text(encoding="utf-8"))

    # -- grammar versions ------------------------------------------------------

    def _version_dir(self, version: int) -> Path:
        return self.path("grammar", f"v{version}")

    def list_versions(self) -> list[int]:
        out = []
        grammar_dir = self.path("grammar")
        if not grammar_dir.is_dir():
            return out
        for entry in grammar_dir.iterdir():
            if entry.is_dir() and entry.name.startswith("v") and entry.name[1:].isdigit():
                out.append(int(entry.name[1:]))
        return sorted(out)

    def latest_version(self) -> int | None:
        versions = self.list_versions()
        return versions[-1] if versions else None

    def version_meta(self, version: int) -> dict:
        meta_path = self._version_dir(version) / "meta.json"
        if not meta_path.exists():
            raise KeyError(f"grammar version {version} not found")
        return json.loads(meta_path.read_text(encoding="utf-8"))

    def read_version_files(self, version: int) -> dict:
        """Raw text snapshot: {"grammar": str, "lexicons": {name: str}}."""
        vdir = self._version_dir(version)
        if not vdir.is_dir():
            raise KeyError(f"grammar version {version} not found")
        lexicons = {
            f.stem: f.read_text(encoding="utf-8")
            for f in sorted((vdir / "lexicons").glob("*.txt"))
        }
        return {
            "grammar": (vdir / "grammar.rules").read_text(encoding="utf-8"),
            "lexicons": lexicons,
        }

    def load_version(self, version: int) -> tuple[RuleGrammar, dict[str, Lexicon]]:
        vdir = self._version_dir(version)
        if not vdir.is_dir():
            raise KeyError(f"grammar version {version} not found")
        grammar = load_grammar(vdir / "grammar.rules")
        lexicons = load_lexicon_dir(vdir / "lexicons")
        return grammar, lexicons

    def create_version(
        self, grammar_text: str, lexicon_texts: Mapping[str, str], note: str = ""
    ) -> int:
        """Write a new immutable snapshot and return its version number."""
        # validate everything before touching disk so a rejected snapshot
        # leaves no partial version directory behind
        parse_grammar(grammar_text)
        for name, text in lexicon_texts.items():
            parse_lexicon(name, text)
        latest = self.latest_version()
        version = 1 if latest is None else latest + 1
        vdir = self._version_dir(version)
        (vdir / "lexicons").mkdir(parents=True)
        (vdir / "grammar.rules").write_text(grammar_text, encoding="utf-8")
        for name, text in sorted(lexicon_texts.items()):
            (vdir / "lexicons" / f"{name}.txt").write_text(text, encoding="utf-8")
        meta = {
            "version": version,
            "note": note,
            "parent": latest,
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        (vdir / "meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
        return version

    def add_lexicon_phrase(
        self, base_version: int, lexicon_name: str, phrase: str, note: str = ""
    ) -> int:
        """New version = base snapshot + one phrase appended to one lexicon.

        Raises KeyError for an unknown version or lexicon, ValueError for an
        invalid or duplicate phrase.
        """
        snapshot = self.read_version_files(base_version)
        if lexicon_name not in snapshot["lexicons"]:
            raise KeyError(f"lexicon {lexicon_name!r} not found in version {base_version}")
        text = snapshot["lexicons"][lexicon_name]
        existing = parse_lexicon(lexicon_name, text)
        addition = parse_lexicon(lexicon_name, phrase)  # raises on empty/invalid
        if addition.entries[0] in existing.entries:
            raise DuplicatePhraseError(f"phrase {phrase!r} already in {lexicon_name}")
        if text and not text.endswith("\n"):
            text += "\n"
        text += phrase.strip() + "\n"
        lexicons = dict(snapshot["lexicons"])
        lexicons[lexicon_name] = text
        return self.create_version(snapshot["grammar"], lexicons, note=note)

    # -- models / reports -------------------------------------------------------

    def bundle_path(self, name: str) -> Path:
        return self.path("models", f"{name}.json")

    def report_path(self, name: str) -> Path:
        return self.path("reports", f"{name}.json")

    def write_latest_report(self, doc: dict) -> None:
        path = self.path("reports", "latest.json")
        path.write_text(
            json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
        )

    def latest_report(self) -> dict | None:
        path = self.path("reports", "latest.json")
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))
