"""Access to the packaged starter grammar, lexicons, and toy vectors."""

from __future__ import annotations

from pathlib import Path

from .features import DEFAULT_SIF_A, EmbeddingTable
from .grammar import (
    CompiledGrammar,
    Lexicon,
    RuleGrammar,
    compile_grammar,
    load_grammar,
    load_lexicon_dir,
)

__all__ = [
    "DATA_DIR",
    "default_grammar_text",
    "default_lexicon_texts",
    "default_grammar",
    "default_lexicons",
    "default_compiled_grammar",
    "toy_vectors_path",
    "load_toy_vectors",
]

DATA_DIR = Path(__file__).parent / "data"


def default_grammar_text() -> str:
    return (DATA_DIR / "grammar.rules").read_text(encoding="utf-8")


def default_lexicon_texts() -> dict[str, str]:
    return {
        f.stem: f.read_text(encoding="utf-8")
        for f in sorted((DATA_DIR / "lexicons").glob("*.txt"))
    }


def default_grammar() -> RuleGrammar:
    return load_grammar(DATA_DIR / "grammar.rules")


def default_lexicons() -> dict[str, Lexicon]:
    return load_lexicon_dir(DATA_DIR / "lexicons")


def default_compiled_grammar() -> CompiledGrammar:
    return compile_grammar(default_grammar(), default_lexicons())


def toy_vectors_path() -> Path:
    return DATA_DIR / "toy_vectors.txt"


def load_toy_vectors(a: float = DEFAULT_SIF_A) -> EmbeddingTable:
    return EmbeddingTable.load(toy_vectors_path(), a=a)
