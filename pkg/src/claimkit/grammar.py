"""Rule grammars for weak labeling: file format, validation, CNF compilation.

A grammar is a set of context-free productions whose terminals are quoted
phrases, lexicon-class references (``@NAME``), bounded gaps (``GAP{n}``
matching 0..n arbitrary tokens), and nonterminals. Each claim type owns one
or more start productions declared with ``claim NAME priority=k -> ...``.

Compilation lowers everything to Chomsky Normal Form so the CKY matcher can
run unchanged: gaps become enumerated wildcard-token variants, phrases and
lexicon entries become token terminals, long right-hand sides are binarized
with fresh symbols, and unit productions are folded away by closure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from .corpus import tokenize
from .taxonomy import ClaimType

__all__ = [
    "Lexicon",
    "Phrase",
    "LexiconRef",
    "Gap",
    "Nonterminal",
    "Production",
    "RuleGrammar",
    "CompileError",
    "GrammarParseError",
    "CompiledGrammar",
    "ClaimMarker",
    "compile_grammar",
    "parse_grammar",
    "parse_lexicon",
    "load_lexicon_dir",
]


class GrammarParseError(ValueError):
    """Malformed grammar or lexicon text."""


class CompileError(ValueError):
    """Structurally invalid grammar (unresolved reference, empty rule)."""


@dataclass(frozen=True)
class Lexicon:
    """A named cue list; entries are 1-5 token phrases."""

    name: str
    entries: tuple[tuple[str, ...], ...]

    @staticmethod
    def from_phrases(name: str, phrases: Iterable[str]) -> "Lexicon":
        seen: dict[tuple[str, ...], None] = {}
        for phrase in phrases:
            tokens = tokenize(phrase)
            if not 1 <= len(tokens) <= 5:
                raise GrammarParseError(
                    f"lexicon {name}: entry {phrase!r} must tokenize to 1-5 tokens"
                )
            seen.setdefault(tokens, None)
        if not seen:
            raise GrammarParseError(f"lexicon {name}: no entries")
        return Lexicon(name, tuple(sorted(seen)))

    def phrases(self) -> list[str]:
        return [" ".join(entry) for entry in self.entries]


@dataclass(frozen=True)
class Phrase:
    text: str

    def tokens(self) -> tuple[str, ...]:
        return tokenize(self.text)


@dataclass(frozen=True)
class LexiconRef:
    name: str


@dataclass(frozen=True)
class Gap:
    max_skip: int


@dataclass(frozen=True)
class Nonterminal:
    name: str


Item = Union[Phrase, LexiconRef, Gap, Nonterminal]


@dataclass(frozen=True)
class Production:
    """One source-level rule; claim productions carry their claim + priority."""

    lhs: str
    rhs: tuple[Item, ...]
    rule_id: int
    claim: ClaimType | None = None
    priority: int = 0


@dataclass(frozen=True)
class RuleGrammar:
    productions: tuple[Production, ...]

    def claim_productions(self) -> list[Production]:
        return [p for p in self.productions if p.claim is not None]

    def priorities(self) -> dict[ClaimType, int]:
        out: dict[ClaimType, int] = {}
        for p in self.claim_productions():
            out[p.claim] = p.priority
        return out


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_ITEM_RE = re.compile(
    r"""\s*(?:
        "(?P<phrase>[^"]+)"
      | @(?P<lexicon>[A-Za-z_][\w]*)
      | GAP\{(?P<gap>\d+)\}
      | (?P<nonterminal>[A-Za-z_][\w]*)
    )""",
    re.VERBOSE,
)

_CLAIM_HEAD_RE = re.compile(r"^claim\s+(?P<name>[A-Z][A-Z0-9_]*)(?:\s+priority=(?P<pri>-?\d+))?$")


def _strip_comment(line: str) -> str:
    out = []
    in_quote = False
    for ch in line:
        if ch == '"':
            in_quote = not in_quote
        if ch == "#" and not in_quote:
            break
        out.append(ch)
    return "".join(out).strip()


def _parse_rhs(text: str, where: str) -> tuple[Item, ...]:
    items: list[Item] = []
    pos = 0
    while pos < len(text):
        m = _ITEM_RE.match(text, pos)
        if m is None:
            raise GrammarParseError(f"{where}: cannot parse rule item at {text[pos:]!r}")
        if m.group("phrase") is not None:
            phrase = Phrase(m.group("phrase"))
            if not phrase.tokens():
                raise GrammarParseError(f"{where}: phrase {m.group('phrase')!r} has no tokens")
            items.append(phrase)
        elif m.group("lexicon") is not None:
            items.append(LexiconRef(m.group("lexicon")))
        elif m.group("gap") is not None:
            items.append(Gap(int(m.group("gap"))))
        else:
            items.append(Nonterminal(m.group("nonterminal")))
        pos = m.end()
    if not items:
        raise GrammarParseError(f"{where}: empty production")
    return tuple(items)


def _claim_from_symbol(symbol: str) -> ClaimType:
    try:
        return ClaimType[symbol]
    except KeyError:
        raise GrammarParseError(f"unknown claim type {symbol!r}") from None


def parse_grammar(text: str) -> RuleGrammar:
    """Parse the one-production-per-line grammar format."""
    productions: list[Production] = []
    priorities: dict[ClaimType, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        where = f"line {lineno}"
        if "->" not in line:
            raise GrammarParseError(f"{where}: expected 'LHS -> items'")
        head, _, rhs_text = line.partition("->")
        head = head.strip()
        rhs = _parse_rhs(rhs_text.strip(), where)
        rule_id = len(productions)
        claim_head = _CLAIM_HEAD_RE.match(head)
        if head.startswith("claim ") or head == "claim":
            if claim_head is None:
                raise GrammarParseError(f"{where}: malformed claim declaration {head!r}")
            claim = _claim_from_symbol(claim_head.group("name"))
            if claim is ClaimType.NEUTRAL:
                raise GrammarParseError(f"{where}: Neutral cannot own rules")
            priority = int(claim_head.group("pri") or 0)
            if claim in priorities and priorities[claim] != priority:
                raise GrammarParseError(
                    f"{where}: conflicting priority for {claim.value} "
                    f"({priorities[claim]} vs {priority})"
                )
            priorities[claim] = priority
            productions.append(Production(f"CLAIM_{claim.name}", rhs, rule_id, claim, priority))
        else:
            if not re.fullmatch(r"[A-Za-z_][\w]*", head):
                raise GrammarParseError(f"{where}: bad nonterminal name {head!r}")
            productions.append(Production(head, rhs, rule_id))
    return RuleGrammar(tuple(productions))


def load_grammar(path: str | Path) -> RuleGrammar:
    return parse_grammar(Path(path).read_text(encoding="utf-8"))


def parse_lexicon(name: str, text: str) -> Lexicon:
    """Parse the one-phrase-per-line lexicon format (# comments allowed)."""
    phrases = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            phrases.append(line)
    return Lexicon.from_phrases(name, phrases)


def load_lexicon_dir(path: str | Path) -> dict[str, Lexicon]:
    """Load every ``<NAME>.txt`` in a directory as lexicon NAME."""
    out: dict[str, Lexicon] = {}
    for file in sorted(Path(path).glob("*.txt")):
        name = file.stem.upper()
        out[name] = parse_lexicon(name, file.read_text(encoding="utf-8"))
    return out


# ---------------------------------------------------------------------------
# CNF compilation
# ---------------------------------------------------------------------------

# Wildcard terminal produced by gap expansion; matches any single token.
_ANY = "\x00ANY"


@dataclass(frozen=True)
class ClaimMarker:
    claim: ClaimType
    rule_id: int
    priority: int


@dataclass
class CompiledGrammar:
    """CNF form ready for CKY.

    token_rules maps a literal token to the symbols that derive it in one
    step; any_rules derive an arbitrary single token; binary_by_left indexes
    A -> B C rules by B for the inner CKY loop. claim_markers maps the start
    symbol of each claim production back to its claim and provenance.
    """

    token_rules: dict[str, frozenset[str]]
    any_rules: frozenset[str]
    binary_by_left: dict[str, tuple[tuple[str, str], ...]]
    claim_markers: dict[str, ClaimMarker]
    priorities: dict[ClaimType, int] = field(default_factory=dict)

    def symbols_for_token(self, token: str) -> frozenset[str]:
        direct = self.token_rules.get(token)
        if direct is None:
            return self.any_rules
        return direct | self.any_rules


def _expand_gaps(rhs: Sequence[Item], where: str) -> list[tuple[Item, ...]]:
    """Replace each Gap with 0..max wildcard tokens, enumerating variants."""
    variants: list[list[Item]] = [[]]
    for item in rhs:
        if isinstance(item, Gap):
            if item.max_skip < 0:
                raise CompileError(f"{where}: negative gap length")
            new_variants = []
            for prefix in variants:
                for k in range(item.max_skip + 1):
                    new_variants.append(prefix + [Phrase(_ANY)] * k)
            variants = new_variants
        else:
            variants = [prefix + [item] for prefix in variants]
    out = [tuple(v) for v in variants if v]
    if not out:
        raise CompileError(f"{where}: production derives only the empty string")
    return out


def compile_grammar(
    grammar: RuleGrammar, lexicons: Mapping[str, Lexicon] | Iterable[Lexicon] = ()
) -> CompiledGrammar:
    """Lower a rule grammar plus its lexicons to CNF.

    Raises CompileError for unresolved lexicon or nonterminal references and
    for productions that can only derive the empty string. Output is
    deterministic for identical input.
    """
    if not isinstance(lexicons, Mapping):
        lexicons = {lex.name: lex for lex in lexicons}

    defined = {p.lhs for p in grammar.productions if p.claim is None}
    lexicon_symbols: dict[str, str] = {}

    # Stage 1: symbol-level productions (lhs, rhs of terminal/NT atoms).
    # Terminals are ("t", token); nonterminals are ("n", name).
    sym_prods: list[tuple[str, tuple[tuple[str, str], ...]]] = []
    claim_markers: dict[str, ClaimMarker] = {}

    def add_production(lhs: str, items: tuple[Item, ...], where: str) -> None:
        for variant in _expand_gaps(items, where):
            atoms: list[tuple[str, str]] = []
            for item in variant:
                if isinstance(item, Phrase):
                    if item.text == _ANY:
                        atoms.append(("t", _ANY))
                    else:
                        toks = item.tokens()
                        if not toks:
                            raise CompileError(f"{where}: empty phrase")
                        atoms.extend(("t", tok) for tok in toks)
                elif isinstance(item, LexiconRef):
                    if item.name not in lexicons:
                        raise CompileError(f"{where}: unresolved lexicon reference {item.name}")
                    atoms.append(("n", _lexicon_symbol(item.name)))
                elif isinstance(item, Nonterminal):
                    if item.name not in defined:
                        raise CompileError(f"{where}: undefined nonterminal {item.name}")
                    atoms.append(("n", item.name))
                else:  # pragma: no cover - gaps were expanded above
                    raise CompileError(f"{where}: unexpected item {item!r}")
            sym_prods.append((lhs, tuple(atoms)))

    def _lexicon_symbol(name: str) -> str:
        sym = lexicon_symbols.get(name)
        if sym is None:
            sym = f"LEX_{name}"
            lexicon_symbols[name] = sym
            for entry in lexicons[name].entries:
                sym_prods.append((sym, tuple(("t", tok) for tok in entry)))
        return sym

    for prod in grammar.productions:
        where = f"rule {prod.rule_id} ({prod.lhs})"
        if not prod.rhs:
            raise CompileError(f"{where}: empty production")
        if prod.claim is not None:
            marker = f"CLAIM_{prod.claim.name}_{prod.rule_id}"
            claim_markers[marker] = ClaimMarker(prod.claim, prod.rule_id, prod.priority)
            add_production(marker, prod.rhs, where)
        else:
            add_production(prod.lhs, prod.rhs, where)

    # Stage 2: promote terminals inside long rules, then binarize.
    preterminals: dict[str, str] = {}
    terminal_rules: list[tuple[str, str]] = []  # (symbol, token-or-ANY)
    binary_rules: list[tuple[str, str, str]] = []  # A -> B C
    unit_rules: list[tuple[str, str]] = []  # A -> B
    fresh_count = 0

    def preterminal(token: str) -> str:
        sym = preterminals.get(token)
        if sym is None:
            sym = f"_T{len(preterminals)}"
            preterminals[token] = sym
            terminal_rules.append((sym, token))
        return sym

    for lhs, atoms in sym_prods:
        if len(atoms) == 1:
            kind, value = atoms[0]
            if kind == "t":
                terminal_rules.append((lhs, value))
            else:
                unit_rules.append((lhs, value))
            continue
        symbols = [value if kind == "n" else preterminal(value) for kind, value in atoms]
        current = lhs
        while len(symbols) > 2:
            fresh = f"_B{fresh_count}"
            fresh_count += 1
            binary_rules.append((current, symbols[0], fresh))
            current = fresh
            symbols = symbols[1:]
        binary_rules.append((current, symbols[0], symbols[1]))

    # Stage 3: unit closure. reachable[B] = all A with A =>* B via unit rules.
    reachable: dict[str, set[str]] = {}
    unit_edges: dict[str, set[str]] = {}
    for a, b in unit_rules:
        unit_edges.setdefault(a, set()).add(b)
    all_lhs = {lhs for lhs, _ in sym_prods} | set(claim_markers)
    for start in all_lhs | {b for _, b in unit_rules}:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in unit_edges.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        for target in seen:
            reachable.setdefault(target, set()).add(start)

    def owners(symbol: str) -> set[str]:
        return reachable.get(symbol, {symbol})

    token_rules: dict[str, set[str]] = {}
    any_set: set[str] = set()
    binary_by_left: dict[str, list[tuple[str, str]]] = {}
    for sym, token in terminal_rules:
        for owner in owners(sym):
            if token == _ANY:
                any_set.add(owner)
            else:
                token_rules.setdefault(token, set()).add(owner)
    seen_binary: set[tuple[str, str, str]] = set()
    for a, b, c in binary_rules:
        for owner in owners(a):
            rule = (owner, b, c)
            if rule not in seen_binary:
                seen_binary.add(rule)
                binary_by_left.setdefault(b, []).append((c, owner))

    return CompiledGrammar(
        token_rules={tok: frozenset(syms) for tok, syms in token_rules.items()},
        any_rules=frozenset(any_set),
        binary_by_left={b: tuple(rules) for b, rules in binary_by_left.items()},
        claim_markers=claim_markers,
        priorities=grammar.priorities(),
    )
