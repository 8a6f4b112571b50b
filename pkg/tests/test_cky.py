import random

from claimkit.cky import cky_match, match_tokens
from claimkit.grammar import compile_grammar, parse_grammar, parse_lexicon
from claimkit.taxonomy import ClaimType
from conftest import make_sentence
from gen import random_grammar_text, random_lexicons, random_tokens
from oracles import oracle_match


def _compile(text, lexicon_texts=None):
    grammar = parse_grammar(text)
    lexicons = {
        name: parse_lexicon(name, body) for name, body in (lexicon_texts or {}).items()
    }
    return grammar, lexicons, compile_grammar(grammar, lexicons)


def test_single_token_rule():
    _, _, cg = _compile('claim LEGAL_CHALLENGE -> "lawsuit"\n')
    labels = match_tokens(["a", "lawsuit", "b"], cg)
    assert [(l.claim, l.span, l.rule_id) for l in labels] == [
        (ClaimType.LEGAL_CHALLENGE, (1, 2), 0)
    ]


def test_phrase_spans_multiple_tokens():
    _, _, cg = _compile('claim BURDENSOME -> "too costly to follow"\n')
    labels = match_tokens("this is too costly to follow now".split(), cg)
    assert [(l.span, l.rule_id) for l in labels] == [((2, 6), 0)]


def test_gap_matches_zero_to_max():
    _, _, cg = _compile('claim BURDENSOME -> "bad" GAP{2} "rule"\n')
    for middle, expect in [([], (0, 2)), (["x"], (0, 3)), (["x", "y"], (0, 4))]:
        labels = match_tokens(["bad", *middle, "rule"], cg)
        assert [l.span for l in labels] == [expect], middle
    assert match_tokens(["bad", "x", "y", "z", "rule"], cg) == []


def test_gap_only_rule_never_matches_empty():
    _, _, cg = _compile("claim BURDENSOME -> GAP{2}\n")
    assert match_tokens([], cg) == []
    assert [l.span for l in match_tokens(["x"], cg)] == [(0, 1)]
    # widths 1 and 2 both derive; only the maximal span survives
    assert [l.span for l in match_tokens(["x", "y"], cg)] == [(0, 2)]


def test_lexicon_multi_token_entries():
    _, _, cg = _compile(
        "claim LIKELY_OPPOSITION -> @NEG\n", {"NEG": "bad\nvery bad\n"}
    )
    labels = match_tokens(["very", "bad"], cg)
    # the two-token entry strictly contains the one-token match
    assert [l.span for l in labels] == [(0, 2)]


def test_maximal_spans_kept_per_claim():
    text = 'claim BURDENSOME -> "a b c"\nclaim BURDENSOME -> "b"\n'
    _, _, cg = _compile(text)
    labels = match_tokens(["a", "b", "c"], cg)
    assert [(l.span, l.rule_id) for l in labels] == [((0, 3), 0)]


def test_overlapping_non_nested_spans_both_kept():
    text = 'claim BURDENSOME -> "a b"\nclaim BURDENSOME -> "b c"\n'
    _, _, cg = _compile(text)
    labels = match_tokens(["a", "b", "c"], cg)
    assert [(l.span, l.rule_id) for l in labels] == [((0, 2), 0), ((1, 3), 1)]


def test_min_rule_id_wins_per_span():
    text = 'claim BURDENSOME -> "bad"\nclaim BURDENSOME -> @NEG\n'
    _, _, cg = _compile(text, {"NEG": "bad\n"})
    labels = match_tokens(["bad"], cg)
    assert [(l.span, l.rule_id) for l in labels] == [((0, 1), 0)]


def test_claims_tracked_independently():
    text = 'claim BURDENSOME -> "a b c"\nclaim LEGAL_CHALLENGE -> "b"\n'
    _, _, cg = _compile(text)
    labels = match_tokens(["a", "b", "c"], cg)
    assert [(l.claim, l.span) for l in labels] == [
        (ClaimType.BURDENSOME, (0, 3)),
        (ClaimType.LEGAL_CHALLENGE, (1, 2)),
    ]


def test_nonterminal_chain_and_helper():
    text = (
        "NP -> @NEG GAP{1} @NOUN\n"
        "claim LIKELY_OPPOSITION priority=2 -> NP\n"
    )
    _, _, cg = _compile(text, {"NEG": "harsh\noverly harsh\n", "NOUN": "rule\n"})
    labels = match_tokens(["an", "overly", "harsh", "new", "rule"], cg)
    assert [l.span for l in labels] == [(1, 5)]


def test_empty_inputs():
    _, _, cg = _compile('claim BURDENSOME -> "x"\n')
    assert match_tokens([], cg) == []
    sent = make_sentence(7, "")
    assert cky_match(sent, cg) == []


def test_sentence_id_propagates():
    _, _, cg = _compile('claim BURDENSOME -> "costly"\n')
    sent = make_sentence(42, "Costly!")
    (label,) = cky_match(sent, cg)
    assert label.sentence_id == 42
    assert label.to_record() == {
        "sentence_id": 42,
        "claim": "Burdensome",
        "rule_id": 0,
        "span": [0, 1],
    }


def test_random_equivalence_small():
    # a small copy of the acceptance loop for fast feedback
    rng = random.Random(99)
    for trial in range(60):
        text = random_grammar_text(rng)
        lexicon_texts = random_lexicons(rng)
        grammar, lexicons, cg = _compile(text, lexicon_texts)
        tokens = random_tokens(rng)
        got = match_tokens(tokens, cg, sentence_id=trial)
        expect = oracle_match(tokens, grammar, lexicons, sentence_id=trial)
        assert got == expect, f"trial {trial}\n{text}\n{tokens}"
