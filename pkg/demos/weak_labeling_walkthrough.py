"""
Weak labeling walkthrough
=========================

Build a tiny rule grammar by hand, match it against a few sentences with
the chart parser, and watch the winner-selection policy arbitrate between
competing claim candidates. Then run the packaged default grammar over a
realistic comment.
"""

from claimkit import (
    Sentence,
    compile_grammar,
    default_compiled_grammar,
    label_corpus,
    match_tokens,
    parse_grammar,
    parse_lexicon,
    pick_winner,
)

# A grammar is a list of productions. Claim declarations look like
# `claim NAME priority=p -> items`; quoted strings are literal phrases,
# @NAME references a lexicon, and GAP{n} skips up to n arbitrary tokens.
GRAMMAR_TEXT = """\
claim EXPLICIT_SUPPORT priority=2 -> @FIRST_PERSON GAP{1} "support"
claim BURDENSOME priority=1 -> "too costly"
claim BURDENSOME priority=1 -> @COST_NOUN GAP{3} "burden"
"""

LEXICONS = {
    "FIRST_PERSON": parse_lexicon("FIRST_PERSON", "i\nwe\n"),
    "COST_NOUN": parse_lexicon("COST_NOUN", "compliance\nrecordkeeping\n"),
}

grammar = parse_grammar(GRAMMAR_TEXT)
compiled = compile_grammar(grammar, LEXICONS)

# match_tokens returns every maximal (claim, span) hit with the lowest
# rule id that produced it.
tokens = "we strongly support this rule but compliance is a heavy burden".split()
for label in match_tokens(tokens, compiled, sentence_id=0):
    lo, hi = label.span
    print(f"{label.claim.value:20s} span={label.span} text={' '.join(tokens[lo:hi])!r}")

# Both claims matched. pick_winner applies the resolution policy: deeper
# taxonomy nodes first, then declared priority, then longer span, then the
# earlier rule. Both claims sit at the same depth, so BURDENSOME wins on
# its lower priority number.
winner = pick_winner(match_tokens(tokens, compiled, sentence_id=0), priorities=compiled.priorities)
print("winner:", winner.claim.value)

# The packaged grammar covers all sixteen argument types. label_corpus maps
# every sentence to exactly one claim; sentences with no match are Neutral.
sentences = [
    Sentence.make(0, "DEMO-1", 0, "I strongly support the proposed rule."),
    Sentence.make(1, "DEMO-1", 1, "The recordkeeping requirement is too costly for small firms."),
    Sentence.make(2, "DEMO-1", 2, "Please clarify what counts as a covered transaction."),
    Sentence.make(3, "DEMO-1", 3, "Our plant operates three shifts year round."),
]
labels = label_corpus(sentences, default_compiled_grammar())
for s in sentences:
    print(f"[{labels[s.sentence_id].value}] {s.text}")
