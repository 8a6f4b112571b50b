"""
The grammar-expansion loop
==========================

The annotation workflow is iterative: label the corpus, find sentences the
grammar missed, add a cue phrase to a lexicon, and relabel. Versioned
snapshots make every labeling run reproducible. This script walks one turn
of that loop on a disk-backed workspace.
"""

import tempfile

from claimkit import (
    Comment,
    Workspace,
    compile_grammar,
    default_grammar_text,
    default_lexicon_texts,
    segment_corpus,
    weak_label_corpus,
)

workdir = tempfile.mkdtemp(prefix="claimkit-demo-")
ws = Workspace(workdir)
print(f"workspace at {workdir}")

comments = [
    Comment("C-0", "DOL-2024-0003", "DOL", "We fully support this proposal."),
    Comment("C-1", "DOL-2024-0003", "DOL", "This onerous new rule is unacceptable."),
    Comment("C-2", "DOL-2024-0003", "DOL", "The filing window opens in March."),
]
ws.write_comments(comments)
ws.write_sentences(segment_corpus(comments))

# Version 1 is the packaged starter grammar.
v1 = ws.create_version(default_grammar_text(), default_lexicon_texts(), note="seed")


def relabel(version: int) -> dict:
    grammar, lexicons = ws.load_version(version)
    labels = weak_label_corpus(ws.read_sentences(), compile_grammar(grammar, lexicons))
    ws.write_labels(labels, grammar_version=version)
    return {
        s.sentence_id: ("Neutral" if labels[s.sentence_id] is None else labels[s.sentence_id].claim.value)
        for s in ws.read_sentences()
    }


before = relabel(v1)
for s in ws.read_sentences():
    print(f"v{v1} [{before[s.sentence_id]}] {s.text}")

# C-1 slipped through: "onerous" is not in the negative-polarity lexicon, so
# the POLARITY_NP rule never fires on it. Add the phrase and relabel. Each
# addition mints a new immutable version with the old one as its parent.
v2 = ws.add_lexicon_phrase(v1, "POLARITY_NEG", "onerous", note="reviewer pass 1")
after = relabel(v2)

changed = {sid: (before[sid], after[sid]) for sid in before if before[sid] != after[sid]}
print(f"v{v2} changed {len(changed)} sentence(s):")
for sid, (old, new) in changed.items():
    print(f"  sentence {sid}: {old} -> {new}")
print("versions on disk:", ws.list_versions())
