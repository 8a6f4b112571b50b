"""
Form-letter collapse and candidate clustering
=============================================

Mass-mail campaigns flood comment dockets with near-identical sentences.
Deduplication keeps one representative per family so downstream training
does not overfit to a single template. Afterwards, cluster the surviving
neutral sentences to surface candidate cue phrases worth adding to the
grammar.
"""

import numpy as np

from claimkit import (
    Comment,
    DedupConfig,
    cluster_candidates,
    dedup,
    segment_corpus,
)

# Three handwritten comments plus two copies of a campaign template that
# differ only in the signer's sector. The tiny edit keeps the sentences
# above 95% similar, so they collapse onto the first copy.
TEMPLATE = "I urge the agency to withdraw this deeply flawed proposal because it will hurt {} businesses."
comments = [
    Comment("C-0", "EPA-2024-0001", "EPA", TEMPLATE.format("farming")),
    Comment("C-1", "EPA-2024-0001", "EPA", TEMPLATE.format("fishing")),
    Comment("C-2", "EPA-2024-0001", "EPA", "The monitoring window should be extended to ninety days."),
    Comment("C-3", "EPA-2024-0001", "EPA", "Our cooperative files these reports quarterly already."),
    Comment("C-4", "EPA-2024-0001", "EPA", "Please clarify whether subcontractors are covered."),
]

sentences = segment_corpus(comments)
kept = dedup(sentences, DedupConfig(similarity_threshold=0.95))
print(f"kept {len(kept)} of {len(sentences)} sentences")
for s in kept:
    print(f"  [{s.comment_id}] {s.text}")

# dedup is idempotent: running it again changes nothing.
assert dedup(kept, DedupConfig(similarity_threshold=0.95)) == kept

# Cluster the survivors with seeded k-means over bag-of-words vectors.
# Real pipelines use sentence embeddings; a one-hot vocabulary keeps the
# demo self-contained. Each cluster names an exemplar, the member closest
# to the centroid, which is the sentence a reviewer would read first.
vocab = sorted({t for s in kept for t in s.tokens})
col = {t: i for i, t in enumerate(vocab)}
X = np.zeros((len(kept), len(vocab)))
for row, s in enumerate(kept):
    for t in s.tokens:
        X[row, col[t]] += 1.0

for cluster in cluster_candidates(kept, X, k=2, seed=0):
    exemplar = next(s for s in kept if s.sentence_id == cluster.exemplar_id)
    print(f"cluster {cluster.cluster_id}: {len(cluster.sentence_ids)} sentences")
    print(f"  exemplar: {exemplar.text}")
