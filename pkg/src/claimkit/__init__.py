"""Weak-supervision claim labeling and classification for rulemaking comments.

The pipeline: ingest public comments, segment them into sentences, drop
near-duplicates, weak-label each sentence with a rule grammar matched by a
chart parser, then train linear classifiers over n-gram and sentence-vector
features. A small HTTP service exposes the label-review workbench.
"""

from .bundle import (
    ModelBundle,
    Strategy,
    load_bundle,
    predict_claims,
    predict_records,
    save_bundle,
    train_bundle,
    train_fasttext_bundle,
)
from .cky import WeakLabel, cky_match, match_tokens
from .corpus import (
    ApiClient,
    ApiClientConfig,
    Comment,
    DedupConfig,
    FetchError,
    Sentence,
    dedup,
    fetch_comments,
    make_count_filter,
    segment_sentences,
    segment_corpus,
    tokenize,
)
from .defaults import (
    default_compiled_grammar,
    default_grammar,
    default_grammar_text,
    default_lexicon_texts,
    default_lexicons,
    load_toy_vectors,
)
from .evaluation import (
    ExperimentConfig,
    ExperimentReport,
    MetricsReport,
    SearchSpace,
    SplitConfig,
    metrics,
    run_experiment,
    search,
    stratified_split,
    top_ngrams,
    validate_task,
)
from .features import (
    EmbeddingTable,
    NgramVocab,
    build_vocab,
    design_matrix,
    embedding_matrix,
    sif_embed,
)
from .grammar import (
    CompiledGrammar,
    CompileError,
    GrammarParseError,
    Lexicon,
    RuleGrammar,
    compile_grammar,
    load_grammar,
    load_lexicon_dir,
    parse_grammar,
    parse_lexicon,
)
from .labeler import (
    Cluster,
    cluster_candidates,
    label_corpus,
    pick_winner,
    read_labels_jsonl,
    read_weak_labels_jsonl,
    weak_label_corpus,
    write_labels_jsonl,
)
from .models import (
    FastTextModel,
    LinearModel,
    TrainConfig,
    balanced_weights,
    loss_and_grad,
    predict_proba,
    train,
    train_fasttext_like,
)
from .service import create_app
from .store import DuplicatePhraseError, Workspace
from .synthetic import SyntheticConfig, synthetic_corpus
from .taxonomy import ClaimType, Stance, Taxonomy, default_taxonomy

__version__ = "0.1.0"

__all__ = [
    "ApiClient",
    "ApiClientConfig",
    "ClaimType",
    "Cluster",
    "Comment",
    "CompileError",
    "CompiledGrammar",
    "DedupConfig",
    "DuplicatePhraseError",
    "EmbeddingTable",
    "ExperimentConfig",
    "ExperimentReport",
    "FetchError",
    "GrammarParseError",
    "Lexicon",
    "FastTextModel",
    "LinearModel",
    "MetricsReport",
    "ModelBundle",
    "NgramVocab",
    "RuleGrammar",
    "SearchSpace",
    "Sentence",
    "SplitConfig",
    "Stance",
    "Strategy",
    "SyntheticConfig",
    "Taxonomy",
    "TrainConfig",
    "WeakLabel",
    "Workspace",
    "balanced_weights",
    "build_vocab",
    "cky_match",
    "match_tokens",
    "cluster_candidates",
    "compile_grammar",
    "create_app",
    "dedup",
    "default_compiled_grammar",
    "default_grammar",
    "default_grammar_text",
    "default_lexicon_texts",
    "default_lexicons",
    "default_taxonomy",
    "design_matrix",
    "embedding_matrix",
    "fetch_comments",
    "label_corpus",
    "load_bundle",
    "load_grammar",
    "load_lexicon_dir",
    "load_toy_vectors",
    "loss_and_grad",
    "make_count_filter",
    "metrics",
    "parse_grammar",
    "parse_lexicon",
    "pick_winner",
    "predict_claims",
    "predict_proba",
    "predict_records",
    "read_labels_jsonl",
    "read_weak_labels_jsonl",
    "run_experiment",
    "save_bundle",
    "search",
    "segment_corpus",
    "segment_sentences",
    "sif_embed",
    "stratified_split",
    "synthetic_corpus",
    "tokenize",
    "top_ngrams",
    "train",
    "train_bundle",
    "train_fasttext_bundle",
    "train_fasttext_like",
    "validate_task",
    "weak_label_corpus",
    "write_labels_jsonl",
]
