"""Command-line pipeline over a workspace directory.

Stages write the module file formats into a fixed layout (corpus/, labels/,
grammar/, models/, reports/) so they compose by convention. Re-running any
stage with identical inputs and seed produces byte-identical outputs. Exit
codes: 0 success, 2 missing input, 3 validation failure; errors print one
JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import bundle as bundle_mod
from .corpus import (
    ApiClient,
    ApiClientConfig,
    DedupConfig,
    FetchError,
    dedup,
    fetch_comments,
    make_count_filter,
    segment_corpus,
)
from .defaults import default_grammar, default_lexicons
from .evaluation import (
    ExperimentConfig,
    SearchSpace,
    SplitConfig,
    run_experiment,
    stratified_split,
    top_ngrams,
    write_trials_jsonl,
)
from .features import EmbeddingTable, build_vocab, embedding_matrix
from .grammar import compile_grammar, load_grammar, load_lexicon_dir
from .labeler import cluster_candidates, read_labels_jsonl, weak_label_corpus
from .models import TrainConfig
from .store import Workspace
from .taxonomy import ClaimType
from .bundle import Strategy, load_bundle, predict_records, save_bundle

__all__ = ["main"]


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _missing(message: str) -> CliError:
    return CliError(2, "missing_input", message)


def _invalid(message: str) -> CliError:
    return CliError(3, "validation", message)


def _require_file(path: Path, what: str) -> Path:
    if not path.exists():
        raise _missing(f"{what} not found: {path}")
    return path


def _normalize_strategy(name: str) -> str:
    return name.replace("-", "_")


def _load_embedding(args, ws: Workspace) -> EmbeddingTable | None:
    path = getattr(args, "vectors", None)
    if path:
        return EmbeddingTable.load(_require_file(Path(path), "vector file"))
    if ws.vectors_path.exists():
        return EmbeddingTable.load(ws.vectors_path)
    return None


def _read_labeled_corpus(ws: Workspace):
    sentences = ws.read_sentences() if ws.sentences_path.exists() else None
    if sentences is None:
        raise _missing(f"sentence store not found: {ws.sentences_path}")
    _require_file(ws.labels_path, "label file")
    claims = read_labels_jsonl(ws.labels_path)
    missing = [s.sentence_id for s in sentences if s.sentence_id not in claims]
    if missing:
        raise _invalid(f"{len(missing)} sentences lack labels (first: {missing[0]})")
    return sentences, claims


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    ws = Workspace(args.workspace)
    docket_filter = None
    if args.more_than is not None or args.fewer_than is not None:
        docket_filter = make_count_filter(args.more_than, args.fewer_than)
    source = args.input
    client = None
    if source.startswith(("http://", "https://")):
        client = ApiClient(
            ApiClientConfig(
                base_url=source,
                api_key_header=os.environ.get("CLAIMKIT_API_KEY_HEADER", "X-Api-Key"),
                api_key=os.environ.get("CLAIMKIT_API_KEY"),
                requests_per_second=args.requests_per_second,
            )
        )
    else:
        _require_file(Path(source), "comment file")
    result = fetch_comments(source, docket_filter, client)
    ws.write_comments(result.comments)
    print(f"ingested {len(result.comments)} comments (skipped {result.skipped})")
    return 0


def cmd_segment(args) -> int:
    ws = Workspace(args.workspace)
    _require_file(ws.comments_path, "comment store")
    comments = ws.read_comments()
    sentences = segment_corpus(comments)
    ws.write_sentences(sentences)
    print(f"segmented {len(comments)} comments into {len(sentences)} sentences")
    return 0


def cmd_dedup(args) -> int:
    ws = Workspace(args.workspace)
    _require_file(ws.sentences_path, "sentence store")
    try:
        cfg = DedupConfig(similarity_threshold=args.threshold)
    except ValueError as exc:
        raise _invalid(str(exc))
    sentences = ws.read_sentences()
    kept = dedup(sentences, cfg)
    ws.write_sentences(kept)
    print(f"kept {len(kept)} of {len(sentences)} sentences (threshold {cfg.similarity_threshold})")
    return 0


def cmd_label(args) -> int:
    ws = Workspace(args.workspace)
    _require_file(ws.sentences_path, "sentence store")
    if args.grammar:
        grammar = load_grammar(_require_file(Path(args.grammar), "grammar file"))
    else:
        grammar = default_grammar()
    if args.lexicon_dir:
        lex_dir = Path(args.lexicon_dir)
        if not lex_dir.is_dir():
            raise _missing(f"lexicon directory not found: {lex_dir}")
        lexicons = load_lexicon_dir(lex_dir)
    else:
        lexicons = default_lexicons()
    compiled = compile_grammar(grammar, lexicons)
    sentences = ws.read_sentences()
    labels = weak_label_corpus(sentences, compiled)
    ws.write_labels(labels)
    argumentative = sum(1 for v in labels.values() if v is not None)
    print(f"labeled {len(labels)} sentences; {argumentative} argumentative")
    return 0


def cmd_cluster(args) -> int:
    ws = Workspace(args.workspace)
    _require_file(ws.sentences_path, "sentence store")
    sentences = ws.read_sentences()
    claims = (
        read_labels_jsonl(ws.labels_path) if ws.labels_path.exists() else {}
    )
    pool_name = args.pool
    if pool_name == "all":
        pool = sentences
    else:
        try:
            wanted = ClaimType(pool_name)
        except ValueError:
            raise _invalid(f"unknown pool {pool_name!r}")
        pool = [
            s
            for s in sentences
            if claims.get(s.sentence_id, ClaimType.NEUTRAL) is wanted
        ]
    if not pool:
        raise _invalid(f"pool {pool_name!r} has no sentences")
    if args.k < 1 or args.k > len(pool):
        raise _invalid(f"k must lie in [1, {len(pool)}]")
    emb = _load_embedding(args, ws)
    vectors = embedding_matrix(pool, emb, seed=args.seed)
    clusters = cluster_candidates(pool, vectors, args.k, seed=args.seed)
    by_id = {s.sentence_id: s for s in pool}
    doc = {
        "k": args.k,
        "pool": pool_name,
        "seed": args.seed,
        "clusters": [
            {
                "cluster_id": c.cluster_id,
                "size": len(c.sentence_ids),
                "exemplar": by_id[c.exemplar_id].to_record(),
                "sentence_ids": sorted(c.sentence_ids),
            }
            for c in clusters
        ],
    }
    out = ws.report_path(f"clusters-k{args.k}-{pool_name}")
    out.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_split(args) -> int:
    ws = Workspace(args.workspace)
    sentences, claims = _read_labeled_corpus(ws)
    labels = [claims[s.sentence_id].value for s in sentences]
    cfg = SplitConfig(seed=args.seed)
    try:
        train_idx, dev_idx, test_idx = stratified_split(labels, cfg)
    except ValueError as exc:
        raise _invalid(str(exc))
    doc = {
        "seed": args.seed,
        "fractions": [cfg.train_fraction, cfg.dev_fraction, cfg.test_fraction],
        "train": [sentences[i].sentence_id for i in train_idx],
        "dev": [sentences[i].sentence_id for i in dev_idx],
        "test": [sentences[i].sentence_id for i in test_idx],
    }
    out = ws.path("labels", "split.json")
    out.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
    print(
        f"split {len(labels)} sentences into {len(train_idx)}/{len(dev_idx)}/{len(test_idx)}"
    )
    return 0


def _train_config(args) -> TrainConfig:
    cfg = TrainConfig(seed=args.seed)
    if args.epochs is not None:
        cfg = replace(cfg, epochs=args.epochs)
    if args.l2 is not None:
        cfg = replace(cfg, l2=args.l2)
    if args.learning_rate is not None:
        cfg = replace(cfg, learning_rate=args.learning_rate)
    return cfg


def cmd_train(args) -> int:
    ws = Workspace(args.workspace)
    sentences, claims = _read_labeled_corpus(ws)
    strategy = _normalize_strategy(args.strategy)
    if args.family == "fasttext" and strategy != "flat":
        raise _invalid("the fasttext family only supports the flat strategy")
    try:
        strategy_enum = Strategy(strategy)
    except ValueError:
        raise _invalid(f"unknown strategy {args.strategy!r}")
    labels = [claims[s.sentence_id] for s in sentences]
    try:
        train_idx, _, _ = stratified_split([c.value for c in labels], SplitConfig(seed=args.seed))
    except ValueError as exc:
        raise _invalid(str(exc))
    train_sents = [sentences[i] for i in train_idx]
    train_claims = [labels[i] for i in train_idx]
    vocab = build_vocab(train_sents, args.vocab_size)
    emb = _load_embedding(args, ws)
    if emb is not None:
        emb.fit(train_sents)
    cfg = _train_config(args)
    try:
        if args.family == "fasttext":
            trained = bundle_mod.train_fasttext_bundle(
                train_sents, train_claims, vocab, cfg=cfg
            )
        else:
            trained = bundle_mod.train_bundle(
                strategy_enum, train_sents, train_claims, vocab, embedding=emb, cfg=cfg
            )
    except ValueError as exc:
        raise _invalid(str(exc))
    name = args.name or strategy
    out = ws.bundle_path(name)
    save_bundle(trained, out)
    print(f"wrote {out}")
    return 0


def cmd_evaluate(args) -> int:
    ws = Workspace(args.workspace)
    sentences, claims = _read_labeled_corpus(ws)
    strategy = _normalize_strategy(args.strategy)
    search = None
    if args.search_budget:
        search = SearchSpace(budget=args.search_budget, seed=args.seed)
    cfg = ExperimentConfig(
        split=SplitConfig(seed=args.seed),
        train=_train_config(args),
        family=args.family,
        vocab_size=args.vocab_size,
        embedding=_load_embedding(args, ws),
        search=search,
        seed=args.seed,
    )
    try:
        report = run_experiment(sentences, claims, strategy, args.task, cfg)
    except ValueError as exc:
        raise _invalid(str(exc))
    name = f"{args.task}-{strategy}".replace("+", "-")
    report.write(ws.report_path(name))
    ws.write_latest_report(report.to_dict())
    if report.trials:
        write_trials_jsonl(report.trials, ws.path("reports", f"{name}-trials.jsonl"))
    print(
        f"task={args.task} strategy={strategy} test_macro_f1={report.metrics.macro_f1:.4f} "
        f"report={ws.report_path(name)}"
    )
    return 0


def cmd_predict(args) -> int:
    ws = Workspace(args.workspace)
    model_path = _require_file(Path(args.model), "model bundle")
    try:
        loaded = load_bundle(model_path)
    except (ValueError, KeyError) as exc:
        raise _invalid(f"cannot load bundle: {exc}")
    if args.input:
        from .corpus import read_sentences_jsonl

        sentences = read_sentences_jsonl(_require_file(Path(args.input), "sentence file"))
    else:
        _require_file(ws.sentences_path, "sentence store")
        sentences = ws.read_sentences()
    records = predict_records(loaded, sentences)
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if args.output:
        Path(args.output).write_text(lines, encoding="utf-8")
        print(f"wrote {len(records)} predictions to {args.output}")
    else:
        sys.stdout.write(lines)
    return 0


_COMPONENT_ORDER = ("flat", "ensemble", "claim_type", "support_type", "oppose_type", "claim_id")


def cmd_inspect_weights(args) -> int:
    model_path = _require_file(Path(args.model), "model bundle")
    try:
        loaded = load_bundle(model_path)
    except (ValueError, KeyError) as exc:
        raise _invalid(f"cannot load bundle: {exc}")
    if loaded.fasttext is not None:
        raise _invalid("bundle holds a learned-embedding model with no n-gram weights")
    try:
        claim = ClaimType(args.claim)
    except ValueError:
        raise _invalid(f"unknown class {args.claim!r}")
    component = None
    for name in _COMPONENT_ORDER:
        model = loaded.components.get(name)
        if model is not None and claim in model.classes:
            component = name
            break
    if component is None:
        raise _invalid(f"no component model covers class {args.claim!r}")
    ranked = top_ngrams(loaded.components[component], claim, loaded.vocab, k=args.k)
    for ngram, weight in ranked:
        print(f"{ngram}\t{weight:.6f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ws = Workspace(args.workspace, create=False)
    app = create_app(ws, seed=args.seed)
    if args.static:
        from fastapi.staticfiles import StaticFiles

        static_dir = Path(args.static)
        if not static_dir.is_dir():
            raise _missing(f"static directory not found: {static_dir}")
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workspace", default="workspace", help="workspace directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")


def _add_model_opts(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", choices=("ngram", "fasttext"), default="ngram")
    parser.add_argument("--vocab-size", type=int, default=30_000)
    parser.add_argument("--vectors", help="pretrained vector file for dense features")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--l2", type=float, default=None)
    parser.add_argument("--learning-rate", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimkit", description="claim labeling and classification pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read comments from a file or API into the workspace")
    _add_common(p)
    p.add_argument("--input", required=True, help="JSON-lines file or API base URL")
    p.add_argument("--more-than", type=int, default=None, help="keep dockets with more comments")
    p.add_argument("--fewer-than", type=int, default=None, help="keep dockets with fewer comments")
    p.add_argument("--requests-per-second", type=float, default=4.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="split comments into sentences")
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("dedup", help="drop near-duplicate sentences")
    _add_common(p)
    p.add_argument("--threshold", type=float, default=0.95)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("label", help="weak-label sentences with the rule grammar")
    _add_common(p)
    p.add_argument("--grammar", help="grammar file (default: packaged starter)")
    p.add_argument("--lexicon-dir", help="lexicon directory (default: packaged starter)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("cluster", help="cluster a sentence pool for cue review")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--pool", default=ClaimType.NEUTRAL.value, help="claim name or 'all'")
    p.add_argument("--vectors", help="pretrained vector file for embeddings")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("split", help="write the stratified train/dev/test split")
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a model bundle on the train split")
    _add_common(p)
    _add_model_opts(p)
    p.add_argument("--strategy", required=True, help="flat|two-stage|hierarchical|ensemble")
    p.add_argument("--name", help="bundle file name (default: strategy)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="run one evaluation task and write its report")
    _add_common(p)
    _add_model_opts(p)
    p.add_argument("--strategy", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--search-budget", type=int, default=0, help="random-search trials on dev")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="label sentences with a trained bundle")
    _add_common(p)
    p.add_argument("--model", required=True, help="bundle file")
    p.add_argument("--input", help="sentence JSON-lines (default: workspace store)")
    p.add_argument("--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("inspect-weights", help="top-weighted n-grams for one class")
    _add_common(p)
    p.add_argument("--model", required=True, help="bundle file")
    p.add_argument("--class", dest="claim", required=True, help="claim type name")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_inspect_weights)

    p = sub.add_parser("serve", help="run the workbench HTTP service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--static", help="directory of workbench assets to serve at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(
            json.dumps({"error": {"code": exc.kind, "message": str(exc)}}) + "\n"
        )
        return exc.code
    except FileNotFoundError as exc:
        sys.stderr.write(
            json.dumps({"error": {"code": "missing_input", "message": str(exc)}}) + "\n"
        )
        return 2
    except FetchError as exc:
        sys.stderr.write(
            json.dumps({"error": {"code": "fetch_failed", "message": str(exc)}}) + "\n"
        )
        return 2
    except ValueError as exc:
        sys.stderr.write(
            json.dumps({"error": {"code": "validation", "message": str(exc)}}) + "\n"
        )
        return 3


if __name__ == "__main__":
    sys.exit(main())
