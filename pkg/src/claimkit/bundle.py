"""Model bundles: component models composed into prediction strategies.

A bundle packages everything needed to map a raw sentence to a claim type:
the n-gram vocabulary, an optional embedding table, and the component
linear models required by its strategy (flat, two-stage, hierarchical, or
stacked ensemble). Bundles serialize to a single versioned JSON document.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Sentence
from .features import EmbeddingTable, NgramVocab, design_matrix
from .models import (
    FastTextModel,
    LinearModel,
    TrainConfig,
    balanced_weights,
    predict_proba,
    predict_proba_fasttext,
    train,
    train_fasttext_like,
)
from .taxonomy import ClaimType, Stance, Taxonomy, default_taxonomy

__all__ = [
    "Strategy",
    "ModelBundle",
    "ARGUMENT",
    "NEUTRAL",
    "train_bundle",
    "train_fasttext_bundle",
    "predict_flat",
    "predict_two_stage",
    "predict_hierarchical",
    "predict_ensemble",
    "predict_claims",
    "predict_records",
    "save_bundle",
    "load_bundle",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1

# Binary claim-identification labels.
ARGUMENT = "Argument"
NEUTRAL = "Neutral"

# Fixed order of the stacked probability features: 2 + 2 + 2 + 14 = 20.
PROB_COMPONENTS = ("claim_id", "stance", "support_type", "oppose_type")


class Strategy(str, Enum):
    FLAT = "flat"
    TWO_STAGE = "two_stage"
    HIERARCHICAL = "hierarchical"
    ENSEMBLE = "ensemble"


_REQUIRED: dict[Strategy, frozenset[str]] = {
    Strategy.FLAT: frozenset({"flat"}),
    Strategy.TWO_STAGE: frozenset({"claim_id", "claim_type"}),
    Strategy.HIERARCHICAL: frozenset({"claim_id", "stance", "support_type", "oppose_type"}),
    Strategy.ENSEMBLE: frozenset(
        {"claim_id", "stance", "support_type", "oppose_type", "ensemble"}
    ),
}


def vocab_fingerprint(vocab: NgramVocab, emb: EmbeddingTable | None) -> str:
    h = hashlib.sha256()
    for ngram, idx in sorted(vocab.index.items(), key=lambda kv: kv[1]):
        h.update(f"{ngram}\t{idx}\t{vocab.frequencies[ngram]}\n".encode("utf-8"))
    if emb is not None:
        h.update(f"emb:{emb.dim}:{emb.a}\n".encode("utf-8"))
        if emb.component is not None:
            h.update(np.ascontiguousarray(emb.component).tobytes())
    return h.hexdigest()


@dataclass
class ModelBundle:
    strategy: Strategy
    components: dict[str, LinearModel]
    vocab: NgramVocab
    taxonomy: Taxonomy = field(default_factory=default_taxonomy)
    embedding: EmbeddingTable | None = None
    fasttext: FastTextModel | None = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        required = _REQUIRED[self.strategy]
        have = set(self.components)
        if self.strategy is Strategy.FLAT and self.fasttext is not None:
            required = frozenset()
        if have != required:
            raise ValueError(
                f"strategy {self.strategy.value} requires components {sorted(required)}, "
                f"got {sorted(have)}"
            )
        self.fingerprint = vocab_fingerprint(self.vocab, self.embedding)

    def matrix(self, sentences: Sequence[Sentence]) -> sp.csr_matrix:
        return design_matrix(sentences, self.vocab, self.embedding)


def _claims_sorted(taxonomy: Taxonomy, stance: Stance | None = None) -> tuple[ClaimType, ...]:
    if stance is None:
        pool = taxonomy.claims
    else:
        pool = taxonomy.members(stance)
    return tuple(sorted(pool, key=lambda c: c.value))


def _train_component(X, y, cfg: TrainConfig, classes) -> LinearModel:
    weights = balanced_weights(y) if cfg.class_weights is None else cfg.class_weights
    return train(X, y, replace(cfg, class_weights=weights), classes=classes)


def _stacked_features(
    X: sp.csr_matrix, prob_blocks: Mapping[str, np.ndarray]
) -> sp.csr_matrix:
    blocks = [X] + [sp.csr_matrix(prob_blocks[name]) for name in PROB_COMPONENTS]
    return sp.hstack(blocks, format="csr")


def _sub_model_specs(taxonomy: Taxonomy, claims: Sequence[ClaimType]):
    """(name, row filter, label fn, classes) for each hierarchy sub-model."""
    stances = [taxonomy.stance_of(c) for c in claims]
    support = _claims_sorted(taxonomy, Stance.SUPPORT)
    oppose = _claims_sorted(taxonomy, Stance.OPPOSITION)
    return [
        (
            "claim_id",
            np.ones(len(claims), dtype=bool),
            [NEUTRAL if c is ClaimType.NEUTRAL else ARGUMENT for c in claims],
            (ARGUMENT, NEUTRAL),
        ),
        (
            "stance",
            np.array([s is not Stance.NEUTRAL for s in stances]),
            [s for s in stances],
            (Stance.OPPOSITION, Stance.SUPPORT),
        ),
        (
            "support_type",
            np.array([s is Stance.SUPPORT for s in stances]),
            list(claims),
            support,
        ),
        (
            "oppose_type",
            np.array([s is Stance.OPPOSITION for s in stances]),
            list(claims),
            oppose,
        ),
    ]


def _cross_fit_probs(
    X: sp.csr_matrix,
    claims: Sequence[ClaimType],
    taxonomy: Taxonomy,
    cfg: TrainConfig,
    folds: int,
    seed: int,
    full_models: Mapping[str, LinearModel],
) -> dict[str, np.ndarray]:
    """Out-of-fold sub-model probabilities for every training row.

    Folds a sub-model cannot be trained on (a filtered fold with fewer than
    two label values left) fall back to the full-training-set sub-model.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds for cross-fitting")
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    fold_of = np.zeros(n, dtype=np.int64)
    fold_of[rng.permutation(n)] = np.arange(n) % folds
    specs = _sub_model_specs(taxonomy, claims)
    out: dict[str, np.ndarray] = {
        name: np.zeros((n, len(classes))) for name, _, _, classes in specs
    }
    for name, mask, labels, classes in specs:
        for f in range(folds):
            holdout = fold_of == f
            train_mask = mask & ~holdout
            y_fold = [lab for lab, m in zip(labels, train_mask) if m]
            if len(set(y_fold)) >= 2:
                model = _train_component(X[train_mask], y_fold, cfg, classes)
            else:
                model = full_models[name]
            out[name][holdout] = predict_proba(model, X[holdout])
    return out


def train_bundle(
    strategy: Strategy | str,
    sentences: Sequence[Sentence],
    claims: Sequence[ClaimType],
    vocab: NgramVocab,
    embedding: EmbeddingTable | None = None,
    taxonomy: Taxonomy | None = None,
    cfg: TrainConfig | None = None,
    ensemble_folds: int = 5,
) -> ModelBundle:
    """Train all component models a strategy requires from one labeled corpus.

    Class weights default to balanced (inversely proportional to class
    frequency) for every component. The two-stage claim-type model and the
    per-stance models train only on the argumentative / stance-filtered
    subsets. Ensemble probability features on training rows come from
    ``ensemble_folds``-fold cross-fitting.
    """
    strategy = Strategy(strategy)
    taxonomy = taxonomy or default_taxonomy()
    cfg = cfg or TrainConfig()
    if len(sentences) != len(claims):
        raise ValueError("sentences and claims must be aligned")
    X = design_matrix(sentences, vocab, embedding)
    claims = list(claims)
    components: dict[str, LinearModel] = {}

    if strategy is Strategy.FLAT:
        components["flat"] = _train_component(X, claims, cfg, _claims_sorted(taxonomy))
    elif strategy is Strategy.TWO_STAGE:
        id_labels = [NEUTRAL if c is ClaimType.NEUTRAL else ARGUMENT for c in claims]
        components["claim_id"] = _train_component(X, id_labels, cfg, (ARGUMENT, NEUTRAL))
        arg_mask = np.array([c is not ClaimType.NEUTRAL for c in claims])
        arg_claims = [c for c in claims if c is not ClaimType.NEUTRAL]
        arg_classes = tuple(sorted(taxonomy.argument_claims(), key=lambda c: c.value))
        components["claim_type"] = _train_component(X[arg_mask], arg_claims, cfg, arg_classes)
    elif strategy in (Strategy.HIERARCHICAL, Strategy.ENSEMBLE):
        for name, mask, labels, classes in _sub_model_specs(taxonomy, claims):
            y = [lab for lab, m in zip(labels, mask) if m]
            components[name] = _train_component(X[mask], y, cfg, classes)
        if strategy is Strategy.ENSEMBLE:
            prob_blocks = _cross_fit_probs(
                X, claims, taxonomy, cfg, ensemble_folds, cfg.seed, components
            )
            Xe = _stacked_features(X, prob_blocks)
            components["ensemble"] = _train_component(Xe, claims, cfg, _claims_sorted(taxonomy))
    return ModelBundle(strategy, components, vocab, taxonomy, embedding)


def train_fasttext_bundle(
    sentences: Sequence[Sentence],
    claims: Sequence[ClaimType],
    vocab: NgramVocab,
    taxonomy: Taxonomy | None = None,
    cfg: TrainConfig | None = None,
    dims: int = 50,
    buckets: int = 1 << 16,
) -> ModelBundle:
    """Flat bundle whose single model is the learned-embedding classifier."""
    taxonomy = taxonomy or default_taxonomy()
    cfg = cfg or TrainConfig()
    if len(sentences) != len(claims):
        raise ValueError("sentences and claims must be aligned")
    weights = balanced_weights(claims) if cfg.class_weights is None else cfg.class_weights
    cfg = replace(cfg, class_weights=weights)
    model = train_fasttext_like(
        sentences, list(claims), dims=dims, buckets=buckets, cfg=cfg,
        classes=_claims_sorted(taxonomy),
    )
    return ModelBundle(Strategy.FLAT, {}, vocab, taxonomy, None, model)


# ---------------------------------------------------------------------------
# Prediction
# ---------------------------------------------------------------------------


def _require(bundle: ModelBundle, strategy: Strategy) -> None:
    if bundle.strategy is not strategy:
        raise ValueError(f"bundle strategy is {bundle.strategy.value}, expected {strategy.value}")


def _gate_argument(bundle: ModelBundle, probs_id: np.ndarray) -> np.ndarray:
    """True where the claim-id model calls the sentence argumentative (tie -> positive)."""
    model = bundle.components["claim_id"]
    arg_col = model.classes.index(ARGUMENT)
    return probs_id[:, arg_col] >= 0.5


def _batch_flat(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[ClaimType]:
    if bundle.fasttext is not None:
        probs = predict_proba_fasttext(bundle.fasttext, sentences)
        classes = bundle.fasttext.classes
    else:
        model = bundle.components["flat"]
        probs = predict_proba(model, bundle.matrix(sentences))
        classes = model.classes
    return [classes[i] for i in probs.argmax(axis=1)]


def _batch_two_stage(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[ClaimType]:
    X = bundle.matrix(sentences)
    gate = _gate_argument(bundle, predict_proba(bundle.components["claim_id"], X))
    type_model = bundle.components["claim_type"]
    type_probs = predict_proba(type_model, X)
    out = []
    for i in range(len(sentences)):
        if not gate[i]:
            out.append(ClaimType.NEUTRAL)
        else:
            out.append(type_model.classes[int(type_probs[i].argmax())])
    return out


def _batch_hierarchical(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[ClaimType]:
    X = bundle.matrix(sentences)
    gate = _gate_argument(bundle, predict_proba(bundle.components["claim_id"], X))
    stance_model = bundle.components["stance"]
    stance_probs = predict_proba(stance_model, X)
    support_idx = stance_model.classes.index(Stance.SUPPORT)
    support_model = bundle.components["support_type"]
    oppose_model = bundle.components["oppose_type"]
    support_probs = predict_proba(support_model, X)
    oppose_probs = predict_proba(oppose_model, X)
    out = []
    for i in range(len(sentences)):
        if not gate[i]:
            out.append(ClaimType.NEUTRAL)
            continue
        # Tie -> Support, the positive stance pole.
        if stance_probs[i, support_idx] >= 0.5:
            out.append(support_model.classes[int(support_probs[i].argmax())])
        else:
            out.append(oppose_model.classes[int(oppose_probs[i].argmax())])
    return out


def _ensemble_matrix(bundle: ModelBundle, sentences: Sequence[Sentence]) -> sp.csr_matrix:
    X = bundle.matrix(sentences)
    prob_blocks = {
        name: predict_proba(bundle.components[name], X) for name in PROB_COMPONENTS
    }
    return _stacked_features(X, prob_blocks)


def _batch_ensemble(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[ClaimType]:
    for name in PROB_COMPONENTS + ("ensemble",):
        if name not in bundle.components:
            raise ValueError(f"ensemble bundle missing sub-model {name}")
    model = bundle.components["ensemble"]
    probs = predict_proba(model, _ensemble_matrix(bundle, sentences))
    return [model.classes[i] for i in probs.argmax(axis=1)]


def predict_claims(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[ClaimType]:
    """Predict one claim per sentence under the bundle's strategy."""
    if not sentences:
        return []
    if bundle.strategy is Strategy.FLAT:
        return _batch_flat(bundle, sentences)
    if bundle.strategy is Strategy.TWO_STAGE:
        return _batch_two_stage(bundle, sentences)
    if bundle.strategy is Strategy.HIERARCHICAL:
        return _batch_hierarchical(bundle, sentences)
    return _batch_ensemble(bundle, sentences)


def predict_flat(bundle: ModelBundle, sentence: Sentence) -> ClaimType:
    _require(bundle, Strategy.FLAT)
    return predict_claims(bundle, [sentence])[0]


def predict_two_stage(bundle: ModelBundle, sentence: Sentence) -> ClaimType:
    _require(bundle, Strategy.TWO_STAGE)
    return predict_claims(bundle, [sentence])[0]


def predict_hierarchical(bundle: ModelBundle, sentence: Sentence) -> ClaimType:
    _require(bundle, Strategy.HIERARCHICAL)
    return predict_claims(bundle, [sentence])[0]


def predict_ensemble(bundle: ModelBundle, sentence: Sentence) -> ClaimType:
    _require(bundle, Strategy.ENSEMBLE)
    return predict_claims(bundle, [sentence])[0]


def predict_records(bundle: ModelBundle, sentences: Sequence[Sentence]) -> list[dict]:
    """JSON-ready prediction rows {sentence_id, claim, probabilities}.

    Probabilities are the composed distribution over all claim types (for
    staged strategies, the product along the decision path).
    """
    if not sentences:
        return []
    claims = predict_claims(bundle, sentences)
    taxonomy = bundle.taxonomy
    all_claims = _claims_sorted(taxonomy)
    X = bundle.matrix(sentences) if bundle.fasttext is None else None

    def dist_rows() -> np.ndarray:
        n = len(sentences)
        dist = np.zeros((n, len(all_claims)))
        col = {c: i for i, c in enumerate(all_claims)}
        if bundle.strategy is Strategy.FLAT:
            if bundle.fasttext is not None:
                probs = predict_proba_fasttext(bundle.fasttext, sentences)
                for j, c in enumerate(bundle.fasttext.classes):
                    dist[:, col[c]] = probs[:, j]
            else:
                model = bundle.components["flat"]
                probs = predict_proba(model, X)
                for j, c in enumerate(model.classes):
                    dist[:, col[c]] = probs[:, j]
            return dist
        if bundle.strategy is Strategy.ENSEMBLE:
            model = bundle.components["ensemble"]
            probs = predict_proba(model, _ensemble_matrix(bundle, sentences))
            for j, c in enumerate(model.classes):
                dist[:, col[c]] = probs[:, j]
            return dist
        id_model = bundle.components["claim_id"]
        id_probs = predict_proba(id_model, X)
        p_arg = id_probs[:, id_model.classes.index(ARGUMENT)]
        dist[:, col[ClaimType.NEUTRAL]] = 1.0 - p_arg
        if bundle.strategy is Strategy.TWO_STAGE:
            type_model = bundle.components["claim_type"]
            type_probs = predict_proba(type_model, X)
            for j, c in enumerate(type_model.classes):
                dist[:, col[c]] = p_arg * type_probs[:, j]
            return dist
        stance_model = bundle.components["stance"]
        stance_probs = predict_proba(stance_model, X)
        for stance, comp in ((Stance.SUPPORT, "support_type"), (Stance.OPPOSITION, "oppose_type")):
            p_stance = stance_probs[:, stance_model.classes.index(stance)]
            type_model = bundle.components[comp]
            type_probs = predict_proba(type_model, X)
            for j, c in enumerate(type_model.classes):
                dist[:, col[c]] = p_arg * p_stance * type_probs[:, j]
        return dist

    dist = dist_rows()
    records = []
    for i, (sentence, claim) in enumerate(zip(sentences, claims)):
        records.append(
            {
                "sentence_id": sentence.sentence_id,
                "claim": claim.value,
                "probabilities": {
                    c.value: float(dist[i, j]) for j, c in enumerate(all_claims)
                },
            }
        )
    return records


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _class_to_str(c) -> str:
    return c.value if isinstance(c, Enum) else str(c)


def _classes_from_str(name: str, values: list[str]) -> tuple:
    if name == "claim_id":
        return tuple(values)
    if name == "stance":
        return tuple(Stance(v) for v in values)
    return tuple(ClaimType(v) for v in values)


def _model_to_dict(model: LinearModel) -> dict:
    return {
        "classes": [_class_to_str(c) for c in model.classes],
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "l2": model.l2,
        "seed": model.seed,
    }


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    doc: dict = {
        "format_version": bundle.format_version,
        "strategy": bundle.strategy.value,
        "fingerprint": bundle.fingerprint,
        "taxonomy": bundle.taxonomy.to_records(),
        "vocab": {
            "size_cap": bundle.vocab.size_cap,
            "ngrams": [
                [g, i, bundle.vocab.frequencies[g]]
                for g, i in sorted(bundle.vocab.index.items(), key=lambda kv: kv[1])
            ],
        },
        "components": {name: _model_to_dict(m) for name, m in bundle.components.items()},
        "embedding": None,
        "fasttext": None,
    }
    if bundle.embedding is not None:
        emb = bundle.embedding
        doc["embedding"] = {
            "a": emb.a,
            "dim": emb.dim,
            "vectors": {tok: vec.tolist() for tok, vec in sorted(emb.vectors.items())},
            "word_probs": dict(sorted(emb.word_probs.items())),
            "component": None if emb.component is None else emb.component.tolist(),
        }
    if bundle.fasttext is not None:
        ft = bundle.fasttext
        doc["fasttext"] = {
            "classes": [_class_to_str(c) for c in ft.classes],
            "buckets": ft.buckets,
            "dim": ft.dim,
            "bucket_matrix": ft.bucket_matrix.tolist(),
            "weights": ft.weights.tolist(),
            "bias": ft.bias.tolist(),
            "l2": ft.l2,
            "seed": ft.seed,
        }
    Path(path).write_text(
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )


def load_bundle(path: str | Path) -> ModelBundle:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format version {doc.get('format_version')}")
    from .taxonomy import TaxonomyNode  # local to avoid import cycle noise

    taxonomy = Taxonomy(
        TaxonomyNode(
            ClaimType(rec["id"]),
            Stance(rec["stance"]),
            ClaimType(rec["parent"]) if rec.get("parent") else None,
        )
        for rec in doc["taxonomy"]
    )
    vocab = NgramVocab(
        index={g: i for g, i, _ in doc["vocab"]["ngrams"]},
        frequencies={g: f for g, _, f in doc["vocab"]["ngrams"]},
        size_cap=doc["vocab"]["size_cap"],
    )
    embedding = None
    if doc["embedding"] is not None:
        e = doc["embedding"]
        embedding = EmbeddingTable(
            {tok: np.array(vec) for tok, vec in e["vectors"].items()}, a=e["a"]
        )
        embedding.word_probs = {tok: float(p) for tok, p in e["word_probs"].items()}
        embedding.component = None if e["component"] is None else np.array(e["component"])
    fasttext = None
    if doc["fasttext"] is not None:
        f = doc["fasttext"]
        fasttext = FastTextModel(
            classes=tuple(ClaimType(v) for v in f["classes"]),
            buckets=f["buckets"],
            dim=f["dim"],
            bucket_matrix=np.array(f["bucket_matrix"]),
            weights=np.array(f["weights"]),
            bias=np.array(f["bias"]),
            l2=f["l2"],
            seed=f["seed"],
        )
    components = {
        name: LinearModel(
            classes=_classes_from_str(name, m["classes"]),
            weights=np.array(m["weights"]),
            bias=np.array(m["bias"]),
            l2=m["l2"],
            seed=m["seed"],
        )
        for name, m in doc["components"].items()
    }
    return ModelBundle(
        Strategy(doc["strategy"]),
        components,
        vocab,
        taxonomy,
        embedding,
        fasttext,
        doc["format_version"],
    )
