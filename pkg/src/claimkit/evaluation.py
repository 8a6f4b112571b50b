"""Evaluation pipeline: stratified splits, macro metrics, hyperparameter
search, and the named experiment tasks.

Every task trains on the train split, selects hyperparameters on dev (when a
search space is configured), and reports test metrics. All randomness is
seeded; reports serialize to deterministic JSON with no timestamps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .bundle import (
    ARGUMENT,
    NEUTRAL,
    ModelBundle,
    predict_claims,
    train_bundle,
    train_fasttext_bundle,
)
from .corpus import Sentence
from .features import (
    DEFAULT_VOCAB_SIZE,
    EmbeddingTable,
    NgramVocab,
    build_vocab,
    design_matrix,
)
from .models import (
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
    "SplitConfig",
    "stratified_split",
    "ClassMetrics",
    "MetricsReport",
    "metrics",
    "SearchSpace",
    "SearchResult",
    "sample_config",
    "search",
    "write_trials_jsonl",
    "TASKS",
    "FAMILIES",
    "ExperimentConfig",
    "ExperimentReport",
    "validate_task",
    "run_experiment",
    "top_ngrams",
]


# ---------------------------------------------------------------------------
# Stratified splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.70
    dev_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0

    def __post_init__(self) -> None:
        fracs = (self.train_fraction, self.dev_fraction, self.test_fraction)
        if any(f <= 0 or f >= 1 for f in fracs):
            raise ValueError("split fractions must lie strictly between 0 and 1")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)}")


def stratified_split(
    labels: Sequence[Hashable], cfg: SplitConfig | None = None
) -> tuple[list[int], list[int], list[int]]:
    """Split indices by label so each split matches the class proportions.

    Per-class counts use largest-remainder rounding with remainder ties
    resolved train first, then dev, then test. Classes with fewer than 3
    instances cannot appear in every split and are rejected.
    """
    cfg = cfg or SplitConfig()
    if not labels:
        raise ValueError("empty label sequence")
    by_class: dict[Hashable, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)
    for label, idx in by_class.items():
        if len(idx) < 3:
            raise ValueError(f"class {label!r} has {len(idx)} instances; need at least 3")

    rng = np.random.default_rng(cfg.seed)
    fracs = (cfg.train_fraction, cfg.dev_fraction, cfg.test_fraction)
    splits: tuple[list[int], ...] = ([], [], [])
    for label in sorted(by_class, key=str):
        idx = np.array(by_class[label])
        rng.shuffle(idx)
        n = len(idx)
        targets = [n * f for f in fracs]
        counts = [math.floor(t) for t in targets]
        leftover = n - sum(counts)
        order = sorted(range(3), key=lambda s: (-(targets[s] - counts[s]), s))
        for s in order[:leftover]:
            counts[s] += 1
        start = 0
        for s, c in enumerate(counts):
            splits[s].extend(int(i) for i in idx[start : start + c])
            start += c
    return tuple(sorted(s) for s in splits)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


def _label_str(label) -> str:
    return label.value if hasattr(label, "value") else str(label)


@dataclass
class MetricsReport:
    classes: tuple
    per_class: dict
    confusion: dict  # gold label -> {pred label -> count}
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "classes": [_label_str(c) for c in self.classes],
            "per_class": {
                _label_str(c): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for c, m in self.per_class.items()
            },
            "confusion": {
                _label_str(g): {_label_str(p): n for p, n in sorted(row.items(), key=lambda kv: _label_str(kv[0]))}
                for g, row in sorted(self.confusion.items(), key=lambda kv: _label_str(kv[0]))
            },
        }


def metrics(
    gold: Sequence[Hashable],
    pred: Sequence[Hashable],
    classes: Sequence[Hashable] | None = None,
) -> MetricsReport:
    """Per-class precision/recall/F1 and unweighted macro averages.

    Zero denominators yield 0 for the affected statistic; macro averages run
    over ``classes`` (observed labels by default), so zero-support classes
    pull the macro scores down.
    """
    if len(gold) != len(pred):
        raise ValueError("gold and pred must be aligned")
    if not gold:
        raise ValueError("empty evaluation set")
    if classes is None:
        classes = sorted(set(gold) | set(pred), key=_label_str)
    classes = tuple(classes)

    confusion: dict = {}
    for g, p in zip(gold, pred):
        confusion.setdefault(g, {})
        confusion[g][p] = confusion[g].get(p, 0) + 1

    per_class: dict = {}
    for c in classes:
        tp = confusion.get(c, {}).get(c, 0)
        support = sum(confusion.get(c, {}).values())
        predicted = sum(row.get(c, 0) for row in confusion.values())
        precision = tp / predicted if predicted else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[c] = ClassMetrics(precision, recall, f1, support)

    k = len(classes)
    macro_p = sum(m.precision for m in per_class.values()) / k
    macro_r = sum(m.recall for m in per_class.values()) / k
    macro_f = sum(m.f1 for m in per_class.values()) / k
    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    return MetricsReport(
        classes, per_class, confusion, macro_p, macro_r, macro_f, correct / len(gold), len(gold)
    )


# ---------------------------------------------------------------------------
# Random hyperparameter search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchSpace:
    """Log-uniform ranges for l2 and learning rate, integer range for epochs."""

    l2: tuple[float, float] = (1e-6, 1e-1)
    learning_rate: tuple[float, float] = (0.01, 1.0)
    epochs: tuple[int, int] = (20, 150)
    budget: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        for name, (lo, hi) in (("l2", self.l2), ("learning_rate", self.learning_rate)):
            if lo <= 0 or hi <= 0 or lo >= hi:
                raise ValueError(f"{name} range must satisfy 0 < lo < hi")
        if self.epochs[0] < 1 or self.epochs[0] > self.epochs[1]:
            raise ValueError("epochs range must satisfy 1 <= lo <= hi")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass
class SearchResult:
    best_config: TrainConfig
    best_score: float
    trials: list[dict]


def sample_config(space: SearchSpace, rng: np.random.Generator, base: TrainConfig) -> TrainConfig:
    l2 = float(np.exp(rng.uniform(np.log(space.l2[0]), np.log(space.l2[1]))))
    lr = float(np.exp(rng.uniform(np.log(space.learning_rate[0]), np.log(space.learning_rate[1]))))
    epochs = int(rng.integers(space.epochs[0], space.epochs[1] + 1))
    return replace(base, l2=l2, learning_rate=lr, epochs=epochs)


def search(
    space: SearchSpace,
    objective: Callable[[TrainConfig], float],
    base: TrainConfig | None = None,
) -> SearchResult:
    """Seeded random search maximizing the objective (dev macro-F1).

    Failed trials are logged and skipped; ties keep the earliest trial. The
    sampled sequence depends only on the seed, never on trial outcomes.
    """
    base = base or TrainConfig()
    rng = np.random.default_rng(space.seed)
    trials: list[dict] = []
    best: TrainConfig | None = None
    best_score = -math.inf
    for t in range(space.budget):
        cand = sample_config(space, rng, base)
        record = {
            "trial": t,
            "config": {"l2": cand.l2, "learning_rate": cand.learning_rate, "epochs": cand.epochs},
        }
        try:
            score = float(objective(cand))
        except Exception as exc:
            record.update(status="failed", dev_macro_f1=None, error=f"{type(exc).__name__}: {exc}")
        else:
            record.update(status="ok", dev_macro_f1=score, error=None)
            if score > best_score:
                best, best_score = cand, score
        trials.append(record)
    if best is None:
        raise RuntimeError(f"all {space.budget} search trials failed")
    return SearchResult(best, best_score, trials)


def write_trials_jsonl(trials: Sequence[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in trials:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Experiment tasks
# ---------------------------------------------------------------------------

TASKS = (
    "claim-id-balanced",
    "claim-id-imbalanced",
    "stance",
    "claim-neutral",
    "supp-v-opp",
    "claim+neutral",
    "claim+ensemble",
)

# Strategies each task accepts; single-model tasks are "flat" by construction.
_TASK_STRATEGIES: dict[str, frozenset[str]] = {
    "claim-id-balanced": frozenset({"flat"}),
    "claim-id-imbalanced": frozenset({"flat"}),
    "stance": frozenset({"flat"}),
    "claim-neutral": frozenset({"flat"}),
    "supp-v-opp": frozenset({"flat"}),
    "claim+neutral": frozenset({"flat", "two_stage", "hierarchical"}),
    "claim+ensemble": frozenset({"ensemble"}),
}

FAMILIES = ("ngram", "fasttext")


@dataclass
class ExperimentConfig:
    split: SplitConfig = field(default_factory=SplitConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    family: str = "ngram"
    vocab_size: int = DEFAULT_VOCAB_SIZE
    embedding: EmbeddingTable | None = None
    search: SearchSpace | None = None
    ensemble_folds: int = 5
    fasttext_dims: int = 50
    fasttext_buckets: int = 1 << 16
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")


@dataclass
class ExperimentReport:
    task: str
    strategy: str
    family: str
    seed: int
    config: dict
    split_sizes: dict
    metrics: MetricsReport
    dev_macro_f1: float | None = None
    trials: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "strategy": self.strategy,
            "family": self.family,
            "seed": self.seed,
            "config": self.config,
            "split_sizes": self.split_sizes,
            "dev_macro_f1": self.dev_macro_f1,
            "trials": self.trials,
            "metrics": self.metrics.to_dict(),
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )


def _config_dict(cfg: TrainConfig) -> dict:
    return {
        "l2": cfg.l2,
        "learning_rate": cfg.learning_rate,
        "decay": cfg.decay,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "seed": cfg.seed,
    }


def _fit_linear(X, y, cfg: TrainConfig, classes) -> LinearModel:
    weights = balanced_weights(y) if cfg.class_weights is None else cfg.class_weights
    return train(X, y, replace(cfg, class_weights=weights), classes=classes)


def _downsample_neutral(train_idx: Sequence[int], claims: Sequence[ClaimType], seed: int) -> list[int]:
    """Reduce training Neutral rows to the argumentative count, seeded."""
    neutral = [i for i in train_idx if claims[i] is ClaimType.NEUTRAL]
    argument = [i for i in train_idx if claims[i] is not ClaimType.NEUTRAL]
    if len(neutral) <= len(argument):
        return sorted(train_idx)
    rng = np.random.default_rng(seed)
    keep = rng.choice(len(neutral), size=len(argument), replace=False)
    return sorted(argument + [neutral[k] for k in keep])


def validate_task(task: str, strategy: str, family: str = "ngram") -> None:
    if task not in _TASK_STRATEGIES:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    allowed = _TASK_STRATEGIES[task]
    if strategy not in allowed:
        raise ValueError(
            f"task {task!r} does not accept strategy {strategy!r}; allowed: {sorted(allowed)}"
        )
    if family == "fasttext" and (strategy != "flat"):
        raise ValueError("the fasttext family only supports the flat strategy")


def run_experiment(
    sentences: Sequence[Sentence],
    labels: Mapping[int, ClaimType],
    strategy: str,
    task: str,
    cfg: ExperimentConfig | None = None,
    taxonomy: Taxonomy | None = None,
) -> ExperimentReport:
    """Train, select, and test one task; returns the test-split report.

    The vocabulary (and embedding fit, when configured) is rebuilt from the
    task's actual training rows only, so no dev or test text leaks into the
    feature layout.
    """
    cfg = cfg or ExperimentConfig()
    taxonomy = taxonomy or default_taxonomy()
    validate_task(task, strategy, cfg.family)

    sents = list(sentences)
    try:
        claims = [labels[s.sentence_id] for s in sents]
    except KeyError as exc:
        raise ValueError(f"sentence {exc.args[0]} has no label") from exc
    train_idx, dev_idx, test_idx = stratified_split(claims, cfg.split)
    if task == "claim-id-balanced":
        train_idx = _downsample_neutral(train_idx, claims, cfg.seed)
    split_sizes = {"train": len(train_idx), "dev": len(dev_idx), "test": len(test_idx)}

    runner = _TaskRunner(task, strategy, sents, claims, train_idx, taxonomy, cfg)
    dev_score: float | None = None
    trials: list[dict] = []
    final_cfg = cfg.train
    if cfg.search is not None:
        result = search(cfg.search, lambda c: runner.fit_and_score(c, dev_idx), base=cfg.train)
        final_cfg = result.best_config
        dev_score = result.best_score
        trials = result.trials
    report = runner.fit_and_report(final_cfg, test_idx)
    return ExperimentReport(
        task=task,
        strategy=strategy,
        family=cfg.family,
        seed=cfg.seed,
        config=_config_dict(final_cfg),
        split_sizes=split_sizes,
        metrics=report,
        dev_macro_f1=dev_score,
        trials=trials,
    )


class _TaskRunner:
    """Shared fit/predict plumbing for the named tasks."""

    def __init__(
        self,
        task: str,
        strategy: str,
        sents: list[Sentence],
        claims: list[ClaimType],
        train_idx: list[int],
        taxonomy: Taxonomy,
        cfg: ExperimentConfig,
    ):
        self.task = task
        self.strategy = strategy
        self.sents = sents
        self.claims = claims
        self.train_idx = list(train_idx)
        self.taxonomy = taxonomy
        self.cfg = cfg
        self.train_sents = [sents[i] for i in self.train_idx]
        self.train_claims = [claims[i] for i in self.train_idx]

        if cfg.family == "ngram":
            self.vocab = build_vocab(self.train_sents, cfg.vocab_size)
            self.emb: EmbeddingTable | None = None
            if cfg.embedding is not None:
                self.emb = EmbeddingTable(cfg.embedding.vectors, a=cfg.embedding.a)
                self.emb.fit(self.train_sents)
        else:
            # The hashed-embedding family learns its own representation.
            self.vocab = build_vocab(self.train_sents, cfg.vocab_size)
            self.emb = None

        self.support = tuple(sorted(taxonomy.members(Stance.SUPPORT), key=lambda c: c.value))
        self.oppose = tuple(sorted(taxonomy.members(Stance.OPPOSITION), key=lambda c: c.value))
        self.all_claims = tuple(sorted(taxonomy.claims, key=lambda c: c.value))
        self.arg_claims = tuple(sorted(taxonomy.argument_claims(), key=lambda c: c.value))

    def _matrix(self, idx: Sequence[int]):
        return design_matrix([self.sents[i] for i in idx], self.vocab, self.emb)

    # -- task label views ---------------------------------------------------

    def _task_view(self, idx: Sequence[int]):
        """(row indices, labels, metric classes) for single-model tasks."""
        task = self.task
        if task in ("claim-id-balanced", "claim-id-imbalanced"):
            rows = list(idx)
            y = [
                NEUTRAL if self.claims[i] is ClaimType.NEUTRAL else ARGUMENT for i in rows
            ]
            return rows, y, (ARGUMENT, NEUTRAL)
        if task == "stance":
            rows = [i for i in idx if self.claims[i] is not ClaimType.NEUTRAL]
            y = [self.taxonomy.stance_of(self.claims[i]) for i in rows]
            return rows, y, (Stance.OPPOSITION, Stance.SUPPORT)
        if task == "claim-neutral":
            rows = [i for i in idx if self.claims[i] is not ClaimType.NEUTRAL]
            y = [self.claims[i] for i in rows]
            return rows, y, self.arg_claims
        raise AssertionError(task)

    # -- fitting -------------------------------------------------------------

    def _fit_single(self, tcfg: TrainConfig):
        rows, y, classes = self._task_view(self.train_idx)
        if not rows:
            raise ValueError(f"task {self.task!r} has no training rows")
        if self.cfg.family == "fasttext":
            weights = balanced_weights(y)
            model = train_fasttext_like(
                [self.sents[i] for i in rows],
                y,
                dims=self.cfg.fasttext_dims,
                buckets=self.cfg.fasttext_buckets,
                cfg=replace(tcfg, class_weights=weights),
                classes=classes,
            )
        else:
            model = _fit_linear(self._matrix(rows), y, tcfg, classes)
        return model, classes

    def _predict_single(self, model, idx: Sequence[int]):
        rows, gold, classes = self._task_view(idx)
        if not rows:
            raise ValueError(f"task {self.task!r} has no evaluation rows")
        if self.cfg.family == "fasttext":
            probs = predict_proba_fasttext(model, [self.sents[i] for i in rows])
        else:
            probs = predict_proba(model, self._matrix(rows))
        pred = [model.classes[j] for j in probs.argmax(axis=1)]
        return gold, pred, classes

    def _fit_supp_v_opp(self, tcfg: TrainConfig):
        models = {}
        for stance, classes in ((Stance.SUPPORT, self.support), (Stance.OPPOSITION, self.oppose)):
            rows = [
                i
                for i in self.train_idx
                if self.claims[i] is not ClaimType.NEUTRAL
                and self.taxonomy.stance_of(self.claims[i]) is stance
            ]
            y = [self.claims[i] for i in rows]
            if not rows:
                raise ValueError(f"no {stance.value} training rows")
            if self.cfg.family == "fasttext":
                weights = balanced_weights(y)
                models[stance] = train_fasttext_like(
                    [self.sents[i] for i in rows],
                    y,
                    dims=self.cfg.fasttext_dims,
                    buckets=self.cfg.fasttext_buckets,
                    cfg=replace(tcfg, class_weights=weights),
                    classes=classes,
                )
            else:
                models[stance] = _fit_linear(self._matrix(rows), y, tcfg, classes)
        return models

    def _predict_supp_v_opp(self, models, idx: Sequence[int]):
        gold: list[ClaimType] = []
        pred: list[ClaimType] = []
        for stance in (Stance.OPPOSITION, Stance.SUPPORT):
            rows = [
                i
                for i in idx
                if self.claims[i] is not ClaimType.NEUTRAL
                and self.taxonomy.stance_of(self.claims[i]) is stance
            ]
            if not rows:
                continue
            model = models[stance]
            if self.cfg.family == "fasttext":
                probs = predict_proba_fasttext(model, [self.sents[i] for i in rows])
            else:
                probs = predict_proba(model, self._matrix(rows))
            gold.extend(self.claims[i] for i in rows)
            pred.extend(model.classes[j] for j in probs.argmax(axis=1))
        if not gold:
            raise ValueError("no argumentative evaluation rows")
        return gold, pred, self.arg_claims

    def _fit_bundle(self, tcfg: TrainConfig) -> ModelBundle:
        if self.cfg.family == "fasttext":
            return train_fasttext_bundle(
                self.train_sents,
                self.train_claims,
                self.vocab,
                taxonomy=self.taxonomy,
                cfg=tcfg,
                dims=self.cfg.fasttext_dims,
                buckets=self.cfg.fasttext_buckets,
            )
        return train_bundle(
            self.strategy,
            self.train_sents,
            self.train_claims,
            self.vocab,
            embedding=self.emb,
            taxonomy=self.taxonomy,
            cfg=tcfg,
            ensemble_folds=self.cfg.ensemble_folds,
        )

    def _predict_bundle(self, bundle: ModelBundle, idx: Sequence[int]):
        rows = list(idx)
        gold = [self.claims[i] for i in rows]
        pred = predict_claims(bundle, [self.sents[i] for i in rows])
        return gold, pred, self.all_claims

    # -- public -------------------------------------------------------------

    def _fit(self, tcfg: TrainConfig):
        if self.task == "supp-v-opp":
            return self._fit_supp_v_opp(tcfg)
        if self.task in ("claim+neutral", "claim+ensemble"):
            return self._fit_bundle(tcfg)
        return self._fit_single(tcfg)[0]

    def _predict(self, fitted, idx: Sequence[int]):
        if self.task == "supp-v-opp":
            return self._predict_supp_v_opp(fitted, idx)
        if self.task in ("claim+neutral", "claim+ensemble"):
            return self._predict_bundle(fitted, idx)
        return self._predict_single(fitted, idx)

    def fit_and_score(self, tcfg: TrainConfig, idx: Sequence[int]) -> float:
        gold, pred, classes = self._predict(self._fit(tcfg), idx)
        return metrics(gold, pred, classes).macro_f1

    def fit_and_report(self, tcfg: TrainConfig, idx: Sequence[int]) -> MetricsReport:
        gold, pred, classes = self._predict(self._fit(tcfg), idx)
        return metrics(gold, pred, classes)


# ---------------------------------------------------------------------------
# Weight inspection
# ---------------------------------------------------------------------------


def top_ngrams(
    model: LinearModel, label, vocab: NgramVocab, k: int = 10
) -> list[tuple[str, float]]:
    """Highest-weight n-grams for one class, ties broken alphabetically.

    Only the n-gram block of the feature layout is ranked; dense embedding
    columns are ignored.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if label not in model.class_index():
        raise ValueError(f"model has no class {label!r}")
    if model.num_features < len(vocab):
        raise ValueError("model feature layout is narrower than the vocabulary")
    row = model.weights[model.class_index()[label], : len(vocab)]
    ranked = sorted(
        ((vocab.ngram_at(j), float(row[j])) for j in range(len(vocab))),
        key=lambda kv: (-kv[1], kv[0]),
    )
    return ranked[: min(k, len(ranked))]
