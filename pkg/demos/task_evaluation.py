"""
Task evaluation: one corpus, several classification settings
============================================================

The same labeled corpus supports several tasks: detect any argument vs
Neutral, classify stance, or predict the exact claim type. run_experiment
handles the split, the per-task label mapping, training, and the test
report. A search space turns the run into seeded random hyperparameter
search scored on the dev split.
"""

from claimkit import (
    ExperimentConfig,
    SearchSpace,
    SyntheticConfig,
    TrainConfig,
    default_compiled_grammar,
    label_corpus,
    run_experiment,
    synthetic_corpus,
)

sentences, _ = synthetic_corpus(SyntheticConfig(n_sentences=2000, seed=11))
labels = label_corpus(sentences, default_compiled_grammar())

# Small settings keep this demo fast; the defaults are sized for real runs.
cfg = ExperimentConfig(train=TrainConfig(epochs=25), vocab_size=2000)

for task in ("claim-id-imbalanced", "stance", "claim+neutral"):
    report = run_experiment(sentences, labels, "flat", task, cfg=cfg)
    m = report.metrics
    print(
        f"{task:20s} strategy=flat  test macro-F1={m.macro_f1:.3f}  "
        f"accuracy={m.accuracy:.3f}  split={report.split_sizes}"
    )

# Random search: sample budget configs from the space, keep whichever
# scores best on dev, then report that config's test metrics. The trial
# log records every config tried so runs can be audited.
cfg_search = ExperimentConfig(
    train=TrainConfig(epochs=25),
    vocab_size=2000,
    search=SearchSpace(budget=4, seed=3),
)
report = run_experiment(sentences, labels, "flat", "stance", cfg=cfg_search)
print(f"search over {len(report.trials)} trials, dev macro-F1={report.dev_macro_f1:.3f}")
for trial in report.trials:
    c = trial["config"]
    print(
        f"  trial {trial['trial']}: l2={c['l2']:.2e} lr={c['learning_rate']:.3f} "
        f"epochs={c['epochs']} -> {trial['status']} {trial.get('dev_macro_f1')}"
    )
print(f"chosen config test macro-F1={report.metrics.macro_f1:.3f}")
