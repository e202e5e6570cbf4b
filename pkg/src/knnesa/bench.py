"""Classifier x strategy and association-measure comparisons on a planted-topic corpus."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

from knnesa.corpus import Document, LabelVocabulary
from knnesa.esa import build_associations, esa_classify
from knnesa.knn.classifier import DEFAULT_K
from knnesa.knn.discretize import discretize_apply
from knnesa.knn.features import FEATURE_NAMES, assemble_training_set, extract_candidates
from knnesa.knn.models import canonical_algorithm, train
from knnesa.knn.selection import DEFAULT_ALPHA, DEFAULT_TAU, STRATEGIES, rank, select
from knnesa.metrics import evaluate, format_table, information_gain
from knnesa.synthetic import planted_topic_corpus
from knnesa.vsm_index import build_index, top_k_neighbors

log = logging.getLogger(__name__)

SHORT_NAMES = {"NaiveBayes": "NB", "DecisionTree": "DT", "RandomForest": "RF"}


@dataclass
class BenchResult:
    report: dict
    predictions: dict[str, list[dict]] = field(default_factory=dict)

    def report_json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True) + "\n"

    def predictions_jsonl(self, name: str) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.predictions[name])


def _metric_row(report, **extra) -> dict:
    row = dict(extra)
    row.update(ebp=report.ebp, ebr=report.ebr, ebf=report.ebf, acc=report.acc, m=report.m)
    return row


def feature_information_gain(instances, cuts) -> list[dict]:
    """Information gain of each (discretized) feature against the class."""
    rows = [discretize_apply(cuts, inst.features) for inst in instances]
    classes = [inst.cls for inst in instances]
    return [
        {"feature": name, "information_gain": information_gain([r[j] for r in rows], classes)}
        for j, name in enumerate(FEATURE_NAMES)
    ]


def frequency_baseline(train_docs: list[Document], test_docs: list[Document], n: int = 3):
    freq = Counter(lab for d in train_docs for lab in d.labels)
    top = [lab for lab, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:n]]
    gold = {d.id: d.labels for d in test_docs}
    return top, evaluate(gold, {d.id: top for d in test_docs})


def run_knn(
    train_docs: list[Document],
    test_docs: list[Document],
    vocab: LabelVocabulary,
    algorithms=("nb", "dt", "rf"),
    strategies=STRATEGIES,
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    seed: int = 0,
    n_trees: int = 100,
    threads: int = 1,
) -> tuple[dict, dict[str, list[dict]]]:
    index = build_index(train_docs)
    instances = assemble_training_set(train_docs, index, vocab, k, exclude_self=True, threads=threads)
    log.info("training instances: %d (%d positive)", len(instances), sum(i.cls for i in instances))

    # Neighbors and candidate features do not depend on the learner.
    prepared = []
    coverage = []
    for doc in test_docs:
        neighbors = top_k_neighbors(doc, k, index)
        cands = extract_candidates(doc, neighbors, k, vocab)
        prepared.append((doc, neighbors, cands))
        if doc.labels:
            pool = {c.label for c in cands}
            coverage.append(len(doc.labels & pool) / len(doc.labels))

    gold = {d.id: d.labels for d in test_docs}
    rows, predictions, ig = [], {}, None
    for algo in algorithms:
        name = SHORT_NAMES[canonical_algorithm(algo)]
        model = train(instances, algo, seed=seed, n_trees=n_trees, threads=threads)
        if ig is None:
            ig = feature_information_gain(instances, model.cuts)
        ranked_all = [
            (doc, neighbors, rank({c.label: model.score_features(c.features) for c in cands}))
            for doc, neighbors, cands in prepared
        ]
        for strategy in strategies:
            recs = []
            for doc, neighbors, ranked in ranked_all:
                labels = select(strategy, ranked, neighbors, tau=tau, alpha=alpha)
                recs.append({"id": doc.id, "labels": labels,
                             "ranked": [[lab, s] for lab, s in ranked]})
            report = evaluate(gold, {r["id"]: r["labels"] for r in recs})
            rows.append(_metric_row(report, classifier=name, strategy=strategy))
            predictions[f"{name.lower()}-{strategy}"] = recs
    summary = {
        "n_training_instances": len(instances),
        "n_positive_instances": sum(i.cls for i in instances),
        "candidate_recall": sum(coverage) / len(coverage) if coverage else 0.0,
        "features": ig,
        "knn": rows,
    }
    return summary, predictions


def run_esa(train_docs, test_docs, measures=("jaccard", "tficf")) -> tuple[list[dict], dict]:
    gold = {d.id: d.labels for d in test_docs}
    rows, predictions = [], {}
    for measure in measures:
        assoc = build_associations(train_docs, measure)
        recs = []
        for doc in test_docs:
            n = len(doc.labels)
            ranked = esa_classify(doc, assoc, n) if n else []
            recs.append({"id": doc.id, "labels": [c for c, _ in ranked],
                         "ranked": [[c, s] for c, s in ranked]})
        report = evaluate(gold, {r["id"]: r["labels"] for r in recs})
        rows.append(_metric_row(report, measure=measure))
        predictions[f"esa-{measure}"] = recs
    return rows, predictions


def run_synthetic_bench(
    seed: int = 0,
    n_train: int = 2000,
    n_test: int = 500,
    n_topics: int = 50,
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    algorithms=("nb", "dt", "rf"),
    strategies=STRATEGIES,
    n_trees: int = 100,
    esa: bool = True,
    threads: int = 1,
) -> BenchResult:
    corpus = planted_topic_corpus(n_train=n_train, n_test=n_test, n_topics=n_topics, seed=seed)
    summary, predictions = run_knn(
        corpus.train, corpus.test, corpus.vocab, algorithms, strategies,
        k=k, alpha=alpha, tau=tau, seed=seed, n_trees=n_trees, threads=threads,
    )
    top, base = frequency_baseline(corpus.train, corpus.test)
    report = {
        "config": {
            "suite": "synthetic", "seed": seed, "n_train": n_train, "n_test": n_test,
            "n_topics": n_topics, "k": k, "alpha": alpha, "tau": tau, "n_trees": n_trees,
        },
        "baseline": _metric_row(base, labels=top),
        **summary,
    }
    if esa:
        report["esa"], esa_preds = run_esa(corpus.train, corpus.test)
        predictions.update(esa_preds)
    return BenchResult(report, predictions)


def render_report(report: dict) -> str:
    parts = []
    cfg = report["config"]
    parts.append(
        f"planted-topic benchmark: {cfg['n_train']} train / {cfg['n_test']} test, "
        f"{cfg['n_topics']} topics, k={cfg['k']}, alpha={cfg['alpha']}, tau={cfg['tau']}, seed={cfg['seed']}"
    )
    parts.append(f"candidate recall: {report['candidate_recall']:.4f}")
    parts.append(format_table(report["features"], ["feature", "information_gain"],
                              "\nfeature importance"))
    parts.append(format_table(report["knn"], ["classifier", "strategy", "ebp", "ebr", "ebf", "acc"],
                              "\nkNN classifier by learner and strategy"))
    base = dict(report["baseline"], name="top-3 frequent")
    parts.append(format_table([base], ["name", "ebp", "ebr", "ebf", "acc"], "\nbaseline"))
    if "esa" in report:
        parts.append(format_table(report["esa"], ["measure", "ebf", "acc"],
                                  "\nESA classifier by association measure (N = gold size)"))
    return "\n".join(parts)
