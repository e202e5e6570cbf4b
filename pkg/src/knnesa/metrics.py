"""Example-based multi-label metrics, information gain and run reports."""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from knnesa.errors import FormatError, KnnEsaError

log = logging.getLogger(__name__)


@dataclass
class MetricReport:
    ebp: float
    ebr: float
    ebf: float
    acc: float
    m: int
    excluded: int = 0
    empty_predictions: int = 0
    per_doc: list | None = field(default=None, repr=False)

    def to_json(self, per_doc: bool = False) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "per_doc"}
        if per_doc and self.per_doc is not None:
            out["per_doc"] = self.per_doc
        return out


def example_metrics(gold: Iterable[str], predicted: Iterable[str]) -> tuple[float, float, float, float]:
    """(precision, recall, F1, accuracy) for one document.

    An empty prediction scores precision 0.
    """
    y, z = set(gold), set(predicted)
    if not y and not z:
        raise KnnEsaError("gold and predicted label sets are both empty")
    inter = len(y & z)
    ebp = inter / len(z) if z else 0.0
    ebr = inter / len(y) if y else 0.0
    ebf = 2 * inter / (len(y) + len(z))
    acc = inter / len(y | z)
    return ebp, ebr, ebf, acc


def aggregate(per_doc: Sequence[tuple[float, float, float, float]], excluded: int = 0) -> MetricReport:
    if not per_doc:
        raise KnnEsaError("no documents to aggregate")
    m = len(per_doc)
    sums = [0.0, 0.0, 0.0, 0.0]
    for row in per_doc:
        for j in range(4):
            sums[j] += row[j]
    return MetricReport(*(s / m for s in sums), m=m, excluded=excluded)


def evaluate(gold: dict[str, Iterable[str]], predicted: dict[str, Iterable[str]]) -> MetricReport:
    """Average over documents with a non-empty gold set; missing predictions count as empty."""
    unknown = sorted(set(predicted) - set(gold))
    if unknown:
        raise KnnEsaError(f"predictions for ids absent from gold: {unknown[:20]}")
    rows, ids, excluded, empty = [], [], 0, 0
    for doc_id in sorted(gold):
        y = set(gold[doc_id])
        if not y:
            excluded += 1
            continue
        z = set(predicted.get(doc_id, ()))
        if not z:
            empty += 1
        rows.append(example_metrics(y, z))
        ids.append(doc_id)
    report = aggregate(rows, excluded=excluded)
    report.empty_predictions = empty
    report.per_doc = [
        {"id": i, "ebp": r[0], "ebr": r[1], "ebf": r[2], "acc": r[3]} for i, r in zip(ids, rows)
    ]
    return report


def entropy_bits(labels: Sequence) -> float:
    n = len(labels)
    if n == 0:
        return 0.0
    return -sum((c / n) * math.log2(c / n) for c in Counter(labels).values())


def information_gain(feature_column: Sequence, class_column: Sequence) -> float:
    if len(feature_column) != len(class_column):
        raise KnnEsaError("feature and class columns differ in length")
    if len(class_column) < 2:
        raise KnnEsaError("information gain needs at least two instances")
    n = len(class_column)
    groups: dict = {}
    for v, c in zip(feature_column, class_column):
        groups.setdefault(v, []).append(c)
    cond = sum(len(g) / n * entropy_bits(g) for g in groups.values())
    return max(0.0, entropy_bits(class_column) - cond)


# -- files and tables ----------------------------------------------------------


def read_label_file(path, key: str = "labels") -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                doc_id = rec["id"]
                labels = rec.get(key) or []
            except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
                raise FormatError(f"{path}: line {lineno}: malformed record") from exc
            if doc_id in out:
                raise FormatError(f"{path}: line {lineno}: duplicate id {doc_id!r}")
            out[doc_id] = list(labels)
    return out


def evaluate_run(gold_file, prediction_files: str | Sequence) -> dict[str, MetricReport]:
    """One report per prediction file, keyed by the file name."""
    if isinstance(prediction_files, (str, bytes)) or not isinstance(prediction_files, Sequence):
        prediction_files = [prediction_files]
    gold = read_label_file(gold_file)
    reports = {}
    for path in prediction_files:
        preds = read_label_file(path)
        try:
            reports[str(path)] = evaluate(gold, preds)
        except KnnEsaError as exc:
            raise KnnEsaError(f"{path}: {exc}") from None
        if reports[str(path)].empty_predictions:
            log.warning("%s: %d documents have an empty prediction",
                        path, reports[str(path)].empty_predictions)
    return reports


def format_table(rows: Sequence[dict], columns: Sequence[str], title: str | None = None) -> str:
    """Plain-text table; floats are printed with four decimals."""
    def cell(v):
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    body = [[cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) if body else len(c) for i, c in enumerate(columns)]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(v.ljust(w) for v, w in zip(b, widths)))
    return "\n".join(lines)
