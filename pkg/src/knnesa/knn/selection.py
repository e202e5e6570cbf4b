"""Choosing how many ranked labels to keep."""

from __future__ import annotations

from typing import Sequence

from knnesa.errors import KnnEsaError
from knnesa.knn.features import CandidateLabel
from knnesa.knn.models import RankerModel
from knnesa.vsm_index import Neighbor

RankedLabels = list[tuple[str, float]]

STRATEGIES = ("threshold", "avgsize", "cutoff")
DEFAULT_TAU = 0.5
DEFAULT_ALPHA = 1.6


def rank(scored: dict[str, float]) -> RankedLabels:
    """Sort by score descending, then label id ascending."""
    return sorted(scored.items(), key=lambda item: (-item[1], item[0]))


def score_candidates(model: RankerModel, candidates: Sequence[CandidateLabel]) -> RankedLabels:
    scored = {}
    for cand in candidates:
        cand.relevance = model.score_features(cand.features)
        scored[cand.label] = cand.relevance
    return rank(scored)


def select_threshold(ranked: RankedLabels, tau: float = DEFAULT_TAU) -> list[str]:
    return [label for label, score in ranked if score >= tau]


def average_label_count(neighbors: Sequence[Neighbor]) -> int:
    """Mean neighbor label-set size, rounded half up."""
    total = sum(len(nb.labels) for nb in neighbors)
    n = len(neighbors)
    return (2 * total + n) // (2 * n)


def select_average_size(ranked: RankedLabels, neighbors: Sequence[Neighbor]) -> list[str]:
    if not neighbors:
        raise KnnEsaError("average-size selection needs at least one neighbor")
    if not ranked:
        return []
    n = min(max(1, average_label_count(neighbors)), len(ranked))
    return [label for label, _ in ranked[:n]]


def cutoff_size(scores: Sequence[float], alpha: float = DEFAULT_ALPHA) -> int:
    """Number of leading scores kept by the successive-ratio test."""
    if not scores:
        return 0
    for i in range(1, len(scores)):
        # scores[i - 1] is s_i (1-based), scores[i] is s_{i+1}
        if scores[i] / scores[i - 1] < i / (i + 1 + alpha):
            return i
    return len(scores)


def select_cutoff(ranked: RankedLabels, alpha: float = DEFAULT_ALPHA) -> list[str]:
    positive = [(label, s) for label, s in ranked if s > 0]
    n = cutoff_size([s for _, s in positive], alpha)
    return [label for label, _ in positive[:n]]


def select(
    strategy: str,
    ranked: RankedLabels,
    neighbors: Sequence[Neighbor] = (),
    tau: float = DEFAULT_TAU,
    alpha: float = DEFAULT_ALPHA,
) -> list[str]:
    if strategy == "threshold":
        return select_threshold(ranked, tau)
    if strategy == "avgsize":
        return select_average_size(ranked, neighbors)
    if strategy == "cutoff":
        return select_cutoff(ranked, alpha)
    raise KnnEsaError(f"unknown strategy {strategy!r}; choose one of {', '.join(STRATEGIES)}")
