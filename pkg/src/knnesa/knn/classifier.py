"""End-to-end kNN classification of one document."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from knnesa.corpus import Document, LabelVocabulary
from knnesa.knn.features import CandidateLabel, extract_candidates
from knnesa.knn.models import RankerModel
from knnesa.knn.selection import DEFAULT_ALPHA, DEFAULT_TAU, RankedLabels, score_candidates, select
from knnesa.vsm_index import Neighbor, VectorIndex, top_k_neighbors

log = logging.getLogger(__name__)

DEFAULT_K = 25


@dataclass
class Prediction:
    doc_id: str
    labels: list[str]
    ranked: RankedLabels
    neighbors: list[Neighbor]
    candidates: list[CandidateLabel]

    def to_record(self) -> dict:
        return {
            "id": self.doc_id,
            "labels": self.labels,
            "ranked": [[label, score] for label, score in self.ranked],
        }


def rank_document(
    doc: Document,
    model: RankerModel,
    index: VectorIndex,
    vocab: LabelVocabulary,
    k: int = DEFAULT_K,
    exclude_self: bool = False,
) -> tuple[RankedLabels, list[Neighbor], list[CandidateLabel]]:
    neighbors = top_k_neighbors(doc, k, index, exclude_self=exclude_self)
    candidates = extract_candidates(doc, neighbors, k, vocab)
    if not candidates:
        log.warning("document %r: neighbors carry no labels, nothing to rank", doc.id)
    return score_candidates(model, candidates), neighbors, candidates


def classify(
    doc: Document,
    model: RankerModel,
    index: VectorIndex,
    vocab: LabelVocabulary,
    k: int = DEFAULT_K,
    strategy: str = "cutoff",
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    exclude_self: bool = False,
) -> Prediction:
    ranked, neighbors, candidates = rank_document(doc, model, index, vocab, k, exclude_self)
    labels = select(strategy, ranked, neighbors, tau=tau, alpha=alpha)
    return Prediction(doc.id, labels, ranked, neighbors, candidates)
