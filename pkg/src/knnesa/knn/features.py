"""Candidate collection and the six per-label features."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from knnesa.corpus import Document, LabelVocabulary, preprocess
from knnesa.errors import KnnEsaError, UnclassifiableDocument
from knnesa.parallel import ordered_map
from knnesa.vsm_index import Neighbor, VectorIndex, top_k_neighbors

log = logging.getLogger(__name__)

FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5", "f6")


@dataclass
class CandidateLabel:
    label: str
    f1: float  # share of the k neighbors carrying the label
    f2: float  # summed neighbor similarity / k
    f3: int  # every name token occurs somewhere in the document
    f4: int  # name or an entry term occurs contiguously
    f5: int  # number of such contiguous occurrences
    f6: int  # name occurs contiguously in the title
    relevance: float | None = None

    @property
    def features(self) -> tuple:
        return (self.f1, self.f2, self.f3, self.f4, self.f5, self.f6)


@dataclass(frozen=True)
class TrainingInstance:
    doc_id: str
    label: str
    features: tuple
    cls: int


class DocumentText:
    """Normalized title and full-text token streams of one document."""

    def __init__(self, doc: Document):
        self.title = preprocess(doc.title)
        self.tokens = self.title + preprocess(doc.abstract)
        self.token_set = frozenset(self.tokens)
        self.positions: dict[str, list[int]] = defaultdict(list)
        for i, tok in enumerate(self.tokens):
            self.positions[tok].append(i)

    def count_phrase(self, phrase: Sequence[str]) -> int:
        if not phrase:
            return 0
        n = len(phrase)
        return sum(
            1
            for i in self.positions.get(phrase[0], ())
            if tuple(self.tokens[i : i + n]) == tuple(phrase)
        )

    def title_contains(self, phrase: Sequence[str]) -> bool:
        n = len(phrase)
        if n == 0:
            return False
        phrase = list(phrase)
        return any(self.title[i : i + n] == phrase for i in range(len(self.title) - n + 1))


def collect_candidates(neighbors: Sequence[Neighbor]) -> set[str]:
    if not neighbors:
        raise KnnEsaError("cannot collect candidates from an empty neighbor list")
    out: set[str] = set()
    for nb in neighbors:
        out |= nb.labels
    return out


def neighbor_features(label: str, neighbors: Sequence[Neighbor], k: int) -> tuple[float, float]:
    if not neighbors or k < len(neighbors):
        raise KnnEsaError("need 1 <= len(neighbors) <= k")
    votes = 0
    sim = 0.0
    for nb in neighbors:
        if label in nb.labels:
            votes += 1
            sim += nb.score
    if votes == 0:
        raise KnnEsaError(f"label {label!r} is not carried by any neighbor")
    return votes / k, sim / k


def lexical_features(
    label: str, doc: Document, vocab: LabelVocabulary, text: DocumentText | None = None
) -> tuple[int, int, int, int]:
    if label not in vocab:
        raise KnnEsaError(f"unknown label {label!r}")
    entry = vocab[label]
    text = text or DocumentText(doc)
    name = entry.name_tokens
    f3 = int(bool(name) and all(t in text.token_set for t in name))
    phrases = {p for p in (name, *entry.entry_tokens) if p}
    f5 = sum(text.count_phrase(p) for p in sorted(phrases))
    f4 = int(f5 > 0)
    f6 = int(text.title_contains(name))
    return f3, f4, f5, f6


def extract_candidates(
    doc: Document, neighbors: Sequence[Neighbor], k: int, vocab: LabelVocabulary
) -> list[CandidateLabel]:
    """Feature vectors for every candidate label, sorted by label id."""
    labels = sorted(collect_candidates(neighbors))
    text = DocumentText(doc)
    out = []
    for label in labels:
        f1, f2 = neighbor_features(label, neighbors, k)
        f3, f4, f5, f6 = lexical_features(label, doc, vocab, text)
        out.append(CandidateLabel(label, f1, f2, f3, f4, f5, f6))
    return out


def _instances_for(doc, index, vocab, k, exclude_self):
    try:
        neighbors = top_k_neighbors(doc, k, index, exclude_self=exclude_self)
    except UnclassifiableDocument as exc:
        log.warning("skipping training document: %s", exc)
        return []
    return [
        TrainingInstance(doc.id, c.label, c.features, int(c.label in doc.labels))
        for c in extract_candidates(doc, neighbors, k, vocab)
    ]


def assemble_training_set(
    training_docs: Iterable[Document],
    index: VectorIndex,
    vocab: LabelVocabulary,
    k: int = 25,
    exclude_self: bool = True,
    threads: int = 1,
) -> list[TrainingInstance]:
    """One instance per (document, candidate label); class 1 iff the label is gold."""
    docs = list(training_docs)
    chunks = ordered_map(lambda d: _instances_for(d, index, vocab, k, exclude_self), docs, threads)
    return [inst for chunk in chunks for inst in chunk]
