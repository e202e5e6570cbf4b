"""Term-concept association classifier (ESA over an annotated collection).

Each concept (label) is represented by the terms most strongly associated with
it in the training documents, scored by TF.ICF or the document-level Jaccard
coefficient. A new document reaches concepts through the inverted term map and
each concept is scored by summing TF.IDF(term) * association(term, concept).
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from knnesa.corpus import Document, term_vector
from knnesa.errors import FormatError, KnnEsaError

log = logging.getLogger(__name__)

MAGIC = "knnesa/association-index"
FORMAT_VERSION = 1
MEASURES = ("jaccard", "tficf")
MIN_DF = 5
MAX_TERMS = 200


def canonical_measure(name: str) -> str:
    key = name.lower().replace(".", "").replace("_", "").replace("-", "")
    if key not in MEASURES:
        raise KnnEsaError(f"unknown association measure {name!r}; choose jaccard or tficf")
    return key


class CollectionStats:
    """Term counts, lengths and annotations of a labeled collection."""

    def __init__(self, docs: Iterable[Document]):
        self.doc_ids: list[str] = []
        self.counts: list[dict[str, int]] = []
        self.lengths: list[int] = []
        self.concept_docs: dict[str, list[int]] = defaultdict(list)
        self.term_docs: dict[str, list[int]] = defaultdict(list)
        for i, doc in enumerate(docs):
            tv = term_vector(doc)
            self.doc_ids.append(doc.id)
            self.counts.append(tv)
            self.lengths.append(sum(tv.values()))
            for label in sorted(doc.labels):
                self.concept_docs[label].append(i)
            for term in tv:
                self.term_docs[term].append(i)
        self.concept_docs = dict(self.concept_docs)
        self.term_docs = dict(self.term_docs)
        self._n_assoc: dict[str, int] | None = None

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_concepts(self) -> int:
        return len(self.concept_docs)

    def doc_freq(self, term: str) -> int:
        return len(self.term_docs.get(term, ()))

    def concepts_associated(self, term: str) -> int:
        """Concepts annotating at least one document that contains ``term``."""
        if self._n_assoc is None:
            labels_of: dict[int, list[str]] = defaultdict(list)
            for c, ds in self.concept_docs.items():
                for d in ds:
                    labels_of[d].append(c)
            n_assoc = {}
            for t, ds in self.term_docs.items():
                n_assoc[t] = len({c for d in ds for c in labels_of.get(d, ())})
            self._n_assoc = n_assoc
        return self._n_assoc.get(term, 0)


def _require(term: str, concept: str, stats: CollectionStats) -> None:
    if concept not in stats.concept_docs:
        raise KnnEsaError(f"concept {concept!r} annotates no document")
    if term not in stats.term_docs:
        raise KnnEsaError(f"term {term!r} occurs in no document")


def tf_icf(term: str, concept: str, stats: CollectionStats) -> float:
    _require(term, concept, stats)
    tf = 0.0
    for d in stats.concept_docs[concept]:
        freq = stats.counts[d].get(term, 0)
        if freq:
            tf += freq / stats.lengths[d]
    if tf == 0.0:
        return 0.0
    return tf * math.log(stats.n_concepts / stats.concepts_associated(term))


def jaccard(term: str, concept: str, stats: CollectionStats) -> float:
    occ_t = stats.doc_freq(term)
    concept_docs = stats.concept_docs.get(concept, [])
    occ_c = len(concept_docs)
    if occ_t == 0 and occ_c == 0:
        raise KnnEsaError(f"neither term {term!r} nor concept {concept!r} occurs")
    cocc = sum(1 for d in concept_docs if term in stats.counts[d])
    return cocc / (occ_t + occ_c - cocc)


@dataclass
class AssociationIndex:
    measure: str
    concept_vectors: dict[str, list[tuple[str, float]]]
    n_docs: int
    n_concepts: int
    doc_freq: dict[str, int]
    min_df: int = MIN_DF
    max_terms: int = MAX_TERMS
    inverted: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.inverted:
            self.inverted = invert(self.concept_vectors)
        self._lookup = {c: dict(vec) for c, vec in self.concept_vectors.items()}

    def score(self, term: str, concept: str) -> float:
        return self._lookup.get(concept, {}).get(term, 0.0)

    def doc_weights(self, doc: Document) -> dict[str, float]:
        """TF.IDF of the document's terms under the training collection's statistics."""
        return {
            t: tf * math.log(self.n_docs / self.doc_freq[t])
            for t, tf in term_vector(doc).items()
            if t in self.doc_freq
        }

    def to_json(self) -> dict:
        return {
            "magic": MAGIC,
            "version": FORMAT_VERSION,
            "measure": self.measure,
            "min_df": self.min_df,
            "max_terms": self.max_terms,
            "n_docs": self.n_docs,
            "n_concepts": self.n_concepts,
            "doc_freq": dict(sorted(self.doc_freq.items())),
            "concepts": {c: [[t, s] for t, s in vec] for c, vec in sorted(self.concept_vectors.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "AssociationIndex":
        if not isinstance(data, dict) or data.get("magic") != MAGIC:
            raise FormatError("not an association index file")
        if data.get("version") != FORMAT_VERSION:
            raise FormatError(f"association index version {data.get('version')!r} is not supported")
        return cls(
            measure=canonical_measure(data["measure"]),
            concept_vectors={c: [(t, float(s)) for t, s in vec] for c, vec in data["concepts"].items()},
            n_docs=int(data["n_docs"]),
            n_concepts=int(data["n_concepts"]),
            doc_freq={t: int(n) for t, n in data["doc_freq"].items()},
            min_df=int(data["min_df"]),
            max_terms=int(data["max_terms"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "AssociationIndex":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid association index ({exc.msg})") from exc
        return cls.from_json(data)


def invert(concept_vectors: Mapping[str, list[tuple[str, float]]]) -> dict[str, list[tuple[str, float]]]:
    inverted: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for concept in sorted(concept_vectors):
        for term, score in concept_vectors[concept]:
            inverted[term].append((concept, score))
    return dict(inverted)


def association_matrix(stats: CollectionStats, measure: str, min_df: int = MIN_DF):
    """Sparse concepts x eligible-terms association scores.

    Returns ``(matrix, concepts, terms)``. Stored entries are exactly the
    (concept, term) pairs that co-occur in at least one document.
    """
    measure = canonical_measure(measure)
    concepts = sorted(stats.concept_docs)
    all_terms = sorted(stats.term_docs)
    terms = [t for t in all_terms if len(stats.term_docs[t]) >= min_df]
    t_col = {t: j for j, t in enumerate(terms)}
    rows, cols, vals = [], [], []
    for i, tv in enumerate(stats.counts):
        for t, f in tv.items():
            j = t_col.get(t)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(f)
    shape = (stats.n_docs, len(terms))
    X = sp.csr_matrix((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=shape)
    y_rows = [d for c in concepts for d in stats.concept_docs[c]]
    y_cols = [k for k, c in enumerate(concepts) for _ in stats.concept_docs[c]]
    Y = sp.csr_matrix(
        (np.ones(len(y_rows)), (y_rows, y_cols)), shape=(stats.n_docs, len(concepts))
    )
    present = X.copy()
    present.data[:] = 1.0
    cocc = (Y.T @ present).tocsr()
    cocc.sort_indices()
    if measure == "jaccard":
        occ_t = np.asarray(present.sum(axis=0)).ravel()
        occ_c = np.asarray(Y.sum(axis=0)).ravel()
        out = cocc.copy()
        r = np.repeat(np.arange(out.shape[0]), np.diff(out.indptr))
        out.data = cocc.data / (occ_t[out.indices] + occ_c[r] - cocc.data)
        return out, concepts, terms

    lengths = np.asarray(stats.lengths, dtype=np.float64)
    inv_len = np.divide(1.0, lengths, out=np.zeros_like(lengths), where=lengths > 0)
    tf = (Y.T @ sp.diags(inv_len) @ X).tocsr()
    tf.sort_indices()
    n_assoc = np.array([stats.concepts_associated(t) for t in terms], dtype=np.float64)
    out = tf.copy()
    with np.errstate(divide="ignore"):
        icf = np.log(len(concepts) / np.where(n_assoc > 0, n_assoc, 1))
    out.data = tf.data * icf[tf.indices]
    return out, concepts, terms


def build_associations(
    collection: Iterable[Document] | CollectionStats,
    measure: str = "jaccard",
    min_df: int = MIN_DF,
    max_terms: int = MAX_TERMS,
) -> AssociationIndex:
    stats = collection if isinstance(collection, CollectionStats) else CollectionStats(collection)
    if not stats.concept_docs:
        raise KnnEsaError("collection has no labeled document")
    measure = canonical_measure(measure)
    M, concepts, terms = association_matrix(stats, measure, min_df)
    vectors: dict[str, list[tuple[str, float]]] = {}
    for k, concept in enumerate(concepts):
        lo, hi = M.indptr[k], M.indptr[k + 1]
        pairs = sorted(
            ((terms[j], float(s)) for j, s in zip(M.indices[lo:hi], M.data[lo:hi])),
            key=lambda p: (-p[1], p[0]),
        )
        if pairs:
            vectors[concept] = pairs[:max_terms]
    doc_freq = {t: len(stats.term_docs[t]) for t in terms}
    return AssociationIndex(
        measure=measure,
        concept_vectors=vectors,
        n_docs=stats.n_docs,
        n_concepts=stats.n_concepts,
        doc_freq=doc_freq,
        min_df=min_df,
        max_terms=max_terms,
    )


def relevance(concept: str, doc: Document, assoc: AssociationIndex) -> float:
    weights = assoc.doc_weights(doc)
    total = 0.0
    for term in sorted(weights):
        total += weights[term] * assoc.score(term, concept)
    return total


def esa_rank(doc: Document, assoc: AssociationIndex) -> list[tuple[str, float]]:
    """Every reachable concept with its relevance, best first."""
    weights = assoc.doc_weights(doc)
    rel: dict[str, float] = {}
    for term in sorted(weights):
        w = weights[term]
        for concept, score in assoc.inverted.get(term, ()):
            rel[concept] = rel.get(concept, 0.0) + w * score
    return sorted(rel.items(), key=lambda item: (-item[1], item[0]))


def esa_classify(doc: Document, assoc: AssociationIndex, n_labels: int) -> list[tuple[str, float]]:
    if n_labels < 1:
        raise KnnEsaError("n_labels must be >= 1")
    ranked = esa_rank(doc, assoc)
    if not ranked:
        log.warning("document %r reaches no concept", doc.id)
    return ranked[:n_labels]
