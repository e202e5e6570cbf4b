"""Inverted TF.IDF index with exact top-k cosine retrieval.

Weights are ``tf * ln(n_docs / df)``; queries are weighted with the index's
document frequencies and terms unseen at build time are dropped. Documents are
stored in ascending id order, so the internal position doubles as the
tie-breaker for equal scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from knnesa.corpus import Document, term_vector
from knnesa.errors import FormatError, KnnEsaError, UnclassifiableDocument

MAGIC = "knnesa/vsm-index"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Neighbor:
    doc_id: str
    score: float
    labels: frozenset[str]


class VectorIndex:
    """Immutable inverted index over an annotated collection.

    Postings are held per term as two aligned int32 arrays (document
    positions, raw term frequencies), sorted by position.
    """

    def __init__(
        self,
        doc_ids: Sequence[str],
        labels: Sequence[frozenset[str]],
        post_docs: Mapping[str, np.ndarray],
        post_tf: Mapping[str, np.ndarray],
        norms: np.ndarray | None = None,
    ):
        self.doc_ids = list(doc_ids)
        self.n_docs = len(self.doc_ids)
        self._pos = {d: i for i, d in enumerate(self.doc_ids)}
        self._labels = list(labels)
        self._post_docs = dict(post_docs)
        self._post_tf = dict(post_tf)
        self.doc_freq = {t: int(len(p)) for t, p in self._post_docs.items()}
        self.idf = {t: math.log(self.n_docs / df) for t, df in self.doc_freq.items()}
        self.norms = self._compute_norms() if norms is None else np.asarray(norms, dtype=np.float64)

    def _compute_norms(self) -> np.ndarray:
        # Accumulate squared weights per document in ascending term order.
        sq = np.zeros(self.n_docs, dtype=np.float64)
        for term in sorted(self._post_docs):
            w = self._post_tf[term] * self.idf[term]
            sq[self._post_docs[term]] += w * w
        return np.sqrt(sq)

    @property
    def postings(self) -> dict[str, list[tuple[str, int]]]:
        ids = self.doc_ids
        return {
            t: [(ids[p], int(f)) for p, f in zip(self._post_docs[t], self._post_tf[t])]
            for t in sorted(self._post_docs)
        }

    @property
    def labels(self) -> dict[str, frozenset[str]]:
        return dict(zip(self.doc_ids, self._labels))

    def labels_of(self, doc_id: str) -> frozenset[str]:
        return self._labels[self._pos[doc_id]]

    def norm(self, doc_id: str) -> float:
        return float(self.norms[self._pos[doc_id]])

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._pos

    def term_frequency(self, term: str, doc_id: str) -> int:
        if term not in self._post_docs:
            raise KnnEsaError(f"term {term!r} is not indexed")
        if doc_id not in self._pos:
            raise KnnEsaError(f"document {doc_id!r} is not indexed")
        docs = self._post_docs[term]
        pos = self._pos[doc_id]
        i = int(np.searchsorted(docs, pos))
        if i == len(docs) or docs[i] != pos:
            raise KnnEsaError(f"term {term!r} does not occur in document {doc_id!r}")
        return int(self._post_tf[term][i])

    def query_weights(self, tv: Mapping[str, int]) -> dict[str, float]:
        return {t: tf * self.idf[t] for t, tf in tv.items() if t in self.idf}

    def scores(self, weights: Mapping[str, float]) -> np.ndarray:
        """Cosine of the weighted query against every indexed document."""
        terms = sorted(weights)
        qnorm = math.sqrt(sum(weights[t] * weights[t] for t in terms))
        if qnorm == 0.0:
            raise UnclassifiableDocument("unclassifiable document: no discriminative indexed term")
        dots = np.zeros(self.n_docs, dtype=np.float64)
        for term in terms:
            w = self._post_tf[term] * self.idf[term]
            dots[self._post_docs[term]] += weights[term] * w
        denom = qnorm * self.norms
        out = np.zeros(self.n_docs, dtype=np.float64)
        np.divide(dots, denom, out=out, where=denom > 0)
        return np.minimum(out, 1.0)

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "magic": MAGIC,
            "version": FORMAT_VERSION,
            "n_docs": self.n_docs,
            "docs": [
                {"id": d, "labels": sorted(lab), "norm": float(n)}
                for d, lab, n in zip(self.doc_ids, self._labels, self.norms)
            ],
            "postings": {
                t: [[int(p), int(f)] for p, f in zip(self._post_docs[t], self._post_tf[t])]
                for t in sorted(self._post_docs)
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "VectorIndex":
        if not isinstance(data, dict) or data.get("magic") != MAGIC:
            raise FormatError("not a vector index file")
        if data.get("version") != FORMAT_VERSION:
            raise FormatError(
                f"index format version {data.get('version')!r} is not supported "
                f"(expected {FORMAT_VERSION})"
            )
        docs = data["docs"]
        post_docs, post_tf = {}, {}
        for term, plist in data["postings"].items():
            arr = np.asarray(plist, dtype=np.int64).reshape(-1, 2)
            post_docs[term] = arr[:, 0].astype(np.int32)
            post_tf[term] = arr[:, 1].astype(np.int32)
        return cls(
            [d["id"] for d in docs],
            [frozenset(d["labels"]) for d in docs],
            post_docs,
            post_tf,
            norms=np.array([d["norm"] for d in docs], dtype=np.float64),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "VectorIndex":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid index file ({exc.msg})") from exc
        return cls.from_json(data)


def build_index(collection: Iterable[Document]) -> VectorIndex:
    docs = sorted(collection, key=lambda d: d.id)
    if not docs:
        raise KnnEsaError("cannot index an empty collection")
    for a, b in zip(docs, docs[1:]):
        if a.id == b.id:
            raise KnnEsaError(f"duplicate document id {a.id!r}")
    docs_acc: dict[str, list[int]] = {}
    tf_acc: dict[str, list[int]] = {}
    for pos, doc in enumerate(docs):
        for term, tf in term_vector(doc).items():
            docs_acc.setdefault(term, []).append(pos)
            tf_acc.setdefault(term, []).append(tf)
    post_docs = {t: np.asarray(v, dtype=np.int32) for t, v in docs_acc.items()}
    post_tf = {t: np.asarray(tf_acc[t], dtype=np.int32) for t in docs_acc}
    return VectorIndex([d.id for d in docs], [d.labels for d in docs], post_docs, post_tf)


def tfidf_weight(term: str, doc_id: str, index: VectorIndex) -> float:
    return index.term_frequency(term, doc_id) * index.idf[term]


def _rescaled(v: Mapping[str, float]) -> dict[str, float]:
    # Dividing by the largest weight keeps tiny or huge weights from under/overflowing.
    top = max(v.values(), default=0.0)
    return {t: w / top for t, w in v.items()} if top > 0 else {}


def cosine(v1: Mapping[str, float], v2: Mapping[str, float]) -> float:
    v1, v2 = _rescaled(v1), _rescaled(v2)
    if not v1 and not v2:
        raise KnnEsaError("cosine similarity is undefined for two zero vectors")
    if not v1 or not v2:
        return 0.0
    n1 = math.sqrt(sum(w * w for w in v1.values()))
    n2 = math.sqrt(sum(w * w for w in v2.values()))
    small, large = (v1, v2) if len(v1) <= len(v2) else (v2, v1)
    dot = sum(w * large[t] for t, w in small.items() if t in large)
    return min(1.0, dot / (n1 * n2))


def top_k_neighbors(
    query: Document, k: int, index: VectorIndex, exclude_self: bool = False
) -> list[Neighbor]:
    if k < 1:
        raise KnnEsaError("k must be >= 1")
    weights = index.query_weights(term_vector(query))
    if not weights:
        raise UnclassifiableDocument(f"unclassifiable document {query.id!r}: no indexed term")
    try:
        scores = index.scores(weights)
    except UnclassifiableDocument as exc:
        raise UnclassifiableDocument(f"{exc} ({query.id!r})") from None
    valid = np.ones(index.n_docs, dtype=bool)
    if exclude_self and query.id in index:
        valid[index._pos[query.id]] = False
    cand = np.flatnonzero(valid)
    if k < len(cand):
        part = np.argpartition(-scores[cand], k - 1)[:k]
        kth = scores[cand[part]].min()
        cand = cand[scores[cand] >= kth]
    order = np.lexsort((cand, -scores[cand]))[:k]
    return [
        Neighbor(index.doc_ids[p], float(scores[p]), index._labels[p]) for p in cand[order]
    ]
