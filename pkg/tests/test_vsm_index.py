import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_rankings_match, random_corpus
from oracles import brute_force_neighbors, counts
from knnesa.corpus import Document
from knnesa.errors import FormatError, KnnEsaError, UnclassifiableDocument
from knnesa.vsm_index import VectorIndex, build_index, cosine, tfidf_weight, top_k_neighbors


def docs_from(*bodies, labels=None):
    labels = labels or [()] * len(bodies)
    return [Document(f"d{i + 1}", "", body, frozenset(lab)) for i, (body, lab) in enumerate(zip(bodies, labels))]


class TestBuild:
    def test_single_doc(self):
        index = build_index(docs_from("zz"))
        assert index.postings == {"zz": [("d1", 1)]}
        assert index.doc_freq == {"zz": 1}
        assert index.n_docs == 1

    def test_shared_term(self):
        index = build_index(docs_from("zz yy", "zz"))
        assert index.doc_freq["zz"] == 2

    def test_postings_match_naive_scan(self):
        docs = docs_from("cats chase dogs", "dogs bark dogs", "birds sing")
        index = build_index(docs)
        naive = {}
        for d in docs:
            for term, tf in sorted(counts(d).items()):
                naive.setdefault(term, []).append((d.id, tf))
        assert index.postings == naive
        for term, plist in index.postings.items():
            assert len(plist) == index.doc_freq[term]

    def test_empty_collection(self):
        with pytest.raises(KnnEsaError):
            build_index([])

    def test_duplicate_ids(self):
        with pytest.raises(KnnEsaError, match="d1"):
            build_index([Document("d1", "", "zz"), Document("d1", "", "yy")])

    def test_norms_positive_when_some_term_discriminates(self):
        rng = np.random.default_rng(3)
        index = build_index(random_corpus(rng, 60, 80))
        for doc_id in index.doc_ids:
            tv = {t: tf for t, plist in index.postings.items() for d, tf in plist if d == doc_id}
            if any(index.idf[t] > 0 for t in tv):
                assert index.norm(doc_id) > 0

    def test_documents_without_terms_are_counted(self):
        index = build_index(docs_from("zz", "", "zz yy"))
        assert index.n_docs == 3
        assert index.norm("d2") == 0.0

    def test_serialization_is_byte_identical(self, tmp_path):
        rng = np.random.default_rng(11)
        docs = random_corpus(rng, 80, 150)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        build_index(docs).save(a)
        build_index(list(reversed(docs))).save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        docs = random_corpus(rng, 50, 60)
        index = build_index(docs)
        index.save(tmp_path / "i.json")
        loaded = VectorIndex.load(tmp_path / "i.json")
        assert loaded.postings == index.postings
        assert loaded.labels == index.labels
        assert np.array_equal(loaded.norms, index.norms)
        q = docs[7]
        assert top_k_neighbors(q, 10, loaded) == top_k_neighbors(q, 10, index)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "i.json"
        build_index(docs_from("zz")).save(path)
        data = json.loads(path.read_text())
        data["version"] = 99
        path.write_text(json.dumps(data))
        with pytest.raises(FormatError, match="version"):
            VectorIndex.load(path)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "i.json"
        path.write_text('{"magic": "something else", "version": 1}')
        with pytest.raises(FormatError):
            VectorIndex.load(path)


class TestWeights:
    def test_term_in_every_document(self):
        index = build_index(docs_from("zz yy", "zz", "zz xx"))
        assert tfidf_weight("zz", "d2", index) == 0.0

    def test_hand_value(self):
        index = build_index(docs_from("zz zz", "yy", "yy", "yy"))
        assert tfidf_weight("zz", "d1", index) == pytest.approx(2 * math.log(4), abs=1e-12)
        assert tfidf_weight("zz", "d1", index) == pytest.approx(2.7726, abs=1e-4)

    def test_absent_term_is_an_error(self):
        index = build_index(docs_from("zz", "yy"))
        with pytest.raises(KnnEsaError):
            tfidf_weight("zz", "d2", index)
        with pytest.raises(KnnEsaError):
            tfidf_weight("never", "d1", index)
        with pytest.raises(KnnEsaError):
            tfidf_weight("zz", "nope", index)


vectors = st.dictionaries(
    st.sampled_from("abcdefgh"), st.just(0.0) | st.floats(1e-6, 1e6), min_size=1, max_size=8
).filter(lambda v: any(x > 0 for x in v.values()))


class TestCosine:
    def test_self(self):
        v = {"a": 1.0, "b": 3.0}
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint(self):
        assert cosine({"a": 1.0}, {"b": 2.0}) == 0.0

    def test_hand_value(self):
        assert cosine({"a": 1.0, "b": 1.0}, {"a": 1.0}) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_both_zero(self):
        with pytest.raises(KnnEsaError):
            cosine({}, {"a": 0.0})

    @settings(max_examples=300, deadline=None)
    @given(vectors, vectors)
    def test_symmetric(self, a, b):
        assert abs(cosine(a, b) - cosine(b, a)) <= 1e-12
        assert 0.0 <= cosine(a, b) <= 1.0

    @settings(max_examples=300, deadline=None)
    @given(vectors, vectors, st.floats(0.01, 100.0))
    def test_scale_invariant(self, a, b, lam):
        scaled = {t: lam * w for t, w in a.items()}
        assert abs(cosine(scaled, b) - cosine(a, b)) <= 1e-12


class TestTopK:
    def test_identical_document_first(self):
        docs = docs_from("cats chase dogs", "dogs bark", "birds sing", "cats purr")
        hits = top_k_neighbors(Document("q", "", "cats chase dogs"), 2, build_index(docs))
        assert hits[0].doc_id == "d1"
        assert hits[0].score == pytest.approx(1.0, abs=1e-12)

    def test_exclude_self(self):
        docs = docs_from("cats chase dogs", "dogs bark", "birds sing", "cats purr")
        hits = top_k_neighbors(docs[0], 3, build_index(docs), exclude_self=True)
        assert "d1" not in [h.doc_id for h in hits]

    def test_k_beyond_collection(self):
        docs = docs_from("cats chase dogs", "dogs bark", "birds sing", "cats purr")
        hits = top_k_neighbors(Document("q", "", "cats dogs"), 50, build_index(docs))
        assert sorted(h.doc_id for h in hits) == ["d1", "d2", "d3", "d4"]
        assert [h.score for h in hits] == sorted((h.score for h in hits), reverse=True)

    def test_ties_by_ascending_id(self):
        docs = [Document(i, "", "zz yy") for i in ("c", "a", "b")] + [Document("x", "", "ww")]
        hits = top_k_neighbors(Document("q", "", "zz"), 2, build_index(docs))
        assert [h.doc_id for h in hits] == ["a", "b"]

    def test_labels_carried(self):
        docs = docs_from("cats", "dogs", labels=[{"L1"}, {"L2", "L3"}])
        hits = top_k_neighbors(Document("q", "", "dogs"), 1, build_index(docs))
        assert hits[0].labels == {"L2", "L3"}

    def test_unclassifiable(self):
        index = build_index(docs_from("cats", "dogs"))
        with pytest.raises(UnclassifiableDocument, match="unclassifiable"):
            top_k_neighbors(Document("q", "the of and", ""), 5, index)
        with pytest.raises(UnclassifiableDocument):
            top_k_neighbors(Document("q", "unseen words", ""), 5, index)

    def test_bad_k(self):
        with pytest.raises(KnnEsaError):
            top_k_neighbors(Document("q", "", "cats"), 0, build_index(docs_from("cats", "dogs")))

    def test_200_doc_fixture_matches_oracle(self):
        rng = np.random.default_rng(200)
        docs = random_corpus(rng, 200, 300)
        index = build_index(docs)
        for q in docs[:20]:
            hits = top_k_neighbors(q, 25, index)
            expected = brute_force_neighbors(q, docs, 25)
            assert [h.doc_id for h in hits] == [d for d, _ in expected]
            for h, (_, s) in zip(hits, expected):
                assert abs(h.score - s) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 40), st.booleans())
    def test_equivalence_property(self, seed, k, exclude_self):
        rng = np.random.default_rng(seed)
        docs = random_corpus(rng, int(rng.integers(5, 80)), int(rng.integers(10, 120)))
        index = build_index(docs)
        q = docs[int(rng.integers(len(docs)))]
        try:
            hits = top_k_neighbors(q, k, index, exclude_self=exclude_self)
        except UnclassifiableDocument:
            assert all(index.idf.get(t, 0.0) == 0.0 for t in counts(q))
            return
        expected = brute_force_neighbors(q, docs, k, exclude_self=exclude_self)
        assert_rankings_match([(h.doc_id, h.score) for h in hits], expected)
        assert [h.doc_id for h in hits] == [d for d, _ in expected]
        assert all(0.0 <= h.score <= 1.0 for h in hits)
