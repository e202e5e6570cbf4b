import json

import numpy as np
import pytest

from knnesa.corpus import Document, LabelVocabulary

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's pass/fail line for the terminal summary."""

    def record(name: str, passed: bool, detail: str = ""):
        _CRITERIA[name] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split()[0]) if n.split()[0].isdigit() else 99):
        passed, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def random_corpus(rng, n_docs, vocab_size, n_labels=8, min_len=3, max_len=40, dup_rate=0.05):
    """Random bag-of-token documents over tokens w0..w{vocab_size-1}; some exact duplicates."""
    words = [f"w{i}" for i in range(vocab_size)]
    zipf = 1.0 / np.arange(1, vocab_size + 1)
    zipf /= zipf.sum()
    docs = []
    for i in range(n_docs):
        if docs and rng.random() < dup_rate:
            src = docs[int(rng.integers(len(docs)))]
            docs.append(Document(f"d{i:04d}", src.title, src.abstract, src.labels))
            continue
        n = int(rng.integers(min_len, max_len + 1))
        toks = [words[j] for j in rng.choice(vocab_size, size=n, p=zipf)]
        cut = int(rng.integers(0, n + 1))
        labels = {f"L{int(j)}" for j in rng.choice(n_labels, size=int(rng.integers(0, 4)), replace=False)}
        docs.append(Document(f"d{i:04d}", " ".join(toks[:cut]), " ".join(toks[cut:]), frozenset(labels)))
    return docs


def label_vocab(n_labels=8):
    vocab = LabelVocabulary()
    for j in range(n_labels):
        vocab.add(f"L{j}", f"w{j} w{j + 1}", [f"w{j + 2}"])
    return vocab


def assert_rankings_match(got, expected, tol=1e-12):
    """Same scores position by position; ids equal up to reordering inside tolerance ties."""
    assert len(got) == len(expected)
    for (_, a), (_, b) in zip(got, expected):
        assert abs(a - b) <= tol
    i = 0
    while i < len(expected):
        j = i + 1
        while j < len(expected) and abs(expected[j][1] - expected[i][1]) <= tol:
            j += 1
        assert {x for x, _ in got[i:j]} == {x for x, _ in expected[i:j]}
        i = j


@pytest.fixture
def write_jsonl(tmp_path):
    def write(name, records):
        path = tmp_path / name
        path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
        return path

    return write
