"""Planted-topic corpora: labels recoverable from neighbor votes by construction.

Every topic owns a disjoint signature of pseudo-words. A document samples a few
topics, emits all of their signature words plus noise, and is labeled with
exactly those topics. Topic popularity and noise words both follow Zipf
rank-frequency laws by default, as labels and words do in real collections.
Topic names and entry terms are separate pseudo-words that show up only in
some documents of the topic, so the lexical features carry partial signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from knnesa.corpus import Document, LabelVocabulary, preprocess

_CONSONANTS = "bcdfgklmnprtvz"
_VOWELS = "aiou"


@dataclass
class PlantedTopicCorpus:
    train: list[Document]
    test: list[Document]
    vocab: LabelVocabulary
    signatures: dict[str, list[str]]
    noise_words: list[str]


def pseudo_words(n: int, rng: np.random.Generator, taken: set[str] | None = None) -> list[str]:
    """``n`` distinct lowercase words that survive preprocessing unchanged."""
    taken = set() if taken is None else taken
    out = []
    while len(out) < n:
        syllables = int(rng.integers(2, 4))
        word = "".join(
            _CONSONANTS[int(rng.integers(len(_CONSONANTS)))] + _VOWELS[int(rng.integers(len(_VOWELS)))]
            for _ in range(syllables)
        ) + _CONSONANTS[int(rng.integers(len(_CONSONANTS)))]
        if word in taken or preprocess(word) != [word]:
            continue
        taken.add(word)
        out.append(word)
    return out


def _zipf(n: int, exponent: float) -> np.ndarray:
    """Rank-frequency weights 1/rank**exponent; exponent 0 is uniform."""
    w = 1.0 / np.arange(1, n + 1, dtype=np.float64) ** exponent
    return w / w.sum()


def planted_topic_corpus(
    n_train: int = 2000,
    n_test: int = 500,
    n_topics: int = 50,
    signature_size: int = 5,
    topics_per_doc: tuple[int, int] = (2, 4),
    doc_length: tuple[int, int] = (30, 60),
    noise_vocab: int = 2000,
    name_rate: float = 0.5,
    entry_rate: float = 0.3,
    title_length: int = 8,
    topic_skew: float = 1.0,
    noise_skew: float = 1.0,
    seed: int = 0,
) -> PlantedTopicCorpus:
    lo, hi = topics_per_doc
    if doc_length[0] < hi * signature_size + 2:
        raise ValueError("documents are too short to hold every sampled signature")
    rng = np.random.default_rng(seed)
    taken: set[str] = set()
    labels = [f"T{i:03d}" for i in range(n_topics)]
    signatures = {lab: pseudo_words(signature_size, rng, taken) for lab in labels}
    names = dict(zip(labels, pseudo_words(n_topics, rng, taken)))
    entries = dict(zip(labels, pseudo_words(n_topics, rng, taken)))
    noise = pseudo_words(noise_vocab, rng, taken)

    topic_p = _zipf(n_topics, topic_skew)
    noise_p = _zipf(noise_vocab, noise_skew)

    vocab = LabelVocabulary()
    for lab in labels:
        vocab.add(lab, names[lab], [entries[lab]])

    def make(doc_id: str) -> Document:
        size = int(rng.integers(lo, hi + 1))
        chosen = sorted(rng.choice(n_topics, size=size, replace=False, p=topic_p))
        length = int(rng.integers(doc_length[0], doc_length[1] + 1))
        tokens: list[str] = []
        for t in chosen:
            lab = labels[t]
            tokens.extend(signatures[lab])
            if rng.random() < name_rate:
                tokens.append(names[lab])
            if rng.random() < entry_rate:
                tokens.append(entries[lab])
        n_noise = max(0, length - len(tokens))
        tokens.extend(noise[int(i)] for i in rng.choice(noise_vocab, size=n_noise, p=noise_p))
        tokens = [tokens[int(i)] for i in rng.permutation(len(tokens))]
        return Document(
            doc_id,
            " ".join(tokens[:title_length]),
            " ".join(tokens[title_length:]),
            frozenset(labels[t] for t in chosen),
        )

    train = [make(f"train-{i:06d}") for i in range(n_train)]
    test = [make(f"test-{i:06d}") for i in range(n_test)]
    return PlantedTopicCorpus(train, test, vocab, signatures, noise)
