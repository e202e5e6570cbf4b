"""Regenerate the bundled sample corpus under data/sample/."""

from pathlib import Path

from knnesa.corpus import dump_corpus, dump_vocabulary
from knnesa.synthetic import planted_topic_corpus

OUT = Path(__file__).resolve().parent.parent / "data" / "sample"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    corpus = planted_topic_corpus(n_train=200, n_test=40, n_topics=20, noise_vocab=600, seed=2024)
    dump_corpus(corpus.train, OUT / "corpus.jsonl")
    dump_corpus(corpus.test, OUT / "queries.jsonl")
    dump_vocabulary(corpus.vocab, OUT / "vocab.json")


if __name__ == "__main__":
    main()
