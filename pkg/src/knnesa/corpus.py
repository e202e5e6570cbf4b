"""Corpus and vocabulary loading plus the text normalization pipeline.

Every other module sees text only through :func:`preprocess`: sentence
segmentation, tokenization on non-alphanumeric boundaries, lowercasing,
stopword removal and Porter stemming.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable

from nltk.stem.porter import PorterStemmer

from knnesa.errors import FormatError

_TOKEN_RE = re.compile(r"[^\W_]+")
_STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def _load_stopwords() -> frozenset[str]:
    text = resources.files("knnesa").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class Document:
    id: str
    title: str = ""
    abstract: str = ""
    labels: frozenset[str] = field(default_factory=frozenset)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "labels": sorted(self.labels),
        }


@dataclass(frozen=True)
class LabelEntry:
    preferred_name: str
    entry_terms: tuple[str, ...] = ()
    # normalized forms, filled by the vocabulary
    name_tokens: tuple[str, ...] = ()
    entry_tokens: tuple[tuple[str, ...], ...] = ()


class LabelVocabulary:
    """Controlled vocabulary: label id -> preferred name and entry terms."""

    def __init__(self, entries: dict[str, tuple[str, Iterable[str]]] | None = None):
        self.entries: dict[str, LabelEntry] = {}
        for label_id, (name, terms) in (entries or {}).items():
            self.add(label_id, name, terms)

    def add(self, label_id: str, name: str, entry_terms: Iterable[str] = ()) -> None:
        if not label_id:
            raise FormatError("empty label id")
        if label_id in self.entries:
            raise FormatError(f"duplicate label id {label_id!r}")
        if not isinstance(name, str) or not name.strip():
            raise FormatError(f"label {label_id!r} has an empty preferred name")
        terms = tuple(t for t in dict.fromkeys(entry_terms) if t != name)
        self.entries[label_id] = LabelEntry(
            preferred_name=name,
            entry_terms=terms,
            name_tokens=tuple(preprocess(name)),
            entry_tokens=tuple(tuple(preprocess(t)) for t in terms),
        )

    def __getitem__(self, label_id: str) -> LabelEntry:
        return self.entries[label_id]

    def __contains__(self, label_id: object) -> bool:
        return label_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_json(self) -> dict:
        return {
            label_id: {"name": e.preferred_name, "entries": list(e.entry_terms)}
            for label_id, e in sorted(self.entries.items())
        }


def segment(text: str) -> list[str]:
    # Unigram statistics ignore sentence boundaries, so the whole text is one segment.
    return [text]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


@lru_cache(maxsize=1 << 20)
def stem(token: str) -> str:
    # Single pass of the 1980 algorithm; Porter is not idempotent (adipos -> adipo).
    return _STEMMER.stem(token)


def preprocess(text: str) -> list[str]:
    terms = []
    for sentence in segment(text):
        for token in tokenize(sentence):
            token = token.lower()
            if token in STOPWORDS:
                continue
            term = stem(token)
            if term and term not in STOPWORDS:
                terms.append(term)
    return terms


def document_terms(doc: Document) -> list[str]:
    return preprocess(doc.title + " " + doc.abstract)


def term_vector(doc: Document) -> dict[str, int]:
    return dict(Counter(document_terms(doc)))


def parse_document(record: dict) -> Document:
    if not isinstance(record, dict):
        raise FormatError("record is not a JSON object")
    doc_id = record.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise FormatError("missing or empty 'id'")
    title = record.get("title", "") or ""
    abstract = record.get("abstract", "") or ""
    labels = record.get("labels", []) or []
    if not isinstance(title, str) or not isinstance(abstract, str):
        raise FormatError(f"document {doc_id!r}: title and abstract must be strings")
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise FormatError(f"document {doc_id!r}: labels must be a list of strings")
    return Document(doc_id, title, abstract, frozenset(labels))


def load_corpus(path) -> list[Document]:
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = parse_document(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            except FormatError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from exc
            if doc.id in seen:
                raise FormatError(f"{path}: line {lineno}: duplicate document id {doc.id!r}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


def dump_corpus(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_record(), ensure_ascii=False) + "\n")


def check_labels(docs: Iterable[Document], vocab: LabelVocabulary) -> None:
    """Raise if any document carries a label missing from ``vocab``."""
    for doc in docs:
        missing = sorted(lab for lab in doc.labels if lab not in vocab)
        if missing:
            raise FormatError(f"document {doc.id!r}: unknown labels {missing}")


def _reject_duplicates(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise FormatError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def load_vocabulary(path) -> LabelVocabulary:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh, object_pairs_hook=_reject_duplicates)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
        except FormatError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: top level must be an object")
    vocab = LabelVocabulary()
    for label_id, record in raw.items():
        if not isinstance(record, dict) or "name" not in record:
            raise FormatError(f"{path}: label {label_id!r} needs a 'name'")
        entries = record.get("entries", [])
        if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
            raise FormatError(f"{path}: label {label_id!r}: 'entries' must be a list of strings")
        vocab.add(label_id, record["name"], entries)
    return vocab


def dump_vocabulary(vocab: LabelVocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(vocab.to_json(), fh, ensure_ascii=False, indent=1, sort_keys=True)
        fh.write("\n")
