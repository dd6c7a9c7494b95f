"""Text vectorization: tokenizing, TF-IDF, embedding averages, cosine.

The TF-IDF weight for term t in a document is (n_t / N) * (1 + ln(k / k_t))
with n_t the in-document occurrences, N the document token count, k the
corpus document count, and k_t the number of documents containing t.
Natural log is used throughout.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, MissingEmbeddingError, ParseError
from .resources import data_path

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_WHITESPACE_RE = re.compile(r"\s+")

WORD_AVERAGE = "word_average"
PRECOMPUTED_SENTENCE = "precomputed_sentence"

# Snap tolerance for cosine values that are 1.0 up to float rounding;
# exactly repeated texts must score exactly 1.0.
_UNIT_EPS = 1e-12


def load_stopwords(path: str | Path) -> frozenset[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    return load_stopwords(data_path("stopwords_en.txt"))


def tokenize(text: str, stop_words: frozenset[str] = frozenset()) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop stop words.

    Digits are kept so route designations like "I-73" survive as tokens.
    """
    return [
        token
        for token in (match.group(0).lower() for match in _TOKEN_RE.finditer(text))
        if token not in stop_words
    ]


def normalize_sentence(text: str) -> str:
    """Key normalization for sentence-vector lookups and text frequency."""
    return _WHITESPACE_RE.sub(" ", text.strip()).lower()


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    document_frequency: dict[str, int]
    document_count: int


def tfidf_fit(documents: Sequence[Sequence[str]]) -> TfidfModel:
    """Count document frequencies over a tokenized corpus."""
    if not documents:
        raise ParseError("cannot fit a TF-IDF model on an empty document list")
    frequency: dict[str, int] = {}
    for doc in documents:
        for term in set(doc):
            frequency[term] = frequency.get(term, 0) + 1
    vocabulary = {term: index for index, term in enumerate(sorted(frequency))}
    return TfidfModel(
        vocabulary=vocabulary,
        document_frequency=frequency,
        document_count=len(documents),
    )


@dataclass(frozen=True)
class SparseVector:
    """(index, weight) pairs with strictly ascending indices."""

    entries: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        previous = -1
        for index, weight in self.entries:
            if index <= previous:
                raise DimensionError("sparse vector indices must strictly ascend")
            if not math.isfinite(weight):
                raise DimensionError(f"non-finite weight at index {index}")
            previous = index

    def norm(self) -> float:
        return math.sqrt(sum(weight * weight for _, weight in self.entries))

    def dot(self, other: "SparseVector") -> float:
        weights = dict(other.entries)
        return sum(weight * weights[index] for index, weight in self.entries if index in weights)


def tfidf_vector(model: TfidfModel, doc: Sequence[str]) -> SparseVector:
    """Weight a document's in-vocabulary terms; N counts every token."""
    if not doc:
        raise ParseError("cannot vectorize an empty document")
    total = len(doc)
    counts: dict[str, int] = {}
    for token in doc:
        if token in model.vocabulary:
            counts[token] = counts.get(token, 0) + 1
    entries = []
    for term, count in counts.items():
        idf = 1.0 + math.log(model.document_count / model.document_frequency[term])
        entries.append((model.vocabulary[term], (count / total) * idf))
    entries.sort()
    return SparseVector(tuple(entries))


def _snap_unit(value: float) -> float:
    if value >= 1.0 - _UNIT_EPS:
        return 1.0
    if value <= -1.0 + _UNIT_EPS:
        return -1.0
    return value


def unit_rows(backend: "EmbeddingBackend", texts: Sequence[str]) -> np.ndarray:
    """Stack embeddings as unit rows; all-zero embeddings stay zero rows."""
    if not texts:
        return np.zeros((0, backend.dimension))
    matrix = np.stack([embed_text(backend, text).vector for text in texts])
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.where(norms == 0.0, 1.0, norms)


def cosine_table(unit_a: np.ndarray, unit_b: np.ndarray) -> np.ndarray:
    """All pairwise cosines of two unit-row stacks, snapped at the unit."""
    scores = unit_a @ unit_b.T
    np.clip(scores, -1.0, 1.0, out=scores)
    scores[scores >= 1.0 - _UNIT_EPS] = 1.0
    scores[scores <= -1.0 + _UNIT_EPS] = -1.0
    return scores


def best_against(unit_a: np.ndarray, unit_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise argmax cosine of unit_a into unit_b; ties take the lowest index."""
    scores = cosine_table(unit_a, unit_b)
    indices = scores.argmax(axis=1)
    return indices, scores[np.arange(len(indices)), indices]


def cosine(v, w) -> float:
    """Cosine similarity; zero-norm operands yield 0.0 by convention."""
    if isinstance(v, SparseVector) or isinstance(w, SparseVector):
        if not isinstance(v, SparseVector) or not isinstance(w, SparseVector):
            raise DimensionError("cannot mix sparse and dense vectors")
        norm_v, norm_w = v.norm(), w.norm()
        if norm_v == 0.0 or norm_w == 0.0:
            return 0.0
        return _snap_unit(v.dot(w) / (norm_v * norm_w))
    av = np.asarray(v, dtype=float)
    aw = np.asarray(w, dtype=float)
    if av.shape != aw.shape:
        raise DimensionError(f"dimension mismatch: {av.shape} vs {aw.shape}")
    norm_v = float(np.linalg.norm(av))
    norm_w = float(np.linalg.norm(aw))
    if norm_v == 0.0 or norm_w == 0.0:
        return 0.0
    return _snap_unit(float(np.dot(av, aw)) / (norm_v * norm_w))


@dataclass(frozen=True)
class EmbeddingBackend:
    """Token-vector table (word_average) or sentence-vector table."""

    kind: str
    dimension: int
    word_table: dict[str, np.ndarray] = field(default_factory=dict)
    sentence_table: dict[str, np.ndarray] = field(default_factory=dict)
    stop_words: frozenset[str] = frozenset()
    source: str = ""

    def __post_init__(self) -> None:
        if self.kind not in (WORD_AVERAGE, PRECOMPUTED_SENTENCE):
            raise ParseError(f"unknown backend kind {self.kind!r}")
        if self.dimension <= 0:
            raise ParseError("backend dimension must be positive")


@dataclass(frozen=True)
class EmbeddedText:
    vector: np.ndarray
    all_oov: bool = False


def embed_text(backend: EmbeddingBackend, text: str) -> EmbeddedText:
    """Mean token vector (word_average) or exact table lookup (precomputed)."""
    if backend.kind == PRECOMPUTED_SENTENCE:
        key = normalize_sentence(text)
        vector = backend.sentence_table.get(key)
        if vector is None:
            raise MissingEmbeddingError(f"no precomputed sentence vector for {text!r}")
        return EmbeddedText(vector=vector, all_oov=False)
    hits = [
        backend.word_table[token]
        for token in tokenize(text, backend.stop_words)
        if token in backend.word_table
    ]
    if not hits:
        return EmbeddedText(vector=np.zeros(backend.dimension), all_oov=True)
    return EmbeddedText(vector=np.mean(hits, axis=0), all_oov=False)


def load_word_vectors(
    path: str | Path, stop_words: frozenset[str] | None = None
) -> EmbeddingBackend:
    """Read the textual interchange format: header line, then token + floats."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(f"{path}: empty word-vector file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}, line 1: header must be '<vocab_size> <dimension>'")
    try:
        declared, dimension = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}, line 1: non-integer header field") from exc
    if dimension <= 0:
        raise ParseError(f"{path}, line 1: dimension must be positive")

    table: dict[str, np.ndarray] = {}
    parsed = 0
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dimension + 1:
            raise ParseError(
                f"{path}, line {number}: expected {dimension} components, got {len(parts) - 1}"
            )
        token = parts[0]
        try:
            vector = np.array([float(part) for part in parts[1:]], dtype=float)
        except ValueError as exc:
            raise ParseError(f"{path}, line {number}: non-numeric component") from exc
        if token in table:
            warnings.warn(f"{path}, line {number}: duplicate token {token!r}, last wins")
        table[token] = vector
        parsed += 1
    if declared != parsed:
        warnings.warn(f"{path}: header declares {declared} tokens, file holds {parsed}")
    if not table:
        raise ParseError(f"{path}: word-vector file holds no vectors")
    return EmbeddingBackend(
        kind=WORD_AVERAGE,
        dimension=dimension,
        word_table=table,
        stop_words=default_stopwords() if stop_words is None else stop_words,
        source=str(path),
    )


def load_sentence_vectors(
    path: str | Path, stop_words: frozenset[str] | None = None
) -> EmbeddingBackend:
    """Read JSON-Lines {"text": ..., "vector": [...]} into a lookup table."""
    path = Path(path)
    table: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}, line {number}: invalid JSON ({exc})") from exc
        if not isinstance(record, dict) or "text" not in record or "vector" not in record:
            raise ParseError(f"{path}, line {number}: expected keys 'text' and 'vector'")
        try:
            vector = np.array([float(x) for x in record["vector"]], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}, line {number}: non-numeric vector component") from exc
        if dimension is None:
            dimension = vector.size
            if dimension == 0:
                raise ParseError(f"{path}, line {number}: empty vector")
        elif vector.size != dimension:
            raise ParseError(
                f"{path}, line {number}: vector length {vector.size} != expected {dimension}"
            )
        key = normalize_sentence(str(record["text"]))
        existing = table.get(key)
        if existing is not None and not np.array_equal(existing, vector):
            raise ParseError(
                f"{path}, line {number}: duplicate text {record['text']!r} with differing vectors"
            )
        table[key] = vector
    if dimension is None:
        raise ParseError(f"{path}: sentence-vector file holds no vectors")
    return EmbeddingBackend(
        kind=PRECOMPUTED_SENTENCE,
        dimension=dimension,
        sentence_table=table,
        stop_words=default_stopwords() if stop_words is None else stop_words,
        source=str(path),
    )
