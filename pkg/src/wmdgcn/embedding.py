"""Pre-trained word vectors, mean-vector document embeddings, and the
co-occurrence counting utility.

The document-vector matrix is persisted as ``magic(4B) N(u64 LE)
dim(u64 LE)`` followed by N*dim little-endian float64, with a sidecar
JSON file recording the row id order.
"""

from __future__ import annotations

import json
import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .corpus import Document
from .errors import DataError

log = logging.getLogger(__name__)

DOCVEC_MAGIC = b"DVEC"


@dataclass
class EmbeddingTable:
    """Immutable token -> vector lookup; rows of `vectors` are float64."""

    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray
    duplicates: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.vectors[self.vocab[token]]


def load_glove(stream: TextIO, expected_dim: int) -> EmbeddingTable:
    """Parse whitespace-separated `token v1 ... vdim` lines.

    The first occurrence of a repeated token wins; repeats are counted
    and logged. A line with the wrong number of values or a non-finite
    value raises DataError naming the line.
    """
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    duplicates = 0
    for lineno, line in enumerate(stream, start=1):
        parts = line.rstrip("\n").split(" ")
        if len(parts) <= 1 and not line.strip():
            continue
        token = parts[0]
        values = parts[1:]
        if len(values) != expected_dim:
            raise DataError(
                f"line {lineno}: expected {expected_dim} values, got {len(values)}")
        try:
            vec = np.array([float(v) for v in values], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"line {lineno}: bad float ({exc})") from exc
        if not np.all(np.isfinite(vec)):
            raise DataError(f"line {lineno}: non-finite value")
        if token in vocab:
            duplicates += 1
            continue
        vocab[token] = len(rows)
        rows.append(vec)
    if duplicates:
        log.warning("ignored %d duplicate embedding tokens", duplicates)
    vectors = (np.vstack(rows) if rows
               else np.zeros((0, expected_dim), dtype=np.float64))
    return EmbeddingTable(dim=expected_dim, vocab=vocab, vectors=vectors,
                          duplicates=duplicates)


def doc_vector(doc: Document, table: EmbeddingTable) -> np.ndarray | None:
    """Mean embedding of the document's in-vocabulary tokens, with
    multiplicity. Returns None when every token is out of vocabulary."""
    idx = [table.vocab[t] for t in doc.tokens if t in table.vocab]
    if not idx:
        return None
    return table.vectors[idx].mean(axis=0)


def build_doc_matrix(
    docs: Iterable[Document], table: EmbeddingTable
) -> tuple[np.ndarray, list[str], list[str]]:
    """Stack doc_vector rows in corpus order.

    Returns (X, kept_ids, dropped_ids); documents with no in-vocabulary
    token are dropped and reported, keeping X rows aligned to kept_ids.
    """
    rows, kept, dropped = [], [], []
    for doc in docs:
        vec = doc_vector(doc, table)
        if vec is None:
            dropped.append(doc.id)
        else:
            rows.append(vec)
            kept.append(doc.id)
    if not rows:
        raise DataError("every document is out of vocabulary")
    return np.vstack(rows), kept, dropped


@dataclass
class CooccurrenceMatrix:
    """Symmetric window co-occurrence counts over a token sequence's
    unique tokens, in first-appearance order."""

    tokens: list[str]
    counts: np.ndarray
    window: int = 1

    def count(self, a: str, b: str) -> int:
        return int(self.counts[self.tokens.index(a), self.tokens.index(b)])


def cooccurrence(tokens: list[str], window: int = 1) -> CooccurrenceMatrix:
    """Count position pairs (i, j), i != j, |i - j| <= window, once per
    unordered pair, mirrored into a symmetric matrix."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    uniq: list[str] = []
    index: dict[str, int] = {}
    for t in tokens:
        if t not in index:
            index[t] = len(uniq)
            uniq.append(t)
    counts = np.zeros((len(uniq), len(uniq)), dtype=np.int64)
    for i, ti in enumerate(tokens):
        for j in range(i + 1, min(i + window, len(tokens) - 1) + 1):
            a, b = index[ti], index[tokens[j]]
            counts[a, b] += 1
            if a != b:
                counts[b, a] += 1
    return CooccurrenceMatrix(tokens=uniq, counts=counts, window=window)


def save_doc_matrix(path, X: np.ndarray, ids: list[str]) -> None:
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, dim = X.shape
    if n != len(ids):
        raise ValueError(f"{n} rows but {len(ids)} ids")
    with open(path, "wb") as fh:
        fh.write(DOCVEC_MAGIC)
        fh.write(struct.pack("<QQ", n, dim))
        fh.write(X.astype("<f8").tobytes())
    with open(str(path) + ".ids.json", "w", encoding="utf-8") as fh:
        json.dump(ids, fh, ensure_ascii=False)


def load_doc_matrix(path) -> tuple[np.ndarray, list[str]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != DOCVEC_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        n, dim = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(n * dim * 8), dtype="<f8")
        if data.size != n * dim:
            raise DataError(f"{path}: truncated payload")
    with open(str(path) + ".ids.json", "r", encoding="utf-8") as fh:
        ids = json.load(fh)
    if len(ids) != n:
        raise DataError(f"{path}: sidecar lists {len(ids)} ids for {n} rows")
    return data.reshape(n, dim).copy(), ids
