"""Corpus ingestion: CSV parsing, cleaning, splits and the partial label mask.

The canonical corpus file is JSON-lines, one object per document:
``{"id", "tokens", "label", "role", "masked_visible"}``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import ConfigError, DataError
from .stemmer import stem
from .stopwords import STOPWORDS

log = logging.getLogger(__name__)

REAL = "real"
FAKE = "fake"
CLASSES = (REAL, FAKE)

TRAIN = "train"
VAL = "val"
TEST = "test"
ROLES = (TRAIN, VAL, TEST)

# Maximal runs of letters/digits; punctuation, symbols and underscores split.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class RawRecord:
    id: str
    title: str
    body: str
    label_text: str


@dataclass
class ParseResult:
    records: list[RawRecord]
    dropped: int
    duplicate_ids: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Document:
    """A cleaned news article: lowercase stemmed tokens, title then body."""

    id: str
    tokens: tuple[str, ...]
    label: str | None = None


@dataclass
class DatasetConfig:
    """Column mapping and label normalization for one CSV dataset."""

    id_column: str
    title_column: str
    body_column: str
    label_column: str
    label_map: dict[str, str]

    @classmethod
    def from_json(cls, text: str) -> "DatasetConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"dataset config is not valid JSON: {exc}") from exc
        missing = [k for k in ("id_column", "title_column", "body_column",
                               "label_column", "label_map") if k not in raw]
        if missing:
            raise ConfigError(f"dataset config missing keys: {missing}")
        label_map = {str(k): str(v).lower() for k, v in raw["label_map"].items()}
        bad = sorted(set(label_map.values()) - set(CLASSES))
        if bad:
            raise ConfigError(f"label_map values must be 'real' or 'fake', got {bad}")
        return cls(
            id_column=raw["id_column"],
            title_column=raw["title_column"],
            body_column=raw["body_column"],
            label_column=raw["label_column"],
            label_map=label_map,
        )


@dataclass
class SplitAssignment:
    """Document roles drawn by a seeded shuffle: 80/10/10 train/val/test."""

    roles: dict[str, str]
    seed: int

    def ids_with_role(self, role: str) -> list[str]:
        return [i for i, r in self.roles.items() if r == role]


@dataclass(frozen=True)
class LabelMask:
    """Train-bucket ids whose labels are visible to the loss."""

    visible: frozenset[str]
    fraction: float
    seed: int


def parse_dataset(stream: TextIO, config: DatasetConfig) -> ParseResult:
    """Read a CSV with a header row into RawRecords.

    Rows with an empty id, title, body or label are dropped and counted.
    A repeated id keeps the first occurrence and drops later ones with a
    warning. Malformed CSV framing raises DataError naming the row.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise DataError("CSV input has no header row")
    needed = [config.id_column, config.title_column, config.body_column,
              config.label_column]
    absent = [c for c in needed if c not in reader.fieldnames]
    if absent:
        raise ConfigError(
            f"columns {absent} not in CSV header {reader.fieldnames}")

    records: list[RawRecord] = []
    seen: set[str] = set()
    dropped = 0
    duplicates: list[str] = []
    try:
        for row in reader:
            rid = (row.get(config.id_column) or "").strip()
            title = (row.get(config.title_column) or "").strip()
            body = (row.get(config.body_column) or "").strip()
            label = (row.get(config.label_column) or "").strip()
            if not rid or not title or not body or not label:
                dropped += 1
                continue
            if rid in seen:
                duplicates.append(rid)
                log.warning("duplicate id %r dropped (row %d)", rid, reader.line_num)
                continue
            seen.add(rid)
            records.append(RawRecord(rid, title, body, label))
    except csv.Error as exc:
        raise DataError(f"malformed CSV at row {reader.line_num}: {exc}") from exc
    return ParseResult(records=records, dropped=dropped, duplicate_ids=duplicates)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def preprocess(
    record: RawRecord,
    stopwords: frozenset[str] = STOPWORDS,
    label_map: dict[str, str] | None = None,
) -> Document | None:
    """Clean one record into a Document, or None when it should be dropped.

    Title tokens come first, then body tokens. Tokens are lowercased,
    split at whitespace/punctuation, filtered against the stop list and
    stemmed. Returns None if no token survives or the label does not map.
    """
    if label_map is not None:
        label = label_map.get(record.label_text.strip())
        if label is None:
            label = label_map.get(record.label_text.strip().lower())
        if label is None:
            return None
    else:
        label = None
    tokens = [
        stem(t)
        for t in tokenize(record.title) + tokenize(record.body)
        if t not in stopwords
    ]
    if not tokens:
        return None
    return Document(id=record.id, tokens=tuple(tokens), label=label)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_documents(
    docs: list[Document],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitAssignment:
    """Shuffle uniformly and cut into contiguous train/val/test buckets.

    Bucket sizes are round(r0*N), round(r1*N) and the remainder.
    Deterministic for a fixed seed.
    """
    n = len(docs)
    if n < 3:
        raise DataError(f"need at least 3 documents to split, got {n}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {ratios}")
    n_train = _round_half_up(ratios[0] * n)
    n_val = _round_half_up(ratios[1] * n)
    perm = np.random.default_rng(seed).permutation(n)
    roles: dict[str, str] = {}
    for pos, idx in enumerate(perm):
        if pos < n_train:
            role = TRAIN
        elif pos < n_train + n_val:
            role = VAL
        else:
            role = TEST
        roles[docs[int(idx)].id] = role
    return SplitAssignment(roles=roles, seed=seed)


def make_label_mask(
    split: SplitAssignment,
    labels: dict[str, str],
    fraction: float,
    seed: int,
) -> LabelMask:
    """Draw the visible-label subset from the Train bucket.

    The mask size is round(fraction * corpus size), capped at the Train
    bucket size; the fraction is of the whole corpus, not of the Train
    bucket. The draw is stratified so per-class counts match the Train
    bucket's class proportions within one document (largest remainder).
    """
    if not 0.0 <= fraction <= 0.8:
        raise ConfigError(f"label fraction must be in [0, 0.8], got {fraction}")
    train_ids = sorted(i for i, r in split.roles.items() if r == TRAIN)
    total = len(split.roles)
    size = min(_round_half_up(fraction * total), len(train_ids))

    by_class: dict[str, list[str]] = {c: [] for c in CLASSES}
    for i in train_ids:
        cls = labels.get(i)
        if cls not in by_class:
            raise DataError(f"document {i!r} has no usable label")
        by_class[cls].append(i)

    n_train = len(train_ids)
    targets = {c: size * len(ids) / n_train for c, ids in by_class.items()}
    counts = {c: int(math.floor(t)) for c, t in targets.items()}
    leftover = size - sum(counts.values())
    for c in sorted(CLASSES, key=lambda c: (counts[c] - targets[c], c)):
        if leftover <= 0:
            break
        counts[c] += 1
        leftover -= 1

    rng = np.random.default_rng(seed)
    visible: list[str] = []
    for c in CLASSES:
        ids = by_class[c]
        take = counts[c]
        if take > 0:
            chosen = rng.choice(len(ids), size=take, replace=False)
            visible.extend(ids[int(j)] for j in chosen)
    return LabelMask(visible=frozenset(visible), fraction=fraction, seed=seed)


@dataclass(frozen=True)
class CorpusEntry:
    """One line of the canonical corpus file."""

    id: str
    tokens: tuple[str, ...]
    label: str
    role: str
    masked_visible: bool


def assemble_corpus(
    docs: list[Document],
    split: SplitAssignment,
    mask: LabelMask,
) -> list[CorpusEntry]:
    entries = []
    for doc in docs:
        if doc.label is None:
            raise DataError(f"document {doc.id!r} has no label")
        entries.append(CorpusEntry(
            id=doc.id,
            tokens=doc.tokens,
            label=doc.label,
            role=split.roles[doc.id],
            masked_visible=doc.id in mask.visible,
        ))
    return entries


def write_corpus(path, entries: Iterable[CorpusEntry]) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            fh.write(json.dumps({
                "id": e.id,
                "tokens": list(e.tokens),
                "label": e.label,
                "role": e.role,
                "masked_visible": e.masked_visible,
            }, ensure_ascii=False, sort_keys=True) + "\n")


def read_corpus(path) -> list[CorpusEntry]:
    entries = []
    with io.open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                entries.append(CorpusEntry(
                    id=raw["id"],
                    tokens=tuple(raw["tokens"]),
                    label=raw["label"],
                    role=raw["role"],
                    masked_visible=bool(raw["masked_visible"]),
                ))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"bad corpus line {lineno}: {exc}") from exc
    return entries
