"""Corpus ingestion: normalization, tokenization, language filtering.

Builds the canonical in-memory corpus every other stage consumes. Records
are immutable once constructed; a Corpus is safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import unicodedata
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateId, EmptyCorpus, IoFailure, MalformedRecord
from .stopwords import STOPWORDS

CORPUS_HEADER = ["id", "title", "source"]

# Below this many tokens the ratio heuristic is unreliable; require a full
# stopword match instead.
_MIN_TOKENS_FOR_RATIO = 4

LanguageDetector = Callable[[Sequence[str]], str]


def normalize_title(raw: str) -> str:
    """Normalize a raw title for comparison.

    Applies Unicode NFC, lowercases, replaces every character that is not
    alphanumeric with a space, then collapses whitespace runs and trims.
    Total and idempotent; empty input yields empty output.
    """
    text = unicodedata.normalize("NFC", raw).lower()
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text)
    return unicodedata.normalize("NFC", " ".join(cleaned.split()))


def tokenize(normalized: str) -> list[str]:
    """Split a normalized title into tokens.

    The input is expected to already be normalized (single spaces only);
    empty input yields an empty list and no token is ever empty.
    """
    return normalized.split()


@dataclass(frozen=True)
class TitleRecord:
    """One corpus entry with its normalized derivations."""

    id: str
    raw_title: str
    normalized: str
    tokens: tuple[str, ...]
    word_count: int
    source: str

    @classmethod
    def from_raw(cls, record_id: str, raw_title: str, source: str) -> TitleRecord:
        normalized = normalize_title(raw_title)
        tokens = tuple(tokenize(normalized))
        return cls(
            id=record_id,
            raw_title=raw_title,
            normalized=normalized,
            tokens=tokens,
            word_count=len(tokens),
            source=source,
        )


def detect_language(
    record: TitleRecord, detector: LanguageDetector | None = None
) -> str:
    """Best-guess ISO-639-1 language code for a record, or "unknown".

    The default detector scores the fraction of tokens found in each
    built-in stopword list (en, es, fr, de) and picks the highest ratio.
    Titles with fewer than four tokens are "unknown" unless every token
    matches a single list; ties break on alphabetical language code. Pass
    `detector` to substitute a heavier implementation.
    """
    if detector is None:
        detector = stopword_ratio_detector
    return detector(record.tokens)


def stopword_ratio_detector(tokens: Sequence[str]) -> str:
    if not tokens:
        return "unknown"
    hits = {
        lang: sum(1 for tok in tokens if tok in words)
        for lang, words in STOPWORDS.items()
    }
    if len(tokens) < _MIN_TOKENS_FOR_RATIO:
        full = [lang for lang in sorted(hits) if hits[lang] == len(tokens)]
        return full[0] if full else "unknown"
    best = min(sorted(hits), key=lambda lang: -hits[lang])
    if hits[best] == 0:
        return "unknown"
    return best


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of title records plus derived lookups."""

    records: tuple[TitleRecord, ...]
    source_set: frozenset[str]
    word_count_histogram: dict[int, int]
    by_id: dict[str, TitleRecord] = field(repr=False)

    @classmethod
    def from_records(cls, records: Iterable[TitleRecord]) -> Corpus:
        """Build a corpus, enforcing id uniqueness."""
        recs = tuple(records)
        by_id: dict[str, TitleRecord] = {}
        for rec in recs:
            if rec.id in by_id:
                raise DuplicateId(f"duplicate record id {rec.id!r}")
            by_id[rec.id] = rec
        histogram = dict(Counter(rec.word_count for rec in recs))
        sources = frozenset(rec.source for rec in recs)
        return cls(
            records=recs,
            source_set=sources,
            word_count_histogram=histogram,
            by_id=by_id,
        )

    def __len__(self) -> int:
        return len(self.records)

    def record(self, record_id: str) -> TitleRecord:
        return self.by_id[record_id]


def mode_word_count(corpus: Corpus) -> int:
    """Most frequent word count in the corpus; ties break low.

    Raises EmptyCorpus when there are no records.
    """
    if not corpus.records:
        raise EmptyCorpus("mode word count needs a non-empty corpus")
    return min(corpus.word_count_histogram.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _rows_from_csv(path: Path) -> Iterable[tuple[str, str, str]]:
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None or any(col not in header for col in CORPUS_HEADER):
            raise MalformedRecord(
                f"{path}: expected CSV header with columns id,title,source"
            )
        for line_no, row in enumerate(reader, start=2):
            values = [row.get(col) for col in CORPUS_HEADER]
            if any(v is None for v in values):
                raise MalformedRecord(
                    f"{path}: row {line_no} is missing id/title/source"
                )
            yield values[0], values[1], values[2]


def _rows_from_jsonl(path: Path) -> Iterable[tuple[str, str, str]]:
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(
                    f"{path}: line {line_no} is not valid JSON: {exc}"
                ) from exc
            if not isinstance(obj, dict):
                raise MalformedRecord(f"{path}: line {line_no} is not an object")
            values = [obj.get(col) for col in ("id", "title", "source")]
            if any(not isinstance(v, str) for v in values):
                raise MalformedRecord(
                    f"{path}: line {line_no} needs string id/title/source"
                )
            yield values[0], values[1], values[2]


def load_corpus(
    path: str | Path,
    format: str = "csv",
    language_filter: str | None = None,
    detector: LanguageDetector | None = None,
) -> Corpus:
    """Load and normalize a corpus file.

    `format` is "csv" (header id,title,source) or "jsonl" (one object per
    line; unknown fields ignored). With `language_filter`, records whose
    detected language differs from the filter are dropped, except records
    detected as "unknown", which are kept.

    Raises MalformedRecord, DuplicateId, or IoFailure; error messages name
    the file and offending row.
    """
    path = Path(path)
    if format == "csv":
        rows = _rows_from_csv(path)
    elif format == "jsonl":
        rows = _rows_from_jsonl(path)
    else:
        raise ValueError(f"unsupported corpus format {format!r}")

    records: list[TitleRecord] = []
    seen: set[str] = set()
    try:
        for record_id, title, source in rows:
            if record_id in seen:
                raise DuplicateId(f"{path}: duplicate record id {record_id!r}")
            seen.add(record_id)
            rec = TitleRecord.from_raw(record_id, title, source)
            if language_filter is not None:
                lang = detect_language(rec, detector)
                if lang != language_filter and lang != "unknown":
                    continue
            records.append(rec)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise MalformedRecord(f"{path}: not valid UTF-8: {exc}") from exc
    return Corpus.from_records(records)


def write_corpus(path: str | Path, corpus: Corpus) -> None:
    """Write a corpus back to the canonical CSV schema (raw titles)."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CORPUS_HEADER)
            for rec in corpus.records:
                writer.writerow([rec.id, rec.raw_title, rec.source])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
