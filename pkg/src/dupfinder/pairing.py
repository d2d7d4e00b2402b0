"""Candidate pair generation under five blocking strategies.

Every strategy emits a deduplicated stream of canonically ordered id pairs
(left_id < right_id), in lexicographic (left_id, right_id) order, and never
includes records whose normalized title has zero words. The selective
strategies are equivalent to filtering the complete pairing with their
predicate, but are implemented with word-count buckets so the excluded
pairs are never enumerated.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import Corpus, TitleRecord, mode_word_count
from .errors import IoFailure, MalformedRecord

PAIRS_HEADER = ["left_id", "right_id", "strategy"]


class Strategy(str, Enum):
    COMPLETE = "complete"
    CROSS_SOURCE = "cross_source"
    LENGTH_DIFF = "length_diff"
    MODE_WINDOW = "mode_window"
    SHORT_TITLES = "short_titles"


@dataclass(frozen=True)
class PairingConfig:
    """Thresholds for the selective strategies.

    delta bounds the word-count difference, lambda_ is the half-width of
    the window around the corpus mode word count, tau is the maximum word
    count of a "short" title.
    """

    delta: int = 5
    lambda_: int = 2
    tau: int = 3
    strategy: Strategy = Strategy.COMPLETE

    def __post_init__(self) -> None:
        for name in ("delta", "lambda_", "tau"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True, order=True)
class CandidatePair:
    """Unordered pair of record ids in canonical (left < right) form."""

    left_id: str
    right_id: str
    strategy: Strategy

    def __post_init__(self) -> None:
        if self.left_id >= self.right_id:
            raise ValueError("pair ids must satisfy left_id < right_id")

    @property
    def key(self) -> tuple[str, str]:
        return (self.left_id, self.right_id)


def _eligible(corpus: Corpus) -> list[TitleRecord]:
    """Records that take part in pairing, sorted by id."""
    return sorted(
        (rec for rec in corpus.records if rec.word_count >= 1),
        key=lambda rec: rec.id,
    )


def complete_pairs(corpus: Corpus) -> Iterator[CandidatePair]:
    """All unordered pairs of eligible records: n'(n'-1)/2 of them."""
    records = _eligible(corpus)
    for i, left in enumerate(records):
        for right in records[i + 1 :]:
            yield CandidatePair(left.id, right.id, Strategy.COMPLETE)


def cross_source_pairs(corpus: Corpus) -> Iterator[CandidatePair]:
    """Pairs whose records carry different source tags."""
    records = _eligible(corpus)
    for i, left in enumerate(records):
        for right in records[i + 1 :]:
            if left.source != right.source:
                yield CandidatePair(left.id, right.id, Strategy.CROSS_SOURCE)


def length_diff_pairs(
    corpus: Corpus, config: PairingConfig
) -> Iterator[CandidatePair]:
    """Pairs with word-count difference at most config.delta."""
    records = _eligible(corpus)
    buckets: dict[int, list[str]] = {}
    for rec in records:
        buckets.setdefault(rec.word_count, []).append(rec.id)
    counts = sorted(buckets)
    for left in records:
        rights: list[str] = []
        low, high = left.word_count - config.delta, left.word_count + config.delta
        for count in counts:
            if count < low:
                continue
            if count > high:
                break
            ids = buckets[count]
            rights.extend(ids[bisect_right(ids, left.id) :])
        for right_id in sorted(rights):
            yield CandidatePair(left.id, right_id, Strategy.LENGTH_DIFF)


def mode_window_pairs(
    corpus: Corpus, config: PairingConfig
) -> Iterator[CandidatePair]:
    """Cross-source pairs whose word counts both sit within lambda_ of the
    corpus mode word count. Raises EmptyCorpus on an empty corpus."""
    mode = mode_word_count(corpus)
    window = [
        rec
        for rec in _eligible(corpus)
        if abs(rec.word_count - mode) <= config.lambda_
    ]
    for i, left in enumerate(window):
        for right in window[i + 1 :]:
            if left.source != right.source:
                yield CandidatePair(left.id, right.id, Strategy.MODE_WINDOW)


def short_title_pairs(
    corpus: Corpus, config: PairingConfig
) -> Iterator[CandidatePair]:
    """Pairs where both word counts are at most config.tau (and >= 1)."""
    short = [rec for rec in _eligible(corpus) if rec.word_count <= config.tau]
    for i, left in enumerate(short):
        for right in short[i + 1 :]:
            yield CandidatePair(left.id, right.id, Strategy.SHORT_TITLES)


def generate(corpus: Corpus, config: PairingConfig) -> Iterator[CandidatePair]:
    """Dispatch to the configured strategy; output order is deterministic."""
    if config.strategy is Strategy.COMPLETE:
        return complete_pairs(corpus)
    if config.strategy is Strategy.CROSS_SOURCE:
        return cross_source_pairs(corpus)
    if config.strategy is Strategy.LENGTH_DIFF:
        return length_diff_pairs(corpus, config)
    if config.strategy is Strategy.MODE_WINDOW:
        return mode_window_pairs(corpus, config)
    if config.strategy is Strategy.SHORT_TITLES:
        return short_title_pairs(corpus, config)
    raise ValueError(f"unknown strategy {config.strategy!r}")


def write_pairs(path: str | Path, pairs: Iterable[CandidatePair]) -> int:
    """Stream pairs to the candidate-pair CSV; returns the number written.

    The generators above already emit in canonical sorted order, so the
    stream is written as-is without materializing it.
    """
    path = Path(path)
    count = 0
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(PAIRS_HEADER)
            for pair in pairs:
                writer.writerow([pair.left_id, pair.right_id, pair.strategy.value])
                count += 1
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return count


def read_pairs(path: str | Path) -> Iterator[CandidatePair]:
    """Stream pairs back from a candidate-pair CSV."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != PAIRS_HEADER:
                raise MalformedRecord(
                    f"{path}: expected header {','.join(PAIRS_HEADER)}"
                )
            for line_no, row in enumerate(reader, start=2):
                if len(row) != 3:
                    raise MalformedRecord(f"{path}: row {line_no} needs 3 fields")
                left_id, right_id, strategy = row
                try:
                    parsed = Strategy(strategy)
                except ValueError as exc:
                    raise MalformedRecord(
                        f"{path}: row {line_no} has unknown strategy {strategy!r}"
                    ) from exc
                try:
                    yield CandidatePair(left_id, right_id, parsed)
                except ValueError as exc:
                    raise MalformedRecord(f"{path}: row {line_no}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
