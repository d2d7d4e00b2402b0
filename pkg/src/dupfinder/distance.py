"""String and bag-of-words distances for candidate pairs.

All three measure families are reported on a [0,1] scale so they can share
axes on the comparison scatter. Edit distance counts single-character
insertions, deletions, and substitutions over Unicode scalar values of the
normalized titles; cosine similarity is computed over per-pair bag-of-words
count vectors.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .embedding import EmbeddingStore, embed_similarity
from .errors import IoFailure, MalformedRecord, UnknownId, ZeroVector
from .pairing import CandidatePair

SCORES_HEADER = [
    "left_id",
    "right_id",
    "lev_raw",
    "lev_norm",
    "cosine_sim",
    "cosine_dist",
    "embed_sim",
    "embed_dist",
]

_fast_backend: object = None
_fast_backend_loaded = False


def levenshtein(s1: str, s2: str) -> int:
    """Exact edit distance between two strings.

    Uses the bit-parallel formulation after trimming any shared prefix and
    suffix; works for arbitrary lengths and arbitrary Unicode.
    """
    if s1 == s2:
        return 0
    n1, n2 = len(s1), len(s2)
    start = 0
    limit = min(n1, n2)
    while start < limit and s1[start] == s2[start]:
        start += 1
    end = 0
    while end < limit - start and s1[n1 - 1 - end] == s2[n2 - 1 - end]:
        end += 1
    a = s1[start : n1 - end]
    b = s2[start : n2 - end]
    if not a:
        return len(b)
    if not b:
        return len(a)
    return _bitparallel(_char_masks(a), len(a), b)


def _char_masks(pattern: str) -> dict[str, int]:
    masks: dict[str, int] = {}
    bit = 1
    for ch in pattern:
        masks[ch] = masks.get(ch, 0) | bit
        bit <<= 1
    return masks


def _bitparallel(masks: dict[str, int], m: int, text: str) -> int:
    # Myers-style bit vectors; Python ints act as arbitrary-width words.
    full = (1 << m) - 1
    vp, vn = full, 0
    score = m
    high = 1 << (m - 1)
    get = masks.get
    for ch in text:
        eq = get(ch, 0)
        d0 = (((eq & vp) + vp) ^ vp) | eq | vn
        hp = vn | ~(d0 | vp)
        hn = d0 & vp
        if hp & high:
            score += 1
        elif hn & high:
            score -= 1
        shifted = (hp << 1) | 1
        vp = ((hn << 1) | ~(d0 | shifted)) & full
        vn = d0 & shifted & full
    return score


def levenshtein_normalized(s1: str, s2: str) -> float:
    """Edit distance scaled by the longer length; 0.0 when both empty."""
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 0.0
    return levenshtein(s1, s2) / longest


def token_count_vector(tokens: Sequence[str], vocab: Sequence[str]) -> list[int]:
    """Occurrence counts of each vocab entry in the token list."""
    counts = Counter(tokens)
    return [counts[term] for term in vocab]


def cosine_similarity(v1: Sequence[float], v2: Sequence[float]) -> float:
    """Cosine of the angle between two same-dimension vectors.

    Raises ZeroVector if either vector has zero norm. The result is clamped
    to [-1, 1] against rounding; for non-negative vectors it lies in [0, 1].
    """
    if len(v1) != len(v2):
        raise ValueError("vectors must have the same dimension")
    sumsq1 = math.fsum(x * x for x in v1)
    sumsq2 = math.fsum(x * x for x in v2)
    if sumsq1 == 0.0 or sumsq2 == 0.0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    dot = math.fsum(x * y for x, y in zip(v1, v2))
    return _clamp(dot / math.sqrt(sumsq1 * sumsq2), -1.0, 1.0)


def _clamp(value: float, low: float, high: float) -> float:
    return min(high, max(low, value))


def _cosine_from_counts(
    c1: Counter, sumsq1: float, c2: Counter, sumsq2: float
) -> float:
    # Same arithmetic as cosine_similarity over the union vocabulary: the
    # skipped terms contribute exact zeros, and fsum is exact, so the two
    # paths agree bit for bit.
    if sumsq1 == 0.0 or sumsq2 == 0.0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    common = c1.keys() & c2.keys()
    dot = math.fsum(c1[t] * c2[t] for t in common)
    return _clamp(dot / math.sqrt(sumsq1 * sumsq2), -1.0, 1.0)


@dataclass(frozen=True)
class PairScores:
    """The three distances for one candidate pair, each on a [0,1] scale."""

    left_id: str
    right_id: str
    lev_raw: int
    lev_norm: float
    cosine_sim: float
    cosine_dist: float
    embed_sim: float | None = None
    embed_dist: float | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.left_id, self.right_id)


def _token_sumsq(counts: Counter) -> float:
    return math.fsum(c * c for c in counts.values())


def _assemble(
    left_id: str,
    right_id: str,
    lev_raw: int,
    lev_norm: float,
    cosine_sim: float,
    embed_sim: float | None,
) -> PairScores:
    embed_dist = None if embed_sim is None else _clamp((1.0 - embed_sim) / 2.0, 0.0, 1.0)
    return PairScores(
        left_id=left_id,
        right_id=right_id,
        lev_raw=lev_raw,
        lev_norm=lev_norm,
        cosine_sim=cosine_sim,
        cosine_dist=1.0 - cosine_sim,
        embed_sim=embed_sim,
        embed_dist=embed_dist,
    )


def score_pair(
    pair: CandidatePair,
    corpus: Corpus,
    embeddings: EmbeddingStore | None = None,
) -> PairScores:
    """Score one candidate pair over the normalized titles.

    Embedding fields are filled only when a store is supplied; both ids
    must then resolve in it. Raises UnknownId, MissingEmbedding, or
    ZeroVector (the latter when an empty-token record reached scoring,
    which the pairing stage is supposed to prevent).
    """
    try:
        left = corpus.record(pair.left_id)
        right = corpus.record(pair.right_id)
    except KeyError as exc:
        raise UnknownId(f"pair references unknown record id {exc.args[0]!r}") from exc
    lev_raw = levenshtein(left.normalized, right.normalized)
    lev_norm = levenshtein_normalized(left.normalized, right.normalized)
    vocab = sorted(set(left.tokens) | set(right.tokens))
    cosine = cosine_similarity(
        token_count_vector(left.tokens, vocab),
        token_count_vector(right.tokens, vocab),
    )
    embed_sim = None
    if embeddings is not None:
        embed_sim = embed_similarity(embeddings, left.id, right.id)
    return _assemble(left.id, right.id, lev_raw, lev_norm, cosine, embed_sim)


def _load_fast_backend():
    global _fast_backend, _fast_backend_loaded
    if not _fast_backend_loaded:
        try:
            from . import _fastlev
        except ImportError:
            _fastlev = None
        _fast_backend = _fastlev
        _fast_backend_loaded = True
    return _fast_backend


def score_stream(
    pairs: Iterable[CandidatePair],
    corpus: Corpus,
    embeddings: EmbeddingStore | None = None,
) -> Iterator[PairScores]:
    """Score a pair stream, preserving its order.

    Produces exactly the values score_pair would, but amortizes per-record
    work (token counts, norms, encoded titles) across the stream and uses
    the compiled edit-distance kernel when numba is importable.
    """
    fast = _load_fast_backend()
    encoded: dict[str, object] = {}
    masks: dict[str, tuple[dict[str, int], int]] = {}
    counts: dict[str, tuple[Counter, float]] = {}

    def record_state(record_id: str):
        try:
            rec = corpus.record(record_id)
        except KeyError as exc:
            raise UnknownId(
                f"pair references unknown record id {exc.args[0]!r}"
            ) from exc
        if record_id not in counts:
            counter = Counter(rec.tokens)
            counts[record_id] = (counter, _token_sumsq(counter))
            if fast is not None:
                encoded[record_id] = fast.encode(rec.normalized)
            else:
                masks[record_id] = (_char_masks(rec.normalized), len(rec.normalized))
        return rec

    for pair in pairs:
        left = record_state(pair.left_id)
        right = record_state(pair.right_id)
        if fast is not None:
            lev_raw = int(fast.levenshtein_u32(encoded[left.id], encoded[right.id]))
        else:
            pattern, m = masks[left.id]
            if left.normalized == right.normalized:
                lev_raw = 0
            elif m == 0:
                lev_raw = len(right.normalized)
            elif not right.normalized:
                lev_raw = m
            else:
                lev_raw = _bitparallel(pattern, m, right.normalized)
        longest = max(len(left.normalized), len(right.normalized))
        lev_norm = lev_raw / longest if longest else 0.0
        c1, sumsq1 = counts[left.id]
        c2, sumsq2 = counts[right.id]
        cosine = _cosine_from_counts(c1, sumsq1, c2, sumsq2)
        embed_sim = None
        if embeddings is not None:
            embed_sim = embed_similarity(embeddings, left.id, right.id)
        yield _assemble(left.id, right.id, lev_raw, lev_norm, cosine, embed_sim)


def _format_real(value: float) -> str:
    return format(value, ".9g")


def write_scores(path: str | Path, scores: Iterable[PairScores]) -> int:
    """Stream scores to the scores CSV (reals at 9 significant digits)."""
    path = Path(path)
    count = 0
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SCORES_HEADER)
            for row in scores:
                writer.writerow(
                    [
                        row.left_id,
                        row.right_id,
                        str(row.lev_raw),
                        _format_real(row.lev_norm),
                        _format_real(row.cosine_sim),
                        _format_real(row.cosine_dist),
                        "" if row.embed_sim is None else _format_real(row.embed_sim),
                        "" if row.embed_dist is None else _format_real(row.embed_dist),
                    ]
                )
                count += 1
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return count


def read_scores(path: str | Path) -> list[PairScores]:
    """Load a scores CSV back into memory."""
    path = Path(path)
    rows: list[PairScores] = []
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != SCORES_HEADER:
                raise MalformedRecord(
                    f"{path}: expected header {','.join(SCORES_HEADER)}"
                )
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(SCORES_HEADER):
                    raise MalformedRecord(
                        f"{path}: row {line_no} needs {len(SCORES_HEADER)} fields"
                    )
                if (row[6] == "") != (row[7] == ""):
                    raise MalformedRecord(
                        f"{path}: row {line_no} has a half-filled embed column pair"
                    )
                try:
                    rows.append(
                        PairScores(
                            left_id=row[0],
                            right_id=row[1],
                            lev_raw=int(row[2]),
                            lev_norm=float(row[3]),
                            cosine_sim=float(row[4]),
                            cosine_dist=float(row[5]),
                            embed_sim=float(row[6]) if row[6] else None,
                            embed_dist=float(row[7]) if row[7] else None,
                        )
                    )
                except ValueError as exc:
                    raise MalformedRecord(f"{path}: row {line_no}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return rows
