"""Threshold classification against ground truth, measure correlations,
pair sampling, and scatter export.

Ground-truth labels are append-only: several rows may exist for one
(pair, rater) and the latest timestamp wins. Across raters, verdicts are
resolved by majority vote over duplicate / not_duplicate, with exact ties
(including all-unsure) resolved to unsure; unsure pairs are excluded from
confusion counts.
"""

from __future__ import annotations

import csv
import json
import math
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .distance import PairScores
from .errors import (
    DegenerateVariance,
    IoFailure,
    MalformedRecord,
    MissingMeasure,
    NoOverlap,
)
from .pairing import CandidatePair

TRUTH_HEADER = ["left_id", "right_id", "verdict", "rater", "labeled_at"]
SCATTER_HEADER = ["left_id", "right_id", "lev_norm", "cosine_dist", "embed_dist"]

BOTTOM_LEFT_THRESHOLD = 0.2

PairKey = tuple[str, str]


class Verdict(str, Enum):
    DUPLICATE = "duplicate"
    NOT_DUPLICATE = "not_duplicate"
    UNSURE = "unsure"


class Measure(str, Enum):
    LEV_NORM = "lev_norm"
    COSINE_DIST = "cosine_dist"
    EMBED_DIST = "embed_dist"


@dataclass(frozen=True)
class GroundTruthLabel:
    """One rater's verdict for one canonical pair."""

    left_id: str
    right_id: str
    verdict: Verdict
    rater: str
    labeled_at: datetime

    def __post_init__(self) -> None:
        if self.left_id >= self.right_id:
            raise ValueError("label pair key must satisfy left_id < right_id")

    @property
    def key(self) -> PairKey:
        return (self.left_id, self.right_id)


@dataclass
class EvalReport:
    """Classification metrics for one measure/threshold, plus optional
    inter-measure correlations. Undefined ratios are None."""

    measure: Measure | None
    threshold: float | None
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float | None
    recall: float | None
    f1: float | None
    sample_size: int
    pearson: dict[tuple[str, str], float] | None = field(default=None)


def sample_pairs(
    pairs: Iterable[CandidatePair], k: int, seed: int
) -> list[CandidatePair]:
    """Uniform reservoir sample of min(k, n) pairs from a single pass.

    Deterministic for a fixed seed; the returned order is the reservoir's
    (not the stream's) order.
    """
    if k < 1:
        raise ValueError("sample size k must be at least 1")
    rng = random.Random(seed)
    reservoir: list[CandidatePair] = []
    for index, pair in enumerate(pairs):
        if index < k:
            reservoir.append(pair)
        else:
            slot = rng.randrange(index + 1)
            if slot < k:
                reservoir[slot] = pair
    return reservoir


def measure_value(row: PairScores, measure: Measure) -> float | None:
    if measure is Measure.LEV_NORM:
        return row.lev_norm
    if measure is Measure.COSINE_DIST:
        return row.cosine_dist
    return row.embed_dist


def classify(
    scores: Iterable[PairScores], measure: Measure, threshold: float
) -> dict[PairKey, bool]:
    """Predict duplicate for every row whose distance is <= threshold.

    Accepts any iterable (including a live score stream) and consumes it
    once.
    """
    predicted: dict[PairKey, bool] = {}
    for row in scores:
        value = measure_value(row, measure)
        if value is None:
            raise MissingMeasure(
                f"row {row.left_id},{row.right_id} has no {measure.value}"
            )
        predicted[row.key] = value <= threshold
    return predicted


def resolve_verdicts(labels: Iterable[GroundTruthLabel]) -> dict[PairKey, Verdict]:
    """Effective verdict per pair: latest per rater, then majority vote."""
    latest: dict[tuple[PairKey, str], tuple[datetime, int, Verdict]] = {}
    for order, label in enumerate(labels):
        slot = (label.key, label.rater)
        stamp = (label.labeled_at, order, label.verdict)
        if slot not in latest or stamp[:2] >= latest[slot][:2]:
            latest[slot] = stamp
    votes: dict[PairKey, list[Verdict]] = {}
    for (key, _rater), (_ts, _order, verdict) in latest.items():
        votes.setdefault(key, []).append(verdict)
    resolved: dict[PairKey, Verdict] = {}
    for key, verdicts in votes.items():
        dup = sum(1 for v in verdicts if v is Verdict.DUPLICATE)
        non = sum(1 for v in verdicts if v is Verdict.NOT_DUPLICATE)
        if dup > non:
            resolved[key] = Verdict.DUPLICATE
        elif non > dup:
            resolved[key] = Verdict.NOT_DUPLICATE
        else:
            resolved[key] = Verdict.UNSURE
    return resolved


def confusion(
    predicted: dict[PairKey, bool], labels: Iterable[GroundTruthLabel]
) -> EvalReport:
    """Confusion counts and derived metrics over the labeled pairs.

    Pairs whose resolved verdict is unsure are excluded. Raises NoOverlap
    when no predicted pair has a usable verdict.
    """
    resolved = resolve_verdicts(labels)
    tp = fp = fn = tn = 0
    for key, is_dup in predicted.items():
        verdict = resolved.get(key)
        if verdict is None or verdict is Verdict.UNSURE:
            continue
        truth_dup = verdict is Verdict.DUPLICATE
        if is_dup and truth_dup:
            tp += 1
        elif is_dup and not truth_dup:
            fp += 1
        elif not is_dup and truth_dup:
            fn += 1
        else:
            tn += 1
    total = tp + fp + fn + tn
    if total == 0:
        raise NoOverlap("no predicted pair has a non-unsure ground-truth verdict")
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return EvalReport(
        measure=None,
        threshold=None,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        f1=f1,
        sample_size=total,
    )


def _pearson(xs: Sequence[float], ys: Sequence[float], name: str) -> float:
    n = len(xs)
    if n < 2:
        raise DegenerateVariance(f"{name}: need at least 2 rows, got {n}")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance(f"{name}: a measure is constant across rows")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return min(1.0, max(-1.0, sxy / math.sqrt(sxx * syy)))


def _ranks(values: Sequence[float]) -> list[float]:
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def correlate(
    scores: Sequence[PairScores], method: str = "pearson"
) -> dict[tuple[str, str], float]:
    """Correlation coefficient per measure pair.

    Returns all three axis pairs when embedding distances are present in
    every row, or only (lev_norm, cosine_dist) when they are present in
    none; a mixed column raises MissingMeasure. `method` is "pearson" or
    "spearman" (Pearson over average ranks).
    """
    if method not in ("pearson", "spearman"):
        raise ValueError(f"unknown correlation method {method!r}")
    embed_present = sum(1 for row in scores if row.embed_dist is not None)
    if embed_present not in (0, len(scores)):
        raise MissingMeasure("embed_dist is present in some rows but not all")
    measures = [Measure.LEV_NORM, Measure.COSINE_DIST]
    if embed_present and scores:
        measures.append(Measure.EMBED_DIST)
    columns = {
        m: [measure_value(row, m) for row in scores] for m in measures
    }
    if method == "spearman":
        columns = {m: _ranks(col) for m, col in columns.items()}
    result: dict[tuple[str, str], float] = {}
    for i, m1 in enumerate(measures):
        for m2 in measures[i + 1 :]:
            name = f"{m1.value}/{m2.value}"
            result[(m1.value, m2.value)] = _pearson(
                columns[m1], columns[m2], name
            )
    return result


def export_scatter(
    scores: Sequence[PairScores],
    out_dir: str | Path,
    bottom_left_threshold: float = BOTTOM_LEFT_THRESHOLD,
) -> tuple[Path, Path]:
    """Write the three-axis scatter CSV and its summary JSON.

    Every row must carry all three distances (MissingMeasure otherwise).
    The summary holds per-axis min/max/mean and the fraction of rows with
    all three distances below `bottom_left_threshold`; with zero rows the
    statistics are null. Returns (csv_path, json_path).
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out_dir}: {exc}") from exc
    csv_path = out_dir / "scatter.csv"
    json_path = out_dir / "summary.json"

    axes = {m.value: [] for m in Measure}
    bottom_left = 0
    try:
        with csv_path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SCATTER_HEADER)
            for row in scores:
                if row.embed_dist is None:
                    raise MissingMeasure(
                        f"row {row.left_id},{row.right_id} has no embed_dist; "
                        "scatter export needs all three measures"
                    )
                values = (row.lev_norm, row.cosine_dist, row.embed_dist)
                for measure, value in zip(Measure, values):
                    axes[measure.value].append(value)
                if all(v < bottom_left_threshold for v in values):
                    bottom_left += 1
                writer.writerow(
                    [row.left_id, row.right_id]
                    + [format(v, ".9g") for v in values]
                )
    except OSError as exc:
        raise IoFailure(f"cannot write {csv_path}: {exc}") from exc

    n = len(axes[Measure.LEV_NORM.value])
    summary = {
        "rows": n,
        "axes": {
            name: (
                {
                    "min": min(col),
                    "max": max(col),
                    "mean": math.fsum(col) / n,
                }
                if n
                else {"min": None, "max": None, "mean": None}
            )
            for name, col in axes.items()
        },
        "bottom_left_threshold": bottom_left_threshold,
        "bottom_left_fraction": (bottom_left / n) if n else None,
    }
    try:
        json_path.write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write {json_path}: {exc}") from exc
    return csv_path, json_path


_TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S.%fZ"


def format_timestamp(moment: datetime) -> str:
    """Canonical UTC timestamp used in the ground-truth file."""
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).strftime(_TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp; 'Z' and explicit offsets both accepted."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    moment = datetime.fromisoformat(cleaned)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc)


def truth_row(label: GroundTruthLabel) -> list[str]:
    return [
        label.left_id,
        label.right_id,
        label.verdict.value,
        label.rater,
        format_timestamp(label.labeled_at),
    ]


def read_truth(path: str | Path) -> list[GroundTruthLabel]:
    """Load ground-truth labels, preserving file order."""
    path = Path(path)
    labels: list[GroundTruthLabel] = []
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != TRUTH_HEADER:
                raise MalformedRecord(
                    f"{path}: expected header {','.join(TRUTH_HEADER)}"
                )
            for line_no, row in enumerate(reader, start=2):
                if len(row) != 5:
                    raise MalformedRecord(f"{path}: row {line_no} needs 5 fields")
                try:
                    labels.append(
                        GroundTruthLabel(
                            left_id=row[0],
                            right_id=row[1],
                            verdict=Verdict(row[2]),
                            rater=row[3],
                            labeled_at=parse_timestamp(row[4]),
                        )
                    )
                except ValueError as exc:
                    raise MalformedRecord(f"{path}: row {line_no}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return labels


def write_truth(path: str | Path, labels: Iterable[GroundTruthLabel]) -> None:
    """Write a ground-truth CSV in the canonical row format."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRUTH_HEADER)
            for label in labels:
                writer.writerow(truth_row(label))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
