"""Corpus reading, batched encoding, and atomic DFV1 output."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import load_encoder
from .normalize import normalize_title

_MAGIC = b"DFV1"
_U32 = struct.Struct("<I")
_BATCH = 64


class ExportError(Exception):
    """Anything that must abort the export with a nonzero exit."""


@dataclass
class ExportManifest:
    model_name: str
    dimension: int
    record_count: int
    corpus_digest: str
    warnings: list[str] = field(default_factory=list)

    def as_json(self) -> str:
        return json.dumps(self.__dict__, indent=2) + "\n"


def _read_rows(path: Path, format: str) -> list[tuple[str, str]]:
    """(id, title) rows from a corpus file; duplicate ids are an error."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    try:
        if format == "csv":
            with path.open("r", encoding="utf-8", newline="") as handle:
                reader = csv.DictReader(handle)
                header = reader.fieldnames or []
                if any(col not in header for col in ("id", "title", "source")):
                    raise ExportError(
                        f"{path}: expected CSV header with columns id,title,source"
                    )
                for line_no, row in enumerate(reader, start=2):
                    record_id, title = row.get("id"), row.get("title")
                    if record_id is None or title is None or row.get("source") is None:
                        raise ExportError(
                            f"{path}: row {line_no} is missing id/title/source"
                        )
                    rows.append((record_id, title))
        elif format == "jsonl":
            with path.open("r", encoding="utf-8") as handle:
                for line_no, line in enumerate(handle, start=1):
                    if not line.strip():
                        continue
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise ExportError(
                            f"{path}: line {line_no} is not valid JSON: {exc}"
                        ) from exc
                    if not isinstance(obj, dict) or not all(
                        isinstance(obj.get(k), str) for k in ("id", "title", "source")
                    ):
                        raise ExportError(
                            f"{path}: line {line_no} needs string id/title/source"
                        )
                    rows.append((obj["id"], obj["title"]))
        else:
            raise ExportError(f"unsupported corpus format {format!r}")
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ExportError(f"{path}: not valid UTF-8: {exc}") from exc
    for record_id, _ in rows:
        if record_id in seen:
            raise ExportError(f"{path}: duplicate record id {record_id!r}")
        seen.add(record_id)
    return rows


def _serialize(dimension: int, model_name: str, entries: list[tuple[str, np.ndarray]]) -> bytes:
    chunks = [_MAGIC, _U32.pack(dimension), _U32.pack(len(entries))]
    name = model_name.encode("utf-8")
    chunks.append(_U32.pack(len(name)))
    chunks.append(name)
    for record_id, vector in entries:
        id_bytes = record_id.encode("utf-8")
        chunks.append(_U32.pack(len(id_bytes)))
        chunks.append(id_bytes)
        chunks.append(np.asarray(vector, dtype="<f4").tobytes())
    return b"".join(chunks)


def export_embeddings(
    corpus_path: str | Path,
    model_name: str,
    out_path: str | Path,
    format: str = "csv",
) -> ExportManifest:
    """Embed every eligible record and write the vector file atomically.

    Eligible means the title normalizes to a non-empty string; skipped
    records are listed in the manifest warnings, as is any record whose
    embedding comes back all-zero (the file format forbids zero vectors).
    Entries are sorted by id bytes. On any failure the output path is left
    untouched (temp file plus rename).
    """
    corpus_path = Path(corpus_path)
    out_path = Path(out_path)
    try:
        digest = hashlib.sha256(corpus_path.read_bytes()).hexdigest()
    except OSError as exc:
        raise ExportError(f"cannot read {corpus_path}: {exc}") from exc

    rows = _read_rows(corpus_path, format)
    warnings: list[str] = []
    eligible: list[tuple[str, str]] = []
    for record_id, title in rows:
        normalized = normalize_title(title)
        if not normalized:
            warnings.append(f"skipped {record_id}: title normalizes to empty")
            continue
        eligible.append((record_id, normalized))
    eligible.sort(key=lambda pair: pair[0].encode("utf-8"))

    try:
        encoder = load_encoder(model_name)
    except Exception as exc:
        raise ExportError(f"cannot load model {model_name!r}: {exc}") from exc

    entries: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(eligible), _BATCH):
        batch = eligible[start : start + _BATCH]
        vectors = encoder.encode([normalized for _, normalized in batch])
        if vectors.shape != (len(batch), encoder.dimension):
            raise ExportError(
                f"model returned shape {vectors.shape}, "
                f"expected ({len(batch)}, {encoder.dimension})"
            )
        for (record_id, _), vector in zip(batch, vectors):
            if not np.any(vector):
                warnings.append(f"skipped {record_id}: embedding is all zeros")
                continue
            entries.append((record_id, vector))

    data = _serialize(encoder.dimension, encoder.model_name, entries)
    tmp_path = out_path.with_name(out_path.name + ".tmp")
    try:
        tmp_path.write_bytes(data)
        os.replace(tmp_path, out_path)
    except OSError as exc:
        tmp_path.unlink(missing_ok=True)
        raise ExportError(f"cannot write {out_path}: {exc}") from exc

    return ExportManifest(
        model_name=encoder.model_name,
        dimension=encoder.dimension,
        record_count=len(entries),
        corpus_digest=f"sha256:{digest}",
        warnings=warnings,
    )
