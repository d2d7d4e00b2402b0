"""Binary vector file (DFV1) loading, validation, and similarity queries.

Layout, all integers little-endian u32, floats IEEE-754 32-bit
little-endian:

    magic "DFV1" | dimension | count | name_len | name (UTF-8)
    then `count` entries: id_len | id (UTF-8) | dimension floats

Entries are sorted by their UTF-8 id bytes (equivalently, by code point).
The store loads fully into memory and is immutable afterwards; corpora far
beyond desk scale would need a memory-mapped variant, which this version
does not provide.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    DuplicateId,
    IoFailure,
    MissingEmbedding,
    TruncatedFile,
    VectorFileError,
    ZeroVector,
)

MAGIC = b"DFV1"
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class EmbeddingStore:
    """Validated id-keyed float32 vectors of one fixed dimension."""

    dimension: int
    model_name: str
    vectors: Mapping[str, np.ndarray]

    def __contains__(self, record_id: str) -> bool:
        return record_id in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def vector(self, record_id: str) -> np.ndarray:
        try:
            return self.vectors[record_id]
        except KeyError:
            raise MissingEmbedding(f"no embedding for record id {record_id!r}") from None


class _Cursor:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise TruncatedFile(
                f"{self.path}: file ends at byte {len(self.data)}, "
                f"needed {self.offset + size}"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load and validate a DFV1 vector file.

    Raises BadMagic, DimensionMismatch, ZeroVector, DuplicateId,
    TruncatedFile, or VectorFileError for other format violations.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    cur = _Cursor(data, path)
    if cur.take(4) != MAGIC:
        raise BadMagic(f"{path}: not a DFV1 vector file")
    dimension = cur.u32()
    if dimension < 1:
        raise DimensionMismatch(f"{path}: dimension must be positive, got {dimension}")
    count = cur.u32()
    name_len = cur.u32()
    try:
        model_name = cur.take(name_len).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise VectorFileError(f"{path}: model name is not valid UTF-8") from exc

    vectors: dict[str, np.ndarray] = {}
    prev_key: bytes | None = None
    vector_bytes = 4 * dimension
    for index in range(count):
        id_len = cur.u32()
        id_bytes = cur.take(id_len)
        try:
            record_id = id_bytes.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise VectorFileError(
                f"{path}: entry {index} id is not valid UTF-8"
            ) from exc
        if record_id in vectors:
            raise DuplicateId(f"{path}: duplicate vector id {record_id!r}")
        if prev_key is not None and id_bytes <= prev_key:
            raise VectorFileError(
                f"{path}: entries are not sorted by id bytes at {record_id!r}"
            )
        prev_key = id_bytes
        vec = np.frombuffer(cur.take(vector_bytes), dtype="<f4").copy()
        if not np.any(vec):
            raise ZeroVector(f"{path}: vector for id {record_id!r} is all zeros")
        vec.setflags(write=False)
        vectors[record_id] = vec
    if cur.offset != len(data):
        raise VectorFileError(
            f"{path}: {len(data) - cur.offset} trailing bytes after last entry"
        )
    return EmbeddingStore(
        dimension=dimension,
        model_name=model_name,
        vectors=MappingProxyType(vectors),
    )


def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Serialize a store in canonical form (entries sorted by id bytes)."""
    path = Path(path)
    chunks = [MAGIC, _U32.pack(store.dimension), _U32.pack(len(store.vectors))]
    name_bytes = store.model_name.encode("utf-8")
    chunks.append(_U32.pack(len(name_bytes)))
    chunks.append(name_bytes)
    for record_id in sorted(store.vectors, key=lambda s: s.encode("utf-8")):
        id_bytes = record_id.encode("utf-8")
        chunks.append(_U32.pack(len(id_bytes)))
        chunks.append(id_bytes)
        vec = np.asarray(store.vectors[record_id], dtype="<f4")
        if vec.shape != (store.dimension,):
            raise DimensionMismatch(
                f"vector for id {record_id!r} has {vec.size} components, "
                f"store dimension is {store.dimension}"
            )
        chunks.append(vec.tobytes())
    try:
        path.write_bytes(b"".join(chunks))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def embed_similarity(store: EmbeddingStore, id1: str, id2: str) -> float:
    """Cosine similarity of two stored vectors, clamped to [-1, 1]."""
    v1 = store.vector(id1).astype(np.float64)
    v2 = store.vector(id2).astype(np.float64)
    sumsq1 = float(np.dot(v1, v1))
    sumsq2 = float(np.dot(v2, v2))
    if sumsq1 == 0.0 or sumsq2 == 0.0:
        raise ZeroVector("stored vector has zero norm")
    sim = float(np.dot(v1, v2)) / math.sqrt(sumsq1 * sumsq2)
    return min(1.0, max(-1.0, sim))
