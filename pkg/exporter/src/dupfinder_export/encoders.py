"""Embedding backends selected by model identifier.

"hash:<dim>" is a built-in deterministic encoder: unit-norm vectors derived
from a sha256 stream over the text. It exists so the exporter and its
conformance tests run with no model download; it carries no semantics.
Any other identifier is treated as a sentence-transformers checkpoint.
"""

from __future__ import annotations

import hashlib

import numpy as np


class HashEncoder:
    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("hash encoder dimension must be positive")
        self.dimension = dimension
        self.model_name = f"hash:{dimension}"

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._vector(text) for text in texts])

    def _vector(self, text: str) -> np.ndarray:
        seed = hashlib.sha256(text.encode("utf-8")).digest()
        needed = 4 * self.dimension
        stream = bytearray()
        counter = 0
        while len(stream) < needed:
            block = hashlib.sha256(seed + counter.to_bytes(4, "little")).digest()
            stream += block
            counter += 1
        words = np.frombuffer(bytes(stream[:needed]), dtype="<u4")
        values = words.astype(np.float64) / 2.0**32 - 0.5
        norm = float(np.linalg.norm(values))
        if norm == 0.0:  # unreachable for sha256 output, kept as a guard
            values[0] = 1.0
            norm = 1.0
        return (values / norm).astype("<f4")


class SbertEncoder:
    def __init__(self, model_name: str):
        from sentence_transformers import SentenceTransformer

        self._model = SentenceTransformer(model_name)
        self.model_name = model_name
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            texts, convert_to_numpy=True, show_progress_bar=False
        )
        return np.asarray(vectors, dtype="<f4")


def load_encoder(model_name: str):
    """Pick a backend from the identifier; may raise on model load."""
    if model_name.startswith("hash:"):
        try:
            dimension = int(model_name.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad hash encoder spec {model_name!r}") from exc
        return HashEncoder(dimension)
    return SbertEncoder(model_name)
