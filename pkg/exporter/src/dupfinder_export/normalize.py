"""Title normalization, byte-for-byte equivalent to the scoring toolkit's.

Rule: Unicode NFC, lowercase, every non-alphanumeric character becomes a
space, whitespace collapsed and trimmed. Any change here must keep the
shared test-vector file green on both sides.
"""

from __future__ import annotations

import unicodedata


def normalize_title(raw: str) -> str:
    text = unicodedata.normalize("NFC", raw).lower()
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text)
    return unicodedata.normalize("NFC", " ".join(cleaned.split()))
