"""Numba-compiled edit distance used by the batch scorer.

Imported lazily; distance.py falls back to the pure-Python implementation
when numba is unavailable. Values are exact and verified against the plain
dynamic-programming formulation in the test suite.
"""

from __future__ import annotations

import numba
import numpy as np


def encode(s: str) -> np.ndarray:
    """Unicode scalar values of a string as a uint32 array."""
    return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32)


@numba.njit(cache=True)
def levenshtein_u32(a: np.ndarray, b: np.ndarray) -> int:
    n, m = a.size, b.size
    start = 0
    while start < n and start < m and a[start] == b[start]:
        start += 1
    end = 0
    while end < n - start and end < m - start and a[n - 1 - end] == b[m - 1 - end]:
        end += 1
    rows = n - start - end
    cols = m - start - end
    if rows == 0:
        return cols
    if cols == 0:
        return rows
    row = np.arange(cols + 1, dtype=np.int64)
    for i in range(1, rows + 1):
        prev = row[0]
        row[0] = i
        ai = a[start + i - 1]
        for j in range(1, cols + 1):
            cur = row[j]
            best = prev if ai == b[start + j - 1] else prev + 1
            via_insert = row[j - 1] + 1
            if via_insert < best:
                best = via_insert
            via_delete = cur + 1
            if via_delete < best:
                best = via_delete
            row[j] = best
            prev = cur
    return int(row[cols])
