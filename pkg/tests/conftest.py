"""Shared fixtures, corpus builders, and independent oracles.

The oracles here (full-matrix edit distance, brute-force pair filtering,
direct cosine/Pearson formulas) are deliberately naive and separate from
the library paths they check.
"""

from __future__ import annotations

import math
import random
from itertools import combinations
from pathlib import Path

from dupfinder.corpus import Corpus, TitleRecord

REPO_ROOT = Path(__file__).resolve().parents[1]
NORMALIZATION_VECTORS = REPO_ROOT / "testdata" / "normalization_vectors.json"


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_")
        print(f"\nACCEPTANCE {'PASS' if report.passed else 'FAIL'}: {name}")


def make_corpus(rows: list[tuple[str, str, str]]) -> Corpus:
    """Corpus from (id, raw_title, source) triples."""
    return Corpus.from_records(
        TitleRecord.from_raw(rid, title, source) for rid, title, source in rows
    )


def random_corpus(
    rng: random.Random,
    n: int,
    sources: tuple[str, ...] = ("A", "B", "C"),
    max_words: int = 15,
) -> Corpus:
    """Random corpus with word counts 1..max_words and mixed sources."""
    rows = []
    for i in range(n):
        words = [
            "".join(rng.choice("abcdefgh") for _ in range(rng.randint(3, 7)))
            for _ in range(rng.randint(1, max_words))
        ]
        rows.append((f"r{i:04d}", " ".join(words), rng.choice(sources)))
    return make_corpus(rows)


# --- oracles -------------------------------------------------------------


def levenshtein_oracle(s1: str, s2: str) -> int:
    """Textbook full-matrix dynamic program."""
    n, m = len(s1), len(s2)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if s1[i - 1] == s2[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[n][m]


def cosine_oracle(v1, v2) -> float:
    """Dot product over the product of magnitudes, straight from the
    definition."""
    dot = sum(a * b for a, b in zip(v1, v2))
    n1 = math.sqrt(sum(a * a for a in v1))
    n2 = math.sqrt(sum(b * b for b in v2))
    return dot / (n1 * n2)


def pearson_oracle(xs, ys) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def bruteforce_pairs(corpus: Corpus, predicate=None) -> set[tuple[str, str]]:
    """Filter every unordered pair of eligible records by a predicate on
    the two records; the independent check for all blocking strategies."""
    eligible = sorted(
        (r for r in corpus.records if r.word_count >= 1), key=lambda r: r.id
    )
    keys = set()
    for left, right in combinations(eligible, 2):
        if predicate is None or predicate(left, right):
            keys.add((left.id, right.id))
    return keys
