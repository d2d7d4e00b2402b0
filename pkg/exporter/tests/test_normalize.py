from __future__ import annotations

import json
import random
from pathlib import Path

from dupfinder_export.normalize import normalize_title

VECTORS = Path(__file__).resolve().parents[2] / "testdata" / "normalization_vectors.json"


def test_matches_shared_vectors():
    cases = json.loads(VECTORS.read_text(encoding="utf-8"))
    assert len(cases) >= 10
    for case in cases:
        assert normalize_title(case["raw"]) == case["normalized"], case["raw"]


def test_matches_primary_implementation_exactly():
    # the conformance contract: both sides normalize identically
    from dupfinder.corpus import normalize_title as primary_normalize

    cases = json.loads(VECTORS.read_text(encoding="utf-8"))
    for case in cases:
        assert normalize_title(case["raw"]) == primary_normalize(case["raw"])
    rng = random.Random(515)
    pool = "aZ9 !#,éÉß́Å—率ンñ\t\n €_°¿ⅷİ"
    for _ in range(500):
        raw = "".join(rng.choice(pool) for _ in range(rng.randint(0, 40)))
        assert normalize_title(raw) == primary_normalize(raw), repr(raw)


def test_idempotent():
    for raw in ("", "  A!b  C ", "Économie—23"):
        once = normalize_title(raw)
        assert normalize_title(once) == once
