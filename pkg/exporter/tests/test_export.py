from __future__ import annotations

import json

import numpy as np
import pytest

from dupfinder_export.cli import run
from dupfinder_export.encoders import HashEncoder, load_encoder
from dupfinder_export.exporter import ExportError, export_embeddings

# the toolkit being exported for: its loader is the conformance authority
from dupfinder.embedding import load_embeddings


@pytest.fixture
def corpus_csv(tmp_path):
    path = tmp_path / "corpus.csv"
    rows = ["id,title,source"]
    for i in range(10):
        rows.append(f"r{i},Title number {i} with words,S{i % 2}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def test_export_passes_primary_validation(corpus_csv, tmp_path):
    out = tmp_path / "vectors.dfv"
    manifest = export_embeddings(corpus_csv, "hash:16", out)
    store = load_embeddings(out)  # raises on any format violation
    assert store.dimension == 16
    assert len(store) == 10
    assert list(store.vectors) == sorted(store.vectors)
    assert manifest.record_count == 10
    assert manifest.dimension == 16
    assert manifest.model_name == "hash:16"
    assert manifest.corpus_digest.startswith("sha256:")
    assert manifest.warnings == []


def test_export_vectors_are_unit_norm(corpus_csv, tmp_path):
    out = tmp_path / "vectors.dfv"
    export_embeddings(corpus_csv, "hash:32", out)
    store = load_embeddings(out)
    for vector in store.vectors.values():
        assert np.linalg.norm(vector.astype(np.float64)) == pytest.approx(
            1.0, abs=1e-6
        )


def test_export_empty_corpus(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("id,title,source\n", encoding="utf-8")
    out = tmp_path / "vectors.dfv"
    manifest = export_embeddings(path, "hash:8", out)
    assert manifest.record_count == 0
    store = load_embeddings(out)
    assert len(store) == 0 and store.dimension == 8


def test_export_skips_empty_normalized(tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text(
        "id,title,source\nok,Real title,S\nblank,!!!,S\n", encoding="utf-8"
    )
    out = tmp_path / "vectors.dfv"
    manifest = export_embeddings(path, "hash:8", out)
    assert manifest.record_count == 1
    assert any("blank" in w for w in manifest.warnings)
    assert "blank" not in load_embeddings(out)


def test_export_jsonl(tmp_path):
    path = tmp_path / "corpus.jsonl"
    rows = [
        {"id": "a", "title": "Alpha title", "source": "S"},
        {"id": "b", "title": "Beta title", "source": "T"},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    out = tmp_path / "vectors.dfv"
    manifest = export_embeddings(path, "hash:8", out, format="jsonl")
    assert manifest.record_count == 2


def test_export_is_deterministic(corpus_csv, tmp_path):
    out1 = tmp_path / "v1.dfv"
    out2 = tmp_path / "v2.dfv"
    export_embeddings(corpus_csv, "hash:16", out1)
    export_embeddings(corpus_csv, "hash:16", out2)
    assert out1.read_bytes() == out2.read_bytes()


def test_export_failures_leave_no_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,title,source\nx,A,S\nx,B,S\n", encoding="utf-8")
    out = tmp_path / "vectors.dfv"
    with pytest.raises(ExportError, match="duplicate"):
        export_embeddings(bad, "hash:8", out)
    assert not out.exists()
    with pytest.raises(ExportError, match="cannot read"):
        export_embeddings(bad.parent / "missing.csv", "hash:8", out)
    assert not out.exists()
    assert not list(tmp_path.glob("*.tmp"))


def test_encoder_selection():
    encoder = load_encoder("hash:12")
    assert isinstance(encoder, HashEncoder) and encoder.dimension == 12
    with pytest.raises(ValueError):
        load_encoder("hash:oops")
    with pytest.raises(ValueError):
        HashEncoder(0)


def test_hash_encoder_properties():
    encoder = HashEncoder(16)
    batch = encoder.encode(["one title", "another title", "one title"])
    assert batch.shape == (3, 16)
    assert batch.dtype == np.float32
    np.testing.assert_array_equal(batch[0], batch[2])
    assert not np.array_equal(batch[0], batch[1])


def test_cli_prints_manifest(corpus_csv, tmp_path, capsys):
    out = tmp_path / "vectors.dfv"
    code = run(["--corpus", str(corpus_csv), "--model", "hash:16",
                "--out", str(out)])
    assert code == 0
    manifest = json.loads(capsys.readouterr().out)
    assert manifest["record_count"] == 10
    assert manifest["dimension"] == 16
    assert load_embeddings(out).dimension == 16


def test_cli_failure_is_nonzero(tmp_path, capsys):
    code = run(["--corpus", str(tmp_path / "missing.csv"), "--model", "hash:8",
                "--out", str(tmp_path / "v.dfv")])
    assert code == 1
    assert "error" in capsys.readouterr().err
