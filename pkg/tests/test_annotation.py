from __future__ import annotations

import json
import threading
import urllib.request
from urllib.error import HTTPError

import pytest

from dupfinder.annotation import AnnotationSession, make_server
from dupfinder.errors import InvalidVerdict, UnknownPair
from dupfinder.evaluation import Verdict, read_truth, resolve_verdicts
from dupfinder.pairing import CandidatePair, Strategy

from conftest import make_corpus


def fixture_session(tmp_path, n_pairs: int = 3, **kwargs) -> AnnotationSession:
    rows = [(f"t{i}", f"title number {i}", "A" if i % 2 else "B") for i in range(6)]
    corpus = make_corpus(rows)
    pairs = [
        CandidatePair(f"t{i}", f"t{i + 3}", Strategy.CROSS_SOURCE)
        for i in range(n_pairs)
    ]
    return AnnotationSession(
        corpus=corpus, pairs=pairs, truth_path=tmp_path / "truth.csv", **kwargs
    )


def test_next_pair_serves_first_unlabeled(tmp_path):
    session = fixture_session(tmp_path)
    payload = session.next_pair("ann")
    assert payload.left_id == "t0" and payload.right_id == "t3"
    assert payload.left_title == "title number 0"
    assert payload.left_source == "B" and payload.right_source == "A"
    # not mutated: same pair until a verdict lands
    again = session.next_pair("ann")
    assert again.left_id == payload.left_id


def test_next_pair_per_rater(tmp_path):
    session = fixture_session(tmp_path)
    session.submit_label("ann", "t0", "t3", "duplicate")
    assert session.next_pair("ann").left_id == "t1"
    # a different rater still gets the first pair
    assert session.next_pair("bob").left_id == "t0"


def test_next_pair_exhausted(tmp_path):
    session = fixture_session(tmp_path, n_pairs=1)
    assert session.next_pair("ann") is not None
    session.submit_label("ann", "t0", "t3", "unsure")
    assert session.next_pair("ann") is None


def test_submit_writes_row_immediately(tmp_path):
    session = fixture_session(tmp_path)
    session.submit_label("ann", "t0", "t3", "duplicate")
    labels = read_truth(tmp_path / "truth.csv")
    assert len(labels) == 1
    assert labels[0].key == ("t0", "t3")
    assert labels[0].verdict is Verdict.DUPLICATE
    assert labels[0].rater == "ann"


def test_submit_validates(tmp_path):
    session = fixture_session(tmp_path)
    with pytest.raises(UnknownPair):
        session.submit_label("ann", "t0", "t9", "duplicate")
    with pytest.raises(InvalidVerdict):
        session.submit_label("ann", "t0", "t3", "maybe")
    assert not (tmp_path / "truth.csv").exists()


def test_resubmission_appends_latest_wins(tmp_path):
    session = fixture_session(tmp_path)
    session.submit_label("ann", "t0", "t3", "duplicate")
    session.submit_label("ann", "t0", "t3", "not_duplicate")
    labels = read_truth(tmp_path / "truth.csv")
    assert len(labels) == 2
    assert resolve_verdicts(labels)[("t0", "t3")] is Verdict.NOT_DUPLICATE


def test_progress_counts(tmp_path):
    session = fixture_session(tmp_path)
    assert session.progress() == {
        "total": 3,
        "labeled_any": 0,
        "labeled_by_rater": {},
    }
    session.submit_label("ann", "t0", "t3", "duplicate")
    session.submit_label("ann", "t1", "t4", "duplicate")
    session.submit_label("bob", "t2", "t5", "unsure")
    progress = session.progress()
    assert progress["total"] == 3
    assert progress["labeled_any"] == 3
    assert progress["labeled_by_rater"] == {"ann": 2, "bob": 1}


def test_progress_disjoint_raters(tmp_path):
    rows = [
        (f"t{i:02d}", f"title number {i}", "B" if i < 6 else "A") for i in range(12)
    ]
    corpus = make_corpus(rows)
    pairs = [
        CandidatePair(f"t{i:02d}", f"t{i + 6:02d}", Strategy.CROSS_SOURCE)
        for i in range(5)
    ]
    session = AnnotationSession(
        corpus=corpus, pairs=pairs, truth_path=tmp_path / "truth.csv"
    )
    for i in range(3):
        session.submit_label("ann", f"t{i:02d}", f"t{i + 6:02d}", "duplicate")
    for i in range(3, 5):
        session.submit_label("bob", f"t{i:02d}", f"t{i + 6:02d}", "not_duplicate")
    progress = session.progress()
    assert progress["labeled_any"] == 5
    assert progress["labeled_by_rater"] == {"ann": 3, "bob": 2}


def test_restart_resumes_from_file(tmp_path):
    session = fixture_session(tmp_path)
    session.submit_label("ann", "t0", "t3", "duplicate")
    resumed = fixture_session(tmp_path)
    assert resumed.next_pair("ann").left_id == "t1"
    assert resumed.progress()["labeled_any"] == 1


def test_distances_shown_only_with_scores(tmp_path):
    from dupfinder.distance import PairScores

    scores = [
        PairScores("t0", "t3", 2, 0.1, 0.9, 0.1, None, None),
    ]
    session = fixture_session(tmp_path, scores=scores)
    payload = session.next_pair("ann")
    assert payload.distances == {
        "lev_norm": 0.1,
        "cosine_dist": 0.1,
        "embed_dist": None,
    }
    bare = fixture_session(tmp_path)
    assert bare.next_pair("ann").distances is None
    hidden = fixture_session(tmp_path, scores=scores, show_distances=False)
    assert hidden.next_pair("ann").distances is None


# --- HTTP layer -------------------------------------------------------------


def _get(port: int, path: str) -> dict:
    with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}") as response:
        return json.loads(response.read().decode("utf-8"))


def _post(port: int, path: str, body: dict) -> dict:
    request = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}",
        data=json.dumps(body).encode("utf-8"),
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read().decode("utf-8"))


@pytest.fixture
def live_server(tmp_path):
    session = fixture_session(tmp_path, n_pairs=2)
    server = make_server(session, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server.server_address[1], tmp_path
    finally:
        server.shutdown()
        server.server_close()


def test_http_label_flow(live_server):
    port, tmp_path = live_server
    first = _get(port, "/api/next?rater=ann")
    assert first["done"] is False
    assert first["left_id"] == "t0" and first["right_id"] == "t3"
    assert first["progress"]["total"] == 2

    ack = _post(port, "/api/label", {
        "rater": "ann",
        "left_id": first["left_id"],
        "right_id": first["right_id"],
        "verdict": "duplicate",
    })
    assert ack == {"ok": True}

    second = _get(port, "/api/next?rater=ann")
    assert second["left_id"] == "t1"
    _post(port, "/api/label", {
        "rater": "ann", "left_id": "t1", "right_id": "t4", "verdict": "unsure",
    })
    done = _get(port, "/api/next?rater=ann")
    assert done["done"] is True

    progress = _get(port, "/api/progress")
    assert progress["labeled_any"] == 2
    assert progress["labeled_by_rater"] == {"ann": 2}

    labels = read_truth(tmp_path / "truth.csv")
    assert len(labels) == 2


def test_http_errors(live_server):
    port, _ = live_server
    with pytest.raises(HTTPError) as err:
        _get(port, "/api/next")
    assert err.value.code == 400
    with pytest.raises(HTTPError) as err:
        _post(port, "/api/label", {
            "rater": "ann", "left_id": "t0", "right_id": "zz", "verdict": "duplicate",
        })
    assert err.value.code == 404
    with pytest.raises(HTTPError) as err:
        _post(port, "/api/label", {
            "rater": "ann", "left_id": "t0", "right_id": "t3", "verdict": "maybe",
        })
    assert err.value.code == 400
    with pytest.raises(HTTPError) as err:
        _post(port, "/api/label", {"rater": "ann"})
    assert err.value.code == 400


def test_http_fallback_page(live_server):
    port, _ = live_server
    with urllib.request.urlopen(f"http://127.0.0.1:{port}/") as response:
        body = response.read().decode("utf-8")
    assert "annotation" in body


def test_http_serves_ui_assets(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html>rate pairs</html>", encoding="utf-8")
    (ui / "app.js").write_text("console.log(1)", encoding="utf-8")
    session = fixture_session(tmp_path)
    server = make_server(session, port=0, ui_dir=ui)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    port = server.server_address[1]
    try:
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/") as response:
            assert b"rate pairs" in response.read()
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/app.js") as response:
            assert response.headers["Content-Type"].startswith("text/javascript") or \
                response.headers["Content-Type"].startswith("application/javascript")
        with pytest.raises(HTTPError) as err:
            urllib.request.urlopen(f"http://127.0.0.1:{port}/../secret")
        assert err.value.code in (400, 404)
    finally:
        server.shutdown()
        server.server_close()
