"""Embedded HTTP service that dispenses pairs to raters and records
verdicts into the ground-truth CSV.

Labels are appended and fsynced before the request is acknowledged, so an
acknowledged verdict survives a hard kill. The truth file is the same
format the evaluation module reads; restarting the service on an existing
file resumes where labeling left off. Rater identity is a self-declared
name per request; there is no authentication.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import mimetypes
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .corpus import Corpus
from .distance import PairScores
from .errors import InvalidVerdict, IoFailure, UnknownPair
from .evaluation import (
    TRUTH_HEADER,
    GroundTruthLabel,
    PairKey,
    Verdict,
    read_truth,
    truth_row,
)
from .pairing import CandidatePair

logger = logging.getLogger(__name__)

_FALLBACK_PAGE = b"""<!doctype html>
<html><head><meta charset="utf-8"><title>dupfinder annotation</title></head>
<body><h1>dupfinder annotation service</h1>
<p>No UI assets directory was configured (<code>--ui</code>). The JSON API
is available at <code>/api/next</code>, <code>/api/label</code> and
<code>/api/progress</code>.</p></body></html>
"""


@dataclass
class PairPayload:
    """What a rater sees for one pair."""

    left_id: str
    right_id: str
    left_title: str
    right_title: str
    left_source: str
    right_source: str
    distances: dict[str, float | None] | None
    progress: dict

    def as_json(self) -> dict:
        return {"done": False, **self.__dict__}


class AnnotationSession:
    """Queue of pairs awaiting labels plus the append-only truth file.

    Thread-safe: reads take a snapshot under the same lock that serializes
    writes, and a pair is only considered labeled once its row is durably
    on disk.
    """

    def __init__(
        self,
        corpus: Corpus,
        pairs: list[CandidatePair],
        truth_path: str | Path,
        scores: list[PairScores] | None = None,
        show_distances: bool = True,
    ):
        self.corpus = corpus
        self.queue: list[PairKey] = [p.key for p in pairs]
        self._scope = set(self.queue)
        self.truth_path = Path(truth_path)
        self.show_distances = show_distances and scores is not None
        self._scores_by_key: dict[PairKey, PairScores] = {
            row.key: row for row in (scores or [])
        }
        self._labels: dict[PairKey, dict[str, Verdict]] = {}
        self._lock = threading.Lock()
        if self.truth_path.exists() and self.truth_path.stat().st_size > 0:
            for label in read_truth(self.truth_path):
                self._labels.setdefault(label.key, {})[label.rater] = label.verdict

    def next_pair(self, rater: str) -> PairPayload | None:
        """First queued pair this rater has not labeled; None when done.

        Does not mutate the queue: the pair is served again until a verdict
        for it lands on disk.
        """
        if not rater:
            raise ValueError("rater name must not be empty")
        with self._lock:
            for key in self.queue:
                if rater in self._labels.get(key, {}):
                    continue
                left = self.corpus.record(key[0])
                right = self.corpus.record(key[1])
                distances = None
                if self.show_distances:
                    row = self._scores_by_key.get(key)
                    if row is not None:
                        distances = {
                            "lev_norm": row.lev_norm,
                            "cosine_dist": row.cosine_dist,
                            "embed_dist": row.embed_dist,
                        }
                return PairPayload(
                    left_id=left.id,
                    right_id=right.id,
                    left_title=left.raw_title,
                    right_title=right.raw_title,
                    left_source=left.source,
                    right_source=right.source,
                    distances=distances,
                    progress=self._progress_locked(),
                )
            return None

    def submit_label(self, rater: str, left_id: str, right_id: str, verdict: str):
        """Durably append one verdict row, then record it in memory.

        Resubmission by the same rater appends another row; the evaluation
        module resolves to the latest one. Raises UnknownPair for pairs
        outside the session scope and InvalidVerdict for bad verdicts.
        """
        if not rater:
            raise ValueError("rater name must not be empty")
        key = (left_id, right_id) if left_id < right_id else (right_id, left_id)
        if key not in self._scope:
            raise UnknownPair(f"pair ({left_id}, {right_id}) is not in this session")
        try:
            parsed = Verdict(verdict)
        except ValueError:
            raise InvalidVerdict(
                f"verdict must be one of {[v.value for v in Verdict]}, got {verdict!r}"
            ) from None
        label = GroundTruthLabel(
            left_id=key[0],
            right_id=key[1],
            verdict=parsed,
            rater=rater,
            labeled_at=datetime.now(timezone.utc),
        )
        with self._lock:
            self._append_durably(label)
            self._labels.setdefault(key, {})[rater] = parsed
        return label

    def _append_durably(self, label: GroundTruthLabel) -> None:
        new_file = not self.truth_path.exists() or self.truth_path.stat().st_size == 0
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        if new_file:
            writer.writerow(TRUTH_HEADER)
        writer.writerow(truth_row(label))
        try:
            with self.truth_path.open("a", encoding="utf-8", newline="") as handle:
                handle.write(buffer.getvalue())
                handle.flush()
                os.fsync(handle.fileno())
        except OSError as exc:
            raise IoFailure(f"cannot append to {self.truth_path}: {exc}") from exc

    def progress(self) -> dict:
        with self._lock:
            return self._progress_locked()

    def _progress_locked(self) -> dict:
        per_rater: dict[str, int] = {}
        labeled_any = 0
        for key in self.queue:
            raters = self._labels.get(key)
            if not raters:
                continue
            labeled_any += 1
            for rater in raters:
                per_rater[rater] = per_rater.get(rater, 0) + 1
        return {
            "total": len(self.queue),
            "labeled_any": labeled_any,
            "labeled_by_rater": dict(sorted(per_rater.items())),
        }


class _Handler(BaseHTTPRequestHandler):
    server_version = "dupfinder-annotate"
    session: AnnotationSession  # set by make_server
    ui_dir: Path | None

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:
        url = urlparse(self.path)
        if url.path == "/api/next":
            rater = parse_qs(url.query).get("rater", [""])[0]
            if not rater:
                self._send_json({"error": "missing rater parameter"}, 400)
                return
            payload = self.session.next_pair(rater)
            if payload is None:
                self._send_json({"done": True, "progress": self.session.progress()})
            else:
                self._send_json(payload.as_json())
        elif url.path == "/api/progress":
            self._send_json(self.session.progress())
        else:
            self._serve_static(url.path)

    def do_POST(self) -> None:
        url = urlparse(self.path)
        if url.path != "/api/label":
            self._send_json({"error": "not found"}, 404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            body = json.loads(self.rfile.read(length).decode("utf-8"))
            rater = body["rater"]
            left_id = body["left_id"]
            right_id = body["right_id"]
            verdict = body["verdict"]
        except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError):
            self._send_json({"error": "malformed label body"}, 400)
            return
        if not isinstance(rater, str) or not rater:
            self._send_json({"error": "rater must be a non-empty string"}, 400)
            return
        try:
            self.session.submit_label(rater, left_id, right_id, verdict)
        except UnknownPair as exc:
            self._send_json({"error": str(exc)}, 404)
            return
        except InvalidVerdict as exc:
            self._send_json({"error": str(exc)}, 400)
            return
        self._send_json({"ok": True})

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            if path == "/":
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(_FALLBACK_PAGE)))
                self.end_headers()
                self.wfile.write(_FALLBACK_PAGE)
            else:
                self._send_json({"error": "not found"}, 404)
            return
        relative = path.lstrip("/") or "index.html"
        target = (self.ui_dir / relative).resolve()
        if not target.is_relative_to(self.ui_dir.resolve()) or not target.is_file():
            self._send_json({"error": "not found"}, 404)
            return
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(
    session: AnnotationSession,
    host: str = "127.0.0.1",
    port: int = 8080,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Build the HTTP server; caller runs serve_forever()/shutdown()."""
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"session": session, "ui_dir": Path(ui_dir) if ui_dir else None},
    )
    return ThreadingHTTPServer((host, port), handler)
