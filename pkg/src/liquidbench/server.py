"""Vote collection service for running studies in a browser.

Endpoints (JSON unless noted):

  GET  /api/manifest/{study}                 the study manifest
  GET  /api/session/{study}/{participant}    per-participant question order
                                             plus answered indices (resume)
  POST /api/vote                             VoteRecord body, idempotent
  GET  /api/progress/{study}/{participant}   answered / total
  GET  /{path}                               static files (UI bundle, videos)

Votes append to a JSON-lines log through a single lock, so concurrent
participants cannot interleave partial writes. Deduplication by
(participant, question) happens at aggregation time; resubmissions are
therefore harmless.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from http import HTTPStatus
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .study.manifest import StudyManifest
from .study.votes import VoteRecord, validate_vote, votes_from_jsonl


class StudyServer:
    """State shared by the request handlers for one serving process."""

    def __init__(self, manifest: StudyManifest, vote_log: Path, static_root=None):
        self.manifest = manifest
        self.vote_log = Path(vote_log)
        self.static_root = Path(static_root) if static_root else None
        self._write_lock = threading.Lock()

    def manifest_dict(self) -> dict:
        return self.manifest.to_dict()

    def answered(self, participant: str) -> dict[int, str]:
        if not self.vote_log.exists():
            return {}
        votes = votes_from_jsonl(self.vote_log.read_text())
        return {
            v.question: v.choice for v in votes if v.participant == participant
        }

    def session(self, participant: str) -> dict:
        order = self.manifest.session_order(participant)
        uris = {v.id: v.uri for v in self.manifest.videos}
        answered = self.answered(participant)
        questions = []
        for qidx in order:
            q = self.manifest.questions[qidx]
            questions.append(
                {
                    "index": qidx,
                    "left": q.left,
                    "right": q.right,
                    "left_uri": uris[q.left],
                    "right_uri": uris[q.right],
                    "answered": qidx in answered,
                }
            )
        next_pos = next(
            (pos for pos, q in enumerate(questions) if not q["answered"]), None
        )
        return {
            "study": self.manifest.study_id,
            "participant": participant,
            "reference_uri": self.manifest.reference_uri,
            "total": len(questions),
            "answered": sum(1 for q in questions if q["answered"]),
            "next_position": next_pos,
            "questions": questions,
        }

    def progress(self, participant: str) -> dict:
        answered = self.answered(participant)
        total = len(self.manifest.questions)
        return {
            "study": self.manifest.study_id,
            "participant": participant,
            "answered": len(answered),
            "total": total,
            "complete": len(answered) == total,
        }

    def record_vote(self, payload: dict) -> dict:
        vote = VoteRecord(
            study=str(payload["study"]),
            participant=str(payload["participant"]),
            question=int(payload["question"]),
            choice=str(payload["choice"]),
            timestamp=payload.get("timestamp")
            or datetime.now(timezone.utc).isoformat(),
        )
        validate_vote(vote, self.manifest)
        line = json.dumps(vote.to_dict(), sort_keys=True) + "\n"
        with self._write_lock:
            with open(self.vote_log, "a") as f:
                f.write(line)
                f.flush()
        return {"ok": True, "question": vote.question, "choice": vote.choice}


class _Handler(SimpleHTTPRequestHandler):
    server_version = "liquidbench"
    study_server: StudyServer = None  # set by serve()

    def log_message(self, fmt, *args):
        pass  # stay quiet under test; use an HTTP access logger if needed

    def _json(self, obj, status=HTTPStatus.OK):
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        srv = self.study_server
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        try:
            if parts[:2] == ["api", "manifest"] and len(parts) == 3:
                if parts[2] != srv.manifest.study_id:
                    return self._json({"error": "unknown study"}, HTTPStatus.NOT_FOUND)
                return self._json(srv.manifest_dict())
            if parts[:2] == ["api", "session"] and len(parts) == 4:
                if parts[2] != srv.manifest.study_id:
                    return self._json({"error": "unknown study"}, HTTPStatus.NOT_FOUND)
                return self._json(srv.session(parts[3]))
            if parts[:2] == ["api", "progress"] and len(parts) == 4:
                if parts[2] != srv.manifest.study_id:
                    return self._json({"error": "unknown study"}, HTTPStatus.NOT_FOUND)
                return self._json(srv.progress(parts[3]))
        except Exception as exc:  # malformed request data
            return self._json({"error": str(exc)}, HTTPStatus.BAD_REQUEST)
        if srv.static_root is not None:
            return super().do_GET()
        return self._json({"error": "not found"}, HTTPStatus.NOT_FOUND)

    def do_POST(self):
        srv = self.study_server
        if self.path.rstrip("/") != "/api/vote":
            return self._json({"error": "not found"}, HTTPStatus.NOT_FOUND)
        try:
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
            return self._json(srv.record_vote(payload))
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            return self._json({"error": str(exc)}, HTTPStatus.BAD_REQUEST)

    def translate_path(self, path):
        # route static file serving to the configured root
        root = self.study_server.static_root
        if root is None:
            return str(root)
        rel = path.split("?", 1)[0].lstrip("/")
        return str((root / rel).resolve())


def make_server(manifest: StudyManifest, vote_log, port=0, static_root=None,
                host="127.0.0.1") -> ThreadingHTTPServer:
    state = StudyServer(manifest, vote_log, static_root)
    handler = type("BoundHandler", (_Handler,), {"study_server": state})
    httpd = ThreadingHTTPServer((host, port), handler)
    httpd.study_server = state
    return httpd


def serve_forever(manifest: StudyManifest, vote_log, port, static_root=None,
                  host="127.0.0.1"):
    httpd = make_server(manifest, vote_log, port, static_root, host)
    print(f"serving study {manifest.study_id!r} on http://{host}:{httpd.server_address[1]}")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
