"""Case-management HTTP/JSON API with a server-sent-event alert stream.

Serve mode precomputes a pipeline run over a seeded corpus with the
simulated analyst disabled, then replays the resulting case openings onto
the live store at a fixed wall-clock interval. Analyst verdicts arrive
through the API, resolve parked cases, and are appended to the audit
chain.

    GET  /api/v1/cases?status=pending_review&limit=N
    GET  /api/v1/cases/<case_id>
    POST /api/v1/cases/<case_id>/verdict   {"decision","reason","analyst_id"}
    GET  /api/v1/alerts/stream             (SSE: case_opened | case_resolved)
    GET  /api/v1/metrics/summary
"""

from __future__ import annotations

import queue
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Optional
from urllib.parse import parse_qs, urlparse

from .audit import AuditLog
from .cases import CaseConflict, CaseNotFound, CaseRecord, CaseStore, case_to_dict
from .domain import canonical_parse, canonical_serialize
from .metrics import latency_summary
from .orchestrator import PipelineRunner, RunConfig
from .workload import WorkloadConfig, generate_corpus


class CaseService:
    """Shared state behind the HTTP handlers."""

    def __init__(self, seed: int, scale: float, feed_interval: float, out_dir: Optional[str]) -> None:
        self.seed = seed
        self.feed_interval = feed_interval
        self.out_dir = Path(out_dir) if out_dir else None
        self.started = time.monotonic()

        corpus = generate_corpus(WorkloadConfig(seed=seed, scale=scale))
        config = RunConfig(seed=seed, simulate_analyst=False)
        runner = PipelineRunner(corpus, config)
        result = runner.run()
        self.config = config
        self.audit: AuditLog = result.audit
        self.pending_feed: list[CaseRecord] = result.cases.list_cases(status="pending_review")
        self.makespans = result.makespans()
        self.decision_mix: dict[str, int] = {}
        for outcome in result.outcomes.values():
            key = outcome.decision or ("pending_review" if outcome.opened_case else "undecided")
            self.decision_mix[key] = self.decision_mix.get(key, 0) + 1

        self.store = CaseStore()
        self.store.add_listener(self._on_store_event)
        self._streams: list[queue.Queue] = []
        self._streams_lock = threading.Lock()
        self._stop = threading.Event()
        self._feeder = threading.Thread(target=self._feed, daemon=True)
        self._save_audit()

    # -- feeding -----------------------------------------------------------

    def start(self) -> None:
        self._feeder.start()

    def stop(self) -> None:
        self._stop.set()

    def _feed(self) -> None:
        for record in self.pending_feed:
            if self._stop.wait(self.feed_interval):
                return
            self.store.open_case(record.submission_id, record.evidence, self._now())
            self._append_audit("case-management", "case.opened", record.submission_id, {"case_id": record.case_id})

    def _now(self) -> float:
        return round(time.monotonic() - self.started, 6)

    # -- store events / SSE fan-out ------------------------------------------

    def _on_store_event(self, kind: str, record: CaseRecord) -> None:
        payload = b"event: " + kind.encode() + b"\ndata: " + canonical_serialize(case_to_dict(record)) + b"\n\n"
        with self._streams_lock:
            for q in list(self._streams):
                q.put(payload)

    def attach_stream(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._streams_lock:
            self._streams.append(q)
        return q

    def detach_stream(self, q: queue.Queue) -> None:
        with self._streams_lock:
            if q in self._streams:
                self._streams.remove(q)

    # -- audit ------------------------------------------------------------------

    def _append_audit(self, actor: str, action: str, submission_id: str, payload: Any) -> None:
        self.audit.append(actor, action, submission_id, payload, self._now())
        self._save_audit()

    def _save_audit(self) -> None:
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            self.audit.save(str(self.out_dir / "audit.log"))

    # -- operations ----------------------------------------------------------------

    def submit_verdict(self, case_id: str, decision: str, reason: str, analyst_id: str) -> CaseRecord:
        record = self.store.submit_verdict(case_id, decision, reason, analyst_id, self._now())
        self._append_audit(
            "case-management",
            "case.verdict",
            record.submission_id,
            {"case_id": case_id, "decision": decision, "analyst_id": analyst_id, "reason": reason},
        )
        return record

    def summary(self) -> dict[str, Any]:
        counters = self.store.counters()
        mix = dict(sorted(self.decision_mix.items()))
        fusion = self.config.fusion
        return {
            "cases": counters,
            "decision_mix": mix,
            "latency": latency_summary(self.makespans),
            "audit_records": len(self.audit.records),
            "config": {
                "bands": {"approve_below": fusion.approve_below, "reject_above": fusion.reject_above},
                "weights": dict(sorted(fusion.weights.items())),
                "seed": self.seed,
            },
        }


def _make_handler(service: CaseService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt: str, *args: Any) -> None:  # quiet server
            pass

        def _send_json(self, status: int, payload: Any) -> None:
            body = canonical_serialize(payload)
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:  # noqa: N802 (stdlib naming)
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if parts[:2] != ["api", "v1"]:
                self._send_json(404, {"error": "not_found"})
                return
            rest = parts[2:]
            if rest == ["cases"]:
                params = parse_qs(url.query)
                status = params.get("status", [None])[0]
                limit = params.get("limit", [None])[0]
                records = service.store.list_cases(status=status, limit=int(limit) if limit else None)
                self._send_json(200, {"cases": [case_to_dict(r) for r in records]})
                return
            if len(rest) == 2 and rest[0] == "cases":
                try:
                    record = service.store.get(rest[1])
                except CaseNotFound:
                    self._send_json(404, {"error": "unknown_case"})
                    return
                self._send_json(200, case_to_dict(record))
                return
            if rest == ["metrics", "summary"]:
                self._send_json(200, service.summary())
                return
            if rest == ["alerts", "stream"]:
                self._stream()
                return
            self._send_json(404, {"error": "not_found"})

        def _stream(self) -> None:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            q = service.attach_stream()
            try:
                self.wfile.write(b": connected\n\n")
                self.wfile.flush()
                while True:
                    try:
                        chunk = q.get(timeout=1.0)
                    except queue.Empty:
                        self.wfile.write(b": keepalive\n\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(chunk)
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                pass
            finally:
                service.detach_stream(q)

        def do_POST(self) -> None:  # noqa: N802
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if len(parts) == 5 and parts[:3] == ["api", "v1", "cases"] and parts[4] == "verdict":
                case_id = parts[3]
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    body = canonical_parse(self.rfile.read(length))
                    decision = body["decision"]
                    reason = body.get("reason", "")
                    analyst_id = body.get("analyst_id", "")
                    if decision not in ("approve", "reject"):
                        raise ValueError(decision)
                except (ValueError, KeyError, TypeError):
                    self._send_json(400, {"error": "bad_request"})
                    return
                try:
                    record = service.submit_verdict(case_id, decision, reason, analyst_id)
                except CaseNotFound:
                    self._send_json(404, {"error": "unknown_case"})
                    return
                except CaseConflict:
                    self._send_json(409, {"error": "already_resolved"})
                    return
                self._send_json(200, case_to_dict(record))
                return
            self._send_json(404, {"error": "not_found"})

    return Handler


class CaseServer:
    """Owns the HTTP server plus the background case feeder."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 8400,
        seed: int = 42,
        scale: float = 0.01,
        feed_interval: float = 0.5,
        out_dir: Optional[str] = None,
    ) -> None:
        self.service = CaseService(seed=seed, scale=scale, feed_interval=feed_interval, out_dir=out_dir)
        self.httpd = ThreadingHTTPServer((host, port), _make_handler(self.service))
        self.httpd.daemon_threads = True

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start_background(self) -> None:
        self.service.start()
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        thread.start()

    def serve_forever(self) -> None:
        self.service.start()
        try:
            self.httpd.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            self.shutdown()

    def shutdown(self) -> None:
        self.service.stop()
        self.httpd.shutdown()
        self.httpd.server_close()


def serve(
    host: str = "127.0.0.1",
    port: int = 8400,
    seed: int = 42,
    scale: float = 0.01,
    feed_interval: float = 0.5,
    out_dir: Optional[str] = None,
) -> None:
    server = CaseServer(host=host, port=port, seed=seed, scale=scale, feed_interval=feed_interval, out_dir=out_dir)
    print(f"serving case management on http://{host}:{server.port}  (pending cases: {len(server.service.pending_feed)})")
    server.serve_forever()
