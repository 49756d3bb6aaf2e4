"""Local HTTP bridge for the browser demo.

The demo UI performs no pointing math: it opens a session with a config
file (the cli config format), posts one sample record line per animation
frame and draws the frame record it gets back. Metrics requests re-use the
same task evaluation the cli runs offline, so in-demo numbers match
cmd_metrics on the exported log byte for byte.

Wire formats are exactly the cli file formats: sample and frame lines as
in sample/log files, configs, tasks and results as their JSON documents.
"""

from __future__ import annotations

import json
import math
import mimetypes
import os
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import formats
from .engine import PointerEngine, default_config
from .formats import FormatError, config_hash
from .geometry import HandSample, Point3
from .tasks import IncompleteRun, TaskKind, TaskResult, evaluate


class _Session:
    def __init__(self, cfg) -> None:
        self.cfg = cfg
        self.engine = PointerEngine(cfg)
        self.lock = threading.Lock()


class _State:
    def __init__(self) -> None:
        self.sessions: dict[str, _Session] = {}
        self.lock = threading.Lock()

    def create(self, cfg) -> str:
        sid = uuid.uuid4().hex[:16]
        with self.lock:
            self.sessions[sid] = _Session(cfg)
        return sid

    def get(self, sid: str) -> _Session | None:
        with self.lock:
            return self.sessions.get(sid)

    def drop(self, sid: str) -> bool:
        with self.lock:
            return self.sessions.pop(sid, None) is not None


def parse_sample_line(line: str) -> HandSample:
    parts = line.split()
    if len(parts) != 7:
        raise FormatError(f"sample record needs 7 fields, got {len(parts)}")
    vals = [float(p) for p in parts]
    if not all(math.isfinite(v) for v in vals):
        raise FormatError("non-finite sample value")
    return HandSample(vals[0], Point3(*vals[1:4]), Point3(*vals[4:7]))


def frame_line(out) -> str:
    return formats._frame_line(out)


def _metric_shell(kind: TaskKind) -> TaskResult:
    metric = {
        TaskKind.BUTTONS: ("total_time", "ms"),
        TaskKind.ERASE: ("completion_time", "ms"),
        TaskKind.HIT_MOVING: ("minimal_error", "px"),
        TaskKind.TRACK_MOVING: ("average_error", "px"),
    }[kind]
    return TaskResult(metric[0], metric[1], (), None, False)


class _Handler(BaseHTTPRequestHandler):
    state: _State
    frontend_dir: str | None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, body: str, content_type: str = "application/json") -> None:
        data = body.encode()
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _error(self, code: int, message: str) -> None:
        self._send(code, json.dumps({"error": message}) + "\n")

    def _body(self) -> str:
        length = int(self.headers.get("Content-Length", "0"))
        return self.rfile.read(length).decode()

    def do_GET(self) -> None:
        if self.path == "/api/health":
            self._send(200, json.dumps({"ok": True}) + "\n")
            return
        if self.path.startswith("/api/config/"):
            tech = self.path.rsplit("/", 1)[-1]
            try:
                cfg = default_config(tech)
            except ValueError as e:
                self._error(404, str(e))
                return
            self._send(200, formats.dump_config(cfg))
            return
        if self.path.startswith("/api/task/"):
            from .tasks import make_buttons_task, make_erase_task, make_moving_task

            name = self.path.rsplit("/", 1)[-1]
            builders = {
                "buttons": lambda: make_buttons_task(),
                "erase": lambda: make_erase_task(),
                "hit_moving": lambda: make_moving_task(TaskKind.HIT_MOVING),
                "track_moving": lambda: make_moving_task(TaskKind.TRACK_MOVING),
            }
            if name not in builders:
                self._error(404, f"unknown task {name!r}")
                return
            self._send(200, formats.dump_task(builders[name]()))
            return
        self._serve_static()

    def do_POST(self) -> None:
        try:
            if self.path == "/api/session":
                self._create_session()
            elif self.path.startswith("/api/session/") and self.path.endswith("/step"):
                self._step_session()
            elif self.path == "/api/replay":
                self._replay()
            elif self.path == "/api/metrics":
                self._metrics()
            else:
                self._error(404, f"no such endpoint {self.path}")
        except FormatError as e:
            self._error(400, str(e))
        except Exception as e:  # keep the bridge alive on handler bugs
            self._error(500, f"{type(e).__name__}: {e}")

    def do_DELETE(self) -> None:
        if self.path.startswith("/api/session/"):
            sid = self.path.rsplit("/", 1)[-1]
            if self.state.drop(sid):
                self._send(200, json.dumps({"ok": True}) + "\n")
            else:
                self._error(404, "no such session")
            return
        self._error(404, f"no such endpoint {self.path}")

    def _create_session(self) -> None:
        cfg = formats.load_config(self._body())
        sid = self.state.create(cfg)
        resp = {
            "session": sid,
            "config_hash": config_hash(cfg),
            "technique": cfg.name or "custom",
            "display": {"width": cfg.display.width, "height": cfg.display.height},
            "h_max": cfg.scheme.h_max(),
        }
        self._send(200, json.dumps(resp) + "\n")

    def _step_session(self) -> None:
        sid = self.path.split("/")[3]
        session = self.state.get(sid)
        if session is None:
            self._error(404, "no such session")
            return
        sample = parse_sample_line(self._body().strip())
        with session.lock:
            out = session.engine.step(sample)
        self._send(200, frame_line(out) + "\n", content_type="text/plain")

    def _replay(self) -> None:
        obj = json.loads(self._body())
        cfg = formats.load_config(obj["config"])
        samples = formats.load_samples(obj["samples"])
        engine = PointerEngine(cfg)
        from .tasks import TrajectoryLog

        log = TrajectoryLog(config_hash=config_hash(cfg), technique=cfg.name or "custom")
        for s in samples:
            log.frames.append(engine.step(s))
        self._send(200, formats.dump_log(log), content_type="text/plain")

    def _metrics(self) -> None:
        obj = json.loads(self._body())
        log = formats.load_log(obj["log"])
        spec = formats.load_task(obj["task"])
        if log.task_kind and log.task_kind != spec.kind.value:
            self._error(400, f"log task kind {log.task_kind!r} does not match {spec.kind.value!r}")
            return
        try:
            result = evaluate(log, spec)
        except IncompleteRun:
            result = _metric_shell(spec.kind)
        except (ValueError, IndexError) as e:
            self._error(400, f"log does not match task: {e}")
            return
        self._send(200, formats.dump_result(result))

    def _serve_static(self) -> None:
        if self.frontend_dir is None:
            if self.path in ("/", "/index.html"):
                self._send(
                    200,
                    "<html><body><h1>airpoint bridge</h1><p>API-only mode: no frontend "
                    "directory configured. Endpoints: /api/health, /api/config/&lt;T&gt;, "
                    "/api/task/&lt;kind&gt;, /api/session, /api/replay, /api/metrics.</p>"
                    "</body></html>",
                    content_type="text/html",
                )
            else:
                self._error(404, "no frontend configured")
            return
        rel = self.path.lstrip("/") or "index.html"
        root = os.path.abspath(self.frontend_dir)
        full = os.path.abspath(os.path.join(root, rel))
        if not full.startswith(root + os.sep) and full != root:
            self._error(403, "forbidden")
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            self._error(404, f"not found: {self.path}")
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(host: str = "127.0.0.1", port: int = 8750, frontend_dir: str | None = None) -> ThreadingHTTPServer:
    state = _State()
    handler = type("BoundHandler", (_Handler,), {"state": state, "frontend_dir": frontend_dir})
    return ThreadingHTTPServer((host, port), handler)


def serve(host: str = "127.0.0.1", port: int = 8750, frontend_dir: str | None = None) -> int:
    httpd = make_server(host, port, frontend_dir)
    where = f"http://{httpd.server_address[0]}:{httpd.server_address[1]}/"
    print(f"airpoint bridge listening on {where}" + (" (API only)" if frontend_dir is None else ""), flush=True)
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0
