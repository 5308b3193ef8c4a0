"""Local render service backing the playground.

Stateless HTTP: ``POST /render`` takes a JSON request and answers with the
rendered HTML plus diagnostics; ``GET /examples`` lists the bundled
(code, sheet) pairs; everything else is served from the static directory.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from typing import Optional

from . import layout as L
from .doc import doc_to_json
from .layout import layout_to_json
from .pipeline import render_code, resolve_metrics

_EXAMPLE_PAIRS = [
    ("blocks", "cloc.tiny", "blocks.c4c", "none"),
    ("syntax-highlighting", "cloc.tiny", "syntax.c4c", "none"),
    ("pipeline", "cloc.tiny", "pipeline.c4c", "none"),
    ("skeleton", "skeleton.tiny", "skeleton.c4c", "none"),
    ("semantic-highlighting", "scopes.tiny", "semantic.c4c", "names"),
    ("heat-map", "spin.tiny", "heat.c4c", "heat"),
]


def _asset(name: str) -> str:
    return resources.files("css4code").joinpath("assets", "examples", name).read_text("utf-8")


def bundled_examples() -> list[dict]:
    out = []
    for name, code_file, sheet_file, analysis in _EXAMPLE_PAIRS:
        out.append(
            {
                "name": name,
                "code": _asset(code_file),
                "sheet": _asset(sheet_file),
                "analysis": analysis,
            }
        )
    return out


def handle_render_request(body: dict) -> dict:
    """Compute the response for one /render request body."""
    code = body.get("code", "")
    sheet = body.get("sheet", "")
    lang = body.get("lang", "tiny")
    analysis = body.get("analysis", "none")
    entry = body.get("entry") or "main"
    metrics_spec = body.get("metrics", "mono")
    debug = bool(body.get("debug", False))

    diagnostics: list[dict] = []
    try:
        metrics = resolve_metrics(metrics_spec)
    except (ValueError, OSError) as exc:
        return {
            "html": "",
            "diagnostics": [
                {"severity": "error", "message": str(exc), "line": 0, "col": 0}
            ],
        }
    result = render_code(
        code, sheet, analysis=analysis, entry=entry, metrics=metrics, lang=lang
    )
    for d in result.diagnostics:
        diagnostics.append(
            {"severity": d.severity, "message": d.message, "line": d.line, "col": d.col}
        )
    response = {"html": result.html, "diagnostics": diagnostics}
    if debug and result.layout is not None:
        response["layout"] = layout_to_json(result.layout)
    if debug and result.doc is not None:
        response["doc"] = doc_to_json(result.doc)
    return response


def _default_static_dir() -> Optional[Path]:
    candidates = [
        Path.cwd() / "frontend" / "dist",
        Path(str(resources.files("css4code").joinpath("assets", "static"))),
    ]
    for cand in candidates:
        if cand.is_dir() and (cand / "index.html").exists():
            return cand
    return None


class RenderHandler(BaseHTTPRequestHandler):
    static_dir: Optional[Path] = None

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:
        if self.path.rstrip("/") != "/render":
            self._send_json(404, {"error": "unknown endpoint"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
            if not isinstance(body, dict):
                raise ValueError("request body must be a JSON object")
        except (json.JSONDecodeError, ValueError) as exc:
            self._send_json(400, {"error": f"malformed request: {exc}"})
            return
        self._send_json(200, handle_render_request(body))

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        if path.rstrip("/") == "/examples":
            self._send_json(200, {"examples": bundled_examples()})
            return
        if self.static_dir is None:
            self._send_json(404, {"error": "no static assets configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        ctype = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json; charset=utf-8",
        }.get(target.suffix, "application/octet-stream")
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(port: int, static_dir: Optional[Path] = None) -> ThreadingHTTPServer:
    handler = type(
        "BoundRenderHandler",
        (RenderHandler,),
        {"static_dir": static_dir if static_dir is not None else _default_static_dir()},
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(port: int = 8080, static_dir: Optional[Path] = None) -> None:
    server = make_server(port, static_dir)
    print(f"css4code serving on http://127.0.0.1:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
