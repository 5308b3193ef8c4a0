from __future__ import annotations

import json
import socket
import threading
import time
import urllib.request
from importlib import resources
from pathlib import Path

import pytest

from css4code.cli import main
from css4code.server import make_server

ASSETS = resources.files("css4code").joinpath("assets", "examples")


def asset_path(name: str) -> str:
    return str(ASSETS.joinpath(name))


def test_render_writes_html(tmp_path):
    out = tmp_path / "out.html"
    code = main(
        [
            "render",
            "--lang",
            "tiny",
            "--code",
            asset_path("cloc.tiny"),
            "--sheet",
            asset_path("blocks.c4c"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert out.read_text("utf-8").startswith("<!DOCTYPE html>")


def test_render_deterministic(tmp_path):
    outs = []
    for name in ("a.html", "b.html"):
        target = tmp_path / name
        assert (
            main(
                [
                    "render",
                    "--code",
                    asset_path("cloc.tiny"),
                    "--sheet",
                    asset_path("syntax.c4c"),
                    "--out",
                    str(target),
                ]
            )
            == 0
        )
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_render_dumps(tmp_path):
    out = tmp_path / "out.html"
    doc_dump = tmp_path / "doc.json"
    layout_dump = tmp_path / "layout.json"
    value_dump = tmp_path / "value.json"
    code = main(
        [
            "render",
            "--code",
            asset_path("spin.tiny"),
            "--sheet",
            asset_path("heat.c4c"),
            "--analysis",
            "heat",
            "--out",
            str(out),
            "--dump-doc",
            str(doc_dump),
            "--dump-layout",
            str(layout_dump),
            "--dump-json",
            str(value_dump),
        ]
    )
    assert code == 0
    doc = json.loads(doc_dump.read_text())
    assert doc["kind"] == "node" and doc["path"] == []
    layout = json.loads(layout_dump.read_text())
    assert {"fragments", "vgadgets", "outlines"} <= set(layout)
    value = json.loads(value_dump.read_text())
    assert value["ctor"] == "Program"


def test_render_missing_file_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["render", "--code", "no-such.tiny", "--sheet", asset_path("blocks.c4c")])
    assert exc.value.code == 2


def test_render_bad_sheet_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.c4c"
    bad.write_text("x { color: red; }")  # no selector arrow
    code = main(
        ["render", "--code", asset_path("cloc.tiny"), "--sheet", str(bad), "--out", str(tmp_path / "o.html")]
    )
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_check_clean_and_dirty(tmp_path, capsys):
    assert main(["check", "--sheet", asset_path("syntax.c4c")]) == 0
    bad = tmp_path / "bad.c4c"
    bad.write_text("x@EInt(_, _) -> x { color: teal; }")
    assert main(["check", "--sheet", str(bad)]) == 1
    assert "argument" in capsys.readouterr().err.lower()


def test_check_empty_sheet(tmp_path):
    empty = tmp_path / "empty.c4c"
    empty.write_text("")
    assert main(["check", "--sheet", str(empty)]) == 0


# -- HTTP service ---------------------------------------------------------------


@pytest.fixture(scope="module")
def server_port():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = make_server(port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    time.sleep(0.05)
    yield port
    server.shutdown()
    server.server_close()


def _post(port: int, payload, raw: bytes | None = None):
    body = raw if raw is not None else json.dumps(payload).encode()
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}/render", data=body, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def test_serve_render_ok(server_port):
    code = ASSETS.joinpath("cloc.tiny").read_text("utf-8")
    sheet = ASSETS.joinpath("blocks.c4c").read_text("utf-8")
    status, body = _post(server_port, {"code": code, "sheet": sheet, "lang": "tiny"})
    assert status == 200
    assert body["html"].startswith("<!DOCTYPE html>")
    assert body["diagnostics"] == []


def test_serve_matches_cli_output(server_port, tmp_path):
    code = ASSETS.joinpath("cloc.tiny").read_text("utf-8")
    sheet = ASSETS.joinpath("pipeline.c4c").read_text("utf-8")
    status, body = _post(server_port, {"code": code, "sheet": sheet})
    assert status == 200
    out = tmp_path / "cli.html"
    assert (
        main(
            [
                "render",
                "--code",
                asset_path("cloc.tiny"),
                "--sheet",
                asset_path("pipeline.c4c"),
                "--out",
                str(out),
            ]
        )
        == 0
    )
    assert body["html"] == out.read_text("utf-8")


def test_serve_bad_selector_gives_diagnostics_not_error(server_port):
    status, body = _post(server_port, {"code": "x = 1\n", "sheet": "x { color: red; }"})
    assert status == 200
    assert body["html"] == ""
    assert body["diagnostics"] and body["diagnostics"][0]["severity"] == "error"
    assert body["diagnostics"][0]["line"] >= 1


def test_serve_malformed_json_is_400(server_port):
    status, body = _post(server_port, None, raw=b"{not json")
    assert status == 400


def test_serve_statelessness(server_port):
    code = ASSETS.joinpath("spin.tiny").read_text("utf-8")
    sheet = ASSETS.joinpath("heat.c4c").read_text("utf-8")
    payload = {"code": code, "sheet": sheet, "analysis": "heat", "debug": True}
    first = _post(server_port, payload)
    second = _post(server_port, payload)
    assert first == second
    assert "layout" in first[1]


def test_serve_concurrent_requests(server_port):
    code = ASSETS.joinpath("cloc.tiny").read_text("utf-8")
    sheet = ASSETS.joinpath("syntax.c4c").read_text("utf-8")
    results = []

    def worker():
        results.append(_post(server_port, {"code": code, "sheet": sheet}))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(results) == 8
    assert all(status == 200 for status, _ in results)
    htmls = {body["html"] for _, body in results}
    assert len(htmls) == 1


def test_serve_examples_endpoint(server_port):
    with urllib.request.urlopen(f"http://127.0.0.1:{server_port}/examples") as resp:
        body = json.loads(resp.read())
    names = {e["name"] for e in body["examples"]}
    assert {"blocks", "syntax-highlighting", "pipeline"} <= names
    for entry in body["examples"]:
        assert entry["code"] and entry["sheet"]
