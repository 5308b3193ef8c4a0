"""Command-line entry points: render, check, serve.

Exit codes: 0 success, 1 user-level diagnostics (parse/check errors),
2 I/O failures (unreadable files, bad paths).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sheet as S, tiny
from .doc import doc_to_json
from .layout import layout_to_json
from .pipeline import render_code, resolve_metrics
from .values import value_to_json


def _read(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, "utf-8")
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_render(args: argparse.Namespace) -> int:
    code = _read(args.code)
    sheet_text = _read(args.sheet)
    try:
        metrics = resolve_metrics(args.metrics)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    result = render_code(
        code,
        sheet_text,
        analysis=args.analysis,
        entry=args.entry,
        metrics=metrics,
        lang=args.lang,
    )
    for d in result.diagnostics:
        print(str(d), file=sys.stderr)
    if not result.ok:
        return 1
    _write(args.out, result.html)
    if args.dump_doc and result.doc is not None:
        _write(args.dump_doc, json.dumps(doc_to_json(result.doc), indent=2) + "\n")
    if args.dump_layout and result.layout is not None:
        _write(args.dump_layout, json.dumps(layout_to_json(result.layout), indent=2) + "\n")
    if args.dump_json and result.value is not None:
        _write(args.dump_json, json.dumps(value_to_json(result.value), indent=2) + "\n")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    text = _read(args.sheet)
    parsed = S.parse_stylesheet(text)
    diags = list(parsed.diagnostics)
    if parsed.ok:
        diags.extend(S.check_stylesheet(parsed.rules, tiny.TINY_REGISTRY))
    for d in diags:
        print(str(d), file=sys.stderr)
    return 1 if any(d.severity == "error" for d in diags) else 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    static = Path(args.static) if args.static else None
    if static is not None and not static.is_dir():
        print(f"error: static directory {static} does not exist", file=sys.stderr)
        return 2
    serve(port=args.port, static_dir=static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="css4code", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a program with a stylesheet")
    p_render.add_argument("--lang", default="tiny", choices=["tiny"])
    p_render.add_argument("--code", required=True, help="source file")
    p_render.add_argument("--sheet", required=True, help="stylesheet (.c4c) file")
    p_render.add_argument("--analysis", default="none", choices=["none", "names", "heat"])
    p_render.add_argument("--entry", default="main", help="entry equation for --analysis heat")
    p_render.add_argument("--metrics", default="mono", help="'mono' or 'table:FILE'")
    p_render.add_argument("--out", "-o", default="out.html", help="output HTML file")
    p_render.add_argument("--dump-doc", default=None, help="write styled document JSON")
    p_render.add_argument("--dump-layout", default=None, help="write layout JSON")
    p_render.add_argument("--dump-json", default=None, help="write the value tree JSON")
    p_render.set_defaults(fn=cmd_render)

    p_check = sub.add_parser("check", help="parse and check a stylesheet")
    p_check.add_argument("--sheet", required=True)
    p_check.set_defaults(fn=cmd_check)

    p_serve = sub.add_parser("serve", help="run the playground render service")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--static", default=None, help="static assets directory")
    p_serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
