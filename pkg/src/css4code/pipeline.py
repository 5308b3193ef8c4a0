"""End-to-end render pipeline shared by the CLI and the HTTP service:
parse -> analyses -> view -> check/desugar -> style -> layout -> emit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import analysis as A
from . import engine, layout as L, render, sheet as S, tiny
from .doc import StylishDoc, invalid_paths
from .values import Value


@dataclass
class PipelineResult:
    html: str = ""
    diagnostics: list[S.Diagnostic] = field(default_factory=list)
    doc: Optional[StylishDoc] = None
    layout: Optional[L.LayoutResult] = None
    value: Optional[Value] = None
    ok: bool = True


def resolve_metrics(spec: str) -> L.FontMetrics:
    """"mono" or "table:FILE"."""
    if spec == "mono":
        return L.MONO
    if spec.startswith("table:"):
        return L.load_metrics_table(spec[len("table:") :])
    raise ValueError(f"unknown metrics {spec!r} (expected 'mono' or 'table:FILE')")


def render_code(
    code: str,
    sheet_text: str,
    analysis: str = "none",
    entry: str = "main",
    metrics: Optional[L.FontMetrics] = None,
    lang: str = "tiny",
) -> PipelineResult:
    result = PipelineResult()
    active_metrics = metrics if metrics is not None else L.MONO

    if lang != "tiny":
        result.diagnostics.append(
            S.Diagnostic("error", f"unknown language {lang!r}", kind="request")
        )
        result.ok = False
        return result
    if analysis not in ("none", "names", "heat"):
        result.diagnostics.append(
            S.Diagnostic("error", f"unknown analysis {analysis!r}", kind="request")
        )
        result.ok = False
        return result

    try:
        program = tiny.parse_tiny(code)
    except tiny.TinyParseError as exc:
        d = exc.diagnostic
        result.diagnostics.append(S.Diagnostic("error", d.message, d.line, d.col, "tiny-syntax"))
        result.ok = False
        return result

    value = tiny.value_of(program.root)
    if analysis in ("names", "heat"):
        value = A.resolve_names(value)
    if analysis == "heat":
        trace = A.trace_eval(value, entry=entry or "main")
        value = trace.root
        if trace.error:
            result.diagnostics.append(
                S.Diagnostic("warning", f"trace: {trace.error}", kind="trace")
            )
    result.value = value

    parsed = S.parse_stylesheet(sheet_text)
    result.diagnostics.extend(parsed.diagnostics)
    if not parsed.ok:
        result.ok = False
        return result
    check = S.check_stylesheet(parsed.rules, tiny.TINY_REGISTRY)
    result.diagnostics.extend(check)
    if any(d.severity == "error" for d in check):
        result.ok = False
        return result

    doc = tiny.view_tiny(program)
    for bad in invalid_paths(doc, value):
        result.diagnostics.append(
            S.Diagnostic("error", f"document path {list(bad)} does not resolve", kind="provenance")
        )
    rules = S.desugar_sheet(parsed.rules)
    outcome = engine.apply_stylesheet(rules, doc, value, tiny.TINY_REGISTRY)
    for d in outcome.diagnostics:
        if d.kind != "no-op":
            result.diagnostics.append(S.Diagnostic("warning", str(d), kind=d.kind))
    result.doc = outcome.doc

    result.layout = L.layout_doc(outcome.doc, active_metrics)
    result.html = render.emit(result.layout).html
    return result
