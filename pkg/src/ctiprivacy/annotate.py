"""Render leakage reports as JSON, colored text outlines, or HTML fragments."""

from __future__ import annotations

import html
import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from .registry import FieldRule, LeakCategory
from .scoring import FieldFinding, LeakageReport, excerpt
from .tree import DocumentTree, FieldPath
from .writer import serialize  # passthrough writer, re-exported

ANSI = {
    LeakCategory.PII: "\x1b[31m",        # red
    LeakCategory.SENSITIVE: "\x1b[36m",  # cyan stands in for light blue
    LeakCategory.INFERENCE: "\x1b[33m",  # yellow
}
RESET = "\x1b[0m"
FORMATS = ("json", "text", "html")


@dataclass(frozen=True)
class RenderOptions:
    format: str = "text"
    show_public: bool = False
    color: bool = False
    excerpt_length: int = 64

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown render format {self.format!r}")
        if self.excerpt_length < 1:
            raise ValueError("excerpt_length must be >= 1")


def number(value: Real):
    """JSON-friendly rendering: integral values as int, others as float."""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    value = float(value)
    return int(value) if value.is_integer() else value


def _visible(report: LeakageReport, show_public: bool) -> list[FieldFinding]:
    if show_public:
        return list(report.findings)
    return report.leaking()


def report_to_dict(report: LeakageReport, show_public: bool = False,
                   excerpt_length: int | None = None) -> dict:
    findings = []
    for f in _visible(report, show_public):
        text = f.value_excerpt if excerpt_length is None else excerpt(f.value_excerpt, excerpt_length)
        findings.append({
            "path": str(f.path),
            "category": f.category.label,
            "weight": number(f.weight),
            "excerpt": text,
            "rule": f.matched_rule.pattern if f.matched_rule else None,
        })
    return {
        "origin": report.document_origin,
        "standard": report.standard_id,
        "mode": report.mode,
        "score": number(report.score),
        "counts": dict(report.counts),
        "findings": findings,
    }


def report_from_json(data: bytes | str) -> LeakageReport:
    obj = json.loads(data)
    findings = []
    for f in obj["findings"]:
        cat = LeakCategory.parse(f["category"])
        rule = FieldRule(obj["standard"], f["rule"], cat) if f.get("rule") else None
        findings.append(FieldFinding(FieldPath.parse(f["path"]), f["excerpt"], cat, rule, f["weight"]))
    return LeakageReport(obj["origin"], obj["standard"], tuple(findings), obj["mode"],
                         obj["score"], dict(obj["counts"]))


def _footer(report: LeakageReport) -> str:
    return f"score: {number(report.score)}"


def _text(report: LeakageReport, opts: RenderOptions) -> str:
    lines = []
    for f in _visible(report, opts.show_public):
        indent = "  " * (len(f.path) - 1)
        tag = f"[{f.category.label.upper()}]"
        value = excerpt(f.value_excerpt, opts.excerpt_length) if f.value_excerpt else ""
        body = f"{indent}{f.path}"
        if value:
            body += f" = {json.dumps(value, ensure_ascii=False)}"
        if opts.color and f.category in ANSI:
            tag = f"{ANSI[f.category]}{tag}{RESET}"
        lines.append(f"{body}  {tag}")
    lines.append(_footer(report))
    return "\n".join(lines) + "\n"


def _html(report: LeakageReport, opts: RenderOptions) -> str:
    out = ['<div class="leak-report">', "<ul>"]
    for f in _visible(report, opts.show_public):
        cls = f"leak-{f.category.label}"
        value = html.escape(excerpt(f.value_excerpt, opts.excerpt_length))
        out.append(f'<li><code>{html.escape(str(f.path))}</code> '
                   f'<span class="{cls}" data-category="{f.category.label}">{value}</span></li>')
    out.append("</ul>")
    out.append(f'<p class="leak-score">{html.escape(_footer(report))}</p>')
    out.append("</div>")
    return "\n".join(out) + "\n"


def render_report(report: LeakageReport, doc: DocumentTree | None = None,
                  opts: RenderOptions = RenderOptions()) -> bytes:
    """Render ``report`` (produced from ``doc``) in the requested format."""
    if opts.format == "json":
        payload = report_to_dict(report, opts.show_public, opts.excerpt_length)
        text = json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    elif opts.format == "html":
        text = _html(report, opts)
    else:
        text = _text(report, opts)
    return text.encode("utf-8")


def passthrough(doc: DocumentTree) -> bytes:
    """Unannotated re-serialization in the document's own format."""
    return serialize(doc)
