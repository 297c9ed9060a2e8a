"""Classify document fields against the rule tables and compute leakage scores."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import MalformedInput, UnsupportedConstruct, detect_standard, load_document, parse_document
from .registry import UNIVERSAL, FieldRule, LeakCategory, Registry, UnknownStandard, WeightProfile
from .tree import DocumentTree, FieldNode, FieldPath, is_marker, marked_action, path_matches

OCCURRENCE = "occurrence"
DISTINCT = "distinct"
MODES = (OCCURRENCE, DISTINCT)
DEFAULT_EXCERPT = 64


def excerpt(value: str, length: int = DEFAULT_EXCERPT) -> str:
    if length < 1:
        raise ValueError("excerpt length must be >= 1")
    return value if len(value) <= length else value[:length] + "..."


@dataclass(frozen=True)
class FieldFinding:
    path: FieldPath
    value_excerpt: str
    category: LeakCategory
    matched_rule: FieldRule | None
    weight: Real
    # inherited: category came from an enclosing element's rule
    inherited: bool = False
    # sanitized: action recorded by a marker; such fields no longer leak
    sanitized: str | None = None


@dataclass(frozen=True)
class LeakageReport:
    document_origin: str
    standard_id: str
    findings: tuple[FieldFinding, ...]
    mode: str
    score: Real
    counts: dict[str, int]

    def leaking(self) -> list[FieldFinding]:
        return [f for f in self.findings if f.category is not LeakCategory.PUBLIC]


class _RuleIndex:
    def __init__(self, rules: Iterable[FieldRule]):
        self.by_last: dict[str, list[FieldRule]] = {}
        self.wild: list[FieldRule] = []
        for rule in rules:
            last = rule.segments[-1]
            if last == "*":
                self.wild.append(rule)
            else:
                self.by_last.setdefault(last, []).append(rule)

    def best(self, path: FieldPath) -> FieldRule | None:
        """Longest matching pattern; ties go to the higher category, then the pattern text."""
        best = None
        best_key = None
        for rule in self.by_last.get(path.name, []) + self.wild:
            if not path_matches(path, rule.segments):
                continue
            key = (len(rule.segments), int(rule.category), _neg(rule.pattern))
            if best_key is None or key > best_key:
                best, best_key = rule, key
        return best


def _neg(text: str) -> tuple[int, ...]:
    # lexicographically smaller pattern wins a full tie
    return tuple(-ord(c) for c in text)


def applicable_rules(r: Registry, standard_id: str) -> tuple[FieldRule, ...]:
    if standard_id == "unknown":
        return r.universal_rules
    r.standard(standard_id)
    return r.rules_for(standard_id) + r.universal_rules


def classify_document(doc: DocumentTree, r: Registry, standard_id: str,
                      excerpt_length: int = DEFAULT_EXCERPT,
                      weights: WeightProfile | None = None) -> list[FieldFinding]:
    """One finding per node in document order.

    A node takes the most specific rule matching its own path; otherwise it
    inherits the rule of its nearest classified ancestor. Marker attributes are
    public, and fields whose value carries a sanitization marker count as public.
    """
    w = weights or r.default_weights
    index = _RuleIndex(applicable_rules(r, standard_id))
    findings: list[FieldFinding] = []

    stack: list[tuple[FieldNode, FieldNode | None, FieldRule | None]] = [(doc.root, None, None)]
    while stack:
        node, parent, inherited_rule = stack.pop()
        text = excerpt(node.value, excerpt_length)
        if is_marker(node):
            findings.append(FieldFinding(node.path, text, LeakCategory.PUBLIC, None,
                                         w[LeakCategory.PUBLIC]))
            continue
        own = index.best(node.path)
        rule = own or inherited_rule
        action = marked_action(node, parent)
        if rule is None or action is not None:
            findings.append(FieldFinding(node.path, text, LeakCategory.PUBLIC, None,
                                         w[LeakCategory.PUBLIC], sanitized=action))
        else:
            findings.append(FieldFinding(node.path, text, rule.category, rule, w[rule.category],
                                         inherited=own is None))
        for child in reversed(node.children):
            stack.append((child, node, rule))
    return findings


def _count(findings: Sequence[FieldFinding]) -> dict[str, int]:
    counts = {c.label: 0 for c in (LeakCategory.PII, LeakCategory.SENSITIVE,
                                   LeakCategory.INFERENCE, LeakCategory.PUBLIC)}
    for f in findings:
        counts[f.category.label] += 1
    return counts


def score_document(findings: Sequence[FieldFinding], w: WeightProfile | None = None,
                   mode: str = OCCURRENCE, origin: str = "",
                   standard_id: str = "unknown") -> LeakageReport:
    """Aggregate findings into one score.

    ``occurrence`` sums every finding; ``distinct`` sums each matched rule once,
    which is how a schema's fields are totalled.
    """
    if mode not in MODES:
        raise ValueError(f"unknown scoring mode {mode!r}")
    w = w or WeightProfile()
    rescored = tuple(
        FieldFinding(f.path, f.value_excerpt, f.category, f.matched_rule, w[f.category],
                     f.inherited, f.sanitized)
        for f in findings
    )
    if mode == OCCURRENCE:
        score = sum((f.weight for f in rescored), 0)
    else:
        matched = {f.matched_rule for f in rescored if f.matched_rule is not None}
        score = sum((w[rule.category] for rule in matched), 0)
    return LeakageReport(origin, standard_id, rescored, mode, score, _count(rescored))


def score_tree(doc: DocumentTree, r: Registry, standard_id: str = "auto",
               w: WeightProfile | None = None, mode: str = OCCURRENCE,
               excerpt_length: int = DEFAULT_EXCERPT) -> LeakageReport:
    if standard_id == "auto":
        standard_id = detect_standard(doc, r)
    findings = classify_document(doc, r, standard_id, excerpt_length)
    return score_document(findings, w or r.default_weights, mode, doc.origin, standard_id)


@dataclass
class CorpusSummary:
    reports: list[LeakageReport]
    errors: list[tuple[str, str]]
    mode: str
    total: Real = 0
    mean: float | None = None
    max: Real | None = None
    category_counts: dict[str, int] = field(default_factory=dict)
    per_standard: dict[str, dict[str, Real]] = field(default_factory=dict)


def _score_one(item, r, w, mode, standard_id):
    if isinstance(item, DocumentTree):
        doc = item
    elif isinstance(item, tuple):
        origin, data = item
        doc = parse_document(data, origin=origin)
    else:
        doc = load_document(item)
    return score_tree(doc, r, standard_id, w, mode)


def _origin(item) -> str:
    if isinstance(item, DocumentTree):
        return item.origin
    if isinstance(item, tuple):
        return item[0]
    return str(item)


def score_corpus(docs: Iterable[DocumentTree | str | Path | tuple[str, bytes]], r: Registry,
                 w: WeightProfile | None = None, mode: str = OCCURRENCE,
                 standard_id: str = "auto", jobs: int = 1) -> CorpusSummary:
    """Score every document; failures are recorded per document, never raised.

    Results are ordered by origin, so ``jobs > 1`` does not change the output.
    """
    items = list(docs)
    w = w or r.default_weights

    def run(item):
        try:
            return _score_one(item, r, w, mode, standard_id), None
        except (OSError, MalformedInput, UnsupportedConstruct, UnknownStandard, ValueError) as exc:
            return None, str(exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(item) for item in items]

    reports, errors = [], []
    for item, (report, err) in zip(items, results):
        if report is not None:
            reports.append(report)
        else:
            errors.append((_origin(item), err))
    reports.sort(key=lambda rep: rep.document_origin)
    errors.sort()

    summary = CorpusSummary(reports, errors, mode)
    summary.category_counts = {c: 0 for c in ("pii", "sensitive", "inference", "public")}
    for rep in reports:
        summary.total += rep.score
        for cat, n in rep.counts.items():
            summary.category_counts[cat] += n
        entry = summary.per_standard.setdefault(rep.standard_id, {"documents": 0, "total": 0})
        entry["documents"] += 1
        entry["total"] += rep.score
    if reports:
        summary.mean = summary.total / len(reports)
        summary.max = max(rep.score for rep in reports)
    summary.per_standard = dict(sorted(summary.per_standard.items()))
    return summary


def weights_from_file(path: str | Path) -> WeightProfile:
    return WeightProfile.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "FieldFinding", "LeakageReport", "CorpusSummary", "classify_document", "score_document",
    "score_tree", "score_corpus", "excerpt", "MODES", "OCCURRENCE", "DISTINCT", "UNIVERSAL",
]
