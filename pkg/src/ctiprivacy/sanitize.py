"""Suppress, generalize or pseudonymize classified fields of a document."""

from __future__ import annotations

import hashlib
import hmac
import ipaddress
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Sequence

from .registry import LeakCategory
from .scoring import FieldFinding
from .tree import DocumentTree, FieldNode, add_mark, compile_pattern, is_marker, iter_nodes, path_matches

ACTIONS = ("keep", "suppress", "generalize", "pseudonymize")
GRANULARITIES = ("year", "month", "day", "hour")
TYPE_HINTS = ("ip", "timestamp", "number")
PSEUDONYM_PREFIX = "pseud:"


class SanitizationWarning(UserWarning):
    pass


class GeneralizationError(ValueError):
    pass


@dataclass(frozen=True)
class SanitizationPolicy:
    defaults: dict[LeakCategory, str] = field(default_factory=lambda: {
        LeakCategory.PUBLIC: "keep",
        LeakCategory.INFERENCE: "keep",
        LeakCategory.SENSITIVE: "keep",
        LeakCategory.PII: "keep",
    })
    overrides: dict[str, str] = field(default_factory=dict)
    ip_prefix_bits: int = 24
    ipv6_prefix_bits: int = 48
    timestamp_granularity: str = "day"
    numeric_bin_width: float = 10
    pseudonym_salt: bytes = b""

    def __post_init__(self):
        defaults = {LeakCategory.parse(k): v for k, v in self.defaults.items()}
        defaults.setdefault(LeakCategory.PUBLIC, "keep")
        for cat in LeakCategory:
            defaults.setdefault(cat, "keep")
        object.__setattr__(self, "defaults", defaults)
        for action in list(defaults.values()) + list(self.overrides.values()):
            if action not in ACTIONS:
                raise ValueError(f"unknown action {action!r}")
        for pattern in self.overrides:
            compile_pattern(pattern)
        if not 0 <= self.ip_prefix_bits <= 32:
            raise ValueError("ip_prefix_bits must be within 0..32")
        if not 0 <= self.ipv6_prefix_bits <= 128:
            raise ValueError("ipv6_prefix_bits must be within 0..128")
        if self.timestamp_granularity not in GRANULARITIES:
            raise ValueError(f"timestamp_granularity must be one of {GRANULARITIES}")
        if not self.numeric_bin_width > 0:
            raise ValueError("numeric_bin_width must be positive")

    @classmethod
    def uniform(cls, action: str, **kw) -> "SanitizationPolicy":
        """Apply ``action`` to every non-public category."""
        return cls(defaults={c: action for c in LeakCategory if c is not LeakCategory.PUBLIC}, **kw)

    def action_for(self, finding: FieldFinding) -> str:
        best = None
        for pattern, action in self.overrides.items():
            segs = compile_pattern(pattern)
            hit = path_matches(finding.path, segs) or (
                finding.matched_rule is not None and finding.matched_rule.pattern == pattern)
            if hit and (best is None or len(segs) > best[0]):
                best = (len(segs), action)
        if best is not None:
            return best[1]
        return self.defaults[finding.category]


def load_policy(path: str | Path) -> SanitizationPolicy:
    """Policy file: ``{"defaults": {...}, "overrides": {...}, "generalize": {...}, "salt": "..."}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return policy_from_dict(data)


def policy_from_dict(data: dict) -> SanitizationPolicy:
    known = {"defaults", "overrides", "generalize", "salt"}
    extra = set(data) - known
    if extra:
        raise ValueError(f"unknown policy keys: {sorted(extra)}")
    gen = dict(data.get("generalize", {}))
    kw = {}
    for key in ("ip_prefix_bits", "ipv6_prefix_bits", "timestamp_granularity", "numeric_bin_width"):
        if key in gen:
            kw[key] = gen.pop(key)
    if gen:
        raise ValueError(f"unknown generalize keys: {sorted(gen)}")
    defaults = {LeakCategory.parse(k): v for k, v in data.get("defaults", {}).items()}
    return SanitizationPolicy(defaults=defaults, overrides=dict(data.get("overrides", {})),
                              pseudonym_salt=str(data.get("salt", "")).encode("utf-8"), **kw)


# -- value transforms --------------------------------------------------------

def parse_timestamp(value: str) -> datetime:
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise GeneralizationError(f"not a timestamp: {value!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _fmt_number(x: Decimal) -> str:
    x = x.normalize()
    if x == x.to_integral_value():
        return str(int(x))
    return format(x, "f")


def generalize_value(value: str, type_hint: str, params: SanitizationPolicy | dict | None = None) -> str:
    """Coarsen ``value``: IPs to a CIDR prefix, timestamps to a granularity, numbers to a bin."""
    if params is None:
        params = SanitizationPolicy()
    elif isinstance(params, dict):
        params = SanitizationPolicy(**params)
    text = value.strip()
    if type_hint == "ip":
        try:
            addr = ipaddress.ip_address(text)
        except ValueError:
            raise GeneralizationError(f"not an IP address: {value!r}") from None
        bits = params.ip_prefix_bits if addr.version == 4 else params.ipv6_prefix_bits
        return str(ipaddress.ip_network(f"{addr}/{bits}", strict=False))
    if type_hint == "timestamp":
        ts = parse_timestamp(text)
        g = params.timestamp_granularity
        if g == "year":
            return f"{ts.year:04d}"
        if g == "month":
            return f"{ts.year:04d}-{ts.month:02d}"
        if g == "day":
            return f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}"
        return ts.replace(minute=0, second=0, microsecond=0).strftime("%Y-%m-%dT%H:00:00Z")
    if type_hint == "number":
        try:
            v = Decimal(text)
        except InvalidOperation:
            raise GeneralizationError(f"not a number: {value!r}") from None
        if not v.is_finite():
            raise GeneralizationError(f"not a finite number: {value!r}")
        width = Decimal(str(params.numeric_bin_width))
        k = math.floor(v / width)
        lo = width * k
        return f"{_fmt_number(lo)}..{_fmt_number(lo + width)}"
    raise ValueError(f"unknown type hint {type_hint!r}")


def sniff_type(value: str) -> str | None:
    text = value.strip()
    if not text:
        return None
    try:
        ipaddress.ip_address(text)
        return "ip"
    except ValueError:
        pass
    try:
        Decimal(text)
        if Decimal(text).is_finite():
            return "number"
    except InvalidOperation:
        pass
    try:
        parse_timestamp(text)
        return "timestamp"
    except GeneralizationError:
        return None


def pseudonymize_value(value: str, salt: bytes) -> str:
    """Keyed, deterministic token: ``pseud:`` plus 32 hex digits of HMAC-SHA256."""
    digest = hmac.new(salt, value.encode("utf-8"), hashlib.sha256).hexdigest()
    return PSEUDONYM_PREFIX + digest[:32]


# -- documents ---------------------------------------------------------------

def apply_policy(doc: DocumentTree, findings: Sequence[FieldFinding],
                 policy: SanitizationPolicy) -> DocumentTree:
    """Return a sanitized copy of ``doc``; ``findings`` must come from classifying ``doc``.

    Non-keep actions rewrite the value and tag the owning element with a
    ``redacted`` or ``sanitized`` marker. Values that cannot be generalized are
    suppressed with a :class:`SanitizationWarning`.
    """
    nodes = [node for node, _ in iter_nodes(doc.root)]
    if len(nodes) != len(findings):
        raise ValueError("findings do not correspond to the document")
    decisions: dict[int, str] = {}
    for node, f in zip(nodes, findings):
        if node.path != f.path:
            raise ValueError(f"finding path {f.path} does not match node {node.path}")
        if is_marker(node) or f.sanitized is not None:
            continue
        action = policy.action_for(f)
        if action != "keep":
            decisions[id(node)] = action

    if not decisions:
        return doc

    def transform(node: FieldNode) -> tuple[str, str]:
        """Return (action actually applied, new value)."""
        action = decisions[id(node)]
        if action == "suppress" or not node.value:
            # an empty value (e.g. a container element) only needs the marker
            return action, ""
        if action == "pseudonymize":
            return "pseudonymize", pseudonymize_value(node.value, policy.pseudonym_salt)
        hint = sniff_type(node.value)
        if hint is None:
            warnings.warn(f"{node.path}: cannot generalize {node.value!r}; suppressed instead",
                          SanitizationWarning, stacklevel=3)
            return "suppress", ""
        return "generalize", generalize_value(node.value, hint, policy)

    def rebuild(node: FieldNode) -> FieldNode:
        children = []
        marks: list[tuple[str | None, str]] = []
        for child in node.children:
            if child.is_attribute and id(child) in decisions:
                action, value = transform(child)
                children.append(replace(child, value=value))
                marks.append((child.name, action))
            elif child.is_attribute:
                children.append(child)
            else:
                children.append(rebuild(child))
        new = replace(node, children=tuple(children))
        if id(node) in decisions:
            action, value = transform(node)
            new = replace(new, value=value)
            marks.insert(0, (None, action))
        for target, action in marks:
            new = add_mark(new, target, action)
        return new

    return replace(doc, root=rebuild(doc.root))
