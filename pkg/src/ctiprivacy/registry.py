"""Catalog of sharing standards and their field-level leak rules."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import IO, Iterable

from . import _tables
from .tree import InvalidPattern, compile_pattern

UNIVERSAL = "*"


class StandardCategory(str, enum.Enum):
    ENUMERATION = "enumeration"
    SCORING_SYSTEM = "scoring-system"
    LANGUAGE = "language"
    TRANSPORT = "transport"


class LeakCategory(enum.IntEnum):
    PUBLIC = 0
    INFERENCE = 1
    SENSITIVE = 2
    PII = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: "str | LeakCategory") -> "LeakCategory":
        if isinstance(text, LeakCategory):
            return text
        try:
            return cls[str(text).upper()]
        except KeyError:
            raise ValueError(f"invalid category {text!r}") from None


class RegistryError(ValueError):
    """Semantic problem in a registry file; ``element`` names the offending item."""

    def __init__(self, message: str, element: object = None):
        super().__init__(message)
        self.element = element


class RegistryParseError(RegistryError):
    def __init__(self, message: str, line: int, column: int, pos: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line, self.column, self.pos = line, column, pos


class UnknownStandard(KeyError):
    def __str__(self) -> str:
        return f"unknown standard {self.args[0]!r}"


def _check_weight(name: str, value) -> Real:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValueError(f"weight {name!r} must be a number")
    if value < 0 or (isinstance(value, float) and not math.isfinite(value)):
        raise ValueError(f"weight {name!r} must be finite and non-negative")
    return value


@dataclass(frozen=True)
class WeightProfile:
    public: Real = 0
    inference: Real = 1
    sensitive: Real = 2
    pii: Real = 4

    def __post_init__(self):
        for cat in LeakCategory:
            _check_weight(cat.label, getattr(self, cat.label))

    def __getitem__(self, category: LeakCategory) -> Real:
        return getattr(self, LeakCategory.parse(category).label)

    def as_dict(self) -> dict[str, Real]:
        return {cat.label: self[cat] for cat in LeakCategory}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightProfile":
        unknown = set(data) - {c.label for c in LeakCategory}
        if unknown:
            raise ValueError(f"unknown weight keys: {sorted(unknown)}")
        return cls(**{k: _parse_number(v) for k, v in data.items()})


DEFAULT_WEIGHTS = WeightProfile()


def _parse_number(value):
    # rationals may be written as "a/b" strings
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a number: {value!r}") from None
    return value


def _dump_number(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return value


@dataclass(frozen=True)
class StandardDescriptor:
    id: str
    name: str
    category: StandardCategory
    description: str
    table_score: int | None = None  # published total, when one exists
    flags: tuple[str, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class FieldRule:
    standard_id: str
    pattern: str
    category: LeakCategory

    @property
    def segments(self) -> tuple[str, ...]:
        return compile_pattern(self.pattern)

    @property
    def universal(self) -> bool:
        return self.standard_id == UNIVERSAL


@dataclass(frozen=True)
class Registry:
    standards: tuple[StandardDescriptor, ...]
    rules: tuple[FieldRule, ...]
    default_weights: WeightProfile = field(default_factory=WeightProfile)

    def standard(self, standard_id: str) -> StandardDescriptor:
        for s in self.standards:
            if s.id == standard_id:
                return s
        raise UnknownStandard(standard_id)

    def has_standard(self, standard_id: str) -> bool:
        return any(s.id == standard_id for s in self.standards)

    def rules_for(self, standard_id: str) -> tuple[FieldRule, ...]:
        return tuple(r for r in self.rules if r.standard_id == standard_id)

    @property
    def universal_rules(self) -> tuple[FieldRule, ...]:
        return self.rules_for(UNIVERSAL)


def builtin_registry() -> Registry:
    standards = tuple(
        StandardDescriptor(
            id=sid, name=name, category=StandardCategory(cat), description=desc,
            table_score=_tables.TABLE_SCORES.get(sid),
            flags=_tables.FLAGS.get(sid, ()),
            note=_tables.NOTES.get(sid, ""),
        )
        for sid, name, cat, desc in _tables.STANDARDS
    )
    rules = []
    for sid, by_cat in list(_tables.RULES.items()) + [(UNIVERSAL, _tables.UNIVERSAL_RULES)]:
        for cat in ("pii", "sensitive", "inference"):
            for pattern in by_cat.get(cat, ()):
                rules.append(FieldRule(sid, pattern, LeakCategory.parse(cat)))
    return Registry(standards, tuple(rules), DEFAULT_WEIGHTS)


# -- file format -------------------------------------------------------------

def registry_to_dict(r: Registry) -> dict:
    standards = []
    for s in r.standards:
        entry = {"id": s.id, "name": s.name, "category": s.category.value,
                 "description": s.description}
        if s.table_score is not None:
            entry["table_score"] = s.table_score
        if s.flags:
            entry["flags"] = list(s.flags)
        if s.note:
            entry["note"] = s.note
        standards.append(entry)
    return {
        "standards": standards,
        "rules": [{"standard": x.standard_id, "pattern": x.pattern, "category": x.category.label}
                  for x in r.rules],
        "weights": {k: _dump_number(v) for k, v in r.default_weights.as_dict().items()},
    }


def dump_registry(r: Registry) -> bytes:
    return (json.dumps(registry_to_dict(r), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise RegistryError(f"{where}: missing key {key!r}", obj)
    value = obj[key]
    if not isinstance(value, kind):
        raise RegistryError(f"{where}: key {key!r} has wrong type", obj)
    return value


def load_rules(source: bytes | str | IO, format: str = "json") -> Registry:
    """Load a registry file, raising on the first semantic problem."""
    if format != "json":
        raise ValueError(f"unsupported registry format {format!r}")
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise RegistryParseError("invalid UTF-8", 1, exc.start + 1, exc.start) from None
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise RegistryParseError(exc.msg, exc.lineno, exc.colno, exc.pos) from None
    if not isinstance(data, dict):
        raise RegistryError("registry file must be a JSON object")

    standards = []
    seen_ids = set()
    for i, s in enumerate(_require(data, "standards", list, "registry")):
        where = f"standards[{i}]"
        if not isinstance(s, dict):
            raise RegistryError(f"{where}: expected an object", s)
        sid = _require(s, "id", str, where)
        if sid in seen_ids:
            raise RegistryError(f"duplicate standard id {sid!r}", sid)
        seen_ids.add(sid)
        try:
            category = StandardCategory(_require(s, "category", str, where))
        except ValueError:
            raise RegistryError(f"{where}: invalid standard category {s['category']!r}", sid) from None
        name = _require(s, "name", str, where)
        desc = _require(s, "description", str, where)
        if not name or not desc:
            raise RegistryError(f"standard {sid!r} needs a nonempty name and description", sid)
        table_score = s.get("table_score")
        if table_score is not None and (isinstance(table_score, bool) or not isinstance(table_score, int)):
            raise RegistryError(f"{where}: table_score must be an integer", sid)
        flags = s.get("flags", [])
        if not isinstance(flags, list) or not all(isinstance(f, str) for f in flags):
            raise RegistryError(f"{where}: flags must be a list of strings", sid)
        standards.append(StandardDescriptor(sid, name, category, desc, table_score,
                                            tuple(flags), str(s.get("note", ""))))

    rules = []
    seen_rules = set()
    for i, x in enumerate(_require(data, "rules", list, "registry")):
        where = f"rules[{i}]"
        if not isinstance(x, dict):
            raise RegistryError(f"{where}: expected an object", x)
        sid = _require(x, "standard", str, where)
        pattern = _require(x, "pattern", str, where)
        label = f"{sid}:{pattern}"
        if sid != UNIVERSAL and sid not in seen_ids:
            raise RegistryError(f"rule {label!r}: unknown standard {sid!r}", label)
        try:
            compile_pattern(pattern)
        except InvalidPattern as exc:
            raise RegistryError(f"rule {label!r}: {exc}", label) from None
        try:
            category = LeakCategory.parse(_require(x, "category", str, where))
        except ValueError:
            raise RegistryError(f"rule {label!r}: invalid category {x['category']!r}", label) from None
        if category is LeakCategory.PUBLIC:
            raise RegistryError(f"rule {label!r}: invalid category 'public' "
                                "(fields without a rule are public)", label)
        if (sid, pattern) in seen_rules:
            raise RegistryError(f"duplicate rule for pattern {pattern!r} in {sid!r}", label)
        seen_rules.add((sid, pattern))
        rules.append(FieldRule(sid, pattern, category))

    weights = data.get("weights", {})
    if not isinstance(weights, dict):
        raise RegistryError("weights must be an object")
    try:
        profile = WeightProfile.from_dict(weights)
    except (TypeError, ValueError) as exc:
        raise RegistryError(f"invalid weights: {exc}") from None
    return Registry(tuple(standards), tuple(rules), profile)


@dataclass(frozen=True)
class Issue:
    code: str
    element: object
    message: str


def validate_registry(r: Registry) -> list[Issue]:
    issues = []
    ids = set()
    for s in r.standards:
        if s.id in ids:
            issues.append(Issue("duplicate-standard", s.id, f"standard {s.id!r} declared twice"))
        ids.add(s.id)
        if not s.name or not s.description:
            issues.append(Issue("empty-text", s.id, f"standard {s.id!r} lacks name or description"))
    seen = set()
    for rule in r.rules:
        if not rule.universal and rule.standard_id not in ids:
            issues.append(Issue("dangling-standard", rule,
                                f"rule {rule.pattern!r} references unknown standard {rule.standard_id!r}"))
        try:
            compile_pattern(rule.pattern)
        except InvalidPattern as exc:
            issues.append(Issue("invalid-pattern", rule, str(exc)))
        if rule.category is LeakCategory.PUBLIC:
            issues.append(Issue("public-rule", rule, "rules may not assign the public category"))
        key = (rule.standard_id, rule.pattern)
        if key in seen:
            issues.append(Issue("duplicate-rule", rule,
                                f"pattern {rule.pattern!r} repeated for {rule.standard_id!r}"))
        seen.add(key)
    try:
        WeightProfile(**r.default_weights.as_dict())
    except ValueError as exc:
        issues.append(Issue("invalid-weight", r.default_weights, str(exc)))
    return issues


def distinct_rules(rules: Iterable[FieldRule]) -> list[FieldRule]:
    """One rule per pattern; a repeated pattern keeps its highest category."""
    best: dict[str, FieldRule] = {}
    for rule in rules:
        cur = best.get(rule.pattern)
        if cur is None or rule.category > cur.category:
            best[rule.pattern] = rule
    return list(best.values())


def static_schema_score(r: Registry, standard_id: str, w: WeightProfile | None = None) -> Real:
    """Sum of category weights over the standard's distinct fields."""
    r.standard(standard_id)
    w = w or r.default_weights
    return sum((w[rule.category] for rule in distinct_rules(r.rules_for(standard_id))), 0)
