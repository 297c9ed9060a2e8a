"""k-anonymity, l-diversity and Laplace counting over flat record tables."""

from __future__ import annotations

import csv
import io
import json
import operator
import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .sanitize import GeneralizationError, SanitizationPolicy, generalize_value, parse_timestamp

COLUMN_TYPES = ("text", "number", "timestamp", "ip-address")
SUPPRESSED = "*"


class AnonymityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RecordTable:
    columns: tuple[tuple[str, str], ...]   # (name, type)
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple((str(n), str(t)) for n, t in self.columns))
        object.__setattr__(self, "rows", tuple(tuple(str(v) for v in row) for row in self.rows))
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        for name, kind in self.columns:
            if kind not in COLUMN_TYPES:
                raise ValueError(f"column {name!r}: unknown type {kind!r}")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} values, expected {len(self.columns)}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.columns)

    def column_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown column {name!r}") from None

    def column_type(self, name: str) -> str:
        return self.columns[self.column_index(name)][1]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class QuasiIdentifierSpec:
    quasi_identifiers: tuple[str, ...]
    sensitive_attribute: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "quasi_identifiers", tuple(self.quasi_identifiers))
        if self.sensitive_attribute is not None and self.sensitive_attribute in self.quasi_identifiers:
            raise ValueError("the sensitive attribute cannot also be a quasi-identifier")

    def validate(self, t: RecordTable) -> None:
        for name in self.quasi_identifiers:
            t.column_index(name)
        if self.sensitive_attribute is not None:
            t.column_index(self.sensitive_attribute)


# -- file form ---------------------------------------------------------------

def load_table(csv_path: str | Path, types_path: str | Path | None = None) -> RecordTable:
    """CSV with a header row; column types come from a sidecar ``{column: type}`` JSON file.

    Without an explicit sidecar, ``<csv>.types.json`` is used if present; otherwise all
    columns are text.
    """
    csv_path = Path(csv_path)
    if types_path is None:
        guess = csv_path.with_suffix(".types.json")
        types_path = guess if guess.exists() else None
    types = json.loads(Path(types_path).read_text(encoding="utf-8")) if types_path else {}
    return table_from_csv(csv_path.read_text(encoding="utf-8"), types)


def table_from_csv(text: str, types: Mapping[str, str] | None = None) -> RecordTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("CSV has no header row") from None
    types = dict(types or {})
    unknown = set(types) - set(header)
    if unknown:
        raise KeyError(f"type declaration names unknown columns: {sorted(unknown)}")
    columns = tuple((name, types.get(name, "text")) for name in header)
    return RecordTable(columns, tuple(tuple(row) for row in reader if row))


def table_to_csv(t: RecordTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.names)
    w.writerows(t.rows)
    return buf.getvalue()


# -- checks ------------------------------------------------------------------

def equivalence_classes(t: RecordTable, q: QuasiIdentifierSpec) -> dict[tuple[str, ...], list[int]]:
    q.validate(t)
    idx = [t.column_index(c) for c in q.quasi_identifiers]
    classes: dict[tuple[str, ...], list[int]] = defaultdict(list)
    for i, row in enumerate(t.rows):
        classes[tuple(row[j] for j in idx)].append(i)
    return dict(classes)


def check_k_anonymity(t: RecordTable, q: QuasiIdentifierSpec, k: int) -> bool:
    if k < 1:
        raise ValueError("k must be >= 1")
    return all(len(rows) >= k for rows in equivalence_classes(t, q).values())


def check_l_diversity(t: RecordTable, q: QuasiIdentifierSpec, l: int) -> bool:
    """Distinct l-diversity: each class holds at least ``l`` distinct sensitive values."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if q.sensitive_attribute is None:
        raise ValueError("l-diversity needs a sensitive attribute")
    s = t.column_index(q.sensitive_attribute)
    return all(len({t.rows[i][s] for i in rows}) >= l
               for rows in equivalence_classes(t, q).values())


# -- enforcement -------------------------------------------------------------

Ladder = Sequence[Callable[[str], str]]


def _safe(fn: Callable[[str], str]) -> Callable[[str], str]:
    def step(value: str) -> str:
        if value == SUPPRESSED:
            return value
        try:
            return fn(value)
        except (GeneralizationError, ValueError):
            return SUPPRESSED
    return step


def _exact(value: str) -> str:
    return value


def _suppress(_value: str) -> str:
    return SUPPRESSED


def number_ladder(*widths: float) -> list[Callable[[str], str]]:
    steps = [_exact]
    for w in widths:
        steps.append(_safe(lambda v, w=w: generalize_value(v, "number", SanitizationPolicy(numeric_bin_width=w))))
    return steps + [_suppress]


def timestamp_ladder(*granularities: str) -> list[Callable[[str], str]]:
    steps = [_exact]
    for g in granularities:
        steps.append(_safe(lambda v, g=g: generalize_value(v, "timestamp",
                                                           SanitizationPolicy(timestamp_granularity=g))))
    return steps + [_suppress]


def ip_ladder(*prefixes: int) -> list[Callable[[str], str]]:
    steps = [_exact]
    for p in prefixes:
        steps.append(_safe(lambda v, p=p: generalize_value(
            v, "ip", SanitizationPolicy(ip_prefix_bits=p, ipv6_prefix_bits=min(128, p * 4)))))
    return steps + [_suppress]


def default_ladder(column_type: str) -> list[Callable[[str], str]]:
    if column_type == "number":
        return number_ladder(10, 100)
    if column_type == "timestamp":
        return timestamp_ladder("day", "month", "year")
    if column_type == "ip-address":
        return ip_ladder(24, 16, 8)
    return [_exact, _suppress]


def _under_k(t: RecordTable, cols: list[int], levels: list[int], ladders, k: int) -> int:
    counts = Counter(
        tuple(ladders[n][levels[n]](row[c]) for n, c in enumerate(cols)) for row in t.rows
    )
    return sum(1 for size in counts.values() if size < k)


def _ladders(t: RecordTable, names: Sequence[str], ladders: Mapping[str, Ladder] | None):
    chosen = []
    for n in names:
        ladder = list((ladders or {}).get(n) or default_ladder(t.column_type(n)))
        if not ladder:
            raise ValueError(f"empty generalization ladder for {n!r}")
        chosen.append(ladder)
    return chosen


def recoding_path(t: RecordTable, q: QuasiIdentifierSpec, k: int,
                  ladders: Mapping[str, Ladder] | None = None) -> list[dict[str, int]]:
    """Ladder positions per quasi-identifier after each greedy step, starting from all zero.

    Each step advances the column whose next rung leaves the fewest under-k classes;
    ties go to the leftmost column of the table. Stops once no class is under ``k``
    or every ladder is exhausted.
    """
    q.validate(t)
    names = sorted(q.quasi_identifiers, key=t.column_index)
    cols = [t.column_index(n) for n in names]
    chosen = _ladders(t, names, ladders)
    levels = [0] * len(names)
    path = [dict(zip(names, levels))]
    current = _under_k(t, cols, levels, chosen, k)
    while current:
        best = None
        for n in range(len(names)):
            if levels[n] + 1 >= len(chosen[n]):
                continue
            trial = levels.copy()
            trial[n] += 1
            score = _under_k(t, cols, trial, chosen, k)
            if best is None or score < best[0]:
                best = (score, n)
        if best is None:
            break
        current, n = best
        levels[n] += 1
        path.append(dict(zip(names, levels)))
    return path


def recode(t: RecordTable, levels: Mapping[str, int],
           ladders: Mapping[str, Ladder] | None = None) -> RecordTable:
    """Apply ladder position ``levels[col]`` to every value of each listed column."""
    names = list(levels)
    chosen = _ladders(t, names, ladders)
    cols = [t.column_index(n) for n in names]
    rows = []
    for row in t.rows:
        new = list(row)
        for n, c in enumerate(cols):
            new[c] = chosen[n][levels[names[n]]](row[c])
        rows.append(tuple(new))
    return replace(t, rows=tuple(rows))


def enforce_k_anonymity(t: RecordTable, q: QuasiIdentifierSpec, k: int,
                        ladders: Mapping[str, Ladder] | None = None) -> RecordTable:
    """Greedy global recoding (see :func:`recoding_path`), then removal of rows still in
    classes smaller than ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q.validate(t)
    if k > len(t.rows):
        warnings.warn(f"k={k} exceeds the {len(t.rows)} rows; every row is suppressed",
                      AnonymityWarning, stacklevel=2)
        return replace(t, rows=())
    if check_k_anonymity(t, q, k):
        return t
    out = recode(t, recoding_path(t, q, k, ladders)[-1], ladders)
    keep = set()
    for members in equivalence_classes(out, q).values():
        if len(members) >= k:
            keep.update(members)
    return replace(out, rows=tuple(r for i, r in enumerate(out.rows) if i in keep))


# -- differential privacy ----------------------------------------------------

def dp_count(t: RecordTable, predicate: Callable[[dict[str, str]], bool], epsilon: float,
             seed: int) -> float:
    """Count rows satisfying ``predicate`` plus Laplace noise of scale ``1/epsilon``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    true_count = sum(1 for row in t.rows if predicate(dict(zip(t.names, row))))
    rng = np.random.default_rng(seed)
    return float(true_count + rng.laplace(0.0, 1.0 / epsilon))


_OPS = {"==": operator.eq, "=": operator.eq, "!=": operator.ne, "<": operator.lt,
        "<=": operator.le, ">": operator.gt, ">=": operator.ge}
_WHERE = re.compile(r"^\s*([^\s=!<>]+)\s*(==|!=|<=|>=|=|<|>)\s*(.*?)\s*$")


def parse_where(t: RecordTable, expr: str) -> Callable[[dict[str, str]], bool]:
    """Build a row predicate from ``"column OP literal"``; comparison follows the column type."""
    m = _WHERE.match(expr)
    if not m:
        raise ValueError(f"cannot parse predicate {expr!r}; expected 'column OP literal'")
    col, op, literal = m.groups()
    if len(literal) >= 2 and literal[0] == literal[-1] and literal[0] in "'\"":
        literal = literal[1:-1]
    kind = t.column_type(col)
    conv: Callable[[str], object]
    if kind == "number":
        conv = float
    elif kind == "timestamp":
        conv = parse_timestamp
    else:
        conv = str
    target = conv(literal)
    fn = _OPS[op]

    def predicate(row: dict[str, str]) -> bool:
        try:
            return bool(fn(conv(row[col]), target))
        except (ValueError, GeneralizationError):
            return False
    return predicate
