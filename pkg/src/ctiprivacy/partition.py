"""Split documents by leak category and rebuild per-tier views."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .ingest import load_document
from .registry import LeakCategory
from .scoring import FieldFinding
from .tree import DocumentTree, FieldNode, FieldPath, add_mark, iter_nodes
from .writer import serialize

CATEGORIES = (LeakCategory.PUBLIC, LeakCategory.INFERENCE, LeakCategory.SENSITIVE, LeakCategory.PII)
HOLE_CATEGORIES = CATEGORIES[1:]
INDEX_FILE = "index.json"


class PartitionIntegrityError(ValueError):
    def __init__(self, message: str, hole: int | None = None, path: str | None = None):
        where = ""
        if hole is not None:
            where = f"hole {hole}" + (f" ({path})" if path else "") + ": "
        super().__init__(where + message)
        self.hole = hole
        self.path = path


@dataclass(frozen=True)
class CommunityTier:
    id: str
    ceiling: LeakCategory
    description: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("tier id must be non-empty")
        object.__setattr__(self, "ceiling", LeakCategory.parse(self.ceiling))


@dataclass(frozen=True)
class TierPolicy:
    tiers: tuple[CommunityTier, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if not self.tiers:
            raise ValueError("a tier policy needs at least one tier")
        ids = [t.id for t in self.tiers]
        if len(set(ids)) != len(ids):
            raise ValueError("tier ids must be unique")

    def tier(self, tier_id: str) -> CommunityTier:
        for t in self.tiers:
            if t.id == tier_id:
                return t
        raise KeyError(f"unknown tier {tier_id!r}")


DEFAULT_TIERS = TierPolicy((
    CommunityTier("public", LeakCategory.INFERENCE, "open community; no sensitive or personal data"),
    CommunityTier("vetted", LeakCategory.SENSITIVE, "vetted members; personal data withheld"),
    CommunityTier("trusted", LeakCategory.PII, "trusted partners; full records"),
))


@dataclass(frozen=True)
class Hole:
    """A blanked value in the public skeleton and where its value lives."""
    hole: int
    path: FieldPath
    category: LeakCategory
    public_ordinal: int   # pre-order position in the skeleton
    ordinal: int          # pre-order position in the category partition


@dataclass(frozen=True)
class PartitionSet:
    public: DocumentTree
    partitions: dict[LeakCategory, DocumentTree]
    index: tuple[Hole, ...]
    origin: str = ""

    def values_in(self, category: LeakCategory) -> int:
        return sum(1 for h in self.index if h.category is category)


def _check(doc: DocumentTree, findings: Sequence[FieldFinding]) -> list[FieldNode]:
    nodes = [n for n, _ in iter_nodes(doc.root)]
    if len(nodes) != len(findings):
        raise ValueError("findings do not correspond to the document")
    for n, f in zip(nodes, findings):
        if n.path != f.path:
            raise ValueError(f"finding path {f.path} does not match node {n.path}")
    return nodes


def _prune(node: FieldNode, cats: dict[int, LeakCategory], cat: LeakCategory,
           keep_root: bool, order: list[int]) -> FieldNode | None:
    """Pruned copy holding only ``cat`` values; ``order`` collects source ids in pre-order."""
    mark = len(order)
    order.append(id(node))
    children = []
    for c in node.children:
        kept = _prune(c, cats, cat, False, order)
        if kept is not None:
            children.append(kept)
    mine = cats[id(node)] is cat
    if not (mine or children or keep_root):
        del order[mark:]
        return None
    return replace(node, value=node.value if mine else "", children=tuple(children))


def partition_document(doc: DocumentTree, findings: Sequence[FieldFinding]) -> PartitionSet:
    """Move every non-public value into the partition of its category.

    The public skeleton keeps the whole structure with those values blanked;
    each category partition is the pruned tree holding only its own values.
    """
    nodes = _check(doc, findings)
    cats = {id(n): f.category for n, f in zip(nodes, findings)}

    def blank(node: FieldNode) -> FieldNode:
        value = "" if cats[id(node)] is not LeakCategory.PUBLIC else node.value
        return replace(node, value=value, children=tuple(blank(c) for c in node.children))

    public = replace(doc, root=blank(doc.root))
    partitions = {}
    position: dict[int, int] = {}
    for cat in HOLE_CATEGORIES:
        order: list[int] = []
        partitions[cat] = replace(doc, root=_prune(doc.root, cats, cat, True, order))
        for i, nid in enumerate(order):
            if cats[nid] is cat:
                position[nid] = i

    holes = []
    for i, (n, f) in enumerate(zip(nodes, findings)):
        if f.category is not LeakCategory.PUBLIC:
            holes.append(Hole(len(holes), n.path, f.category, i, position[id(n)]))
    return PartitionSet(public, partitions, tuple(holes), doc.origin)


def _fill(ps: PartitionSet, allowed: frozenset[LeakCategory], mark: bool) -> DocumentTree:
    skeleton = [n for n, _ in iter_nodes(ps.public.root)]
    flat: dict[LeakCategory, list[FieldNode]] = {}
    for cat in allowed:
        part = ps.partitions.get(cat)
        if part is None:
            first = next((h for h in ps.index if h.category is cat), None)
            raise PartitionIntegrityError(f"missing {cat.label} partition",
                                          first.hole if first else None,
                                          str(first.path) if first else None)
        flat[cat] = [n for n, _ in iter_nodes(part.root)]

    values: dict[int, str] = {}
    withheld: set[int] = set()
    for h in ps.index:
        if not 0 <= h.public_ordinal < len(skeleton):
            raise PartitionIntegrityError("skeleton position out of range", h.hole, str(h.path))
        slot = skeleton[h.public_ordinal]
        if slot.path != h.path:
            raise PartitionIntegrityError(f"skeleton holds {slot.path} instead", h.hole, str(h.path))
        if slot.value:
            raise PartitionIntegrityError("skeleton slot is not empty", h.hole, str(h.path))
        if h.category not in allowed:
            withheld.add(id(slot))
            continue
        nodes = flat[h.category]
        if not 0 <= h.ordinal < len(nodes) or nodes[h.ordinal].path != h.path:
            raise PartitionIntegrityError(f"no matching field in the {h.category.label} partition",
                                          h.hole, str(h.path))
        values[id(slot)] = nodes[h.ordinal].value

    def rebuild(node: FieldNode) -> FieldNode:
        children = []
        redact: list[str | None] = []
        for c in node.children:
            if c.is_attribute:
                if id(c) in values:
                    c = replace(c, value=values[id(c)])
                elif id(c) in withheld:
                    redact.append(c.name)
                children.append(c)
            else:
                children.append(rebuild(c))
        new = replace(node, value=values.get(id(node), node.value), children=tuple(children))
        if mark:
            if id(node) in withheld:
                redact.insert(0, None)
            for target in redact:
                new = add_mark(new, target, "suppress")
        return new

    return replace(ps.public, root=rebuild(ps.public.root))


def merge_partitions(ps: PartitionSet) -> DocumentTree:
    """Rebuild the original document; raises :class:`PartitionIntegrityError` on any mismatch."""
    return _fill(ps, frozenset(HOLE_CATEGORIES), mark=False)


def tier_view(ps: PartitionSet, tier: CommunityTier) -> DocumentTree:
    """Fill holes up to the tier ceiling; higher fields stay blank behind ``redacted`` markers."""
    allowed = frozenset(c for c in HOLE_CATEGORIES if c <= tier.ceiling)
    return _fill(ps, allowed, mark=True)


# -- workload ----------------------------------------------------------------

@dataclass(frozen=True)
class Workload:
    total_fields: int
    heavy_fields: int   # pii plus sensitive

    @property
    def reduction(self) -> float:
        """Fraction of fields spared by running heavy sanitization on two partitions only."""
        if self.total_fields == 0:
            return 0.0
        return 1 - self.heavy_fields / self.total_fields


def workload(ps: PartitionSet) -> Workload:
    total = sum(1 for _ in iter_nodes(ps.public.root))
    heavy = ps.values_in(LeakCategory.PII) + ps.values_in(LeakCategory.SENSITIVE)
    return Workload(total, heavy)


# -- directory form ----------------------------------------------------------

def write_partitions(ps: PartitionSet, directory: str | Path) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    ext = ps.public.format
    written = []
    for cat in CATEGORIES:
        doc = ps.public if cat is LeakCategory.PUBLIC else ps.partitions[cat]
        target = out / f"{cat.label}.{ext}"
        target.write_bytes(serialize(doc))
        written.append(target)
    index = {
        "origin": ps.origin,
        "format": ext,
        "holes": [
            {"hole": h.hole, "path": str(h.path), "category": h.category.label,
             "public_ordinal": h.public_ordinal, "ordinal": h.ordinal}
            for h in ps.index
        ],
    }
    target = out / INDEX_FILE
    target.write_text(json.dumps(index, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    written.append(target)
    return written


def read_partitions(directory: str | Path) -> PartitionSet:
    """Load a partition directory; absent category files are left out and caught at merge time."""
    src = Path(directory)
    try:
        index = json.loads((src / INDEX_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PartitionIntegrityError(f"missing {INDEX_FILE} in {src}") from None
    ext = index.get("format", "xml")
    public_file = src / f"public.{ext}"
    if not public_file.exists():
        raise PartitionIntegrityError(f"missing public partition {public_file}")
    public = load_document(public_file, format=ext)
    partitions = {}
    for cat in HOLE_CATEGORIES:
        f = src / f"{cat.label}.{ext}"
        if f.exists():
            partitions[cat] = load_document(f, format=ext)
    holes = tuple(
        Hole(h["hole"], FieldPath.parse(h["path"]), LeakCategory.parse(h["category"]),
             h["public_ordinal"], h["ordinal"])
        for h in index["holes"]
    )
    public = replace(public, origin=index.get("origin", ""))
    return PartitionSet(public, partitions, holes, index.get("origin", ""))
