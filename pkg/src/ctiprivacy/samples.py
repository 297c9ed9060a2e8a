"""Bundled example documents and synthetic full-coverage documents."""

from __future__ import annotations

from importlib import resources

from .ingest import ROOT_SIGNATURES, parse_xml
from .registry import Registry, builtin_registry
from .tree import DocumentTree, FieldNode, FieldPath

BUNDLED = {
    "iodef": "iodef_worm.xml",
    "maec": "maec_triage.xml",
}
FILLER = "field"      # element that owns attribute-only patterns
WILDCARD_NAME = "any"  # stands in for a ``*`` segment
LEAF_VALUE = "x"


def sample_bytes(name: str) -> bytes:
    """Raw bytes of a bundled sample, by standard id ("iodef", "maec") or file name."""
    fname = BUNDLED.get(name, name)
    return resources.files(__package__).joinpath("samples", fname).read_bytes()


def load_sample(name: str) -> DocumentTree:
    fname = BUNDLED.get(name, name)
    return parse_xml(sample_bytes(name), origin=fname)


def root_name(standard_id: str) -> str:
    for name, sid in ROOT_SIGNATURES.items():
        if sid == standard_id:
            return name
    return standard_id


def synthesize_full_coverage(standard_id: str, r: Registry | None = None) -> DocumentTree:
    """A document in which every rule of ``standard_id`` matches exactly one node.

    Rule patterns are merged into one trie under the standard's root element, so a
    rule whose pattern is a prefix of another becomes that node's container.
    """
    r = r or builtin_registry()
    r.standard(standard_id)
    root = root_name(standard_id)
    trie: dict = {}
    for rule in r.rules_for(standard_id):
        segs = [WILDCARD_NAME if s == "*" else s for s in rule.segments]
        if segs[0] == root and len(segs) > 1:
            segs = segs[1:]
        if len(segs) == 1 and segs[0].startswith("@"):
            segs = [FILLER] + segs
        node = trie
        for s in segs:
            node = node.setdefault(s, {})

    def build(path: FieldPath, sub: dict) -> FieldNode:
        attrs = [FieldNode(path.child(k), LEAF_VALUE, qname=k[1:]) for k in sub if k.startswith("@")]
        elems = [build(path.child(k), v) for k, v in sub.items() if not k.startswith("@")]
        value = LEAF_VALUE if not elems else ""
        return FieldNode(path, value, tuple(attrs + elems), qname=path.name)

    return DocumentTree(build(FieldPath((root,)), trie), origin=f"synthetic:{standard_id}", format="xml")
