"""Path-addressable field trees shared by every module.

A document is a tree of :class:`FieldNode`. Element children and attribute
children live in one ordered tuple; attribute segments carry an ``@`` prefix
and are always leaves.

Sanitized fields are tagged with two reserved marker attributes on the owning
element, so the tags survive serialization:

* ``redacted``: space-separated tokens. ``true`` means the element's own value
  was suppressed, ``@name`` means attribute ``name`` was.
* ``sanitized``: tokens ``generalize`` / ``pseudonymize`` for the element
  value, ``@name=generalize`` for an attribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator

MARKER_ATTRS = ("redacted", "sanitized")
_MARKER_SEGMENTS = tuple("@" + name for name in MARKER_ATTRS)


class InvalidPattern(ValueError):
    pass


@dataclass(frozen=True)
class FieldPath:
    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("field path must be nonempty")
        for seg in self.segments[:-1]:
            if seg.startswith("@"):
                raise ValueError(f"attribute segment {seg!r} must be last")

    @classmethod
    def parse(cls, text: str) -> "FieldPath":
        return cls(tuple(text.split("/")))

    def child(self, segment: str) -> "FieldPath":
        return FieldPath(self.segments + (segment,))

    @property
    def name(self) -> str:
        return self.segments[-1]

    @property
    def is_attribute(self) -> bool:
        return self.segments[-1].startswith("@")

    def __len__(self) -> int:
        return len(self.segments)

    def __str__(self) -> str:
        return "/".join(self.segments)


@lru_cache(maxsize=4096)
def compile_pattern(pattern: str) -> tuple[str, ...]:
    """Split and validate a rule pattern like ``Contact``, ``*/c`` or ``affected/@family``."""
    if not isinstance(pattern, str) or not pattern:
        raise InvalidPattern("empty pattern")
    segs = tuple(pattern.split("/"))
    for i, seg in enumerate(segs):
        if not seg:
            raise InvalidPattern(f"empty segment in pattern {pattern!r}")
        if seg.startswith("@"):
            if i != len(segs) - 1:
                raise InvalidPattern(f"attribute segment must be last in {pattern!r}")
            if len(seg) == 1 or seg[1:] == "*":
                raise InvalidPattern(f"bad attribute segment in {pattern!r}")
    return segs


def path_matches(path: FieldPath, pattern: str | tuple[str, ...]) -> bool:
    """Suffix match: the pattern must equal the last ``len(pattern)`` segments of ``path``."""
    segs = compile_pattern(pattern) if isinstance(pattern, str) else pattern
    if len(segs) > len(path.segments):
        return False
    tail = path.segments[len(path.segments) - len(segs):]
    for want, got in zip(segs, tail):
        if want != "*" and want != got:
            return False
    return True


@dataclass(frozen=True)
class FieldNode:
    path: FieldPath
    value: str = ""
    children: tuple["FieldNode", ...] = ()
    # Serialization details; not part of tree identity.
    source_span: tuple[int, int] | None = field(default=None, compare=False)
    qname: str = field(default="", compare=False)
    namespaces: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    @property
    def is_attribute(self) -> bool:
        return self.path.is_attribute

    @property
    def name(self) -> str:
        return self.path.name

    def attributes(self) -> tuple["FieldNode", ...]:
        return tuple(c for c in self.children if c.is_attribute)

    def elements(self) -> tuple["FieldNode", ...]:
        return tuple(c for c in self.children if not c.is_attribute)

    def attribute(self, name: str) -> "FieldNode | None":
        seg = "@" + name
        for c in self.children:
            if c.path.name == seg:
                return c
        return None


@dataclass(frozen=True)
class DocumentTree:
    root: FieldNode
    declared_namespaces: tuple[tuple[str, str], ...] = ()
    origin: str = field(default="", compare=False)
    format: str = field(default="xml", compare=False)
    # JSON inputs whose top level is not a single-key object get a "$" root;
    # records which shape to restore ("object", "array" or "scalar").
    synthetic_root: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.root.path) != 1:
            raise ValueError("root path must have exactly one segment")


def iter_nodes(root: FieldNode) -> Iterator[tuple[FieldNode, FieldNode | None]]:
    """Depth-first pre-order over ``(node, parent)``."""
    stack: list[tuple[FieldNode, FieldNode | None]] = [(root, None)]
    while stack:
        node, parent = stack.pop()
        yield node, parent
        for child in reversed(node.children):
            stack.append((child, node))


def enumerate_fields(doc: DocumentTree) -> list[tuple[FieldPath, str]]:
    return [(node.path, node.value) for node, _ in iter_nodes(doc.root)]


def count_nodes(root: FieldNode) -> int:
    return 1 + sum(count_nodes(c) for c in root.children)


# -- markers ---------------------------------------------------------------

def is_marker(node: FieldNode) -> bool:
    return node.is_attribute and node.path.name in _MARKER_SEGMENTS


def _tokens(element: FieldNode, marker: str) -> list[str]:
    attr = element.attribute(marker)
    return attr.value.split() if attr is not None else []


def marked_action(node: FieldNode, parent: FieldNode | None) -> str | None:
    """Return the sanitizing action recorded for ``node``, if any."""
    if is_marker(node):
        return None
    if node.is_attribute:
        if parent is None:
            return None
        if node.name in _tokens(parent, "redacted"):
            return "suppress"
        prefix = node.name + "="
        for tok in _tokens(parent, "sanitized"):
            if tok.startswith(prefix):
                return tok[len(prefix):]
        return None
    if "true" in _tokens(node, "redacted"):
        return "suppress"
    for tok in _tokens(node, "sanitized"):
        if "=" not in tok:
            return tok
    return None


def add_mark(element: FieldNode, target: str | None, action: str) -> FieldNode:
    """Record ``action`` on ``element`` for its own value (``target=None``) or attribute ``@target``."""
    if action == "suppress":
        marker, token = "redacted", "true" if target is None else target
    else:
        marker = "sanitized"
        token = action if target is None else f"{target}={action}"
    tokens = _tokens(element, marker)
    if token in tokens:
        return element
    tokens.append(token)
    seg = "@" + marker
    new_attr = FieldNode(element.path.child(seg), " ".join(tokens), qname=marker)
    children = list(element.children)
    for i, c in enumerate(children):
        if c.path.name == seg:
            children[i] = new_attr
            break
    else:
        # after the last attribute, before element children
        pos = sum(1 for c in children if c.is_attribute)
        children.insert(pos, new_attr)
    return replace(element, children=tuple(children))


def map_tree(root: FieldNode, fn) -> FieldNode:
    """Rebuild the tree bottom-up; ``fn(node, new_children)`` returns the replacement node."""
    new_children = tuple(map_tree(c, fn) for c in root.children)
    return fn(root, new_children)
