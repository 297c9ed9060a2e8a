"""Re-serialize field trees without annotation (XML or JSON)."""

from __future__ import annotations

import json
from dataclasses import replace
from xml.sax.saxutils import escape, quoteattr

from .tree import DocumentTree, FieldNode, iter_nodes


def _xml_node(node: FieldNode, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    tag = node.qname or node.name
    parts = [tag]
    for prefix, uri in node.namespaces:
        parts.append(f"{'xmlns:' + prefix if prefix else 'xmlns'}={quoteattr(uri)}")
    for attr in node.attributes():
        parts.append(f"{attr.qname or attr.name[1:]}={quoteattr(attr.value)}")
    head = " ".join(parts)
    elements = node.elements()
    if not elements:
        if node.value:
            out.append(f"{pad}<{head}>{escape(node.value)}</{tag}>")
        else:
            out.append(f"{pad}<{head}/>")
        return
    out.append(f"{pad}<{head}>{escape(node.value)}")
    for child in elements:
        _xml_node(child, depth + 1, out)
    out.append(f"{pad}</{tag}>")


def serialize_xml(doc: DocumentTree) -> bytes:
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    root = doc.root
    if doc.declared_namespaces and not any(n.namespaces for n, _ in iter_nodes(root)):
        # trees rebuilt without per-element declarations get them on the root
        root = replace(root, namespaces=doc.declared_namespaces)
    _xml_node(root, 0, out)
    return ("\n".join(out) + "\n").encode("utf-8")


def _json_value(node: FieldNode):
    if not node.children:
        return node.value
    obj: dict = {}
    for attr in node.attributes():
        obj[attr.name] = attr.value
    if node.value:
        obj["#text"] = node.value
    groups: dict[str, list] = {}
    for child in node.elements():
        groups.setdefault(child.name, []).append(_json_value(child))
    for name, values in groups.items():
        obj[name] = values[0] if len(values) == 1 else values
    return obj


def serialize_json(doc: DocumentTree) -> bytes:
    root = doc.root
    if doc.synthetic_root == "array":
        data = [_json_value(c) for c in root.elements()]
    elif doc.synthetic_root in ("object", "scalar"):
        data = _json_value(root)
    else:
        data = {root.name: _json_value(root)}
    return (json.dumps(data, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def serialize(doc: DocumentTree, format: str | None = None) -> bytes:
    fmt = format or doc.format
    if fmt == "xml":
        return serialize_xml(doc)
    if fmt == "json":
        return serialize_json(doc)
    raise ValueError(f"unknown output format {fmt!r}")
