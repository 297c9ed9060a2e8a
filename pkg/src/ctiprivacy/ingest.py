"""Parse XML-subset and JSON sharing documents into field trees."""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import re
from itertools import accumulate
from pathlib import Path
from xml.parsers import expat

from .registry import Registry
from .tree import DocumentTree, FieldNode, FieldPath

SYNTHETIC_ROOT = "$"


class MalformedInput(ValueError):
    def __init__(self, reason: str, offset: int):
        super().__init__(f"malformed input at byte {offset}: {reason}")
        self.reason = reason
        self.offset = offset


class UnsupportedConstruct(ValueError):
    def __init__(self, construct: str, offset: int | None = None):
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"unsupported construct: {construct}{where}")
        self.construct = construct
        self.offset = offset


def _local(qname: str) -> str:
    return qname.rsplit(":", 1)[-1]


def _utf8(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedInput("input is not valid UTF-8", exc.start) from None


class _Element:
    __slots__ = ("qname", "attrs", "ns", "text", "children", "start", "tag_end")

    def __init__(self, qname, attrs, ns, start, tag_end):
        self.qname = qname
        self.attrs = attrs
        self.ns = ns
        self.text: list[str] = []
        self.children: list[FieldNode] = []
        self.start = start
        self.tag_end = tag_end


def parse_xml(data: bytes, origin: str = "") -> DocumentTree:
    """Parse the supported XML subset. DTDs, entities and processing instructions are rejected."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    _utf8(data)

    parser = expat.ParserCreate()
    parser.buffer_text = True
    parser.ordered_attributes = True
    parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)

    stack: list[_Element] = []
    roots: list[FieldNode] = []
    declared: list[tuple[str, str]] = []

    def reject(construct):
        def handler(*_args):
            raise UnsupportedConstruct(construct, parser.CurrentByteIndex)
        return handler

    def tag_end(idx: int) -> int:
        close = data.find(b">", idx)
        return len(data) if close < 0 else close + 1

    def start(qname, attr_list):
        idx = parser.CurrentByteIndex
        attrs, ns = [], []
        for k, v in zip(attr_list[::2], attr_list[1::2]):
            if k == "xmlns" or k.startswith("xmlns:"):
                prefix = k[6:]
                ns.append((prefix, v))
                if (prefix, v) not in declared:
                    declared.append((prefix, v))
            else:
                attrs.append((k, v))
        stack.append(_Element(qname, attrs, tuple(ns), idx, tag_end(idx)))

    def end(_qname):
        el = stack.pop()
        end_idx = tag_end(parser.CurrentByteIndex)
        if stack:
            path = FieldPath(tuple(_local(e.qname) for e in stack) + (_local(el.qname),))
        else:
            path = FieldPath((_local(el.qname),))
        attr_nodes = tuple(
            FieldNode(path.child("@" + _local(k)), v, source_span=(el.start, el.tag_end), qname=k)
            for k, v in el.attrs
        )
        node = FieldNode(path, "".join(el.text).strip(), attr_nodes + tuple(el.children),
                         source_span=(el.start, end_idx), qname=el.qname, namespaces=el.ns)
        if stack:
            stack[-1].children.append(node)
        else:
            roots.append(node)

    def chars(text):
        if stack:
            stack[-1].text.append(text)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.StartDoctypeDeclHandler = reject("DOCTYPE declaration")
    parser.ProcessingInstructionHandler = reject("processing instruction")
    parser.EntityDeclHandler = reject("entity declaration")
    parser.ExternalEntityRefHandler = reject("external entity reference")
    parser.SkippedEntityHandler = reject("entity reference")

    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise MalformedInput(expat.ErrorString(exc.code), parser.ErrorByteIndex) from None
    if len(roots) != 1:
        raise MalformedInput("expected exactly one root element", len(data))
    return DocumentTree(roots[0], tuple(declared), origin=origin, format="xml")


# -- JSON --------------------------------------------------------------------

_NUMBER_RE = json.scanner.NUMBER_RE
_WS = re.compile(r"[ \t\n\r]*")


class _JsonReader:
    def __init__(self, text: str):
        self.text = text
        if text.isascii():
            self._bytes = None
        else:
            self._bytes = [0, *accumulate(len(ch.encode("utf-8")) for ch in text)]

    def boff(self, i: int) -> int:
        return i if self._bytes is None else self._bytes[min(i, len(self.text))]

    def fail(self, reason: str, i: int):
        raise MalformedInput(reason, self.boff(i))

    def ws(self, i: int) -> int:
        return _WS.match(self.text, i).end()

    def string(self, i: int) -> tuple[str, int]:
        try:
            return json.decoder.scanstring(self.text, i + 1)
        except json.JSONDecodeError as exc:
            self.fail(exc.msg, exc.pos)

    def scalar(self, i: int) -> tuple[str, int] | None:
        """Return (text rendering, end) for a scalar at ``i``; None if not a scalar."""
        s = self.text
        if s[i:i + 1] == '"':
            return self.string(i)
        for lit, rendered in (("true", "true"), ("false", "false"), ("null", "")):
            if s.startswith(lit, i):
                return rendered, i + len(lit)
        m = _NUMBER_RE.match(s, i)
        if m and m.end() > i:
            return m.group(0), m.end()
        return None

    def nodes(self, i: int, path: FieldPath) -> tuple[list[FieldNode], int]:
        """Parse the value at ``i`` into nodes at ``path``; arrays yield one node per item."""
        i = self.ws(i)
        s = self.text
        if i >= len(s):
            self.fail("unexpected end of input", i)
        ch = s[i]
        if ch == "{":
            node, end = self.obj(i, path)
            return [node], end
        if ch == "[":
            out: list[FieldNode] = []
            i = self.ws(i + 1)
            if s[i:i + 1] == "]":
                return out, i + 1
            while True:
                more, i = self.nodes(i, path)
                out.extend(more)
                i = self.ws(i)
                ch = s[i:i + 1]
                if ch == ",":
                    i += 1
                elif ch == "]":
                    return out, i + 1
                else:
                    self.fail("expected ',' or ']'", i)
        sc = self.scalar(i)
        if sc is None:
            self.fail("expected a JSON value", i)
        text, end = sc
        return [FieldNode(path, text, source_span=(self.boff(i), self.boff(end)))], end

    def obj(self, i: int, path: FieldPath) -> tuple[FieldNode, int]:
        s = self.text
        start = i
        i = self.ws(i + 1)
        value = ""
        attrs: list[FieldNode] = []
        elements: list[FieldNode] = []
        if s[i:i + 1] == "}":
            return FieldNode(path, "", source_span=(self.boff(start), self.boff(i + 1))), i + 1
        while True:
            i = self.ws(i)
            if s[i:i + 1] != '"':
                self.fail("expected object key", i)
            key, i = self.string(i)
            i = self.ws(i)
            if s[i:i + 1] != ":":
                self.fail("expected ':'", i)
            i = self.ws(i + 1)
            if key == "#text" or (key.startswith("@") and len(key) > 1):
                sc = self.scalar(i)
                if sc is None:
                    self.fail(f"value of {key!r} must be a scalar", i)
                text, end = sc
                if key == "#text":
                    value = text
                else:
                    attrs.append(FieldNode(path.child(key), text,
                                           source_span=(self.boff(i), self.boff(end))))
                i = end
            else:
                more, i = self.nodes(i, path.child(key))
                elements.extend(more)
            i = self.ws(i)
            ch = s[i:i + 1]
            if ch == ",":
                i += 1
            elif ch == "}":
                node = FieldNode(path, value, tuple(attrs) + tuple(elements),
                                 source_span=(self.boff(start), self.boff(i + 1)))
                return node, i + 1
            else:
                self.fail("expected ',' or '}'", i)


def parse_json(data: bytes, origin: str = "") -> DocumentTree:
    """Parse JSON; object keys become element segments and arrays repeat their key.

    Keys ``@name`` become attributes and ``#text`` sets the value of a node that
    also has members. A top-level object holding exactly one member node names
    the root; any other top level is wrapped in a synthetic ``$`` root.
    """
    text = _utf8(data) if isinstance(data, bytes) else data
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = _JsonReader(text)
    i = reader.ws(0)
    if i >= len(text):
        reader.fail("empty document", i)
    top = text[i]
    root_path = FieldPath((SYNTHETIC_ROOT,))
    if top == "[":
        items, end = reader.nodes(i, root_path.child("item"))
        root = FieldNode(root_path, "", tuple(items), source_span=(reader.boff(i), reader.boff(end)))
        shape = "array"
    else:
        nodes, end = reader.nodes(i, root_path)
        root = nodes[0]
        shape = "object" if top == "{" else "scalar"
    if reader.ws(end) != len(text):
        reader.fail("trailing data after JSON value", reader.ws(end))

    if shape == "object" and len(root.children) == 1 and not root.value \
            and not root.children[0].is_attribute:
        only = root.children[0]
        return DocumentTree(_reroot(only, FieldPath((only.name,))), origin=origin, format="json")
    return DocumentTree(root, origin=origin, format="json", synthetic_root=shape)


def _reroot(node: FieldNode, path: FieldPath) -> FieldNode:
    children = tuple(_reroot(c, path.child(c.name)) for c in node.children)
    return FieldNode(path, node.value, children, source_span=node.source_span,
                     qname=node.qname, namespaces=node.namespaces)


# -- dispatch and detection --------------------------------------------------

def sniff_format(data: bytes) -> str:
    stripped = data.lstrip(b"\xef\xbb\xbf").lstrip()
    head = stripped[:1]
    if head == b"<":
        return "xml"
    if head in (b"{", b"["):
        return "json"
    raise MalformedInput("cannot determine input format (expected '<', '{' or '[')", 0)


def parse_document(data: bytes, origin: str = "", format: str | None = None) -> DocumentTree:
    fmt = format or sniff_format(data)
    if fmt == "xml":
        return parse_xml(data, origin)
    if fmt == "json":
        return parse_json(data, origin)
    raise ValueError(f"unknown input format {fmt!r}")


def load_document(path: str | Path, format: str | None = None) -> DocumentTree:
    path = Path(path)
    return parse_document(path.read_bytes(), origin=str(path), format=format)


ROOT_SIGNATURES = {
    "IODEF-Document": "iodef",
    "STIX_Package": "stix",
    "MAEC_Package": "maec",
    "package": "maec",
    "Observables": "cybox",
    "observable": "cybox",
    "oval_definitions": "oval",
    "Benchmark": "xccdf",
    "cee": "cee",
}

# Namespace fallback, most specific container formats first.
_NS_ORDER = ("iodef", "maec", "stix", "cybox", "oval", "xccdf", "cee",
             "capec", "cwe", "cve", "cce", "cpe")
_TOKEN = re.compile(r"[a-z0-9]+")


def detect_standard(doc: DocumentTree, r: Registry) -> str:
    """Identify the standard a document instantiates, or ``"unknown"``."""
    sid = ROOT_SIGNATURES.get(doc.root.name)
    if sid and r.has_standard(sid):
        return sid
    tokens = set()
    for _prefix, uri in doc.declared_namespaces:
        tokens.update(_TOKEN.findall(uri.lower()))
    for sid in _NS_ORDER:
        if sid in tokens and r.has_standard(sid):
            return sid
    return "unknown"
