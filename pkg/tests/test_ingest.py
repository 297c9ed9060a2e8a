import pytest
from hypothesis import HealthCheck, given, settings

from ctiprivacy.ingest import (MalformedInput, UnsupportedConstruct, detect_standard,
                               parse_document, parse_json, parse_xml, sniff_format)
from ctiprivacy.registry import builtin_registry
from ctiprivacy.samples import load_sample
from ctiprivacy.tree import (DocumentTree, FieldNode, FieldPath, InvalidPattern, count_nodes,
                             enumerate_fields, iter_nodes, path_matches)
from ctiprivacy.writer import serialize_json, serialize_xml

from strategies import documents

R = builtin_registry()


def fields(doc):
    return [(str(p), v) for p, v in enumerate_fields(doc)]


def test_xml_mapping():
    doc = parse_xml(b'<a x="1"><b>v</b></a>')
    assert fields(doc) == [("a", ""), ("a/@x", "1"), ("a/b", "v")]


def test_singleton_root():
    assert fields(parse_xml(b"<root/>")) == [("root", "")]


def test_worm_sample_has_target_address():
    doc = load_sample("iodef")
    hits = [str(p) for p, v in enumerate_fields(doc) if v == "192.0.2.200"]
    assert hits and hits[0].startswith("IODEF-Document/Incident/")


def test_namespaces_stripped_but_kept():
    doc = parse_xml(b'<p:a xmlns:p="urn:x" p:k="1"><p:b>v</p:b></p:a>')
    assert fields(doc) == [("a", ""), ("a/@k", "1"), ("a/b", "v")]
    assert doc.declared_namespaces == (("p", "urn:x"),)
    assert doc.root.qname == "p:a"
    assert b"<p:b>v</p:b>" in serialize_xml(doc)


def test_whitespace_trimmed_mixed_text_concatenated_comments_cdata():
    doc = parse_xml(b"<a>  one <!-- c --><b/> two <![CDATA[<x>]]>\n</a>")
    assert doc.root.value == "one  two <x>"


@pytest.mark.parametrize("data,construct", [
    (b'<!DOCTYPE a [<!ENTITY e "x">]><a>&e;</a>', "DOCTYPE"),
    (b'<a><?php echo 1 ?></a>', "processing instruction"),
])
def test_unsupported_constructs(data, construct):
    with pytest.raises(UnsupportedConstruct, match=construct):
        parse_xml(data)


def test_undefined_entity_is_rejected():
    with pytest.raises((MalformedInput, UnsupportedConstruct)):
        parse_xml(b"<a>&nope;</a>")


def test_malformed_xml_offset():
    with pytest.raises(MalformedInput) as info:
        parse_xml(b"<a><b></a>")
    assert info.value.offset > 0


def test_json_mapping():
    assert fields(parse_json(b'{"a":{"b":"v"}}')) == [("a", ""), ("a/b", "v")]
    assert fields(parse_json(b'{"a":[1,2]}')) == [("$", ""), ("$/a", "1"), ("$/a", "2")]


def test_json_array_key_repeats_segment():
    doc = parse_json(b'{"r":{"a":[1,2],"n":null,"t":true}}')
    assert fields(doc) == [("r", ""), ("r/a", "1"), ("r/a", "2"), ("r/n", ""), ("r/t", "true")]


def test_json_attributes_and_text():
    doc = parse_json(b'{"a":{"@x":"1","#text":"v","b":"w"}}')
    assert fields(doc) == [("a", "v"), ("a/@x", "1"), ("a/b", "w")]


def test_json_synthetic_roots():
    assert parse_json(b"[1,2]").synthetic_root == "array"
    assert parse_json(b'"s"').synthetic_root == "scalar"
    assert parse_json(b'{"a":1,"b":2}').synthetic_root == "object"
    assert parse_json(b'{"a":1}').synthetic_root is None


@pytest.mark.parametrize("data", [b"[1", b'{"a":}', b'{"a":1} x', b"", b'{"a":1,}'])
def test_malformed_json(data):
    with pytest.raises(MalformedInput):
        parse_json(data)


def test_malformed_json_offset_in_bytes():
    with pytest.raises(MalformedInput) as info:
        parse_json('{"é": ]'.encode())
    assert info.value.offset == len('{"é": '.encode())


def test_sniffing():
    assert sniff_format(b"  <a/>") == "xml"
    assert sniff_format(b"\n[1]") == "json"
    with pytest.raises(MalformedInput):
        sniff_format(b"hello")
    assert parse_document(b'{"a":"b"}').format == "json"


def test_root_path_has_one_segment():
    with pytest.raises(ValueError):
        DocumentTree(FieldNode(FieldPath(("a", "b")), ""))


@pytest.mark.parametrize("root,expected", [
    ("IODEF-Document", "iodef"), ("MAEC_Package", "maec"), ("package", "maec"),
    ("STIX_Package", "stix"), ("Observables", "cybox"), ("oval_definitions", "oval"),
    ("Benchmark", "xccdf"), ("cee", "cee"), ("mystery", "unknown"),
])
def test_detect_by_root(root, expected):
    assert detect_standard(parse_xml(f"<{root}/>".encode()), R) == expected


def test_detect_by_namespace():
    doc = parse_xml(b'<x:report xmlns:x="http://docs.oasis-open.org/cti/stix/v1"/>')
    assert detect_standard(doc, R) == "stix"


def test_prefixed_maec_root_detected():
    assert detect_standard(load_sample("maec"), R) == "maec"


@pytest.mark.parametrize("path,pattern,expected", [
    ("IODEF-Document/Incident/Contact", "Contact", True),
    ("a/b/c", "b", False),
    ("a/b/c", "*/c", True),
    ("a/b/@c", "@c", True),
    ("a/b/c", "@c", False),
    ("a/b/@c", "c", False),
    ("a/b/@c", "b/@c", True),
    ("a/b/@c", "*", True),
    ("c", "b/c", False),
])
def test_path_matches(path, pattern, expected):
    assert path_matches(FieldPath.parse(path), pattern) is expected


@pytest.mark.parametrize("pattern", ["", "a//b", "@a/b", "@", "@*"])
def test_invalid_patterns(pattern):
    with pytest.raises(InvalidPattern):
        path_matches(FieldPath.parse("a"), pattern)


PROP = settings(max_examples=150, derandomize=True, deadline=None,
                suppress_health_check=[HealthCheck.too_slow])


@PROP
@given(doc=documents())
def test_xml_round_trip(doc):
    assert parse_xml(serialize_xml(doc)) == doc


@PROP
@given(doc=documents())
def test_enumeration_total_and_ordered(doc):
    seq = list(iter_nodes(doc.root))
    assert len(enumerate_fields(doc)) == count_nodes(doc.root) == len(seq)
    position = {id(n): i for i, (n, _) in enumerate(seq)}
    for node, parent in seq:
        if parent is not None:
            assert position[id(parent)] < position[id(node)]
    assert detect_standard(doc, R) == detect_standard(doc, R)


def test_json_round_trip():
    data = b'{"r":{"@id":"1","a":["x","y"],"b":{"#text":"t","c":"2"}}}'
    doc = parse_json(data)
    assert parse_json(serialize_json(doc)) == doc
    for raw in (b"[1,2]", b'"s"', b'{"a":1,"b":[true,null]}'):
        doc = parse_json(raw)
        assert parse_json(serialize_json(doc)) == doc
