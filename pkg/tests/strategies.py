"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

from hypothesis import strategies as st

from ctiprivacy.tree import DocumentTree, FieldNode, FieldPath

# names chosen so random trees hit IODEF and universal rules, and inherit through containers
ELEMENTS = ["Incident", "Contact", "Email", "ContactName", "DetectTime", "ReportTime",
            "Assessment", "Impact", "IncidentID", "Node", "Address", "Service", "Port",
            "Description", "EventData", "RecordData", "DateTime", "Flow"]
ATTRIBUTES = ["@role", "@name", "@category", "@completion", "@type"]
VALUES = st.one_of(
    st.sampled_from(["", "192.0.2.200", "2001:db8::1", "2001-06-19T23:10:45Z", "42", "3.5",
                     "worm", "jo@example.org", "failed", "80"]),
    st.text(alphabet="abcxyz019-_.:@", min_size=1, max_size=10).map(str.strip).filter(bool),
)


@st.composite
def nodes(draw, path: FieldPath, depth: int):
    attrs = draw(st.lists(st.sampled_from(ATTRIBUTES), max_size=2, unique=True))
    children = [FieldNode(path.child(a), draw(VALUES), qname=a[1:]) for a in attrs]
    if depth > 0:
        names = draw(st.lists(st.sampled_from(ELEMENTS), max_size=3))
        children += [draw(nodes(path.child(n), depth - 1)) for n in names]
    has_elements = any(not c.is_attribute for c in children)
    value = draw(VALUES) if not has_elements or draw(st.booleans()) else ""
    return FieldNode(path, value, tuple(children), qname=path.name)


@st.composite
def documents(draw, max_depth: int = 4, root: str = "IODEF-Document"):
    depth = draw(st.integers(0, max_depth))
    return DocumentTree(draw(nodes(FieldPath((root,)), depth)), origin="random", format="xml")
