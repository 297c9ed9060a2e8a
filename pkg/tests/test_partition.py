import pytest
from hypothesis import HealthCheck, given, settings

from ctiprivacy.ingest import parse_xml
from ctiprivacy.partition import (DEFAULT_TIERS, CommunityTier, PartitionIntegrityError, TierPolicy,
                                  merge_partitions, partition_document, read_partitions,
                                  tier_view, workload, write_partitions)
from ctiprivacy.registry import LeakCategory, builtin_registry
from ctiprivacy.samples import load_sample
from ctiprivacy.scoring import classify_document, score_tree
from ctiprivacy.tree import iter_nodes

from strategies import documents

R = builtin_registry()
PII, SENS, INF = LeakCategory.PII, LeakCategory.SENSITIVE, LeakCategory.INFERENCE


def split(doc, sid="iodef"):
    return partition_document(doc, classify_document(doc, R, sid))


def values(doc):
    return {str(n.path): n.value for n, _ in iter_nodes(doc.root) if n.value}


@pytest.fixture(scope="module")
def worm():
    return split(load_sample("iodef"))


def test_sample_lands_in_partitions(worm):
    assert values(worm.partitions[PII])["IODEF-Document/Incident/Contact/Email"] == "contact@csirt.example.com"
    assert "IODEF-Document/Incident/DetectTime" in values(worm.partitions[SENS])
    inf = {str(h.path) for h in worm.index if h.category is INF}
    assert "IODEF-Document/Incident/Assessment/Impact/@type" in inf or any(
        p.startswith("IODEF-Document/Incident/Assessment") for p in inf)
    pub = values(worm.public)
    assert "IODEF-Document/Incident/Contact/Email" not in pub
    assert "IODEF-Document/Incident/Description" in pub


def test_one_value_per_category():
    doc = parse_xml(b"<IODEF-Document><Description>d</Description><Contact>c</Contact>"
                    b"<DetectTime>2001-01-01</DetectTime><Assessment>a</Assessment></IODEF-Document>")
    ps = split(doc)
    assert [ps.values_in(c) for c in (INF, SENS, PII)] == [1, 1, 1]
    assert values(ps.partitions[PII]) == {"IODEF-Document/Contact": "c"}
    assert merge_partitions(ps) == doc


def test_all_public_document():
    doc = parse_xml(b"<IODEF-Document><Description>d</Description></IODEF-Document>")
    ps = split(doc)
    assert ps.index == () and ps.public == doc
    for c in (INF, SENS, PII):
        assert [n.path for n, _ in iter_nodes(ps.partitions[c].root)] == [doc.root.path]


def test_tier_view_ceiling(worm):
    view = tier_view(worm, CommunityTier("vetted", "sensitive"))
    v = values(view)
    assert v["IODEF-Document/Incident/Contact/Email/@redacted"] == "true"
    assert v.get("IODEF-Document/Incident/Contact/Email", "") == ""
    assert "IODEF-Document/Incident/DetectTime" in v
    assert score_tree(view, R, "iodef").counts["pii"] == 0


def test_tiers_are_monotone(worm):
    scores = [score_tree(tier_view(worm, t), R, "iodef").score for t in DEFAULT_TIERS.tiers]
    assert scores == sorted(scores)
    assert tier_view(worm, DEFAULT_TIERS.tier("trusted")) == merge_partitions(worm)


def test_missing_partition_is_named(tmp_path, worm):
    write_partitions(worm, tmp_path)
    (tmp_path / "pii.xml").unlink()
    with pytest.raises(PartitionIntegrityError) as err:
        merge_partitions(read_partitions(tmp_path))
    assert err.value.hole is not None


def test_directory_round_trip(tmp_path, worm):
    names = sorted(p.name for p in write_partitions(worm, tmp_path))
    assert names == ["index.json", "inference.xml", "pii.xml", "public.xml", "sensitive.xml"]
    assert merge_partitions(read_partitions(tmp_path)) == merge_partitions(worm)
    with pytest.raises(PartitionIntegrityError):
        read_partitions(tmp_path / "nowhere")


def test_tampered_partition_detected(worm):
    from dataclasses import replace
    broken = replace(worm, index=worm.index[:-1] + (replace(worm.index[-1], ordinal=10_000),))
    with pytest.raises(PartitionIntegrityError):
        merge_partitions(broken)


def test_workload(worm):
    w = workload(worm)
    assert w.heavy_fields == worm.values_in(PII) + worm.values_in(SENS)
    assert 0 < w.reduction < 1


def test_tier_policy_validation():
    with pytest.raises(ValueError):
        TierPolicy(())
    with pytest.raises(ValueError):
        TierPolicy((CommunityTier("a", "pii"), CommunityTier("a", "public")))
    with pytest.raises(KeyError):
        DEFAULT_TIERS.tier("nobody")


@settings(max_examples=150, derandomize=True, deadline=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(documents())
def test_merge_inverts_split(doc):
    ps = split(doc)
    assert merge_partitions(ps) == doc
    assert sum(ps.values_in(c) for c in (INF, SENS, PII)) == len(ps.index)
