import json
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctiprivacy.registry import (FieldRule, LeakCategory, RegistryError, RegistryParseError,
                                 StandardCategory, UnknownStandard, WeightProfile, builtin_registry,
                                 dump_registry, load_rules, registry_to_dict, static_schema_score,
                                 validate_registry)

R = builtin_registry()


def test_catalog_covers_all_four_categories():
    by_cat = {c: [s.id for s in R.standards if s.category is c] for c in StandardCategory}
    assert by_cat[StandardCategory.ENUMERATION] == ["cve", "cwe", "capec", "cce", "cpe"]
    assert by_cat[StandardCategory.SCORING_SYSTEM] == ["cvss", "cwss"]
    assert set(by_cat[StandardCategory.LANGUAGE]) == {
        "maec", "oval", "iodef", "xccdf", "stix", "cee", "cybox"}
    assert set(by_cat[StandardCategory.TRANSPORT]) == {"rid", "taxii", "soap", "repute"}


def test_cve_is_enumeration():
    assert R.standard("cve").category is StandardCategory.ENUMERATION


def test_scoring_systems_have_no_rules():
    assert R.rules_for("cvss") == () and R.rules_for("cwss") == ()


def test_iodef_rules():
    got = {x.pattern: x.category for x in R.rules_for("iodef")}
    P, S, I = LeakCategory.PII, LeakCategory.SENSITIVE, LeakCategory.INFERENCE
    assert got == {"Contact": P, "IncidentSource": P, "DetectTime": S, "StartTime": S,
                   "EndTime": S, "ReportTime": S, "Assessment": I, "IncidentID": I,
                   "AlternativeID": I}


def test_maec_duplicate_stored_once():
    patterns = [x.pattern for x in R.rules_for("maec")]
    assert patterns.count("Analysis/@complete_datetime") == 1


@pytest.mark.parametrize("sid,expected", [("cve", 1), ("xccdf", 38), ("maec", 26), ("cvss", 0)])
def test_static_score_examples(sid, expected):
    assert static_schema_score(R, sid) == expected


def test_zero_weights_annihilate():
    assert static_schema_score(R, "iodef", WeightProfile(0, 0, 0, 0)) == 0


def test_unknown_standard():
    with pytest.raises(UnknownStandard):
        static_schema_score(R, "nosuch")


def test_universal_rules_not_counted():
    assert R.universal_rules
    assert all(x.universal for x in R.universal_rules)
    assert all(x.standard_id != "iodef" for x in R.universal_rules)


WEIGHTS = st.tuples(*[st.integers(0, 20)] * 4)


@settings(max_examples=200, derandomize=True)
@given(a=WEIGHTS, b=WEIGHTS, sid=st.sampled_from([s.id for s in R.standards]))
def test_score_monotone_in_weights(a, b, sid):
    lo = WeightProfile(*[min(x, y) for x, y in zip(a, b)])
    hi = WeightProfile(*[max(x, y) for x, y in zip(a, b)])
    assert static_schema_score(R, sid, lo) <= static_schema_score(R, sid, hi)


@settings(max_examples=100, derandomize=True)
@given(sid=st.sampled_from(["oval", "xccdf", "maec", "stix", "cybox"]), cut=st.integers(0, 40))
def test_score_additive_over_disjoint_rules(sid, cut):
    rules = R.rules_for(sid)
    a, b = rules[:cut], rules[cut:]
    whole = static_schema_score(R, sid)
    part = lambda rs: static_schema_score(replace(R, rules=rs), sid)
    assert part(a) + part(b) == whole


def test_weight_profile_validation():
    with pytest.raises(ValueError):
        WeightProfile(-1, 1, 2, 4)
    with pytest.raises(ValueError):
        WeightProfile(0, float("inf"), 2, 4)
    w = WeightProfile.from_dict({"inference": "1/2", "sensitive": 1, "pii": 2})
    assert w[LeakCategory.INFERENCE] == Fraction(1, 2)
    assert w[LeakCategory.PUBLIC] == 0


def test_round_trip():
    data = dump_registry(R)
    again = load_rules(data)
    assert again == R
    assert dump_registry(again) == data


def _doc(**changes):
    d = registry_to_dict(R)
    d.update(changes)
    return json.dumps(d)


def test_duplicate_rule_names_pattern():
    d = registry_to_dict(R)
    d["rules"].append({"standard": "iodef", "pattern": "Contact", "category": "pii"})
    with pytest.raises(RegistryError, match="Contact"):
        load_rules(json.dumps(d))


@pytest.mark.parametrize("category", ["secret", "public"])
def test_invalid_category(category):
    d = registry_to_dict(R)
    d["rules"].append({"standard": "iodef", "pattern": "Foo", "category": category})
    with pytest.raises(RegistryError, match="invalid category"):
        load_rules(json.dumps(d))


def test_unknown_standard_in_file():
    d = registry_to_dict(R)
    d["rules"].append({"standard": "nosuch", "pattern": "Foo", "category": "pii"})
    with pytest.raises(RegistryError, match="nosuch"):
        load_rules(json.dumps(d))


@pytest.mark.parametrize("pattern", ["", "a//b", "@x/b", "@"])
def test_invalid_pattern_in_file(pattern):
    d = registry_to_dict(R)
    d["rules"].append({"standard": "iodef", "pattern": pattern, "category": "pii"})
    with pytest.raises(RegistryError):
        load_rules(json.dumps(d))


def test_parse_error_position():
    with pytest.raises(RegistryParseError) as info:
        load_rules(b'{\n  "standards": [,]\n}')
    assert info.value.line == 2


def test_validate_builtin_clean():
    assert validate_registry(R) == []


def test_validate_dangling_and_duplicate():
    bad = replace(R, rules=R.rules + (FieldRule("nosuch", "X", LeakCategory.PII),))
    assert [i.code for i in validate_registry(bad)] == ["dangling-standard"]
    dup = replace(R, rules=R.rules + (R.rules_for("iodef")[0],))
    assert [i.code for i in validate_registry(dup)] == ["duplicate-rule"]
