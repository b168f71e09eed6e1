import pytest

from rirlab.compliance import ComplianceRule, builtin_rules, check, check_all


def _rule(name):
    return next(r for r in builtin_rules() if r.space_type.startswith(name))


def test_ten_rules():
    assert len(builtin_rules()) == 10
    assert len(check_all(0.5, 0.6)) == 10


def test_classroom_examples():
    c = _rule("Classroom")
    out = check(0.6, 0.60, c)
    assert out.rt60_pass and out.sti_pass and out.overall == "pass"
    assert "proxy-based" in out.advisory_flags
    assert check(0.61, 0.7, c).overall == "fail"
    assert check(0.5, 0.59, c).overall == "fail"


def test_concert_hall_band_and_no_sti():
    h = _rule("Concert")
    assert check(1.5, None, h).overall == "pass"
    assert check(2.5, None, h).rt60_pass
    assert check(1.49, None, h).overall == "fail"
    assert check(2.51, None, h).overall == "fail"
    out = check(2.0, 0.3, h)
    assert out.sti_pass is None and out.advisory_flags == []


def test_missing_sti():
    out = check(0.5, None, _rule("Classroom"))
    assert out.sti_pass is None and out.overall == "pass"
    assert out.advisory_flags == ["proxy-based", "sti-missing"]


def test_sti_only_rule_without_sti_not_applicable():
    out = check(0.5, None, ComplianceRule("Custom", sti_min=0.5))
    assert out.overall == "not-applicable"


def test_rule_validation():
    with pytest.raises(ValueError):
        ComplianceRule("Empty")
    with pytest.raises(ValueError):
        ComplianceRule("Inverted", rt60_min_s=2.0, rt60_max_s=1.0)


def test_to_dict_shape():
    d = check(0.7, 0.5, _rule("Open Office"), rt60_source="t30").to_dict()
    assert set(d) == {"space_type", "thresholds", "measured", "pass", "advisory"}
    assert d["measured"]["rt60_source"] == "t30"
    assert d["pass"] == {"rt60": True, "sti": True, "overall": "pass"}
