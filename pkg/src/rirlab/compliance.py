"""Reverberation-time and STI threshold checks for common space types."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not-applicable"
STI_ADVISORY = "proxy-based"


@dataclass(frozen=True)
class ComplianceRule:
    space_type: str
    rt60_min_s: float | None = None
    rt60_max_s: float | None = None
    sti_min: float | None = None

    def __post_init__(self):
        if self.rt60_min_s is None and self.rt60_max_s is None and self.sti_min is None:
            raise ValueError(f"rule {self.space_type!r} has no threshold")
        if (self.rt60_min_s is not None and self.rt60_max_s is not None
                and self.rt60_min_s > self.rt60_max_s):
            raise ValueError(f"rule {self.space_type!r}: rt60_min > rt60_max")

    def thresholds(self) -> dict:
        return {"rt60_min_s": self.rt60_min_s, "rt60_max_s": self.rt60_max_s, "sti_min": self.sti_min}


@dataclass(frozen=True)
class ComplianceOutcome:
    rule: ComplianceRule
    rt60_pass: bool | None
    sti_pass: bool | None
    overall: str
    advisory_flags: list = field(default_factory=list)
    measured: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "space_type": self.rule.space_type,
            "thresholds": self.rule.thresholds(),
            "measured": dict(self.measured),
            "pass": {"rt60": self.rt60_pass, "sti": self.sti_pass, "overall": self.overall},
            "advisory": list(self.advisory_flags),
        }


_RULES = (
    ComplianceRule("Classroom (ANSI S12.60)", rt60_max_s=0.6, sti_min=0.60),
    ComplianceRule("Open Office (ISO 3382-3)", rt60_max_s=0.8, sti_min=0.50),
    ComplianceRule("Private Office", rt60_max_s=0.6, sti_min=0.55),
    ComplianceRule("Hospital Ward", rt60_max_s=0.8, sti_min=0.60),
    ComplianceRule("Concert Hall", rt60_min_s=1.5, rt60_max_s=2.5),
    ComplianceRule("Lecture Hall", rt60_max_s=1.0, sti_min=0.55),
    ComplianceRule("Recording Studio", rt60_max_s=0.4),
    ComplianceRule("Worship Space", rt60_min_s=1.2, rt60_max_s=3.0),
    ComplianceRule("Restaurant", rt60_max_s=0.9),
    ComplianceRule("Conference Room", rt60_max_s=0.7, sti_min=0.55),
)


def builtin_rules() -> list[ComplianceRule]:
    return list(_RULES)


def check(rt60_s: float, sti: float | None, rule: ComplianceRule,
          rt60_source: str | None = None) -> ComplianceOutcome:
    """Compare measurements with one rule; thresholds are inclusive."""
    rt60_pass = None
    if rule.rt60_min_s is not None or rule.rt60_max_s is not None:
        rt60_pass = ((rule.rt60_min_s is None or rt60_s >= rule.rt60_min_s)
                     and (rule.rt60_max_s is None or rt60_s <= rule.rt60_max_s))
    sti_pass = None
    flags = []
    if rule.sti_min is not None:
        flags.append(STI_ADVISORY)
        if sti is None:
            flags.append("sti-missing")
        else:
            sti_pass = sti >= rule.sti_min
    evaluated = [p for p in (rt60_pass, sti_pass) if p is not None]
    if not evaluated:
        overall = NOT_APPLICABLE
    elif all(evaluated):
        overall = PASS
    else:
        overall = FAIL
    measured = {"rt60_s": rt60_s, "sti": sti}
    if rt60_source:
        measured["rt60_source"] = rt60_source
    return ComplianceOutcome(rule, rt60_pass, sti_pass, overall, flags, measured)


def check_all(rt60_s: float, sti: float | None, rt60_source: str | None = None) -> list[ComplianceOutcome]:
    return [check(rt60_s, sti, rule, rt60_source) for rule in _RULES]
