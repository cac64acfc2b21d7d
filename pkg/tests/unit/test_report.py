"""Report models, status rules and renderers."""

import json
from fractions import Fraction

from cprover.reduce import InvariantTag, combination
from cprover.report import (
    CheckReport,
    ReportItem,
    VerificationReport,
    bool_item,
    error_item,
    exact_item,
    not_applicable,
    numeric_item,
    overall_status,
)


def _report() -> VerificationReport:
    first = CheckReport.build("checksum", 2, "Σ = (2ω+4)!", [exact_item("multiplicity-sum", 40320, 40320)])
    first.millis = 12.5
    second = CheckReport.build(
        "table1",
        2,
        "A_k = B_k",
        [exact_item("A1=B1", "T_0", "T_0"), not_applicable("A19=B19", "row 19 does not occur at omega=2")],
        stats={"keys": 10},
        notes=["exact items only"],
    )
    return VerificationReport(version="0.1.0", seed=7, checks=[first, second])


class TestItems:
    def test_exact_equal(self):
        assert exact_item("x", Fraction(4, 2), 2).status == "pass"
        assert exact_item("x", 3, Fraction(7, 2)).status == "fail"

    def test_exact_combination(self):
        t = InvariantTag("T", 0)
        item = exact_item("x", combination((2, t)), combination((1, t), (1, t)))
        assert item.status == "pass"
        assert item.expected == "2*T_0"

    def test_numeric_tolerance(self):
        assert numeric_item("x", 100.0, 100.0 + 1e-7, 1e-8).status == "pass"
        item = numeric_item("x", 1.0, 1.1, 1e-8, seed=3)
        assert item.status == "fail"
        assert item.seed == 3
        assert not item.exact

    def test_bool_and_error(self):
        assert bool_item("b", True, "yes", "yes").status == "pass"
        item = error_item(ValueError("boom"))
        assert item.status == "fail"
        assert item.computed == "ValueError: boom"


class TestStatus:
    """Fail dominates; all not-applicable stays not-applicable."""

    def test_overall(self):
        assert overall_status(["pass", "not-applicable"]) == "pass"
        assert overall_status(["pass", "fail", "not-applicable"]) == "fail"
        assert overall_status(["not-applicable"]) == "not-applicable"
        assert overall_status([]) == "pass"

    def test_check_report(self):
        report = _report()
        assert report.passed
        assert report.checks[1].status == "pass"
        bad = CheckReport.build("x", None, "", [bool_item("b", False, "yes", "no")])
        assert not bad.passed
        assert [i.name for i in bad.failures()] == ["b"]


class TestRendering:
    def test_json_omits_timings(self):
        data = json.loads(_report().to_json())
        assert "millis" not in data["checks"][0]
        assert "millis" not in data["checks"][0]["items"][0]
        assert data["checks"][1]["items"][1]["status"] == "not-applicable"

    def test_json_with_timings(self):
        data = json.loads(_report().to_json(timings=True))
        assert data["checks"][0]["millis"] == 12.5

    def test_json_is_stable(self):
        assert _report().to_json() == _report().to_json()

    def test_markdown(self):
        text = _report().to_markdown()
        assert text.startswith("# Verification report (cprover 0.1.0, seed 7)")
        assert "## checksum (omega=2)" in text
        assert "| multiplicity-sum | pass | 40320 | 40320 |" in text
        assert "Stats: keys=10" in text
        assert "Note: exact items only" in text
        assert "| ms |" not in text

    def test_markdown_with_timings(self):
        assert "| ms |" in _report().to_markdown(timings=True)

    def test_markdown_escapes_pipes(self):
        report = VerificationReport(
            version="0",
            seed=0,
            checks=[CheckReport(check="c", items=[ReportItem(name="n", expected="a|b", computed="a|b")])],
        )
        assert "a\\|b" in report.to_markdown()
