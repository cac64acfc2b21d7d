"""
Verification report audit: pytest suite.

Audits a freshly written report and the committed golden files.

Run via:
  pytest tests/eval/test_verification_eval.py -v
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from cprover.golden import update_golden
from cprover.proofs import CheckContext, run
from tests.eval.verification_eval import audit_check, audit_directory, audit_report, format_report

WORKSPACE_ROOT = Path(__file__).resolve().parent.parent.parent
GOLDEN_DIR = WORKSPACE_ROOT / "golden" / "v1"


@pytest.fixture(scope="module")
def fresh_report():
    return run(["comb", "checksum", "sym-ric"], [2], CheckContext(seed=7, samples=2))


class TestFreshReports:
    """A run written the way the CLI writes it audits clean."""

    def test_golden_files(self, fresh_report, tmp_path):
        update_golden(fresh_report, tmp_path)
        audits = audit_directory(tmp_path)
        assert len(audits) == 3
        assert all(a.ok for a in audits), format_report(audits)

    def test_numeric_items_are_counted(self, fresh_report, tmp_path):
        update_golden(fresh_report, tmp_path)
        by_check = {a.check: a for a in audit_directory(tmp_path)}
        assert by_check["sym-ric"].numeric_items > 0
        assert by_check["checksum"].numeric_items == 0

    def test_full_report(self, fresh_report, tmp_path):
        path = tmp_path / "report.json"
        path.write_text(fresh_report.to_json(), encoding="utf-8")
        audits = audit_report(path)
        assert [a.check for a in audits] == ["comb", "checksum", "sym-ric"]
        assert all(a.ok for a in audits)


class TestAuditFindings:
    """Each class of inconsistency is reported."""

    @pytest.fixture
    def data(self, fresh_report):
        return json.loads(fresh_report.checks[1].model_dump_json(exclude={"millis": True}))

    def test_status_mismatch(self, data):
        data["status"] = "fail"
        assert audit_check(data).status_errors

    def test_missing_keys(self, data):
        del data["anchor"]
        assert audit_check(data).schema_errors

    def test_numeric_without_seed(self, data):
        data["items"][0]["exact"] = False
        audit = audit_check(data)
        assert audit.provenance_errors
        assert not audit.ok

    def test_range(self, data):
        data["omega"] = 40
        assert audit_check(data).range_errors

    def test_unknown_check(self, data):
        data["check"] = "nope"
        assert audit_check(data).range_errors

    def test_invalid_json(self, tmp_path):
        (tmp_path / "broken.json").write_text("{", encoding="utf-8")
        (audit,) = audit_directory(tmp_path)
        assert "invalid JSON" in audit.schema_errors[0]
        assert "FAIL" in format_report([audit])


class TestStoredGolden:
    def test_stored_files_are_consistent(self):
        audits = audit_directory(GOLDEN_DIR)
        assert audits, f"No golden files in {GOLDEN_DIR}"
        assert all(a.ok for a in audits), format_report(audits)

    def test_committed_suite_is_present(self):
        names = {p.name for p in GOLDEN_DIR.glob("*.json")}
        assert {"comb.json", *(f"checksum-omega{w}.json" for w in range(2, 9))} <= names
