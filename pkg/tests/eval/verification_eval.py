"""
Verification report audit.

Checks that stored per-check reports (golden files or a fresh ``--out`` run)
are internally consistent:

  1. Schema: every check carries the fields the renderers rely on
  2. Status: a check's status agrees with the status of its items
  3. Provenance: numeric items record their seed and tolerance
  4. Ranges: each (check, omega) pair is one the registry supports

No pytest dependency; can be imported from scripts or tests.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from cprover.proofs import CHECKS
from cprover.report import overall_status

logger = logging.getLogger(__name__)

REQUIRED_CHECK_KEYS = {"check", "omega", "status", "anchor", "items", "stats", "notes"}
REQUIRED_ITEM_KEYS = {"name", "expected", "computed", "exact", "status"}
VALID_STATUSES = {"pass", "fail", "not-applicable"}


@dataclass
class CheckAudit:
    source: str
    check: str = ""
    omega: int | None = None
    schema_errors: list[str] = field(default_factory=list)
    status_errors: list[str] = field(default_factory=list)
    provenance_errors: list[str] = field(default_factory=list)
    range_errors: list[str] = field(default_factory=list)
    items: int = 0
    numeric_items: int = 0

    @property
    def errors(self) -> list[str]:
        return self.schema_errors + self.status_errors + self.provenance_errors + self.range_errors

    @property
    def ok(self) -> bool:
        return not self.errors


def audit_check(data: dict, source: str = "<memory>") -> CheckAudit:
    """Audit one serialized CheckReport."""
    audit = CheckAudit(source=source, check=str(data.get("check", "")), omega=data.get("omega"))

    missing = REQUIRED_CHECK_KEYS - data.keys()
    if missing:
        audit.schema_errors.append(f"missing keys: {sorted(missing)}")
        return audit
    if "millis" in data:
        audit.schema_errors.append("timings present in a canonical report")

    items = data["items"]
    audit.items = len(items)
    for item in items:
        name = item.get("name", "?")
        missing = REQUIRED_ITEM_KEYS - item.keys()
        if missing:
            audit.schema_errors.append(f"{name}: missing keys {sorted(missing)}")
            continue
        if item["status"] not in VALID_STATUSES:
            audit.status_errors.append(f"{name}: unknown status {item['status']!r}")
        if not item["exact"]:
            audit.numeric_items += 1
            if item.get("tolerance") is None or item.get("seed") is None:
                audit.provenance_errors.append(f"{name}: numeric item without seed or tolerance")

    if not audit.schema_errors:
        expected = overall_status(i["status"] for i in items)
        if data["status"] != expected:
            audit.status_errors.append(f"status {data['status']!r} but items give {expected!r}")

    spec = CHECKS.get(audit.check)
    if spec is None:
        audit.range_errors.append(f"unknown check {audit.check!r}")
    elif spec.takes_omega != (audit.omega is not None):
        audit.range_errors.append(f"omega {audit.omega!r} does not fit {audit.check}")
    elif audit.omega is not None and not spec.min_omega <= audit.omega <= spec.large:
        audit.range_errors.append(f"omega {audit.omega} outside [{spec.min_omega}, {spec.large}]")

    return audit


def audit_directory(directory: Path) -> list[CheckAudit]:
    """Audit every ``*.json`` check file in a golden directory."""
    audits = []
    for path in sorted(directory.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            audits.append(CheckAudit(source=path.name, schema_errors=[f"invalid JSON: {exc}"]))
            continue
        audits.append(audit_check(data, source=path.name))
    logger.info("Audited %d report file(s) in %s", len(audits), directory)
    return audits


def audit_report(path: Path) -> list[CheckAudit]:
    """Audit a full ``report.json`` as written by ``--out``."""
    data = json.loads(path.read_text(encoding="utf-8"))
    return [audit_check(c, source=f"{path.name}#{n}") for n, c in enumerate(data.get("checks", []))]


def format_report(audits: list[CheckAudit]) -> str:
    lines = ["=" * 60, "VERIFICATION REPORT AUDIT", "=" * 60]
    for a in audits:
        where = a.check if a.omega is None else f"{a.check}[{a.omega}]"
        mark = "ok" if a.ok else "FAIL"
        lines.append(f"{mark:4} {where or a.source} ({a.items} items, {a.numeric_items} numeric)")
        for err in a.errors:
            lines.append(f"       - {err}")
    bad = sum(not a.ok for a in audits)
    lines += ["-" * 60, f"{len(audits) - bad}/{len(audits)} check report(s) consistent"]
    return "\n".join(lines)
