"""
Verification report models and renderers.

Exact values travel as strings (``str(Fraction)`` or combination text) so
that serialized reports are byte-identical across runs. Timings are recorded
but excluded from serialization unless explicitly requested.
"""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, Field

Status = Literal["pass", "fail", "not-applicable"]

CAVEAT_ORACLE = (
    "Oracle jets satisfy the pointwise algebraic constraints only; "
    "realizability by a genuine metric is not checked and is irrelevant to the identities."
)


class ReportItem(BaseModel):
    name: str
    expected: str
    computed: str
    exact: bool = True
    status: Status = "pass"
    tolerance: float | None = None
    seed: int | None = None
    detail: str | None = None
    millis: float | None = None


class CheckReport(BaseModel):
    check: str
    omega: int | None = None
    status: Status = "pass"
    anchor: str = ""
    items: list[ReportItem] = Field(default_factory=list)
    stats: dict[str, int] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    millis: float | None = None

    @classmethod
    def build(
        cls,
        check: str,
        omega: int | None,
        anchor: str,
        items: Iterable[ReportItem],
        stats: dict[str, int] | None = None,
        notes: Iterable[str] = (),
    ) -> CheckReport:
        items = list(items)
        return cls(
            check=check,
            omega=omega,
            status=overall_status(i.status for i in items),
            anchor=anchor,
            items=items,
            stats=dict(stats or {}),
            notes=list(notes),
        )

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def failures(self) -> list[ReportItem]:
        return [i for i in self.items if i.status == "fail"]


class VerificationReport(BaseModel):
    version: str
    seed: int
    checks: list[CheckReport] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, timings: bool = False) -> str:
        if timings:
            return self.model_dump_json(indent=2)
        exclude = {"checks": {"__all__": {"millis": True, "items": {"__all__": {"millis"}}}}}
        return self.model_dump_json(indent=2, exclude=exclude)

    def to_markdown(self, timings: bool = False) -> str:
        lines = [f"# Verification report (cprover {self.version}, seed {self.seed})", ""]
        for c in self.checks:
            header = f"## {c.check}" + (f" (omega={c.omega})" if c.omega is not None else "")
            lines += [header, "", f"Status: **{c.status}**", "", f"> {c.anchor}", ""]
            cols = ["name", "status", "expected", "computed"] + (["ms"] if timings else [])
            lines.append("| " + " | ".join(cols) + " |")
            lines.append("|" + "---|" * len(cols))
            for i in c.items:
                row = [i.name, i.status, _cell(i.expected), _cell(i.computed)]
                if timings:
                    row.append("" if i.millis is None else f"{i.millis:.1f}")
                lines.append("| " + " | ".join(row) + " |")
            if c.stats:
                lines += ["", "Stats: " + ", ".join(f"{k}={v}" for k, v in sorted(c.stats.items()))]
            for note in c.notes:
                lines += ["", f"Note: {note}"]
            lines.append("")
        return "\n".join(lines)


def _cell(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def overall_status(statuses: Iterable[Status]) -> Status:
    seen = set(statuses)
    if "fail" in seen:
        return "fail"
    if seen and seen <= {"not-applicable"}:
        return "not-applicable"
    return "pass"


def exact_item(name: str, expected: object, computed: object, detail: str | None = None) -> ReportItem:
    """Item comparing two exact values (ints, Fractions or combinations) by equality."""
    ok = _normalize(expected) == _normalize(computed)
    return ReportItem(
        name=name,
        expected=str(expected),
        computed=str(computed),
        status="pass" if ok else "fail",
        detail=detail,
    )


def _normalize(value: object) -> object:
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return value


def bool_item(name: str, ok: bool, expected: str, computed: str, detail: str | None = None) -> ReportItem:
    return ReportItem(name=name, expected=expected, computed=computed, status="pass" if ok else "fail", detail=detail)


def numeric_item(name: str, expected: float, computed: float, tolerance: float, seed: int | None = None) -> ReportItem:
    scale = max(1.0, abs(expected))
    ok = abs(expected - computed) <= tolerance * scale
    return ReportItem(
        name=name,
        expected=f"{expected:.12g}",
        computed=f"{computed:.12g}",
        exact=False,
        tolerance=tolerance,
        seed=seed,
        status="pass" if ok else "fail",
    )


def not_applicable(name: str, reason: str) -> ReportItem:
    return ReportItem(name=name, expected="-", computed="-", status="not-applicable", detail=reason)


def error_item(exc: BaseException) -> ReportItem:
    return ReportItem(name="error", expected="no exception", computed=f"{type(exc).__name__}: {exc}", status="fail")
