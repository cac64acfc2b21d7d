"""
Golden reports: one canonical JSON file per (check, ω) under a versioned
directory, compared byte for byte.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .report import CheckReport, VerificationReport

logger = logging.getLogger(__name__)


@dataclass
class GoldenDiff:
    name: str
    reason: str
    line: int | None = None

    def __str__(self) -> str:
        where = f" (first difference at line {self.line})" if self.line else ""
        return f"{self.name}: {self.reason}{where}"


def file_name(report: CheckReport) -> str:
    return f"{report.check}.json" if report.omega is None else f"{report.check}-omega{report.omega}.json"


def canonical_text(report: CheckReport) -> str:
    """Timing-free serialization of one check."""
    return report.model_dump_json(indent=2, exclude={"millis": True, "items": {"__all__": {"millis"}}}) + "\n"


def golden_files(report: VerificationReport) -> dict[str, str]:
    return {file_name(c): canonical_text(c) for c in report.checks}


def _first_line_diff(a: str, b: str) -> int:
    la, lb = a.splitlines(), b.splitlines()
    for n, (x, y) in enumerate(zip(la, lb, strict=False), start=1):
        if x != y:
            return n
    return min(len(la), len(lb)) + 1


def compare_golden(report: VerificationReport, directory: Path) -> list[GoldenDiff]:
    """Differences between this run and the stored files for the checks it ran."""
    diffs = []
    for name, text in golden_files(report).items():
        path = directory / name
        if not path.is_file():
            diffs.append(GoldenDiff(name, "missing golden file"))
            continue
        stored = path.read_text(encoding="utf-8")
        if stored != text:
            diffs.append(GoldenDiff(name, "content differs", _first_line_diff(stored, text)))
    logger.info("Golden comparison against %s: %d difference(s)", directory, len(diffs))
    return diffs


def update_golden(report: VerificationReport, directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in golden_files(report).items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    logger.info("Wrote %d golden file(s) to %s", len(written), directory)
    return written
