"""
Check registry and dispatcher.

Each check id maps to a verifier returning a CheckReport. Checks without an
ω run once per invocation; the others run once per requested ω inside their
supported range. Reports come back in registry order, then ω ascending,
whatever the number of workers.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .. import __version__
from ..comb import checksum_report, comb_identities
from ..reduce import check_recursions
from ..report import CheckReport, VerificationReport, error_item
from .context import CheckContext, UnsupportedCheckError
from .prop_s import verify_prop_s
from .qr import verify_final, verify_qr_expansion, verify_qr_positivity, verify_s_lemma
from .sections import verify_delta_scal, verify_lpos, verify_sym_ric
from .table1 import verify_table1

logger = logging.getLogger(__name__)

RECURSION_GAMMA_MAX = 12


@dataclass(frozen=True)
class CheckSpec:
    """Verifier plus its ω range; ``large`` is the opt-in ceiling."""

    verify: Callable[..., CheckReport]
    takes_omega: bool = True
    min_omega: int = 2
    max_omega: int = 4
    large: int = 6


CHECKS: dict[str, CheckSpec] = {
    "comb": CheckSpec(lambda ctx: comb_identities(), takes_omega=False),
    "recursions": CheckSpec(lambda ctx: check_recursions(RECURSION_GAMMA_MAX), takes_omega=False),
    "delta-scal": CheckSpec(verify_delta_scal, takes_omega=False),
    "checksum": CheckSpec(lambda omega, ctx: checksum_report(omega), max_omega=8, large=12),
    "sym-ric": CheckSpec(verify_sym_ric, min_omega=1),
    "lpos": CheckSpec(verify_lpos, min_omega=1),
    "table1": CheckSpec(verify_table1),
    "prop-s": CheckSpec(verify_prop_s, min_omega=1, max_omega=3, large=4),
    "s-lemma": CheckSpec(verify_s_lemma),
    "qr-expansion": CheckSpec(verify_qr_expansion),
    "qr-positivity": CheckSpec(verify_qr_positivity),
    "final-inequality": CheckSpec(verify_final),
}


def resolve_checks(names: Iterable[str]) -> list[str]:
    """Expand "all" and order by registry position."""
    names = list(names)
    if "all" in names:
        return list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise UnsupportedCheckError(f"Unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    return [n for n in CHECKS if n in names]


def validate(check: str, omega: int, ctx: CheckContext) -> None:
    spec = CHECKS[check]
    ceiling = spec.large if ctx.allow_large else spec.max_omega
    if not spec.min_omega <= omega <= ceiling:
        hint = "" if ctx.allow_large or omega > spec.large else " (enable large runs to go further)"
        raise UnsupportedCheckError(f"{check} supports omega in [{spec.min_omega}, {ceiling}], got {omega}{hint}")


def plan(checks: Iterable[str], omegas: Iterable[int], ctx: CheckContext) -> list[tuple[str, int | None]]:
    """(check, ω) tasks in report order.

    An explicitly named check outside its range raises before any work; under
    "all" such pairs are skipped.
    """
    checks = list(checks)
    explicit = "all" not in checks
    omegas = sorted(set(omegas))
    tasks: list[tuple[str, int | None]] = []
    for check in resolve_checks(checks):
        if not CHECKS[check].takes_omega:
            tasks.append((check, None))
            continue
        for omega in omegas:
            try:
                validate(check, omega, ctx)
            except UnsupportedCheckError:
                if explicit:
                    raise
                logger.warning("Skipping %s at omega=%d (outside its supported range)", check, omega)
                continue
            tasks.append((check, omega))
    return tasks


def run_check(check: str, omega: int | None, ctx: CheckContext) -> CheckReport:
    """Run one check; an exception becomes a failed ``error`` item."""
    spec = CHECKS[check]
    logger.info("Running %s%s", check, "" if omega is None else f" at omega={omega}")
    start = time.perf_counter()
    try:
        report = spec.verify(omega, ctx) if spec.takes_omega else spec.verify(ctx)
    except Exception as exc:
        logger.exception("Check %s (omega=%s) raised", check, omega)
        report = CheckReport.build(check, omega, "", [error_item(exc)])
    report.millis = (time.perf_counter() - start) * 1000
    logger.info("%s%s: %s in %.0f ms", check, "" if omega is None else f"[{omega}]", report.status, report.millis)
    return report


def _run_task(args: tuple[str, int | None, CheckContext]) -> CheckReport:
    return run_check(*args)


def run(checks: Iterable[str], omegas: Iterable[int], ctx: CheckContext, jobs: int = 1) -> VerificationReport:
    tasks = plan(checks, omegas, ctx)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_task, [(c, w, ctx) for c, w in tasks]))
    else:
        reports = [run_check(c, w, ctx) for c, w in tasks]
    return VerificationReport(version=__version__, seed=ctx.seed, checks=reports)


__all__ = ["CHECKS", "CheckContext", "UnsupportedCheckError", "plan", "resolve_checks", "run", "run_check"]
