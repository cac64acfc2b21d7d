"""
CLI runner for the verification suite.

Usage:
    cprover --check all --omega 2,3 --seed 7 --format both --out report/
    cprover --check checksum --omega 2
    cprover --check comb,checksum --omega 2-8 --items
    cprover --check table1,prop-s --omega 2 --jobs 4 --timings
    cprover --check all --omega 2 --golden
    cprover --check all --omega 2 --update-golden

Exit codes: 0 when every check passes, 1 on a verification failure or a
golden mismatch, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from .config import FORMATS, ConfigError, RunConfig, parse_int_list, parse_names
from .golden import compare_golden, update_golden
from .proofs import CHECKS, CheckContext, UnsupportedCheckError, run
from .report import VerificationReport
from .styles import STATUS_STYLE, THEME

console = Console(theme=THEME)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="cprover",
        description="Exact verification of the curvature-jet identities, with numeric oracle cross-checks",
    )
    parser.add_argument(
        "--check",
        "-c",
        help=f"Comma-separated check ids or 'all' ({', '.join(CHECKS)})",
    )
    parser.add_argument("--omega", "-w", help="Comma-separated omega values; ranges like 2-4 are accepted")
    parser.add_argument("--seed", type=int, default=None, help="Base seed for oracle samples")
    parser.add_argument("--samples", type=int, default=None, help="Oracle samples per omega (default: 20)")
    parser.add_argument("--dim", type=int, default=None, help="Dimension of the oracle jets (default: 4)")
    parser.add_argument("--format", choices=FORMATS, default=None, help="Report format written to --out")
    parser.add_argument("--out", "-o", default=None, help="Directory for report.json / report.md")
    parser.add_argument("--jobs", "-j", type=int, default=None, help="Worker processes for independent checks")
    parser.add_argument("--timings", action="store_true", default=None, help="Include timings in written reports")
    parser.add_argument("--allow-large", action="store_true", default=None, help="Permit the opt-in omega ceilings")
    parser.add_argument("--golden", action="store_true", help="Compare against the stored golden reports")
    parser.add_argument("--update-golden", action="store_true", help="Rewrite the golden reports from this run")
    parser.add_argument("--golden-dir", default=None, help="Golden directory (default: golden/v1)")
    parser.add_argument("--items", action="store_true", help="List every item with its expected and computed value")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Environment and config file first, flags on top."""
    base = RunConfig.from_env()
    return base.with_overrides(
        checks=parse_names(args.check) if args.check else None,
        omegas=parse_int_list("--omega", args.omega) if args.omega else None,
        seed=args.seed,
        samples=args.samples,
        dim=args.dim,
        format=args.format,
        out=Path(args.out) if args.out else None,
        jobs=args.jobs,
        timings=args.timings,
        allow_large=args.allow_large,
        golden_dir=Path(args.golden_dir) if args.golden_dir else None,
        log_level="DEBUG" if args.verbose else None,
    )


def write_reports(report: VerificationReport, config: RunConfig) -> list[Path]:
    if config.out is None:
        return []
    config.out.mkdir(parents=True, exist_ok=True)
    written = []
    if config.format in ("json", "both"):
        path = config.out / "report.json"
        path.write_text(report.to_json(timings=config.timings) + "\n", encoding="utf-8")
        written.append(path)
    if config.format in ("markdown", "both"):
        path = config.out / "report.md"
        path.write_text(report.to_markdown(timings=config.timings), encoding="utf-8")
        written.append(path)
    return written


def print_items(report: VerificationReport) -> None:
    for c in report.checks:
        where = c.check if c.omega is None else f"{c.check}[{c.omega}]"
        table = Table(title=escape(where), show_lines=False)
        table.add_column("Item", style="bold", no_wrap=True)
        table.add_column("Status", justify="center")
        table.add_column("Expected", overflow="fold")
        table.add_column("Computed", overflow="fold")
        for i in c.items:
            style = STATUS_STYLE[i.status]
            table.add_row(escape(i.name), f"[{style}]{i.status}[/{style}]", escape(i.expected), escape(i.computed))
        console.print()
        console.print(table)


def print_summary(report: VerificationReport, show_items: bool = False) -> None:
    """Status table per check; item values too for a single check or with ``--items``."""
    table = Table(title=f"cprover {report.version} (seed {report.seed})", show_lines=True)
    table.add_column("Check", style="bold")
    table.add_column("omega", justify="center")
    table.add_column("Status", justify="center")
    table.add_column("Items", justify="right")
    table.add_column("ms", justify="right")
    for c in report.checks:
        passed = sum(i.status == "pass" for i in c.items)
        style = STATUS_STYLE[c.status]
        table.add_row(
            c.check,
            "-" if c.omega is None else str(c.omega),
            f"[{style}]{c.status}[/{style}]",
            f"{passed}/{len(c.items)}",
            "" if c.millis is None else f"{c.millis:.0f}",
        )
    console.print()
    console.print(table)
    if show_items or len(report.checks) == 1:
        print_items(report)
    failures = [(c, i) for c in report.checks for i in c.failures()]
    if failures:
        console.print()
        console.print("[error]Failed items:[/error]")
        for c, i in failures:
            where = c.check if c.omega is None else f"{c.check}[{c.omega}]"
            console.print(f"  [error]•[/error] {escape(where)} {escape(i.name)}: expected {escape(i.expected)}, got {escape(i.computed)}")
            if i.detail:
                console.print(f"    [muted]{escape(i.detail)}[/muted]")


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(
        level=getattr(logging, config.log_level),
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
    )

    ctx = CheckContext(seed=config.seed, samples=config.samples, dim=config.dim, allow_large=config.allow_large)
    try:
        report = run(config.checks, config.omegas, ctx, jobs=config.jobs)
    except UnsupportedCheckError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print_summary(report, show_items=args.items)
    for path in write_reports(report, config):
        console.print(f"[info]Wrote {path}[/info]")

    code = EXIT_OK if report.passed else EXIT_FAILED
    if args.update_golden:
        written = update_golden(report, config.golden_dir)
        console.print(f"[success]Updated {len(written)} golden file(s) in {config.golden_dir}[/success]")
    elif args.golden:
        diffs = compare_golden(report, config.golden_dir)
        if diffs:
            console.print("[error]Golden mismatch:[/error]")
            for diff in diffs:
                console.print(f"  [error]•[/error] {diff}")
            code = EXIT_FAILED
        else:
            console.print(f"[success]Golden reports match ({config.golden_dir})[/success]")
    return code
