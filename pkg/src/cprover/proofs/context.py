"""Run parameters shared by the verifiers, the oracle samples they draw and item helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..canon import collect, equal, first_difference
from ..expr import Expression
from ..oracle import JetSample, samples
from ..reduce import BasisCombination
from ..report import ReportItem, bool_item, exact_item
from ..rules import HypothesisSet

# Oracle sub-checks run up to this ω; the jet has n^{ω+4} components.
ORACLE_MAX_OMEGA = 2


class UnsupportedCheckError(ValueError):
    """The requested (check, ω) combination is outside the supported table."""


@dataclass(frozen=True)
class CheckContext:
    seed: int = 20240101
    samples: int = 20
    dim: int = 4
    allow_large: bool = False
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def oracle_enabled(self, omega: int) -> bool:
        return self.samples > 0 and omega <= ORACLE_MAX_OMEGA

    def jets(self, omega: int, sym_ric: bool = False) -> list[JetSample]:
        """Oracle samples for ω, drawn once per context."""
        key = (omega, sym_ric)
        if key not in self._cache:
            h = HypothesisSet(omega, sym_ric_vanish=sym_ric)
            self._cache[key] = samples(self.dim, omega, self.seed, self.samples, h)
        return self._cache[key]


def expression_item(name: str, expected: Expression, computed: Expression, h: HypothesisSet | None = None) -> ReportItem:
    """Exact comparison of two expressions by canonical collection."""
    ok = equal(expected, computed, h)
    detail = None if ok else f"first differing key: {first_difference(expected, computed)}"
    return bool_item(name, ok, collect(expected, h).to_text(), collect(computed, h).to_text(), detail)


def reduction_item(name: str, expected: BasisCombination, computed: BasisCombination) -> ReportItem:
    """Exact comparison of two reductions; a failure names the first differing tag."""
    item = exact_item(name, expected, computed)
    if item.status == "fail":
        diff = computed - expected
        tag, c = diff.terms[0]
        item.detail = f"first differing coefficient: {tag} off by {c}"
    return item
