"""
The 27 contraction types of Tr Q(R): multiplicities by direct enumeration,
A_k = B_k row by row, and the auxiliary sequence U_γ behind A_5.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from ..canon import canonical_key, collect
from ..comb import all_pairings, checksum, coeffs
from ..expr import Expression, Monomial, SymbolFactor
from ..oracle import cross_check
from ..reduce import BasisCombination, InvariantTag, RelationSystem, normal_form, reduce_to_basis
from ..report import CheckReport, ReportItem, bool_item, exact_item, not_applicable
from ..rules import HypothesisSet, LinearRelation, first_bianchi_closure
from .context import CheckContext, expression_item, reduction_item
from .forms import X, b5, b_value, expand, u_closed
from .patterns import BODY_SLOTS, ROWS, row_expression, trq, trq_monomial, type_monomial, u_sequence

logger = logging.getLogger(__name__)


# ============================================================================
# Scheme enumeration
# ============================================================================


@dataclass
class SchemeTally:
    """Signed Tr Sym weight per contraction class of Tr Q(R).

    A scheme fixes the pairs touching a, b, c, d; the remaining 2s labels
    are left to an inner Tr Sym, so each scheme contributes
    2^{ω+2}(ω+2)!·count/(2s)! times the class representative.
    """

    weights: dict[str, Fraction] = field(default_factory=dict)
    examples: dict[str, Monomial] = field(default_factory=dict)
    schemes: int = 0
    zero: int = 0
    pairings: int = 0


def scheme_tally(omega: int) -> SchemeTally:
    mono, labels = trq_monomial(omega)
    body = set(BODY_SLOTS)
    counts: Counter[frozenset[tuple[str, str]]] = Counter()
    for pairing in all_pairings(labels):
        counts[frozenset(p for p in pairing if body & set(p))] += 1
    m = omega + 2
    tally = SchemeTally(schemes=len(counts), pairings=sum(counts.values()))
    for scheme, count in sorted(counts.items(), key=lambda sc: sorted(sc[0])):
        mapping: dict[str, str] = {}
        for n, (x, y) in enumerate(sorted(scheme)):
            mapping[x] = mapping[y] = f"_s{n}"
        contracted = mono.relabel(mapping)
        ck = canonical_key(contracted, anonymous_free=True)
        if ck.is_zero:
            tally.zero += 1
            continue
        untouched = len(labels) - 2 * len(scheme)
        w = Fraction(2**m * factorial(m) * count, factorial(untouched))
        tally.weights[ck.key] = tally.weights.get(ck.key, Fraction(0)) + ck.sign * w
        tally.examples.setdefault(ck.key, contracted)
    logger.info("omega=%d: %d schemes in %d classes (%d zero)", omega, tally.schemes, len(tally.weights), tally.zero)
    return tally


def row_classes(omega: int) -> dict[str, list[tuple[int, int]]]:
    """Anonymous class -> [(row, sign)] for the rows that occur at ω."""
    out: dict[str, list[tuple[int, int]]] = {}
    for k in ROWS:
        raw = type_monomial(k, omega)
        if raw is None:
            continue
        ck = canonical_key(raw[0], anonymous_free=True)
        out.setdefault(ck.key, []).append((k, ck.sign))
    return out


def multiplicity_items(omega: int) -> tuple[list[ReportItem], dict[str, int]]:
    u = coeffs(omega).u
    tally = scheme_tally(omega)
    classes = row_classes(omega)
    items = []
    for key, rows in sorted(classes.items(), key=lambda kr: kr[1][0][0]):
        name = "+".join(f"A{k}" for k, _ in rows)
        expected = sum(sign * u[k] for k, sign in rows)
        items.append(exact_item(f"multiplicity[{name}]", expected, tally.weights.get(key, Fraction(0))))
    unmatched = [k for k in tally.weights if k not in classes and tally.weights[k] != 0]
    items.append(
        bool_item(
            "unmatched-schemes",
            not unmatched,
            "0",
            str(len(unmatched)),
            detail=tally.examples[unmatched[0]].to_text() if unmatched else None,
        )
    )
    sizes = {k: len(raw[1]) for k in ROWS if (raw := type_monomial(k, omega)) is not None}
    total = sum(u[k] * factorial(s) for k, s in sizes.items())
    items.append(exact_item("scheme-count", factorial(2 * omega + 4), total))
    stats = {"schemes": tally.schemes, "classes": len(tally.weights), "zero-schemes": tally.zero, "pairings": tally.pairings}
    return items, stats


# ============================================================================
# Small identities at ω = 1
# ============================================================================


class FirstBianchiSystem(RelationSystem):
    """Elimination closed under the cyclic identity only."""

    def __init__(self, omega: int):
        super().__init__(omega, vanish_scal=False)

    def _relations_at(self, key: str) -> list[LinearRelation]:
        return first_bianchi_closure([self.representatives[key]])


def _pair(first: tuple[str, ...], body1: str, second: tuple[str, ...], body2: str) -> Expression:
    f1 = SymbolFactor("Riem", first, tuple(body1))
    f2 = SymbolFactor("Riem", second, tuple(body2))
    return Expression.of(Monomial(Fraction(1), (f1, f2)))


def low_order_items() -> list[ReportItem]:
    """∇_cR_{iabj}∇_cR_{ibaj} = ∇_cR_{iabj}∇_bR_{iacj} = ½|∇Riem|²."""
    h = HypothesisSet(1)
    half = BasisCombination.single(InvariantTag("R", 0), Fraction(1, 2))
    a = _pair(("c",), "iabj", ("c",), "ibaj")
    got_a = FirstBianchiSystem(1).reduce(collect(a))
    b = _pair(("c",), "iabj", ("b",), "iacj")
    got_b = reduce_to_basis(b, h)
    return [
        exact_item("inv-A[omega=1]", half, got_a, detail="first Bianchi identity only"),
        exact_item("inv-B[omega=1]", half, got_b),
    ]


# ============================================================================
# U sequence
# ============================================================================


def u_sequence_items(omega: int, h: HypothesisSet) -> list[ReportItem]:
    items = []
    for gamma in range(2, omega + 1):
        closed = u_closed(gamma)
        got = reduce_to_basis(u_sequence(gamma, omega), h)
        items.append(reduction_item(f"u-closed[gamma={gamma}]", normal_form(closed, h), got))
        previous = u_closed(gamma - 1) * (2 * (gamma - 1) * (gamma - 2)) if gamma > 2 else BasisCombination.zero()
        step = previous + X(gamma - 2) * (2 * (gamma - 1) ** 2)
        items.append(exact_item(f"u-recursion[gamma={gamma}]", step, closed))
    items.append(exact_item("u-top=B5", b5(omega), expand(u_closed(omega))))
    items.append(expression_item("u-top=A5", row_expression(5, omega), u_sequence(omega, omega)))
    return items


# ============================================================================
# Check
# ============================================================================


def verify_table1(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    u = coeffs(omega).u
    items, stats = multiplicity_items(omega)
    lhs, rhs = checksum(omega)
    items.append(exact_item("checksum", rhs, lhs))

    combined = Expression.zero()
    for k in ROWS:
        if type_monomial(k, omega) is None:
            items.append(not_applicable(f"A{k}=B{k}", f"row {k} does not occur at omega={omega}"))
            continue
        a_k = row_expression(k, omega)
        combined = combined + a_k.scale(u[k])
        expected = normal_form(b_value(k, omega), h)
        got = reduce_to_basis(a_k, h)
        items.append(reduction_item(f"A{k}=B{k}", expected, got))
        if ctx.oracle_enabled(omega):
            items.append(cross_check(f"oracle[A{k}]", a_k, expected, ctx.jets(omega)))
        logger.debug("row %d done at omega=%d", k, omega)
    items.append(expression_item("trq-decomposition", combined, trq(omega)))
    items += u_sequence_items(omega, h)
    items += low_order_items()
    return CheckReport.build(
        "table1",
        omega,
        "Tr Q(R) = Σ u_k A_k and A_k = B_k",
        items,
        stats=stats,
    )

