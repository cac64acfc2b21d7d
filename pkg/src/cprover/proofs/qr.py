"""
Positivity of Tr Q(R), the three S identities and the final inequality.

All displays live in :mod:`.forms`; this module reduces the tensor sides,
compares them with the displays and runs the cone tests.
"""

from __future__ import annotations

import logging
from fractions import Fraction

from ..canon import canonical_key
from ..comb import c_list, coeffs
from ..expr import Expression, Monomial, SymbolFactor
from ..oracle import cross_check, eval_expression, positivity, property_items, witness_items
from ..reduce import BasisCombination, InvariantTag, formal_tags, normal_form, reduce_to_basis
from ..report import CAVEAT_ORACLE, CheckReport, ReportItem, bool_item, exact_item
from ..rules import HypothesisSet, second_bianchi
from .context import CheckContext, expression_item, reduction_item
from .forms import (
    TM,
    X,
    b5,
    b22,
    b_value,
    cone_failures,
    expand,
    final_excess,
    i1,
    i1_closed,
    i1_parts,
    i1_parts_closed,
    i2,
    i2_closed,
    i2_parts,
    i2_parts_closed,
    laplacian_margin,
    lower_bound,
    modulo_sym_ric,
    qr_display,
    qr_remainder,
    s_combination,
    s_lemma_rhs,
    sum_s,
    sym_ric_cone_failures,
    total,
)
from .patterns import ROWS, row_expression, run, s_expression, trq

logger = logging.getLogger(__name__)

R0 = InvariantTag("R", 0)


def _cone_item(name: str, failures: list[str]) -> ReportItem:
    return bool_item(name, not failures, "all cone coordinates >= 0", f"{len(failures)} negative", "; ".join(failures) or None)


def weighted_table_sum(omega: int) -> BasisCombination:
    """Σ u_k B_k over the table rows."""
    u = coeffs(omega).u
    return total(b_value(k, omega) * u[k] for k in ROWS)


# ============================================================================
# S identities
# ============================================================================


def s_reductions(omega: int, h: HypothesisSet) -> dict[int, BasisCombination]:
    out = {}
    for index in (2, 3, 4):
        out[index] = reduce_to_basis(s_expression(index, omega), h)
        logger.debug("S%d at omega=%d: %s", index, omega, out[index])
    return out


def skew_term(omega: int) -> Monomial:
    """∇_I R_{iabj} ∇_{K a i} Ric_{cj}: symmetric derivative slots against the skew pair (i, a)."""
    f1 = SymbolFactor("Riem", run("p", omega), ("i", "a", "b", "j"))
    f2 = SymbolFactor("Ric", run("q", omega - 2) + ("a", "i"), ("c", "j"))
    return Monomial(Fraction(1), (f1, f2))


def contracted_bianchi_item() -> ReportItem:
    """∇_a R_{iabj} = ∇_j Ric_{ib} - ∇_b Ric_{ij}."""
    lhs = Expression.of(Monomial(Fraction(1), (SymbolFactor("Riem", ("a",), ("i", "a", "b", "j")),)))
    rhs = Expression.of(
        Monomial(Fraction(1), (SymbolFactor("Ric", ("j",), ("i", "b")),)),
        Monomial(Fraction(-1), (SymbolFactor("Ric", ("b",), ("i", "j")),)),
    )
    return expression_item("contracted-bianchi", rhs, second_bianchi(lhs, "der-r1"))


def verify_s_lemma(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    reduced = s_reductions(omega, h)
    items: list[ReportItem] = []
    for index in (3, 2, 4):
        items.append(reduction_item(f"S{index}", normal_form(s_lemma_rhs(index, omega), h), reduced[index]))

    c = c_list(omega)
    weights = {1: c[0], 2: c[1], 3: c[2], 4: c[1], 5: c[2]}
    rows = Expression.zero()
    for k, w in weights.items():
        rows = rows + row_expression(k, omega).scale(Fraction(w, c[0]))
    items.append(
        reduction_item(
            "S2-intermediate",
            reduced[2].scale(Fraction(-1, 2 * omega + 2)),
            reduce_to_basis(rows, h),
        )
    )
    ck = canonical_key(skew_term(omega))
    items.append(bool_item("S4-skew-term", ck.is_zero, "0", "0" if ck.is_zero else ck.key))
    items.append(contracted_bianchi_item())

    if ctx.oracle_enabled(omega):
        for index in (2, 3, 4):
            items.append(cross_check(f"oracle[S{index}]", s_expression(index, omega), reduced[index], ctx.jets(omega)))
    return CheckReport.build(
        "s-lemma",
        omega,
        "S3 = 2(ω+1)(T^ω + 2ω³M^{ω-1}), -S2 and S4 displays",
        items,
    )


# ============================================================================
# Tr Q(R)
# ============================================================================


def verify_qr_expansion(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    w = omega
    items: list[ReportItem] = []
    table_sum = weighted_table_sum(omega)
    items.append(exact_item("sum-u-B=display", expand(qr_display(omega)), expand(table_sum)))

    tm_rhs = TM(w - 1) * Fraction(1, 2 * (w - 1) ** 2) - TM(w - 3, 1) * Fraction(w - 2, w - 1)
    items.append(exact_item("t-m", expand(tm_rhs), expand(TM(w - 2))))
    bb_rhs = b5(w) * Fraction(1, 2 * (w - 1) ** 2) - b22(w) * Fraction(w - 2, w - 1)
    items.append(exact_item("b=b", expand(bb_rhs), expand(X(w - 2))))

    for k in ROWS:
        bad = cone_failures(expand(b_value(k, omega)))
        items.append(_cone_item(f"B{k}>=0", bad))

    if ctx.oracle_enabled(omega):
        reduction = normal_form(qr_display(omega), h)
        items.append(cross_check("oracle[trq]", trq(omega), reduction, ctx.jets(omega)))
        corrupted = trq(omega) + row_expression(5, omega)
        probe = cross_check("oracle[trq+A5]", corrupted, reduction, ctx.jets(omega))
        items.append(bool_item("negative-control[u5+1]", probe.status == "fail", "fail", probe.status, probe.detail))
    return CheckReport.build("qr-expansion", omega, "Tr Q(R) = Σ u_k B_k, grouped", items)


def verify_qr_positivity(omega: int, ctx: CheckContext) -> CheckReport:
    display = expand(qr_display(omega))
    bound = expand(lower_bound(omega))
    remainder = expand(qr_remainder(omega))
    items = [
        exact_item("display-lower-bound", remainder, display - bound),
        _cone_item("lower-bound-cone", cone_failures(bound)),
        _cone_item("remainder-cone", cone_failures(remainder)),
    ]
    r0 = remainder.coefficient(R0)
    items.append(bool_item("R0-strict", r0 > 0, "> 0", str(r0), detail="R_0 = |∇^ω Riem|² > 0 by the choice of ω"))
    notes = []
    if ctx.oracle_enabled(omega):
        jets = ctx.jets(omega)
        items.append(positivity("oracle-trq>0", [eval_expression(trq(omega), j).value for j in jets], floor=0.0))
        items += witness_items(jets, formal_tags(omega))
        items += property_items(jets[0])
        notes.append(CAVEAT_ORACLE)
    return CheckReport.build("qr-positivity", omega, "Tr Q(R) > lower bound", items, notes=notes)


# ============================================================================
# Final inequality
# ============================================================================


def verify_final(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    w = omega
    items: list[ReportItem] = []
    items.append(exact_item("sum-S", sum_s(w), s_combination(w)))

    reduced = s_reductions(omega, h)
    s_reduced = (reduced[2] + reduced[3]) * (w + 3) + reduced[4] * w
    items.append(reduction_item("sum-S-reduced", normal_form(sum_s(w), h), s_reduced * (2 * (w + 3))))

    for name, parts, closed in (("I1", i1_parts(w), i1_parts_closed(w)), ("I2", i2_parts(w), i2_parts_closed(w))):
        for n, (part, form) in enumerate(zip(parts, closed, strict=True), start=1):
            items.append(
                exact_item(
                    f"{name}-part[{n}]",
                    modulo_sym_ric(form, w),
                    modulo_sym_ric(expand(part), w),
                    detail="modulo the Ricci symmetrization relation",
                )
            )
    items.append(exact_item("I1-closed", modulo_sym_ric(i1_closed(w), w), modulo_sym_ric(expand(i1(w)), w)))
    items.append(exact_item("I2-closed", modulo_sym_ric(i2_closed(w), w), modulo_sym_ric(expand(i2(w)), w)))

    margin = laplacian_margin(w)
    items.append(_cone_item("I2>=margin", sym_ric_cone_failures(expand(i2(w)) - margin, w)))
    items.append(_cone_item("I1>=-margin", sym_ric_cone_failures(expand(i1(w)) + margin, w)))

    excess = expand(lower_bound(w) + sum_s(w) - (i1(w) + i2(w)) * (4 * (w + 1)))
    items.append(exact_item("final-excess", expand(final_excess(w)), excess))
    rest = expand(qr_remainder(w) + final_excess(w))
    items.append(_cone_item("I-4(w+1)(I1+I2)", cone_failures(rest)))
    items.append(bool_item("I-strict", rest.coefficient(R0) > 0, "> 0", str(rest.coefficient(R0))))

    if ctx.oracle_enabled(omega):
        s_part = (s_expression(2, w) + s_expression(3, w)).scale(w + 3) + s_expression(4, w).scale(w)
        total_i = trq(w) + s_part.scale(2 * (w + 3))
        values = [eval_expression(total_i, j).value for j in ctx.jets(omega, sym_ric=True)]
        items.append(positivity("oracle-I>0", values, floor=0.0))
    return CheckReport.build(
        "final-inequality",
        omega,
        "I = Tr Q(R) + 2(ω+3)[(ω+3)(S2+S3) + ωS4] > 4(ω+1)(I1 + I2) >= 0",
        items,
    )
