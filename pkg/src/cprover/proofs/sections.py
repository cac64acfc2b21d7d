"""
Checks on the Ricci symmetrization: the Laplacians of scal, the contracted
relation among T_ℓ, M_ℓ, N_ℓ, and the discriminant certificate bounding N_ℓ/T_ℓ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import sympy as sp

from ..comb import binom
from ..expr import Expression, Monomial, SymbolFactor, multiply
from ..oracle import DEFAULT_TOL, cross_check, eval_combination, eval_invariant
from ..reduce import BasisCombination, InvariantTag, reduce_to_basis
from ..report import CheckReport, ReportItem, bool_item, exact_item, not_applicable
from ..rules import HypothesisSet, simplify, tr_sym
from .context import CheckContext, expression_item, reduction_item
from .forms import final, modulo_sym_ric, ratio_interval
from .patterns import contracted_sym_ric, difference_tensor, gamma_parts, ric_no_multiplier, run, scal_laplacian

logger = logging.getLogger(__name__)

DELTA_SCAL_MAX_ELL = 3

T_, M_, N_ = sp.symbols("T M N")
t_, x_, k_ = sp.symbols("t x k")


# ============================================================================
# Laplacians of scal
# ============================================================================


def _ric_jet(n: int) -> Monomial:
    labels = run("p", n + 2)
    return Monomial(Fraction(1), (SymbolFactor("Ric", labels[2:], labels[:2]),))


def verify_delta_scal(ctx: CheckContext | None = None) -> CheckReport:
    """Tr Sym of ∇^m Ric and ∇^{2ℓ} scal, by the trace rules alone."""
    items: list[ReportItem] = []
    for ell in range(DELTA_SCAL_MAX_ELL + 1):
        labels = run("p", 2 * ell + 2)
        got = simplify(tr_sym(Expression.of(_ric_jet(2 * ell)), labels))
        coeff = 2 * factorial(2 * ell) * (ell + 1) ** 2
        expected = Expression.of(Monomial(Fraction(coeff), (scal_laplacian(ell),)))
        items.append(expression_item(f"tr-sym-ric[m={2 * ell}]", expected, got))

        labels = run("p", 2 * ell + 3)
        got = simplify(tr_sym(Expression.of(_ric_jet(2 * ell + 1)), labels))
        coeff = factorial(2 * ell + 2) * (ell + 2)
        expected = Expression.of(Monomial(Fraction(coeff), (scal_laplacian(ell, (labels[-1],)),)))
        items.append(expression_item(f"tr-sym-ric[m={2 * ell + 1}]", expected, got))

        if ell:
            labels = run("p", 2 * ell)
            scal = Expression.of(Monomial(Fraction(1), (SymbolFactor("Scal", labels, ()),)))
            got = simplify(tr_sym(scal, labels))
            expected = Expression.of(Monomial(Fraction(factorial(2 * ell)), (scal_laplacian(ell),)))
            items.append(expression_item(f"tr-sym-scal[m={2 * ell}]", expected, got))
    return CheckReport.build(
        "delta-scal",
        None,
        "Tr Sym ∇^{2ℓ}Ric = 2(2ℓ)!(ℓ+1)²Δ^ℓscal; Tr Sym ∇^{2ℓ+1}Ric = (2ℓ+2)!(ℓ+2)∇Δ^ℓscal; Tr Sym ∇^{2ℓ}scal = (2ℓ)!Δ^ℓscal",
        items,
    )


# ============================================================================
# Contracted Ricci symmetrization
# ============================================================================


def sym_ric_relation(omega: int, ell: int) -> BasisCombination:
    """2T_ℓ + (ω-2ℓ)((ω-2ℓ-1)N_ℓ + 4M_ℓ), without the tags that do not exist."""
    j = omega - 2 * ell
    out = final("T", ell) * 2
    if j >= 1:
        out = out + final("M", ell) * (4 * j)
    if j >= 2:
        out = out + final("N", ell) * (j * (j - 1))
    return out


def sym_ric_product(omega: int, ell: int, h: HypothesisSet) -> Expression:
    """The contracted symmetrization multiplied by ∇^{ω-2ℓ}Δ^ℓRic."""
    e, labels = contracted_sym_ric(omega, ell)
    e = simplify(e, h)
    return multiply(e, ric_no_multiplier(ell, labels))


def verify_sym_ric(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    items: list[ReportItem] = []
    for ell in range(omega // 2 + 1):
        product = sym_ric_product(omega, ell, h)
        got = reduce_to_basis(product, h)
        relation = sym_ric_relation(omega, ell)
        items.append(reduction_item(f"sym-ric[ell={ell}]", relation * factorial(omega), got))
        if ctx.oracle_enabled(omega):
            items.append(cross_check(f"oracle-reduction[ell={ell}]", product, got, ctx.jets(omega)))
            items.append(_vanishes_on(f"oracle-sym-ric[ell={ell}]", relation, ell, ctx.jets(omega, sym_ric=True)))
    return CheckReport.build(
        "sym-ric",
        omega,
        "2T_ℓ + (ω-2ℓ){(ω-2ℓ-1)N_ℓ + 4M_ℓ} = 0",
        items,
    )


def _vanishes_on(name: str, relation: BasisCombination, ell: int, jets) -> ReportItem:
    worst = 0.0
    for j in jets:
        scale = max(1.0, abs(eval_invariant(InvariantTag("T", ell), j).value))
        worst = max(worst, abs(eval_combination(relation, j)) / scale)
    return ReportItem(
        name=name,
        expected=f"0 within {DEFAULT_TOL:g}",
        computed=f"{worst:.1e}",
        exact=False,
        tolerance=DEFAULT_TOL,
        seed=jets[0].seed if jets else None,
        status="pass" if worst <= DEFAULT_TOL else "fail",
    )


# ============================================================================
# Discriminant certificate
# ============================================================================


@dataclass(frozen=True)
class QuadraticCertificate:
    """|Γ(t)|² = a t² + 2b t + c for one ℓ, and the bracket of its discriminant."""

    omega: int
    ell: int
    a: BasisCombination
    b: BasisCombination
    c: BasisCombination
    discriminant: sp.Expr

    @property
    def k(self) -> int:
        return self.omega - 2 * self.ell + 2


def to_sympy(comb: BasisCombination, ell: int) -> sp.Expr:
    symbols = {"T": T_, "M": M_, "N": N_}
    out = sp.Integer(0)
    for tag, c in comb.terms:
        if not tag.final or tag.ell != ell or tag.family not in symbols:
            raise ValueError(f"{tag} is not a basis element of level {ell}")
        out += sp.Rational(c.numerator, c.denominator) * symbols[tag.family]
    return out


def discriminant_bracket(k: int | sp.Symbol) -> sp.Expr:
    """(k-2)(k-3)N² - T{2T + (k-4)(k-5)N + 4(k-4)M}."""
    return (k - 2) * (k - 3) * N_**2 - T_ * (2 * T_ + (k - 4) * (k - 5) * N_ + 4 * (k - 4) * M_)


def ratio_polynomial(k: int | sp.Symbol) -> sp.Expr:
    """The bracket over T² in x = N/T once M is eliminated."""
    return (k - 2) * (k - 3) * x_**2 + 2 * (k - 4) * x_ - sp.Integer(4) / (k - 2)


def on_ratio(expr: sp.Expr, k: int | sp.Symbol) -> sp.Expr:
    """Substitute M = -(2T + (k-2)(k-3)N)/(4(k-2)) and N = xT, divide by T²."""
    m = -(2 * T_ + (k - 2) * (k - 3) * N_) / (4 * (k - 2))
    return sp.cancel(expr.subs(M_, m).subs(N_, x_ * T_) / T_**2)


def expected_square(omega: int, ell: int) -> tuple[BasisCombination, BasisCombination, BasisCombination]:
    k = omega - 2 * ell + 2
    c2 = binom(k - 2, 2)
    a = final("T", ell)
    b = final("N", ell) * c2
    c = final("T", ell) * c2 + final("N", ell) * (c2 * binom(k - 4, 2)) + final("M", ell) * (2 * c2 * (k - 4))
    return a, b, c


def certificate(omega: int, ell: int, h: HypothesisSet) -> QuadraticCertificate:
    lead, rest, _ = gamma_parts(omega, ell)
    a = reduce_to_basis(multiply(lead, lead), h)
    b = reduce_to_basis(multiply(lead, rest), h)
    c = reduce_to_basis(multiply(rest, rest), h)
    poly = to_sympy(a, ell) * t_**2 + 2 * to_sympy(b, ell) * t_ + to_sympy(c, ell)
    return QuadraticCertificate(omega, ell, a, b, c, sp.discriminant(poly, t_))


def symbolic_items() -> list[ReportItem]:
    """The discriminant-interval equivalence for symbolic k."""
    lhs = on_ratio(discriminant_bracket(k_), k_)
    ok = sp.cancel(lhs - ratio_polynomial(k_)) == 0
    items = [bool_item("interval-equivalence[k]", ok, str(ratio_polynomial(k_)), str(sp.factor(lhs)))]
    factored = ((k_ - 2) * x_ + 2) * ((k_ - 2) * (k_ - 3) * x_ - 2)
    ok = sp.expand(ratio_polynomial(k_) * (k_ - 2) - factored) == 0
    items.append(bool_item("interval-roots[k]", ok, "{-2/(k-2), 2/((k-2)(k-3))}", str(sp.factor(ratio_polynomial(k_)))))
    return items


def certificate_items(cert: QuadraticCertificate) -> list[ReportItem]:
    k, ell = cert.k, cert.ell
    tag = f"[ell={ell},k={k}]"
    a, b, c = expected_square(cert.omega, ell)
    items = [
        reduction_item(f"gamma-square-t2{tag}", a, cert.a),
        reduction_item(f"gamma-square-t1{tag}", b, cert.b),
        reduction_item(f"gamma-square-t0{tag}", c, cert.c),
    ]
    witness = 2 * binom(k - 2, 2) * discriminant_bracket(k)
    ok = sp.expand(cert.discriminant - witness) == 0
    items.append(bool_item(f"discriminant{tag}", ok, str(sp.expand(witness)), str(sp.expand(cert.discriminant))))

    lhs = on_ratio(discriminant_bracket(k), k)
    ok = sp.expand(lhs - ratio_polynomial(k)) == 0
    items.append(bool_item(f"interval-equivalence{tag}", ok, str(ratio_polynomial(k)), str(lhs)))

    lo, hi = ratio_interval(k)
    roots = sorted(sp.solve(ratio_polynomial(k), x_))
    expected = [sp.Rational(lo.numerator, lo.denominator), sp.Rational(hi.numerator, hi.denominator)]
    items.append(bool_item(f"interval{tag}", roots == expected, f"[{lo}, {hi}]", str(roots)))

    j = k - 2
    bound = [2 + j * x for x in (lo, hi)]
    items.append(
        bool_item(f"lemma-bound{tag}", all(v >= 0 for v in bound), "2 + (k-2)x >= 0 at both ends", ", ".join(map(str, bound)))
    )
    x_line = [Fraction(k - 1, k - 2) + Fraction(k - 1, 2) * x for x in (lo, hi)]
    items.append(
        bool_item(
            f"x-nonneg{tag}",
            all(v >= 0 for v in x_line),
            "(k-1)/(k-2) + (k-1)x/2 >= 0 at both ends",
            ", ".join(map(str, x_line)),
        )
    )
    return items


def _ratio_item(ell: int, k: int, jets) -> ReportItem:
    lo, hi = ratio_interval(k)
    inside = 0
    used = 0
    for j in jets:
        t = eval_invariant(InvariantTag("T", ell), j).value
        if t <= 1e-12:
            continue
        used += 1
        x = eval_invariant(InvariantTag("N", ell), j).value / t
        inside += float(lo) - DEFAULT_TOL <= x <= float(hi) + DEFAULT_TOL
    return ReportItem(
        name=f"oracle-interval[ell={ell}]",
        expected=f"{used}/{used} in [{lo}, {hi}]",
        computed=f"{inside}/{used}",
        exact=False,
        tolerance=DEFAULT_TOL,
        seed=jets[0].seed if jets else None,
        status="pass" if inside == used else "fail",
    )


def verify_lpos(omega: int, ctx: CheckContext) -> CheckReport:
    h = HypothesisSet(omega)
    items: list[ReportItem] = symbolic_items()
    for ell in range(omega // 2 + 1):
        j = omega - 2 * ell
        if j >= 1:
            diff = difference_tensor(omega, ell)
            square = multiply(diff, diff)
            got = reduce_to_basis(square, h)
            expected = final("T", ell) * 2 - final("M", ell) * 2
            items.append(reduction_item(f"sum-of-squares[ell={ell}]", expected, got))
        if j == 0:
            items.append(not_applicable(f"certificate[ell={ell}]", "k = 2: Γ(t) has no constant part and T_ℓ = 0"))
            continue
        if j == 1:
            reduced = modulo_sym_ric(final("T", ell) - final("M", ell) * 2, omega)
            items.append(exact_item(f"degenerate[ell={ell}]", final("T", ell) * 2, reduced))
            continue
        cert = certificate(omega, ell, h)
        logger.debug("certificate omega=%d ell=%d: disc %s", omega, ell, cert.discriminant)
        items += certificate_items(cert)
        if ctx.oracle_enabled(omega):
            _, rest, _ = gamma_parts(omega, ell)
            jets = ctx.jets(omega)
            items.append(cross_check(f"oracle-gamma-square[ell={ell}]", multiply(rest, rest), cert.c, jets))
            items.append(_ratio_item(ell, cert.k, ctx.jets(omega, sym_ric=True)))
    return CheckReport.build(
        "lpos",
        omega,
        "2T_ℓ + (ω-2ℓ)N_ℓ ≥ 0; -2/(k-2) ≤ N_ℓ/T_ℓ ≤ 2/((k-2)(k-3))",
        items,
    )
