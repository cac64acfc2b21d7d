"""
Closed-form combinations appearing in the proof, and the cone tests applied to them.

Displays are written over partially traced tags (``T^γ``, ``T^γ_1``,
``T11^γ``, ...) and compared after :func:`expand`, which keeps R_ℓ formal.
The cone of a fixed ℓ is spanned by T_ℓ, T_ℓ - M_ℓ and T_ℓ - 2M_ℓ + N_ℓ,
each nonnegative; under the Ricci symmetrization hypothesis M_ℓ is
eliminated instead and the remainder is tested on the certified N_ℓ/T_ℓ
interval.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from ..comb import c_list, d, e
from ..reduce import BasisCombination, InvariantTag, expand_gamma

F = Fraction


def total(parts: Iterable[BasisCombination]) -> BasisCombination:
    out = BasisCombination.zero()
    for p in parts:
        out = out + p
    return out


def expand(comb: BasisCombination) -> BasisCombination:
    """Every tag expanded to final tags; R_ℓ stays formal."""
    return total(expand_gamma(tag).scale(c) for tag, c in comb.terms)


# ============================================================================
# Partially traced families
# ============================================================================


def _tag(family: str, gamma: int, ell: int) -> BasisCombination:
    if gamma < 0:
        return BasisCombination.zero()
    return BasisCombination.single(InvariantTag(family, ell, gamma))


def T(gamma: int, ell: int = 0) -> BasisCombination:
    return _tag("T", gamma, ell)


def M(gamma: int, ell: int = 0) -> BasisCombination:
    return _tag("M", gamma, ell)


def N(gamma: int, ell: int = 0) -> BasisCombination:
    return _tag("N", gamma, ell)


def R(gamma: int) -> BasisCombination:
    return _tag("R", gamma, 0)


def T11(gamma: int) -> BasisCombination:
    return _tag("T11", gamma, 1)


def TM(gamma: int, ell: int = 0) -> BasisCombination:
    """T^γ_ℓ - M^γ_ℓ."""
    return T(gamma, ell) - M(gamma, ell)


def X(gamma: int, ell: int = 0) -> BasisCombination:
    """T^γ_ℓ - 2M^γ_ℓ + N^γ_ℓ."""
    return T(gamma, ell) - M(gamma, ell) * 2 + N(gamma, ell)


def final(family: str, ell: int) -> BasisCombination:
    return BasisCombination.single(InvariantTag(family, ell))


def x_final(ell: int) -> BasisCombination:
    return final("T", ell) - final("M", ell) * 2 + final("N", ell)


def over_ell(top: int, term: Callable[[int], BasisCombination], start: int = 0) -> BasisCombination:
    """Σ_{start ≤ ℓ ≤ top} term(ℓ); empty when top < start."""
    return total(term(ell) for ell in range(start, top + 1))


# ============================================================================
# Table values B_k
# ============================================================================


def b5(omega: int) -> BasisCombination:
    return over_ell((omega - 2) // 2, lambda ell: x_final(ell) * e(omega, ell))


def b19(omega: int) -> BasisCombination:
    if omega < 4:
        return BasisCombination.zero()
    denom = (omega - 1) * (omega - 2) * (omega - 3)
    return over_ell((omega - 2) // 2, lambda ell: x_final(ell) * (ell * e(omega, ell) / denom))


def b22(omega: int) -> BasisCombination:
    return over_ell((omega - 3) // 2, lambda ell: x_final(ell) * e(omega - 1, ell))


def b_value(k: int, omega: int) -> BasisCombination:
    w = omega
    b2 = TM(w - 1)
    b9 = R(w - 1) * F(1, 2)
    b20 = TM(w - 3, 1)
    b25 = TM(w - 2)
    table: dict[int, Callable[[], BasisCombination]] = {
        1: lambda: T(w),
        2: lambda: b2,
        3: lambda: T(w - 2, 1),
        4: lambda: b2,
        5: lambda: b5(w),
        6: lambda: R(w),
        7: lambda: b2 * 2,
        8: lambda: b5(w) * 2,
        9: lambda: b9,
        10: lambda: R(w) * F(1, 2),
        11: lambda: b2,
        12: lambda: b5(w),
        13: lambda: b9 * F(1, 2),
        14: lambda: b5(w),
        15: lambda: b5(w) * 2,
        16: lambda: b9,
        17: lambda: b2 * 2,
        18: lambda: T11(w - 2),
        19: lambda: b19(w),
        20: lambda: b20,
        21: lambda: b20,
        22: lambda: b22(w),
        23: lambda: b22(w),
        24: lambda: R(w - 2) * F(1, 2),
        25: lambda: b25,
        26: lambda: X(w - 2),
        27: lambda: b25,
    }
    if k not in table:
        raise ValueError(f"No table row {k}")
    return table[k]()


def u_closed(gamma: int) -> BasisCombination:
    """Closed form of U_γ: (γ-1)!(γ-2)! Σ_k 2^{γ-k-1}(k+1)/(k!)² X^k."""
    pre = factorial(gamma - 1) * factorial(gamma - 2)
    return total(X(k) * F(pre * 2 ** (gamma - k - 1) * (k + 1), factorial(k) ** 2) for k in range(gamma - 1))


# ============================================================================
# Displays of the positivity argument
# ============================================================================


def qr_display(omega: int) -> BasisCombination:
    """Grouped form of Σ u_k B_k."""
    w = omega
    inner = (
        R(w) * F(3, 2)
        + R(w - 1) * (3 * w**3)
        + R(w - 2) * (2 * w**3 * (w - 1) ** 3)
        + T(w)
        + T(w - 2, 1) * (4 * w**2 * (w - 1))
        + T11(w - 2) * (4 * w**3 * (w - 1) ** 3)
        + TM(w - 1) * (20 * w**3)
        + TM(w - 2) * (8 * w**3 * (w - 1) ** 3)
        + TM(w - 3, 1) * (16 * w**3 * (w - 1) ** 2 * (w - 2))
        + b5(w) * (28 * w**2 * (w - 1))
        + (b19(w) * ((w - 2) * (w - 3)) + b22(w) * (2 * w * (w - 2)) + X(w - 2) * (w * (w - 1))) * (8 * w**2 * (w - 1) ** 2)
    )
    return inner * c_list(w)[0]


def lower_bound(omega: int) -> BasisCombination:
    """The combination Tr Q(R) strictly dominates."""
    w = omega
    inner = (
        T(w)
        + T(w - 2, 1) * (4 * w**2 * (w - 1))
        + T11(w - 2) * (4 * w**3 * (w - 1) ** 3)
        + TM(w - 1) * (4 * w**3 * (w + 4))
        + TM(w - 3, 1) * (8 * w**3 * (w - 1) ** 2 * (w - 2))
        + b5(w) * (4 * w**2 * (w - 1) * (w + 7))
    )
    return inner * c_list(w)[0]


def qr_remainder(omega: int) -> BasisCombination:
    """Tr Q(R) minus the lower bound."""
    w = omega
    inner = (
        R(w) * F(3, 2)
        + R(w - 1) * (3 * w**3)
        + R(w - 2) * (2 * w**3 * (w - 1) ** 3)
        + b19(w) * (8 * w**2 * (w - 1) ** 2 * (w - 2) * (w - 3))
        + b22(w) * (8 * w**3 * (w - 1) ** 2 * (w - 2))
    )
    return inner * c_list(w)[0]


def s_lemma_rhs(index: int, omega: int) -> BasisCombination:
    w = omega
    if index == 2:
        inner = T(w) + TM(w - 1) * (4 * w**3) + T(w - 2, 1) * (2 * w**2 * (w - 1)) + b5(w) * (2 * w**2 * (w - 1))
        return inner * (-2 * (w + 1))
    if index == 3:
        return (T(w) + M(w - 1) * (2 * w**3)) * (2 * (w + 1))
    if index == 4:
        inner = (
            T(w - 1) * w
            - M(w - 1) * (w * (w + 1))
            + b5(w) * (w - 1)
            + N(w - 2) * (2 * w * (w - 1) ** 3)
        )
        return inner * (4 * w * (w + 1))
    raise ValueError(f"No S_{index}")


def s_combination(omega: int) -> BasisCombination:
    """2(ω+3)[(ω+3)(S2+S3) + ωS4] from the three reduced forms."""
    w = omega
    inner = (s_lemma_rhs(2, w) + s_lemma_rhs(3, w)) * (w + 3) + s_lemma_rhs(4, w) * w
    return inner * (2 * (w + 3))


def sum_s(omega: int) -> BasisCombination:
    w = omega
    inner = (
        TM(w - 1) * (-2 * w * (2 * w + 5))
        + T(w - 2, 1) * (-2 * (w - 1) * (w + 3))
        + b5(w) * (-2 * (w - 1) * (w + 2))
        + M(w - 1) * (6 * w)
        + N(w - 2) * (4 * w * (w - 1) ** 3)
    )
    return inner * (4 * (w + 3) * (w + 1) * w**2)


def i1_parts(omega: int) -> tuple[BasisCombination, BasisCombination, BasisCombination]:
    w = omega
    pre = 2 * w**2 * (w - 1)
    return (
        T11(w - 2) * (pre * 2 * w * (w + 2) * (w - 1) ** 2),
        T(w - 2, 1) * (-pre * (w**2 + 4 * w + 5)),
        TM(w - 3, 1) * (pre * 4 * w * (w + 2) * (w - 1) * (w - 2)),
    )


def i1(omega: int) -> BasisCombination:
    return total(i1_parts(omega))


def i2_parts(omega: int) -> tuple[BasisCombination, BasisCombination, BasisCombination]:
    """(ω+3){6ω³M^{ω-1} + 4ω³(ω-1)³N^{ω-2}}, (ω+2)T^ω and 2ω³(ω+1)(T-M)^{ω-1}."""
    w = omega
    return (
        (M(w - 1) * (6 * w**3) + N(w - 2) * (4 * w**3 * (w - 1) ** 3)) * (w + 3),
        T(w) * (w + 2),
        TM(w - 1) * (2 * w**3 * (w + 1)),
    )


def i2(omega: int) -> BasisCombination:
    return total(i2_parts(omega))


def i2_parts_closed(omega: int) -> tuple[BasisCombination, BasisCombination, BasisCombination]:
    w = omega
    return (
        over_ell((w - 1) // 2, lambda ell: (final("T", ell) * -2 - final("M", ell) * (w - 2 * ell)) * (d(w, ell) * (w + 3))),
        over_ell(w // 2, lambda ell: final("T", ell) * (d(w, ell) * (w + 2))),
        over_ell((w - 1) // 2, lambda ell: (final("T", ell) - final("M", ell)) * (d(w, ell) * (w + 1) * (w - 2 * ell))),
    )


def i1_parts_closed(omega: int) -> tuple[BasisCombination, BasisCombination, BasisCombination]:
    w = omega
    return (
        over_ell(w // 2, lambda ell: final("T", ell) * (4 * (w + 2) * ell**2 * d(w, ell)), start=1),
        over_ell(w // 2, lambda ell: final("T", ell) * (-2 * ell * (w**2 + 4 * w + 5) * d(w, ell)), start=1),
        over_ell(
            (w - 1) // 2,
            lambda ell: (final("T", ell) - final("M", ell)) * (4 * (w + 2) * (w - 2 * ell) * ell * d(w, ell)),
            start=1,
        ),
    )


def i2_closed(omega: int) -> BasisCombination:
    w = omega

    def term(ell: int) -> BasisCombination:
        j = w - 2 * ell
        t = final("T", ell) * ((w + 1) * j - (w + 4))
        return (t - final("M", ell) * (2 * j * (w + 2)) if j else t) * d(w, ell)

    return over_ell(w // 2, term)


def i1_closed(omega: int) -> BasisCombination:
    w = omega

    def term(ell: int) -> BasisCombination:
        j = w - 2 * ell
        inner = final("T", ell) * (w * j - 4 * ell - 5) - final("M", ell) * (2 * j * (w + 2))
        return inner * (2 * ell * d(w, ell))

    return over_ell((w - 1) // 2, term, start=1)


def laplacian_margin(omega: int) -> BasisCombination:
    """Σ 2ℓ d^ω_ℓ T_ℓ, the amount I2 exceeds and I1 may fall short of."""
    return over_ell(omega // 2, lambda ell: final("T", ell) * (2 * ell * d(omega, ell)), start=1)


def final_excess(omega: int) -> BasisCombination:
    """(Tr Q(R) lower bound + sum S) - 4(ω+1)(I1 + I2)."""
    w = omega
    return b5(w) * (8 * w**2 * (w - 1) * (w + 1) * (w + 2) * (w + 11))


# ============================================================================
# Cone tests
# ============================================================================


@dataclass(frozen=True)
class ConeLine:
    """Coefficients of T_ℓ, T_ℓ - M_ℓ and T_ℓ - 2M_ℓ + N_ℓ for one ℓ."""

    ell: int
    t: Fraction
    tm: Fraction
    x: Fraction

    @property
    def nonnegative(self) -> bool:
        return self.t >= 0 and self.tm >= 0 and self.x >= 0


def _by_ell(comb: BasisCombination) -> tuple[dict[int, dict[str, Fraction]], dict[int, Fraction]]:
    lines: dict[int, dict[str, Fraction]] = {}
    r_part: dict[int, Fraction] = {}
    for tag, c in comb.terms:
        if not tag.final:
            raise ValueError(f"Cone tests need final tags, got {tag}")
        if tag.family == "R":
            r_part[tag.ell] = c
        else:
            lines.setdefault(tag.ell, {})[tag.family] = c
    return lines, r_part


def cone_decomposition(comb: BasisCombination) -> tuple[list[ConeLine], dict[int, Fraction]]:
    """Per-ℓ cone coordinates and the R_ℓ coefficients of a final combination."""
    lines, r_part = _by_ell(comb)
    out = []
    for ell in sorted(lines):
        c = lines[ell]
        t, m, n = c.get("T", F(0)), c.get("M", F(0)), c.get("N", F(0))
        out.append(ConeLine(ell, t + m + n, -m - 2 * n, n))
    return out, r_part


def cone_failures(comb: BasisCombination) -> list[str]:
    lines, r_part = cone_decomposition(comb)
    bad = [f"ell={x.ell}: (T, T-M, T-2M+N) = ({x.t}, {x.tm}, {x.x})" for x in lines if not x.nonnegative]
    bad += [f"R_{ell}: {c}" for ell, c in sorted(r_part.items()) if c < 0]
    return bad


def modulo_sym_ric(comb: BasisCombination, omega: int) -> BasisCombination:
    """Normal form modulo 2T_ℓ + (ω-2ℓ)((ω-2ℓ-1)N_ℓ + 4M_ℓ) = 0.

    N_ℓ is eliminated where it exists, M_ℓ when ω - 2ℓ = 1, T_ℓ when ω = 2ℓ.
    """
    out = BasisCombination.zero()
    for tag, c in comb.terms:
        j = omega - 2 * tag.ell
        if not tag.final or tag.family == "R":
            out = out + BasisCombination.single(tag, c)
        elif tag.family == "N" and j >= 2:
            out = out + (final("T", tag.ell) * 2 + final("M", tag.ell) * (4 * j)) * (-c / (j * (j - 1)))
        elif tag.family == "M" and j == 1:
            out = out + final("T", tag.ell) * (-c / 2)
        elif tag.family == "T" and j == 0:
            continue
        else:
            out = out + BasisCombination.single(tag, c)
    return out


def ratio_interval(k: int) -> tuple[Fraction, Fraction]:
    """Certified bounds of N_ℓ/T_ℓ for k = ω - 2ℓ + 2 ≥ 4."""
    if k < 4:
        raise ValueError(f"The N/T interval needs k >= 4, got {k}")
    return F(-2, k - 2), F(2, (k - 2) * (k - 3))


@dataclass(frozen=True)
class RatioLine:
    """a T_ℓ + b N_ℓ after eliminating M_ℓ, and its values at the interval endpoints (per unit T_ℓ)."""

    ell: int
    a: Fraction
    b: Fraction
    values: tuple[Fraction, ...]

    @property
    def nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)


def sym_ric_lines(comb: BasisCombination, omega: int) -> tuple[list[RatioLine], dict[int, Fraction]]:
    """Eliminate M_ℓ through the Ricci symmetrization relation and evaluate on the interval.

    For ω - 2ℓ = j ≥ 2, M_ℓ = -(2T_ℓ + j(j-1)N_ℓ)/(4j); for j = 1, M_ℓ = -T_ℓ/2
    and only a ≥ 0 is needed; for j = 0 the line vanishes.
    """
    lines, r_part = _by_ell(comb)
    out = []
    for ell in sorted(lines):
        c = lines[ell]
        t, m, n = c.get("T", F(0)), c.get("M", F(0)), c.get("N", F(0))
        j = omega - 2 * ell
        if j <= 0:
            out.append(RatioLine(ell, F(0), F(0), ()))
            continue
        a = t - m / (2 * j)
        b = n - m * (j - 1) / 4
        if j == 1:
            out.append(RatioLine(ell, a, b, (a,)))
            continue
        lo, hi = ratio_interval(j + 2)
        out.append(RatioLine(ell, a, b, (a + b * lo, a + b * hi)))
    return out, r_part


def sym_ric_cone_failures(comb: BasisCombination, omega: int) -> list[str]:
    lines, r_part = sym_ric_lines(comb, omega)
    bad = [
        f"ell={x.ell}: {x.a} + {x.b} N/T at endpoints = {', '.join(str(v) for v in x.values)}"
        for x in lines
        if not x.nonnegative
    ]
    bad += [f"R_{ell}: {c}" for ell, c in sorted(r_part.items()) if c < 0]
    return bad
