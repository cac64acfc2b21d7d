"""
Closed-form coefficients and combinatorial identities, in exact arithmetic.

Integers are Python ints (arbitrary precision) and rationals are
``fractions.Fraction``; nothing here touches floating point.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import TypeVar

from .report import CheckReport, ReportItem, exact_item

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Table rows whose multiplicity carries (2ω)!, (2ω-2)! and (2ω-4)! respectively
ROWS_FULL = (1, 6, 10)
ROWS_PRIMED = tuple(k for k in range(2, 18) if k not in ROWS_FULL)
ROWS_DOUBLE_PRIMED = tuple(range(18, 28))

# u_k = multiplier * c_index
U_FORMULA: dict[int, tuple[int, int]] = {
    1: (1, 1), 2: (2, 2), 3: (2, 3), 4: (2, 2), 5: (2, 3), 6: (1, 1), 7: (1, 2), 8: (2, 3), 9: (1, 2),
    10: (1, 1), 11: (2, 2), 12: (2, 3), 13: (2, 2), 14: (2, 3), 15: (2, 3), 16: (1, 2), 17: (1, 2),
    18: (1, 4), 19: (2, 5), 20: (2, 6), 21: (2, 6), 22: (2, 6), 23: (2, 6), 24: (1, 4), 25: (1, 4),
    26: (2, 4), 27: (1, 4),
}  # fmt: skip


def binom(p: int, q: int) -> int:
    """Binomial coefficient with binom(p, q) = 0 whenever q > p or q < 0."""
    if q < 0 or p < 0 or q > p:
        return 0
    return comb(p, q)


def all_pairings(items: Sequence[T]) -> Iterator[list[tuple[T, T]]]:
    """Every perfect matching of ``items`` (an even-length sequence)."""
    if not items:
        yield []
        return
    first, rest = items[0], list(items[1:])
    for i, partner in enumerate(rest):
        for tail in all_pairings(rest[:i] + rest[i + 1 :]):
            yield [(first, partner), *tail]


def double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def C(omega: int) -> Fraction:
    """Leading constant (ω+1)²(ω+2)²(2ω+2)!/[(ω+3)!]²."""
    return Fraction((omega + 1) ** 2 * (omega + 2) ** 2 * factorial(2 * omega + 2), factorial(omega + 3) ** 2)


def C_by_double_factorial(omega: int) -> Fraction:
    """C(ω) through (2ω+2)! = 2^{ω+1}(ω+1)!(2ω+1)!!, cancelled against [(ω+3)!]²."""
    return Fraction(2 ** (omega + 1) * (omega + 1) ** 2 * double_factorial(2 * omega + 1), (omega + 3) ** 2 * factorial(omega + 1))


def K(omega: int) -> Fraction:
    """Conformal normal metric constant (3ω+8)(ω+1)²/((2ω+5)[(ω+3)!]²)."""
    return Fraction((3 * omega + 8) * (omega + 1) ** 2, (2 * omega + 5) * factorial(omega + 3) ** 2)


def d(gamma: int, ell: int) -> Fraction:
    """d^γ_ℓ = 2^{γ-2ℓ}(γ!)³/((γ-2ℓ)!(ℓ!)²); zero outside 0 ≤ 2ℓ ≤ γ."""
    if ell < 0 or gamma < 2 * ell:
        return Fraction(0)
    return Fraction(2 ** (gamma - 2 * ell) * factorial(gamma) ** 3, factorial(gamma - 2 * ell) * factorial(ell) ** 2)


def e(gamma: int, ell: int) -> Fraction:
    """e^γ_ℓ = 2^{γ-2ℓ-2}γ!(γ-1)!(γ-2)!/((γ-2ℓ-2)!(ℓ+1)!ℓ!); zero outside 0 ≤ 2ℓ ≤ γ-2."""
    if ell < 0 or gamma < 2 * ell + 2:
        return Fraction(0)
    num = 2 ** (gamma - 2 * ell - 2) * factorial(gamma) * factorial(gamma - 1) * factorial(gamma - 2)
    return Fraction(num, factorial(gamma - 2 * ell - 2) * factorial(ell + 1) * factorial(ell))


def c_list(omega: int) -> tuple[int, int, int, int, int, int]:
    c1 = (2 * omega + 4) * (2 * omega + 2)
    c2 = 2 * omega**3 * c1
    c3 = 2 * omega**2 * (omega - 1) * c1
    c4 = 4 * omega**3 * (omega - 1) ** 3 * c1
    c5 = 4 * omega**2 * (omega - 1) ** 2 * (omega - 2) * (omega - 3) * c1
    c6 = 4 * omega**3 * (omega - 1) ** 2 * (omega - 2) * c1
    return c1, c2, c3, c4, c5, c6


@dataclass(frozen=True)
class CoeffTable:
    omega: int
    C: Fraction
    K: Fraction
    c: tuple[int, int, int, int, int, int]
    u: dict[int, int] = field(default_factory=dict)
    d: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    e: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    @property
    def c1(self) -> int:
        return self.c[0]


def coeffs(omega: int) -> CoeffTable:
    if omega < 1:
        raise ValueError(f"omega must be >= 1, got {omega}")
    c = c_list(omega)
    u = {k: mult * c[idx - 1] for k, (mult, idx) in U_FORMULA.items()}
    d_table = {(g, ell): d(g, ell) for g in range(omega + 1) for ell in range(g // 2 + 1)}
    e_table = {(g, ell): e(g, ell) for g in range(2, omega + 1) for ell in range((g - 2) // 2 + 1)}
    return CoeffTable(omega=omega, C=C(omega), K=K(omega), c=c, u=u, d=d_table, e=e_table)


# ============================================================================
# Checks
# ============================================================================


def checksum(omega: int) -> tuple[int, int]:
    """Multiplicity sum of the 27 contraction types against (2ω+4)!."""
    if omega < 2:
        raise ValueError("checksum needs omega >= 2")
    u = coeffs(omega).u
    lhs = (
        factorial(2 * omega) * sum(u[k] for k in ROWS_FULL)
        + factorial(2 * omega - 2) * sum(u[k] for k in ROWS_PRIMED)
        + factorial(2 * omega - 4) * sum(u[k] for k in ROWS_DOUBLE_PRIMED)
    )
    return lhs, factorial(2 * omega + 4)


def prop_s_weights(omega: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Weights of (Δ^{ω+1}scal, S2, S3, S4) after commuting the dummy slot to the end.

    A term whose dummy starts at position k passes positions k..2ω+1; the
    move past position j+1 yields binom(j, ω) surviving Leibniz splits per
    family, and 2ω-j of them per split in the S4 family.
    """
    top = 2 * omega + 2
    mult = {k: omega + 1 if k == omega + 1 else 1 for k in range(omega + 1, top + 1)}
    s1 = 2 * (omega + 2) * (1 + Fraction(sum(mult.values()), 2))
    s2 = 2 * (omega + 2) * sum(mult[k] * sum(binom(j, omega) for j in range(k - 1, top - 1)) for k in mult)
    s4 = 2 * (omega + 2) * sum(mult[k] * sum((2 * omega - j) * binom(j, omega) for j in range(k - 1, top - 1)) for k in mult)
    return s1, Fraction(s2), Fraction(s2), Fraction(s4)


def comb_identities(omega_max: int = 40, n_max: int = 40) -> CheckReport:
    items: list[ReportItem] = []
    for w in range(1, omega_max + 1):
        lhs1 = (w + 2) * sum((k + 1) * binom(k, w) for k in range(w, 2 * w + 1))
        items.append(exact_item(f"comb1[omega={w}]", (w + 3) ** 2 * C(w), lhs1))
        lhs2 = (w + 2) * sum((k + 1) * (2 * w - k) * binom(k, w) for k in range(w, 2 * w))
        items.append(exact_item(f"comb2[omega={w}]", w * (w + 3) * C(w), lhs2))
    bad4 = []
    count4 = 0
    for w in range(0, n_max + 1):
        for n in range(w, n_max + 1):
            count4 += 1
            if sum(binom(k, w) for k in range(w, n)) != binom(n, w + 1):
                bad4.append(f"first(omega={w},n={n})")
            if n >= w + 2 and sum((n - k - 1) * binom(k, w) for k in range(w, n - 1)) != binom(n, w + 2):
                bad4.append(f"second(omega={w},n={n})")
    items.append(
        ReportItem(
            name=f"comb4[n<={n_max}]",
            expected=f"{count4} instances hold",
            computed="all hold" if not bad4 else "; ".join(bad4[:5]),
            status="pass" if not bad4 else "fail",
        )
    )
    for w in range(1, min(omega_max, 12) + 1):
        s1, s2, _, s4 = prop_s_weights(w)
        items.append(exact_item(f"prop-s-weight-scal[omega={w}]", 2 * (w + 2) ** 2, s1))
        items.append(exact_item(f"prop-s-weight-s2[omega={w}]", 2 * (w + 3) ** 2 * C(w), s2))
        items.append(exact_item(f"prop-s-weight-s4[omega={w}]", 2 * w * (w + 3) * C(w), s4))
    logger.info("comb identities: %d items", len(items))
    return CheckReport.build(
        "comb",
        None,
        "(ω+2)Σ(k+1)binom(k,ω) = (ω+3)²C(ω); (ω+2)Σ(k+1)(2ω-k)binom(k,ω) = ω(ω+3)C(ω); Σ binom(k,ω) = binom(n,ω+1)",
        items,
    )


def checksum_report(omega: int) -> CheckReport:
    lhs, rhs = checksum(omega)
    table = coeffs(omega)
    items = [
        exact_item("multiplicity-sum", rhs, lhs),
        exact_item("C(omega)", C_by_double_factorial(omega), table.C),
    ]
    return CheckReport.build(
        "checksum",
        omega,
        "(2ω)!(u1+u6+u10) + (2ω-2)!Σu_k + (2ω-4)!Σu_k = (2ω+4)!",
        items,
        notes=[f"K(omega) = {table.K}"],
    )
