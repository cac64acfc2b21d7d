"""
Expression builders for the tensors the checks contract.

Multi-index runs use the prefixes ``p``/``q`` (the two derivative runs of a
quadratic term), ``k`` (shared spectator slots) and ``u``/``v`` (Laplacian
pairs). Single letters are the named slots of the displays.
"""

from __future__ import annotations

from fractions import Fraction

from ..expr import Expression, Monomial, SymbolFactor
from ..rules import sym, tr_sym

# k -> (extra derivatives of the first factor, its body,
#       extra derivatives of the second factor, its body)
# A Ric entry -Ric_ij is written as the trace R_{ieej}.
ROW_SHAPES: dict[int, tuple[str, str, str, str]] = {
    1: ("", "ieej", "", "iffj"),
    2: ("c", "ieej", "b", "ibcj"),
    3: ("", "ieej", "bc", "ibcj"),
    4: ("b", "ieej", "c", "ibcj"),
    5: ("bc", "ieej", "", "ibcj"),
    6: ("", "iabj", "", "iabj"),
    7: ("b", "iabj", "c", "iacj"),
    8: ("cb", "iabj", "", "iacj"),
    9: ("c", "iabj", "b", "iacj"),
    10: ("", "iabj", "", "ibaj"),
    11: ("b", "iabj", "c", "icaj"),
    12: ("bc", "iabj", "", "icaj"),
    13: ("c", "iabj", "b", "icaj"),
    14: ("", "iabj", "bc", "icaj"),
    15: ("", "iabj", "ac", "icbj"),
    16: ("c", "iabj", "a", "icbj"),
    17: ("a", "iabj", "c", "icbj"),
    18: ("ab", "iabj", "cd", "icdj"),
    19: ("abcd", "iabj", "", "icdj"),
    20: ("abc", "iabj", "d", "icdj"),
    21: ("abd", "iabj", "c", "icdj"),
    22: ("c", "iabj", "dab", "icdj"),
    23: ("d", "iabj", "cab", "icdj"),
    24: ("cd", "iabj", "ab", "icdj"),
    25: ("da", "iabj", "bc", "icdj"),
    26: ("ca", "iabj", "bd", "icdj"),
    27: ("cb", "iabj", "ad", "icdj"),
}
ROWS = tuple(sorted(ROW_SHAPES))
BODY_SLOTS = ("a", "b", "c", "d")


def run(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{k}" for k in range(1, n + 1))


def laplacian(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(x for p in run(prefix, n) for x in (p, p))


def traced(mono: Monomial, labels: tuple[str, ...]) -> Expression:
    e = Expression.of(mono)
    return tr_sym(e, labels) if labels else e


# ============================================================================
# Table rows and Tr Q(R)
# ============================================================================


def type_monomial(k: int, omega: int) -> tuple[Monomial, tuple[str, ...]] | None:
    """Untraced monomial of row ``k`` and its Tr Sym labels; None when the row does not occur."""
    x, b1, y, b2 = ROW_SHAPES[k]
    n_i, n_j = omega - len(x), omega - len(y)
    if n_i < 0 or n_j < 0:
        return None
    eye, jay = run("p", n_i), run("q", n_j)
    f1 = SymbolFactor("Riem", eye + tuple(x), tuple(b1))
    f2 = SymbolFactor("Riem", jay + tuple(y), tuple(b2))
    return Monomial(Fraction(1), (f1, f2)), eye + jay


def row_expression(k: int, omega: int) -> Expression:
    raw = type_monomial(k, omega)
    if raw is None:
        return Expression.zero()
    return traced(*raw)


def trq_monomial(omega: int) -> tuple[Monomial, tuple[str, ...]]:
    """∇_P R_{iabj} ∇_Q R_{icdj} with the 2ω+4 labels of Tr Q(R)."""
    eye, jay = run("p", omega), run("q", omega)
    f1 = SymbolFactor("Riem", eye, ("i", "a", "b", "j"))
    f2 = SymbolFactor("Riem", jay, ("i", "c", "d", "j"))
    return Monomial(Fraction(1), (f1, f2)), eye + jay + BODY_SLOTS


def trq(omega: int) -> Expression:
    return traced(*trq_monomial(omega))


# ============================================================================
# Symmetrizations of the variation formula
# ============================================================================


def s_monomial(index: int, omega: int) -> tuple[Monomial, tuple[str, ...]]:
    """Untraced S_2, S_3 or S_4 and the labels they are symmetrized over."""
    eye, jay = run("p", omega), run("q", omega)
    if index == 2:
        f1 = SymbolFactor("Riem", eye, ("i", "a", "b", "j"))
        f2 = SymbolFactor("Ric", jay, ("i", "j"))
        return Monomial(Fraction(1), (f1, f2)), eye + jay + ("a", "b")
    if index == 3:
        f1 = SymbolFactor("Ric", eye, ("a", "j"))
        f2 = SymbolFactor("Ric", jay, ("b", "j"))
        return Monomial(Fraction(1), (f1, f2)), eye + jay + ("a", "b")
    if index == 4:
        jay = run("q", omega - 1)
        f1 = SymbolFactor("Riem", eye, ("i", "a", "b", "j"))
        f2 = SymbolFactor("Ric", jay + ("i",), ("c", "j"))
        return Monomial(Fraction(1), (f1, f2)), eye + jay + ("a", "b", "c")
    raise ValueError(f"No S_{index}")


def s_expression(index: int, omega: int) -> Expression:
    return traced(*s_monomial(index, omega))


def scal_laplacian(ell: int, free: tuple[str, ...] = ()) -> SymbolFactor:
    """∇_{free} Δ^ℓ scal."""
    return SymbolFactor("Scal", laplacian("u", ell) + free, ())


# ============================================================================
# Induction sequence for A_5
# ============================================================================


def u_sequence(gamma: int, omega: int) -> Expression:
    """U_γ = -Tr Sym ∇_{I bc}∇_K Ric_ij ∇_J∇_K R_{ibcj}, |I| = γ-2, |J| = γ, |K| = ω-γ."""
    if not 2 <= gamma <= omega:
        raise ValueError(f"U_gamma needs 2 <= gamma <= omega, got gamma={gamma}")
    eye, jay, kay = run("p", gamma - 2), run("q", gamma), run("k", omega - gamma)
    f1 = SymbolFactor("Riem", eye + kay + ("b", "c"), ("i", "e", "e", "j"))
    f2 = SymbolFactor("Riem", jay + kay, ("i", "b", "c", "j"))
    return traced(Monomial(Fraction(1), (f1, f2)), eye + jay)


# ============================================================================
# Ricci symmetrization and the tensor Γ(t)
# ============================================================================


def ric_laplacian(deriv: tuple[str, ...], body: tuple[str, str], ell: int, prefix: str = "u") -> SymbolFactor:
    """∇_{deriv} Δ^ℓ Ric_{body}."""
    return SymbolFactor("Ric", deriv + laplacian(prefix, ell), body)


def contracted_sym_ric(omega: int, ell: int) -> tuple[Expression, tuple[str, ...]]:
    """Sym ∇_{p3..p_{ω+2}} Ric_{p1p2} with its last 2ℓ labels contracted pairwise.

    Returns the expression and its k = ω+2-2ℓ remaining free labels. Terms
    with a scal factor of order ω are kept; the caller drops them under its
    hypotheses.
    """
    labels = run("p", omega + 2)
    base = Expression.of(Monomial(Fraction(1), (SymbolFactor("Ric", labels[2:], labels[:2]),)))
    e = sym(base, labels)
    k = omega + 2 - 2 * ell
    mapping = {}
    for n in range(ell):
        a, b = labels[k + 2 * n], labels[k + 2 * n + 1]
        mapping[a] = mapping[b] = f"u{n + 1}"
    return e.relabel(mapping), labels[:k]


def ric_no_multiplier(ell: int, labels: tuple[str, ...]) -> Expression:
    """∇_{p1..p_{k-2}} Δ^ℓ Ric_{p_{k-1}p_k} over the given free labels."""
    k = len(labels)
    f = ric_laplacian(labels[: k - 2], (labels[k - 2], labels[k - 1]), ell, prefix="v")
    return Expression.of(Monomial(Fraction(1), (f,)))


def gamma_parts(omega: int, ell: int) -> tuple[Expression, Expression, tuple[str, ...]]:
    """The t-coefficient and constant part of Γ(t), and its k labels."""
    k = omega - 2 * ell + 2
    labels = run("p", k)
    lead = Expression.of(
        Monomial(Fraction(1), (ric_laplacian(labels[: k - 2], (labels[k - 2], labels[k - 1]), ell),))
    )
    rest = []
    for i in range(k - 2):
        for j in range(i + 1, k - 2):
            deriv = tuple(x for n, x in enumerate(labels) if n not in (i, j))
            rest.append(Monomial(Fraction(1), (ric_laplacian(deriv, (labels[i], labels[j]), ell),)))
    return lead, Expression(tuple(rest)), labels


def difference_tensor(omega: int, ell: int) -> Expression:
    """∇_{Kc}Δ^ℓRic_{ab} - ∇_{Ka}Δ^ℓRic_{bc}, |K| = ω-2ℓ-1."""
    kay = run("k", omega - 2 * ell - 1)
    first = ric_laplacian(kay + ("c",), ("a", "b"), ell)
    second = ric_laplacian(kay + ("a",), ("b", "c"), ell)
    return Expression((Monomial(Fraction(1), (first,)), Monomial(Fraction(-1), (second,))))
