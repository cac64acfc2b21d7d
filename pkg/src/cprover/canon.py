"""
Canonical forms of monomials under dummy renaming and monoterm symmetries.

Every factor contributes its monoterm symmetry group (Riem: antisymmetry in
each body pair and pair exchange, order 8; Ric: order 2; Scal: trivial) and,
unless it is flagged ordered, total symmetry of its derivative slots. The
canonical form is the candidate with the lexicographically smallest
contraction descriptor over all factor orderings and body symmetries. A
descriptor lists, slot by slot, where the partner occurrence of the slot's
label sits: ``"<factor>B<slot>"`` for a body slot, ``"<factor>D"`` for a
symmetric derivative slot, ``"<factor>d<slot>"`` for an ordered one, and
``"~<name>"`` for a free label. Derivative slots that commute contribute the
sorted multiset of their partner descriptors.

Tie-breaking is fixed: factors are ordered by (kind, derivative order) first,
then by descriptor.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING

from .expr import KIND_RANK, Expression, IndexOccurrenceError, Monomial, SymbolFactor, label_counts

if TYPE_CHECKING:
    from .rules import HypothesisSet

logger = logging.getLogger(__name__)

# (new_body[i] = old_body[perm[i]], sign)
RIEM_SYMMETRIES: tuple[tuple[tuple[int, ...], int], ...] = (
    ((0, 1, 2, 3), 1),
    ((1, 0, 2, 3), -1),
    ((0, 1, 3, 2), -1),
    ((1, 0, 3, 2), 1),
    ((2, 3, 0, 1), 1),
    ((3, 2, 0, 1), -1),
    ((2, 3, 1, 0), -1),
    ((3, 2, 1, 0), 1),
)
RIC_SYMMETRIES: tuple[tuple[tuple[int, ...], int], ...] = (((0, 1), 1), ((1, 0), 1))
SCAL_SYMMETRIES: tuple[tuple[tuple[int, ...], int], ...] = (((), 1),)

SYMMETRIES = {"Riem": RIEM_SYMMETRIES, "Ric": RIC_SYMMETRIES, "Scal": SCAL_SYMMETRIES}


@dataclass(frozen=True)
class CanonicalKey:
    """Contraction-pattern key; ``sign`` is +1, -1, or 0 for the zero flag."""

    key: str
    sign: int

    @property
    def is_zero(self) -> bool:
        return self.sign == 0


def group_order(m: Monomial) -> int:
    """Size of the candidate set scanned for ``m`` (tracked in reports)."""
    n = 1
    for f in m.factors:
        n *= len(SYMMETRIES[f.kind])
    return n * len(list(itertools.permutations(range(len(m.factors)))))


# ============================================================================
# Core search
# ============================================================================


def _slot_table(factors: tuple[SymbolFactor, ...]) -> dict[tuple[int, str, int], tuple[int, str, int] | str]:
    """Map each slot (factor, 'D'|'B', index) to its partner slot or to the free label."""
    where: dict[str, list[tuple[int, str, int]]] = {}
    for fi, f in enumerate(factors):
        for j, x in enumerate(f.deriv):
            where.setdefault(x, []).append((fi, "D", j))
        for j, x in enumerate(f.body):
            where.setdefault(x, []).append((fi, "B", j))
    table: dict[tuple[int, str, int], tuple[int, str, int] | str] = {}
    for x, slots in where.items():
        if len(slots) == 1:
            table[slots[0]] = x
        else:
            a, b = slots
            table[a] = b
            table[b] = a
    return table


@lru_cache(maxsize=200_000)
def _canonical(factors: tuple[SymbolFactor, ...], anonymous: bool) -> tuple[str, int, tuple[SymbolFactor, ...]]:
    counts = label_counts(factors)
    if any(n > 2 for n in counts.values()):
        raise IndexOccurrenceError("Label occurs more than twice")

    table = _slot_table(factors)
    nf = len(factors)
    sort_keys = [(KIND_RANK[f.kind], f.order, f.ordered) for f in factors]
    orderings = [p for p in itertools.permutations(range(nf)) if all(sort_keys[p[i]] <= sort_keys[p[i + 1]] for i in range(nf - 1))]
    groups = [SYMMETRIES[f.kind] for f in factors]

    best: tuple | None = None
    best_sign = 0
    best_choice = None
    for order in orderings:
        pos = [0] * nf
        for new, old in enumerate(order):
            pos[old] = new
        for choice in itertools.product(*groups):
            # old body index -> new body index, per factor
            inv = []
            for perm, _ in choice:
                back = [0] * len(perm)
                for i, j in enumerate(perm):
                    back[j] = i
                inv.append(back)

            def desc(slot, pos=pos, inv=inv) -> str:
                partner = table[slot]
                if isinstance(partner, str):
                    return "~" if anonymous else "~" + partner
                pf, kind, pj = partner
                if kind == "B":
                    return f"{pos[pf]}B{inv[pf][pj]}"
                if factors[pf].ordered:
                    return f"{pos[pf]}d{pj}"
                return f"{pos[pf]}D"

            cand = []
            for old in order:
                f = factors[old]
                perm = choice[old][0]
                dd = [desc((old, "D", j)) for j in range(f.order)]
                if not f.ordered:
                    dd.sort()
                bd = [desc((old, "B", perm[i])) for i in range(len(perm))]
                cand.append((KIND_RANK[f.kind], f.order, int(f.ordered), tuple(dd), tuple(bd)))
            cand_t = tuple(cand)
            sign = 1
            for _, s in choice:
                sign *= s
            if best is None or cand_t < best:
                best, best_sign, best_choice = cand_t, sign, (order, choice)
            elif cand_t == best and sign != best_sign:
                best_sign = 0

    assert best is not None and best_choice is not None
    key = repr(best)
    if best_sign == 0:
        return key, 0, ()
    return key, best_sign, _rebuild(factors, table, best_choice, anonymous)


def _rebuild(factors, table, choice, anonymous) -> tuple[SymbolFactor, ...]:
    """Materialize the winning candidate with dummies renamed _d0, _d1, ..."""
    order, group = choice
    pos = {old: new for new, old in enumerate(order)}
    names: dict[str, str] = {}
    counts = label_counts(factors)
    free = {x for x, n in counts.items() if n == 1}
    serial = (f"_d{k}" for k in itertools.count())

    def name_of(x: str) -> str:
        if counts[x] == 1:
            return x
        if x not in names:
            names[x] = next(n for n in serial if n not in free)
        return names[x]

    def partner_desc(slot) -> str:
        partner = table[slot]
        if isinstance(partner, str):
            return "~" if anonymous else "~" + partner
        pf, kind, pj = partner
        if kind == "B":
            back = group[pf][0].index(pj)
            return f"{pos[pf]}B{back}"
        return f"{pos[pf]}d{pj}" if factors[pf].ordered else f"{pos[pf]}D"

    out = []
    for old in order:
        f = factors[old]
        perm = group[old][0]
        if f.ordered:
            deriv = tuple(name_of(x) for x in f.deriv)
        else:
            slots = sorted(range(f.order), key=lambda j, old=old: partner_desc((old, "D", j)))
            named = [(partner_desc((old, "D", j)), name_of(f.deriv[j])) for j in slots]
            deriv = tuple(n for _, n in sorted(named, key=lambda t: (t[0], _label_rank(t[1]))))
        body = tuple(name_of(f.body[perm[i]]) for i in range(len(perm)))
        out.append(SymbolFactor(f.kind, deriv, body, f.commute_order))
    return tuple(out)


def _label_rank(name: str) -> tuple[int, int | str]:
    if name.startswith("_d") and name[2:].isdigit():
        return (0, int(name[2:]))
    return (1, name)


# ============================================================================
# Public API
# ============================================================================


def canonicalize(m: Monomial, h: HypothesisSet | None = None) -> tuple[CanonicalKey, Monomial]:
    """Canonical key and signed canonical representative of ``m``.

    The representative carries ``m.coeff`` times the symmetry sign; a
    zero-flagged monomial comes back with coefficient 0 and its input factors.
    """
    if h is not None:
        bound = 2 * h.omega + 2
        for f in m.factors:
            if f.order > bound:
                raise ValueError(f"Derivative order {f.order} exceeds {bound} for omega={h.omega}")
    key, sign, factors = _canonical(m.factors, False)
    if sign == 0:
        return CanonicalKey(key, 0), Monomial(Fraction(0), m.factors)
    return CanonicalKey(key, sign), Monomial(m.coeff * sign, factors)


def canonical_key(m: Monomial, anonymous_free: bool = False) -> CanonicalKey:
    key, sign, _ = _canonical(m.factors, anonymous_free)
    return CanonicalKey(key, sign)


def canonical_class(m: Monomial) -> tuple[CanonicalKey, Monomial]:
    """Key and representative with free labels treated as interchangeable."""
    key, sign, factors = _canonical(m.factors, True)
    if sign == 0:
        return CanonicalKey(key, 0), Monomial(Fraction(0), m.factors)
    return CanonicalKey(key, sign), Monomial(m.coeff * sign, factors)


def collect(e: Expression, h: HypothesisSet | None = None) -> Expression:
    """Merge monomials with equal keys, drop zeros, order by key."""
    acc: dict[str, Fraction] = {}
    reps: dict[str, Monomial] = {}
    for m in e:
        ck, rep = canonicalize(m, h)
        if ck.is_zero:
            continue
        acc[ck.key] = acc.get(ck.key, Fraction(0)) + rep.coeff
        reps.setdefault(ck.key, rep)
    out = [reps[k].with_factors(reps[k].factors, acc[k]) for k in sorted(acc) if acc[k] != 0]
    return Expression(tuple(out))


def as_key_map(e: Expression, h: HypothesisSet | None = None) -> dict[str, Fraction]:
    """Canonical key -> coefficient view of ``e`` (zeros dropped)."""
    acc: dict[str, Fraction] = {}
    for m in e:
        ck, rep = canonicalize(m, h)
        if ck.is_zero:
            continue
        acc[ck.key] = acc.get(ck.key, Fraction(0)) + rep.coeff
    return {k: v for k, v in acc.items() if v != 0}


def equal(a: Expression, b: Expression, h: HypothesisSet | None = None) -> bool:
    return not as_key_map(a - b, h)


def first_difference(a: Expression, b: Expression) -> str | None:
    """First key on which ``a`` and ``b`` disagree, for failure reports."""
    diff = as_key_map(a - b)
    if not diff:
        return None
    key = min(diff)
    return f"{key}: {diff[key]}"
