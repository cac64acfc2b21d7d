"""
Identity toolbox as expression transformers.

Sym/Tr operators, trace rules, Bianchi identities, Leibniz expansion and
derivative commutation on top-order Ricci symbols. All transformers are pure
and preserve the set of free labels.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import factorial
from typing import Literal

from .canon import RIEM_SYMMETRIES, canonical_class, canonicalize, collect
from .comb import all_pairings
from .expr import Expression, Monomial, SymbolFactor, fresh_labels

logger = logging.getLogger(__name__)

BianchiVariant = Literal["der-r1", "der-r2", "lapl"]
TrSymMethod = Literal["matchings", "permutations"]

# body positions traced -> (kept body positions, sign) for Riem -> Ric
RIEM_TRACES: dict[frozenset[int], tuple[tuple[int, int], int]] = {
    frozenset({0, 2}): ((1, 3), 1),
    frozenset({1, 3}): ((0, 2), 1),
    frozenset({0, 3}): ((1, 2), -1),
    frozenset({1, 2}): ((0, 3), -1),
}
RIEM_VANISHING_TRACES = (frozenset({0, 1}), frozenset({2, 3}))


@dataclass(frozen=True)
class HypothesisSet:
    """Pointwise hypotheses at the base point for a fixed ω.

    vanish_low_riem: ∇^k Riem = 0 for k ≤ ω-1 (hence every contraction of it).
    vanish_scal_omega: ∇^ω scal = 0.
    sym_ric_vanish: Sym ∇^{m-2} Ric = 0 for ω+2 ≤ m ≤ 2ω+3.
    hv_formula: the variation formula is available; requires sym_ric_vanish.
    """

    omega: int
    vanish_low_riem: bool = True
    vanish_scal_omega: bool = True
    sym_ric_vanish: bool = False
    hv_formula: bool = False

    def __post_init__(self) -> None:
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if self.hv_formula and not self.sym_ric_vanish:
            raise ValueError("hv_formula requires sym_ric_vanish")

    @property
    def top_order(self) -> int:
        return 2 * self.omega + 2

    def vanishes(self, f: SymbolFactor) -> bool:
        """True when the factor is zero at the base point under these hypotheses."""
        if self.vanish_low_riem and f.order <= self.omega - 1:
            return True
        return f.kind == "Scal" and self.vanish_scal_omega and f.order == self.omega


def _drop(m: Monomial, h: HypothesisSet | None) -> bool:
    return h is not None and any(h.vanishes(f) for f in m.factors)


def _replace_factor(m: Monomial, i: int, new: SymbolFactor | Sequence[SymbolFactor], coeff: Fraction) -> Monomial:
    news = (new,) if isinstance(new, SymbolFactor) else tuple(new)
    return Monomial(coeff, m.factors[:i] + news + m.factors[i + 1 :])


def _check_free(e: Expression, labels: Iterable[str]) -> list[str]:
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise ValueError(f"Repeated label in {labels}")
    if not e.monomials:
        return labels
    missing = [x for x in labels if x not in e.free_labels]
    if missing:
        raise ValueError(f"Label(s) {', '.join(missing)} are not free in the expression")
    return labels


# ============================================================================
# Sym and Tr
# ============================================================================


def sym(e: Expression, labels: Iterable[str]) -> Expression:
    """Unnormalized symmetrization: the sum over all |labels|! permutations."""
    labels = _check_free(e, labels)
    out = []
    for perm in itertools.permutations(labels):
        mapping = dict(zip(labels, perm, strict=True))
        out.extend(m.relabel(mapping) for m in e)
    return Expression(tuple(out))


def tr_sym(e: Expression, labels: Sequence[str], method: TrSymMethod = "matchings") -> Expression:
    """Tr Sym over ``labels``: symmetrize, then contract (p1 p2)(p3 p4)...

    For an odd number of labels the last one stays free. ``matchings`` uses
    that a symmetrized tensor traced pairwise is 2^m m! times the sum over
    perfect matchings of the labels; ``permutations`` sums all |labels|!
    terms and is kept for cross-validation on small cases.
    """
    labels = _check_free(e, labels)
    if method == "permutations":
        return _tr_sym_permutations(e, labels)
    m = len(labels) // 2
    weight = 2**m * factorial(m)

    # All free labels traced: the result depends only on the class of each
    # monomial with its free labels treated as interchangeable.
    if e.monomials and set(labels) == set(e.free_labels):
        groups: dict[str, Monomial] = {}
        for mono in e:
            ck, rep = canonical_class(mono)
            if ck.is_zero:
                continue
            if ck.key in groups:
                prev = groups[ck.key]
                groups[ck.key] = prev.with_factors(prev.factors, prev.coeff + rep.coeff)
            else:
                groups[ck.key] = rep
        reps = [r for r in groups.values() if r.coeff != 0]
    else:
        reps = list(e)

    out: list[Monomial] = []
    survivors: list[str | None] = list(labels) if len(labels) % 2 else [None]
    for rep in reps:
        for survivor in survivors:
            rest = [x for x in labels if x != survivor]
            for pairing in all_pairings(rest):
                names = fresh_labels(rep.labels | set(labels))
                mapping: dict[str, str] = {}
                for x, y in pairing:
                    z = next(names)
                    mapping[x] = mapping[y] = z
                if survivor is not None and survivor != labels[-1]:
                    mapping[survivor] = labels[-1]
                out.append(rep.relabel(mapping).scale(weight))
    return Expression(tuple(out))


def _tr_sym_permutations(e: Expression, labels: list[str]) -> Expression:
    names = fresh_labels(e.labels)
    contract: dict[str, str] = {}
    for i in range(0, len(labels) - 1, 2):
        z = next(names)
        contract[labels[i]] = contract[labels[i + 1]] = z
    out = []
    for perm in itertools.permutations(labels):
        mapping = {x: contract.get(y, y) for x, y in zip(labels, perm, strict=True)}
        out.extend(m.relabel(mapping) for m in e)
    return Expression(tuple(out))


# ============================================================================
# Trace rules
# ============================================================================


def _trace_once(m: Monomial, h: HypothesisSet | None) -> list[Monomial] | None:
    """One trace rewrite of ``m``, or None when no rule applies."""
    for i, f in enumerate(m.factors):
        if f.kind == "Riem":
            b = f.body
            for s, t in itertools.combinations(range(4), 2):
                if b[s] != b[t]:
                    continue
                slots = frozenset({s, t})
                if slots in RIEM_VANISHING_TRACES:
                    return []
                (u, v), sign = RIEM_TRACES[slots]
                ric = SymbolFactor("Ric", f.deriv, (b[u], b[v]), f.commute_order)
                return [_replace_factor(m, i, ric, m.coeff * sign)]
        elif f.kind == "Ric":
            b = f.body
            if b[0] == b[1]:
                scal = SymbolFactor("Scal", f.deriv, ())
                return [_replace_factor(m, i, scal, m.coeff)]
            for j, x in enumerate(f.deriv):
                if x not in b:
                    continue
                if f.ordered and j != f.order - 1:
                    continue
                other = b[1 - b.index(x)]
                deriv = f.deriv[:j] + f.deriv[j + 1 :] + (other,)
                scal = SymbolFactor("Scal", deriv, ())
                return [_replace_factor(m, i, scal, m.coeff / 2)]
    return None


def apply_trace_rules(e: Expression, h: HypothesisSet | None = None) -> Expression:
    """Riem self-traces to Ric, Ric self-traces to Scal, div Ric to ½ d scal.

    Monomials carrying a factor that vanishes under ``h`` are dropped. Scal
    derivatives always commute in the working regime (the commutator terms
    pair a Riem jet with a scal jet of order at most ω), so produced Scal
    factors carry no slot ordering.
    """
    out: list[Monomial] = []
    stack = list(e)
    while stack:
        m = stack.pop()
        if _drop(m, h):
            continue
        step = _trace_once(m, h)
        if step is None:
            out.append(m)
        else:
            stack.extend(step)
    out.reverse()
    return Expression(tuple(out))


# ============================================================================
# Second Bianchi identity
# ============================================================================


def _aligned(body: tuple[str, ...], slot: int, target: int) -> tuple[tuple[str, ...], int]:
    """Body rearranged by a symmetry element moving ``slot`` to ``target``."""
    for perm, sign in RIEM_SYMMETRIES:
        if perm[target] == slot:
            return tuple(body[p] for p in perm), sign
    raise AssertionError("Riem symmetry group acts transitively on body slots")


def _ric(deriv: Iterable[str], a: str, b: str) -> SymbolFactor:
    return SymbolFactor("Ric", tuple(deriv), (a, b))


def _bianchi_once(m: Monomial, variant: BianchiVariant) -> list[Monomial] | None:
    for i, f in enumerate(m.factors):
        if f.kind != "Riem" or f.ordered:
            continue
        if variant == "lapl":
            pair = next((x for x in f.deriv if f.deriv.count(x) == 2), None)
            if pair is None:
                continue
            rest = tuple(x for x in f.deriv if x != pair)
            w, x, y, z = f.body
            terms = [
                (1, _ric(rest + (y, w), x, z)),
                (1, _ric(rest + (x, z), y, w)),
                (-1, _ric(rest + (w, z), x, y)),
                (-1, _ric(rest + (x, y), w, z)),
            ]
            return [_replace_factor(m, i, ric, m.coeff * s) for s, ric in terms]
        for j, a in enumerate(f.deriv):
            if a not in f.body:
                continue
            rest = f.deriv[:j] + f.deriv[j + 1 :]
            slot = f.body.index(a)
            if variant == "der-r1":
                (p, _, b, q), sign = _aligned(f.body, slot, 1)
                terms = [(-1, _ric(rest + (b,), p, q)), (1, _ric(rest + (q,), b, p))]
            else:
                (p, a2, _, q), sign = _aligned(f.body, slot, 2)
                terms = [(-1, _ric(rest + (a2,), p, q)), (1, _ric(rest + (p,), a2, q))]
            return [_replace_factor(m, i, ric, m.coeff * sign * s) for s, ric in terms]
    return None


def second_bianchi(e: Expression, variant: BianchiVariant) -> Expression:
    """Rewrite every matching Riem factor with the chosen contracted Bianchi form.

    der-r1: ∇_a R_{iabj} = -∇_b Ric_{ij} + ∇_j Ric_{bi}
    der-r2: ∇_b R_{iabj} = -∇_a Ric_{ij} + ∇_i Ric_{aj}
    lapl:   ΔR_{wxyz} = ∇_{yw}Ric_{xz} + ∇_{xz}Ric_{yw} - ∇_{wz}Ric_{xy} - ∇_{xy}Ric_{wz}

    The Laplacian form drops curvature-quadratic terms, which vanish at the
    base point whenever the lower-order jets vanish. Derivative slots commute,
    so the contracted slot may sit anywhere in the run.
    """
    if variant not in ("der-r1", "der-r2", "lapl"):
        raise ValueError(f"Unknown Bianchi variant: {variant}")
    out: list[Monomial] = []
    stack = list(e)
    while stack:
        m = stack.pop()
        step = _bianchi_once(m, variant)
        if step is None:
            out.append(m)
        else:
            stack.extend(step)
    out.reverse()
    return Expression(tuple(out))


# ============================================================================
# Linear relations
# ============================================================================


@dataclass(frozen=True)
class LinearRelation:
    """Σ coeff * [key] = 0 over canonical keys, with one representative per key."""

    origin: str
    terms: dict[str, Fraction] = field(default_factory=dict)
    representatives: dict[str, Monomial] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.terms)


def relation_from(monomials: Iterable[Monomial], origin: str, h: HypothesisSet | None = None) -> LinearRelation:
    terms: dict[str, Fraction] = {}
    reps: dict[str, Monomial] = {}
    for m in monomials:
        if m.coeff == 0 or _drop(m, h):
            continue
        ck, rep = canonicalize(m)
        if ck.is_zero:
            continue
        terms[ck.key] = terms.get(ck.key, Fraction(0)) + rep.coeff
        reps.setdefault(ck.key, rep.with_factors(rep.factors, 1))
    terms = {k: v for k, v in terms.items() if v != 0}
    return LinearRelation(origin, terms, {k: reps[k] for k in terms})


def first_bianchi_closure(monomials: Iterable[Monomial], h: HypothesisSet | None = None) -> list[LinearRelation]:
    """Cyclic first-Bianchi relation R_{abcd} + R_{acdb} + R_{adbc} = 0 on every Riem factor."""
    out = []
    for m in monomials:
        for i, f in enumerate(m.factors):
            if f.kind != "Riem":
                continue
            a, b, c, d = f.body
            cyc = [(a, b, c, d), (a, c, d, b), (a, d, b, c)]
            rel = relation_from(
                (_replace_factor(m, i, replace(f, body=body), Fraction(1)) for body in cyc),
                "first-bianchi",
                h,
            )
            if rel:
                out.append(rel)
    return out


def second_bianchi_relations(m: Monomial, h: HypothesisSet | None = None) -> list[LinearRelation]:
    """Uncontracted second Bianchi ∇_e R_{abcd} + ∇_c R_{abde} + ∇_d R_{abec} = 0.

    Instantiated on every symmetric derivative slot of every Riem factor and
    on both body pairs.
    """
    out = []
    for i, f in enumerate(m.factors):
        if f.kind != "Riem" or f.ordered:
            continue
        for j, e_label in enumerate(f.deriv):
            rest = f.deriv[:j] + f.deriv[j + 1 :]
            for body in (f.body, f.body[2:] + f.body[:2]):
                a, b, c, d = body
                triple = [
                    SymbolFactor("Riem", rest + (e_label,), (a, b, c, d), f.commute_order),
                    SymbolFactor("Riem", rest + (c,), (a, b, d, e_label), f.commute_order),
                    SymbolFactor("Riem", rest + (d,), (a, b, e_label, c), f.commute_order),
                ]
                rel = relation_from((_replace_factor(m, i, g, Fraction(1)) for g in triple), "second-bianchi", h)
                if rel:
                    out.append(rel)
    return out


# ============================================================================
# Leibniz and commutation
# ============================================================================


def leibniz(
    outer: Sequence[str], first: SymbolFactor, second: SymbolFactor, h: HypothesisSet | None = None
) -> list[tuple[SymbolFactor, SymbolFactor]]:
    """∇_outer (first * second) distributed over both factors.

    Splits in which either factor vanishes under ``h`` are dropped.
    """
    out = []
    idx = range(len(outer))
    for r in range(len(outer) + 1):
        for chosen in itertools.combinations(idx, r):
            to_first = tuple(outer[k] for k in chosen)
            to_second = tuple(outer[k] for k in idx if k not in chosen)
            a = replace(first, deriv=to_first + first.deriv)
            b = replace(second, deriv=to_second + second.deriv)
            if h is not None and (h.vanishes(a) or h.vanishes(b)):
                continue
            out.append((a, b))
    return out


@dataclass(frozen=True)
class CommuteStep:
    """One move of the distinguished slot with its correction families.

    ``families`` maps "riem-sum" (the sum over later slots), "riem-ric" and
    "ric-ric" to the Leibniz-expanded correction monomials.
    """

    main: Monomial
    families: dict[str, tuple[Monomial, ...]]
    moved: bool


def distinguished_slot(f: SymbolFactor) -> int | None:
    """Position of the derivative slot contracted with the factor's own body."""
    for j, x in enumerate(f.deriv):
        if x in f.body:
            return j
    return None


def _top_factor(m: Monomial, h: HypothesisSet) -> int | None:
    for i, f in enumerate(m.factors):
        if f.kind == "Ric" and f.ordered and f.order == h.top_order:
            return i
    return None


def commute_step(m: Monomial, h: HypothesisSet) -> CommuteStep:
    empty: dict[str, tuple[Monomial, ...]] = {"riem-sum": (), "riem-ric": (), "ric-ric": ()}
    i = _top_factor(m, h)
    if i is None:
        return CommuteStep(m, empty, False)
    f = m.factors[i]
    k = distinguished_slot(f)
    if k is None or k == f.order - 1:
        return CommuteStep(m, empty, False)
    if len(m.factors) != 1:
        raise ValueError("Commutation is defined on single-symbol monomials")

    q = f.deriv[k]
    r = f.deriv[k + 1]
    outer = f.deriv[:k]
    tail = f.deriv[k + 2 :]
    s = f.body[1 - f.body.index(q)]
    p = next(fresh_labels(m.labels, prefix="_c"))

    swapped = f.deriv[:k] + (r, q) + tail
    main = m.with_factors((replace(f, deriv=swapped),))

    def expand(first: SymbolFactor, second: SymbolFactor) -> list[Monomial]:
        return [Monomial(m.coeff, pair) for pair in leibniz(outer, first, second, h)]

    riem_sum: list[Monomial] = []
    for t in tail:
        rest = tuple(x for x in tail if x != t)
        riem_sum += expand(
            SymbolFactor("Riem", (), (p, t, r, q)),
            SymbolFactor("Ric", rest + (p,), (s, q)),
        )
    riem_ric = expand(SymbolFactor("Riem", (), (p, s, r, q)), SymbolFactor("Ric", tail, (p, q)))
    ric_ric = expand(SymbolFactor("Ric", (), (r, p)), SymbolFactor("Ric", tail, (s, p)))
    families = {"riem-sum": tuple(riem_sum), "riem-ric": tuple(riem_ric), "ric-ric": tuple(ric_ric)}
    return CommuteStep(main, families, True)


def commute_top_order(e: Expression, h: HypothesisSet) -> tuple[Expression, bool]:
    """Move the distinguished slot of each top-order Ric one step to the right.

    Returns the new expression and whether any slot moved. Corrections are
    the curvature terms of the commutator, Leibniz-expanded over the outer
    derivatives. Expressions without a top-order ordered Ric come back
    unchanged with a warning.
    """
    if not any(_top_factor(m, h) is not None for m in e):
        logger.warning("commute_top_order called without an order-%d ordered Ric factor", h.top_order)
        return e, False
    out: list[Monomial] = []
    moved = False
    for m in e:
        step = commute_step(m, h)
        moved = moved or step.moved
        out.append(step.main)
        for fam in step.families.values():
            out.extend(fam)
    return Expression(tuple(out)), moved


def drop_commute_order(e: Expression) -> Expression:
    """Forget slot ordering once the distinguished slot has reached the end."""
    return Expression(tuple(m.with_factors(replace(f, commute_order=None) for f in m.factors) for m in e))


def simplify(e: Expression, h: HypothesisSet | None = None) -> Expression:
    """Trace rules followed by collection."""
    return collect(apply_trace_rules(e, h), h)
