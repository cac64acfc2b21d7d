"""
Reduction of quadratic curvature invariants to the normal basis.

Every fully contracted expression quadratic in the ω-jets of the curvature is
rewritten in Riemann-only form (Ric_bd = R_abad), its canonical keys are
closed under the first and second Bianchi relations, and the resulting sparse
linear system is eliminated over exact rationals with the basis columns
{R_0, T_ℓ, M_ℓ, N_ℓ} ranked last. A non-basis column left without a pivot is
reported as irreducible instead of being absorbed.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .canon import canonicalize, collect
from .comb import binom, d, double_factorial, e
from .expr import Expression, Monomial, SymbolFactor, fresh_labels
from .report import CheckReport, ReportItem, exact_item
from .rules import HypothesisSet, LinearRelation, first_bianchi_closure, second_bianchi_relations, tr_sym

logger = logging.getLogger(__name__)

FAMILIES = ("R", "T", "M", "N", "T11")
FAMILY_RANK = {f: i for i, f in enumerate(FAMILIES)}


class IrreducibleError(RuntimeError):
    """Elimination left a non-basis key without a pivot."""

    def __init__(self, key: str, monomial: str):
        super().__init__(f"Irreducible key {key} ({monomial})")
        self.key = key
        self.monomial = monomial


class BasisDependencyError(RuntimeError):
    """A relation among basis elements alone was derived."""


# ============================================================================
# Tags and combinations
# ============================================================================


@dataclass(frozen=True)
class InvariantTag:
    """Basis element (``gamma`` None) or partially traced family member.

    For ``gamma`` set, ``ell`` is the Laplacian power on the first factor;
    family ``T11`` carries one Laplacian on each factor.
    """

    family: str
    ell: int = 0
    gamma: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILY_RANK:
            raise ValueError(f"Unknown invariant family: {self.family}")
        if self.ell < 0:
            raise ValueError(f"ell must be nonnegative, got {self.ell}")

    @property
    def final(self) -> bool:
        return self.gamma is None

    @property
    def laplacians(self) -> tuple[int, int]:
        """Laplacian powers (first factor, second factor)."""
        if self.gamma is None:
            return self.ell, self.ell
        if self.family == "T11":
            return 1, 1
        return self.ell, 0

    def sort_key(self) -> tuple[int, int, int, int]:
        return (FAMILY_RANK[self.family], self.gamma is not None, self.gamma or 0, self.ell)

    def __str__(self) -> str:
        if self.gamma is None:
            return f"{self.family}_{self.ell}"
        if self.family == "T11":
            return f"T11^{self.gamma}"
        return f"{self.family}^{self.gamma}" + (f"_{self.ell}" if self.ell else "")


@dataclass(frozen=True)
class BasisCombination:
    """Exact rational combination of invariant tags, zeros dropped, sorted."""

    terms: tuple[tuple[InvariantTag, Fraction], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[InvariantTag, Fraction | int] | Iterable[tuple[InvariantTag, Fraction | int]]) -> BasisCombination:
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        acc: dict[InvariantTag, Fraction] = {}
        for tag, c in items:
            acc[tag] = acc.get(tag, Fraction(0)) + Fraction(c)
        return cls(tuple(sorted(((t, c) for t, c in acc.items() if c != 0), key=lambda tc: tc[0].sort_key())))

    @classmethod
    def zero(cls) -> BasisCombination:
        return cls()

    @classmethod
    def single(cls, tag: InvariantTag, coeff: Fraction | int = 1) -> BasisCombination:
        return cls.of({tag: coeff})

    def as_dict(self) -> dict[InvariantTag, Fraction]:
        return dict(self.terms)

    def coefficient(self, tag: InvariantTag) -> Fraction:
        return self.as_dict().get(tag, Fraction(0))

    @property
    def tags(self) -> tuple[InvariantTag, ...]:
        return tuple(t for t, _ in self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: BasisCombination) -> BasisCombination:
        return BasisCombination.of(self.terms + other.terms)

    def __sub__(self, other: BasisCombination) -> BasisCombination:
        return self + (-other)

    def __neg__(self) -> BasisCombination:
        return self.scale(-1)

    def scale(self, c: Fraction | int) -> BasisCombination:
        return BasisCombination.of((t, v * c) for t, v in self.terms)

    def __mul__(self, c: Fraction | int) -> BasisCombination:
        return self.scale(c)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, (tag, c) in enumerate(self.terms):
            mag = abs(c)
            body = str(tag) if mag == 1 else f"{mag}*{tag}"
            if i == 0:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(parts)


def combination(*pairs: tuple[Fraction | int, InvariantTag]) -> BasisCombination:
    return BasisCombination.of((t, c) for c, t in pairs)


def basis_tags(omega: int) -> list[InvariantTag]:
    """R_0, T_ℓ (ℓ ≤ ω/2), M_ℓ (ℓ ≤ (ω-1)/2), N_ℓ (ℓ ≤ (ω-2)/2)."""
    tags = [InvariantTag("R", 0)]
    tags += [InvariantTag("T", ell) for ell in range(omega // 2 + 1)]
    if omega >= 1:
        tags += [InvariantTag("M", ell) for ell in range((omega - 1) // 2 + 1)]
    if omega >= 2:
        tags += [InvariantTag("N", ell) for ell in range((omega - 2) // 2 + 1)]
    return tags


def formal_tags(omega: int) -> list[InvariantTag]:
    """Basis tags plus R_ℓ for ℓ ≥ 1, the formal spanning set of the cone checks."""
    return basis_tags(omega) + [InvariantTag("R", ell) for ell in range(1, omega // 2 + 1)]


# ============================================================================
# Patterns
# ============================================================================


def _run(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{k}" for k in range(1, n + 1))


def _laplacian(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(x for p in _run(prefix, n) for x in (p, p))


# derivative slots beyond I/J/K per family, and the body of each factor
_FAMILY_SHAPE: dict[str, tuple[str, tuple[str, ...], tuple[str, ...], tuple[str, ...], tuple[str, ...]]] = {
    "T": ("Ric", (), (), ("a", "b"), ("a", "b")),
    "T11": ("Ric", (), (), ("a", "b"), ("a", "b")),
    "M": ("Ric", ("p",), ("a",), ("a", "b"), ("p", "b")),
    "N": ("Ric", ("p", "q"), ("a", "b"), ("a", "b"), ("p", "q")),
    "R": ("Riem", (), (), ("a", "c", "e", "b"), ("a", "c", "e", "b")),
}


def raw_pattern(tag: InvariantTag, omega: int) -> tuple[Monomial, tuple[str, ...]] | None:
    """Untraced monomial of ``tag`` and the labels Tr Sym runs over.

    With Laplacian powers (ℓ0, ℓ1) on the two factors, |I| = γ and
    |J| = γ + 2(ℓ0 - ℓ1); None when the tag is out of range.
    """
    kind, extra1, extra2, body1, body2 = _FAMILY_SHAPE[tag.family]
    l0, l1 = tag.laplacians
    gamma = tag.gamma or 0
    n_i = gamma
    n_j = gamma + 2 * (l0 - l1)
    n_k = omega - gamma - 2 * l0 - len(extra1)
    if n_k < 0 or n_j < 0:
        return None
    eye, jay, kay = _run("i", n_i), _run("j", n_j), _run("k", n_k)
    f1 = SymbolFactor(kind, eye + kay + extra1 + _laplacian("u", l0), body1)
    f2 = SymbolFactor(kind, jay + kay + extra2 + _laplacian("v", l1), body2)
    return Monomial(Fraction(1), (f1, f2)), eye + jay


def pattern(tag: InvariantTag, omega: int) -> Expression:
    """Expression defining ``tag`` at ``omega``; empty when out of range."""
    raw = raw_pattern(tag, omega)
    if raw is None:
        return Expression.zero()
    mono, labels = raw
    e = Expression.of(mono)
    return tr_sym(e, labels) if labels else e


# ============================================================================
# Closed forms
# ============================================================================


def trace_weight(n_i: int, n_j: int, a: int) -> int:
    """Weight of the matchings of Tr Sym over I ∪ J with exactly ``a`` I-J pairs."""
    if (n_i - a) % 2 or (n_j - a) % 2 or a < 0 or a > min(n_i, n_j):
        return 0
    m = (n_i + n_j) // 2
    pairs = binom(n_i, a) * binom(n_j, a) * factorial(a)
    return 2**m * factorial(m) * pairs * double_factorial(n_i - a - 1) * double_factorial(n_j - a - 1)


def expand_by_matchings(tag: InvariantTag) -> BasisCombination:
    """Expansion of a partially traced tag by counting pair types directly."""
    if tag.gamma is None:
        return BasisCombination.single(tag)
    if tag.gamma < 0:
        return BasisCombination.zero()
    family = "T" if tag.family == "T11" else tag.family
    l0, l1 = tag.laplacians
    n_i, n_j = tag.gamma, tag.gamma + 2 * (l0 - l1)
    if n_j < 0:
        return BasisCombination.zero()
    out: dict[InvariantTag, Fraction] = {}
    for a in range(min(n_i, n_j) + 1):
        w = trace_weight(n_i, n_j, a)
        if w:
            ell = l0 + (n_i - a) // 2
            out[InvariantTag(family, ell)] = out.get(InvariantTag(family, ell), Fraction(0)) + w
    return BasisCombination.of(out)


def expand_gamma(tag: InvariantTag) -> BasisCombination:
    """Closed-form expansion over final tags of the same family.

    X^γ = Σ d^γ_ℓ X_ℓ, X^{γ-2}_1 = Σ e^γ_{ℓ-1} X_ℓ, T^{γ-2}_{1,1} = Σ d^{γ-2}_{ℓ-1} T_ℓ;
    higher Laplacian powers fall back to the matching count.
    """
    if tag.gamma is None:
        return BasisCombination.single(tag)
    g = tag.gamma
    if g < 0:
        return BasisCombination.zero()
    if tag.family == "T11":
        return BasisCombination.of((InvariantTag("T", ell), d(g, ell - 1)) for ell in range(1, g // 2 + 2))
    if tag.ell == 0:
        return BasisCombination.of((InvariantTag(tag.family, ell), d(g, ell)) for ell in range(g // 2 + 1))
    if tag.ell == 1:
        return BasisCombination.of((InvariantTag(tag.family, ell), e(g + 2, ell - 1)) for ell in range(1, (g + 2) // 2 + 1))
    return expand_by_matchings(tag)


def check_recursions(gamma_max: int) -> CheckReport:
    """Closed forms against the matching count, and the three recursions in γ."""
    if gamma_max < 2:
        raise ValueError("gamma_max must be >= 2")

    def T(g: int, ell: int = 0) -> BasisCombination:
        return expand_gamma(InvariantTag("T", ell, g))

    def T11(g: int) -> BasisCombination:
        return expand_gamma(InvariantTag("T11", 1, g))

    items: list[ReportItem] = []
    for g in range(0, gamma_max + 1):
        for tag in (InvariantTag("T", 0, g), InvariantTag("T", 1, g), InvariantTag("T11", 1, g)):
            items.append(exact_item(f"closed-form[{tag}]", expand_by_matchings(tag), expand_gamma(tag)))
    for g in range(2, gamma_max + 1):
        rhs = T(g - 2, 1).scale(2 * g * (g - 1)) + T(g - 1).scale(2 * g * g)
        items.append(exact_item(f"ind-T[gamma={g}]", T(g), rhs))
        if g >= 3:
            rhs = T(g - 3, 1).scale(2 * g * (g - 1)) + expand_by_matchings(InvariantTag("T", 2, g - 4)).scale(2 * (g - 3) * (g - 1))
            items.append(exact_item(f"ind-T1[gamma={g}]", T(g - 2, 1), rhs))
        rhs = T(g - 3, 1).scale(2 * (g - 1) * (g - 2)) + T11(g - 2).scale(2 * (g - 1) ** 2)
        items.append(exact_item(f"ind-T11[gamma={g}]", T(g - 2, 1), rhs))
    return CheckReport.build(
        "recursions",
        None,
        "T^γ = 2γ(γ-1)T^{γ-2}_1 + 2γ²T^{γ-1}; T^γ = Σ d^γ_ℓ T_ℓ",
        items,
    )


# ============================================================================
# Relation system
# ============================================================================


def to_riemann_form(m: Monomial) -> Monomial:
    """Rewrite Ric and Scal as traces of Riem; drop slot ordering."""
    names = fresh_labels(m.labels, prefix="_t")
    out = []
    for f in m.factors:
        if f.kind == "Ric":
            t = next(names)
            out.append(SymbolFactor("Riem", f.deriv, (t, f.body[0], t, f.body[1])))
        elif f.kind == "Scal":
            t, u = next(names), next(names)
            out.append(SymbolFactor("Riem", f.deriv, (t, u, t, u)))
        else:
            out.append(SymbolFactor("Riem", f.deriv, f.body))
    return m.with_factors(out)


def _scal_type(m: Monomial) -> bool:
    for f in m.factors:
        b = f.body
        if (b[0] == b[2] and b[1] == b[3]) or (b[0] == b[3] and b[1] == b[2]):
            return True
    return False


class RelationSystem:
    """Growing closure of canonical keys with an echelon form over Fractions."""

    def __init__(self, omega: int, vanish_scal: bool = True):
        self.omega = omega
        self.vanish_scal = vanish_scal
        self.representatives: dict[str, Monomial] = {}
        self.expanded: set[str] = set()
        self.pivots: dict[str, dict[str, Fraction]] = {}
        self.relation_count = 0
        self.basis: dict[str, tuple[InvariantTag, Fraction]] = {}
        for tag in basis_tags(omega):
            raw = raw_pattern(tag, omega)
            if raw is None:
                continue
            ck, rep = canonicalize(to_riemann_form(raw[0]))
            if ck.is_zero:
                logger.warning("Basis element %s vanishes identically at omega=%d", tag, omega)
                continue
            self.basis[ck.key] = (tag, rep.coeff)
            self.representatives[ck.key] = rep.with_factors(rep.factors, 1)
        self.extend(list(self.basis))
        logger.info(
            "relation system omega=%d: %d keys, %d relations, %d pivots",
            omega,
            len(self.representatives),
            self.relation_count,
            len(self.pivots),
        )

    @property
    def stats(self) -> dict[str, int]:
        return {"keys": len(self.representatives), "relations": self.relation_count, "pivots": len(self.pivots)}

    def _rank(self, key: str) -> tuple[int, object]:
        if key in self.basis:
            return (1, self.basis[key][0].sort_key())
        return (0, key)

    def _relations_at(self, key: str) -> list[LinearRelation]:
        rep = self.representatives[key]
        if self.vanish_scal and _scal_type(rep):
            return [LinearRelation("scal", {key: Fraction(1)}, {key: rep})]
        return first_bianchi_closure([rep]) + second_bianchi_relations(rep)

    def extend(self, keys: Iterable[str]) -> None:
        queue = deque(k for k in keys if k not in self.expanded)
        while queue:
            key = queue.popleft()
            if key in self.expanded:
                continue
            self.expanded.add(key)
            for rel in self._relations_at(key):
                for k, rep in rel.representatives.items():
                    if k not in self.representatives:
                        self.representatives[k] = rep
                    if k not in self.expanded:
                        queue.append(k)
                self._add_row(dict(rel.terms))

    def _eliminate(self, row: dict[str, Fraction], col: str) -> None:
        c = row[col]
        for k, v in self.pivots[col].items():
            nv = row.get(k, Fraction(0)) - c * v
            if nv:
                row[k] = nv
            else:
                row.pop(k, None)

    def _add_row(self, row: dict[str, Fraction]) -> None:
        self.relation_count += 1
        while row:
            col = min(row, key=self._rank)
            if col not in self.pivots:
                break
            self._eliminate(row, col)
        if not row:
            return
        col = min(row, key=self._rank)
        if col in self.basis:
            text = ", ".join(f"{row[k]}*{self.basis[k][0]}" for k in sorted(row, key=self._rank))
            raise BasisDependencyError(f"Derived a relation among basis elements: {text}")
        lead = row[col]
        self.pivots[col] = {k: v / lead for k, v in row.items()}

    def reduce_keys(self, vec: Mapping[str, Fraction]) -> BasisCombination:
        work = {k: v for k, v in vec.items() if v}
        for k in work:
            if k not in self.representatives:
                raise KeyError(f"Unregistered key {k}")
        self.extend(list(work))
        while True:
            rest = [k for k in work if k not in self.basis]
            if not rest:
                break
            col = min(rest, key=self._rank)
            if col not in self.pivots:
                raise IrreducibleError(col, self.representatives[col].to_text())
            self._eliminate(work, col)
        out: dict[InvariantTag, Fraction] = {}
        for k, v in work.items():
            tag, sign = self.basis[k]
            out[tag] = v / sign
        return BasisCombination.of(out)

    def reduce(self, e: Expression) -> BasisCombination:
        vec: dict[str, Fraction] = {}
        for m in e:
            ck, rep = canonicalize(to_riemann_form(m))
            if ck.is_zero:
                continue
            self.representatives.setdefault(ck.key, rep.with_factors(rep.factors, 1))
            vec[ck.key] = vec.get(ck.key, Fraction(0)) + rep.coeff
        return self.reduce_keys(vec)


@lru_cache(maxsize=16)
def relation_system(omega: int, vanish_scal: bool = True) -> RelationSystem:
    return RelationSystem(omega, vanish_scal)


def _prepare(e: Expression, h: HypothesisSet) -> Expression:
    if e.free_labels:
        raise ValueError(f"reduce_to_basis needs a fully contracted expression, free: {sorted(e.free_labels)}")
    out = []
    for m in e:
        if any(h.vanishes(f) for f in m.factors):
            continue
        if len(m.factors) != 2 or m.total_order != 2 * h.omega:
            raise ValueError(f"Expected two factors of total order {2 * h.omega}: {m.to_text()}")
        out.append(m)
    return Expression(tuple(out))


def reduce_to_basis(e: Expression, h: HypothesisSet) -> BasisCombination:
    """Express ``e`` over {R_0, T_ℓ, M_ℓ, N_ℓ} using only the Bianchi identities and ``h``."""
    e = collect(_prepare(e, h))
    system = relation_system(h.omega, h.vanish_scal_omega)
    return system.reduce(e)


def normal_form(comb: BasisCombination, h: HypothesisSet) -> BasisCombination:
    """Expand partially traced tags and reduce R_ℓ (ℓ ≥ 1) to the basis."""
    out = BasisCombination.zero()
    for tag, c in comb.terms:
        for t, v in expand_gamma(tag).terms:
            if t.family == "R" and t.ell >= 1:
                out = out + reduce_to_basis(pattern(t, h.omega), h).scale(c * v)
            else:
                out = out + BasisCombination.single(t, c * v)
    return out
