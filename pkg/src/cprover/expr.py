"""
Abstract-index tensor expressions.

A monomial is an exact rational coefficient times at most two curvature
factors (Riem, Ric, Scal), each carrying a run of covariant derivative slots
and its body slots. A label that occurs once is free, a label that occurs
twice is contracted (Einstein convention); the metric is the identity at the
base point, so no index is raised or lowered.

Text grammar (whitespace-insensitive):

    expr     := term (('+'|'-') term)*
    term     := [rational '*'] factor ('*' factor)*
    factor   := deriv* head ['@' integer] '[' labels ']'
    deriv    := 'D[' label ']'
    head     := 'Riem' | 'Ric' | 'Scal'
    rational := integer ['/' positive-integer]

The optional ``@k`` suffix is the factor's ``commute_order``.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction]

BODY_ARITY = {"Riem": 4, "Ric": 2, "Scal": 0}
KIND_RANK = {"Riem": 0, "Ric": 1, "Scal": 2}
MAX_FACTORS = 2


class ExpressionSyntaxError(ValueError):
    """Malformed expression text; ``position`` is the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class IndexOccurrenceError(ValueError):
    """A label occurs more than twice, or free labels differ between terms."""


class ArityError(ValueError):
    """Body-slot count does not match the symbol kind."""


# ============================================================================
# Domain types
# ============================================================================


@dataclass(frozen=True)
class SymbolFactor:
    """One curvature symbol with its derivative and body slots.

    ``commute_order`` caps the derivative order up to which the derivative
    slots are totally symmetric. ``None`` means always symmetric; a factor
    with more derivative slots than ``commute_order`` keeps their order.
    """

    kind: str
    deriv: tuple[str, ...] = ()
    body: tuple[str, ...] = ()
    commute_order: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in BODY_ARITY:
            raise ArityError(f"Unknown symbol kind: {self.kind}")
        if len(self.body) != BODY_ARITY[self.kind]:
            raise ArityError(f"{self.kind} takes {BODY_ARITY[self.kind]} body slots, got {len(self.body)}")

    @property
    def order(self) -> int:
        return len(self.deriv)

    @property
    def ordered(self) -> bool:
        """True when the derivative slots do not commute."""
        return self.commute_order is not None and len(self.deriv) > self.commute_order

    @property
    def labels(self) -> tuple[str, ...]:
        return self.deriv + self.body

    def relabel(self, mapping: Mapping[str, str]) -> SymbolFactor:
        return replace(
            self,
            deriv=tuple(mapping.get(x, x) for x in self.deriv),
            body=tuple(mapping.get(x, x) for x in self.body),
        )

    def to_text(self) -> str:
        derivs = "".join(f"D[{x}] " for x in self.deriv)
        cap = "" if self.commute_order is None else f"@{self.commute_order}"
        return f"{derivs}{self.kind}{cap}[{','.join(self.body)}]"


@dataclass(frozen=True)
class Monomial:
    """Exact coefficient times a product of one or two symbol factors."""

    coeff: Fraction
    factors: tuple[SymbolFactor, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.coeff, Fraction):
            object.__setattr__(self, "coeff", Fraction(self.coeff))
        if not 1 <= len(self.factors) <= MAX_FACTORS:
            raise ArityError(f"Monomials carry 1 or {MAX_FACTORS} factors, got {len(self.factors)}")
        counts = label_counts(self.factors)
        over = sorted(x for x, n in counts.items() if n > 2)
        if over:
            raise IndexOccurrenceError(f"Label(s) {', '.join(over)} occur more than twice")

    @property
    def free_labels(self) -> frozenset[str]:
        return frozenset(x for x, n in label_counts(self.factors).items() if n == 1)

    @property
    def dummy_labels(self) -> frozenset[str]:
        return frozenset(x for x, n in label_counts(self.factors).items() if n == 2)

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(label_counts(self.factors))

    @property
    def total_order(self) -> int:
        return sum(f.order for f in self.factors)

    def relabel(self, mapping: Mapping[str, str]) -> Monomial:
        return Monomial(self.coeff, tuple(f.relabel(mapping) for f in self.factors))

    def scale(self, c: Scalar) -> Monomial:
        return Monomial(self.coeff * c, self.factors)

    def with_factors(self, factors: Iterable[SymbolFactor], coeff: Scalar | None = None) -> Monomial:
        return Monomial(self.coeff if coeff is None else Fraction(coeff), tuple(factors))

    def to_text(self) -> str:
        body = " * ".join(f.to_text() for f in self.factors)
        mag = abs(self.coeff)
        return body if mag == 1 else f"{mag} * {body}"


def label_counts(factors: Iterable[SymbolFactor]) -> Counter:
    counts: Counter = Counter()
    for f in factors:
        counts.update(f.labels)
    return counts


@dataclass(frozen=True)
class Expression:
    """An immutable sum of monomials sharing one free-label set."""

    monomials: tuple[Monomial, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not isinstance(self.monomials, tuple):
            object.__setattr__(self, "monomials", tuple(self.monomials))
        if self.monomials:
            free = self.monomials[0].free_labels
            for m in self.monomials[1:]:
                if m.free_labels != free:
                    raise IndexOccurrenceError(
                        f"Free labels differ between terms: {sorted(free)} vs {sorted(m.free_labels)}"
                    )

    @classmethod
    def of(cls, *monomials: Monomial) -> Expression:
        return cls(tuple(monomials))

    @classmethod
    def zero(cls) -> Expression:
        return cls(())

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)

    def __bool__(self) -> bool:
        return bool(self.monomials)

    @property
    def free_labels(self) -> frozenset[str]:
        return self.monomials[0].free_labels if self.monomials else frozenset()

    @property
    def labels(self) -> frozenset[str]:
        out: set[str] = set()
        for m in self.monomials:
            out |= m.labels
        return frozenset(out)

    def __add__(self, other: Expression) -> Expression:
        return Expression(self.monomials + other.monomials)

    def __sub__(self, other: Expression) -> Expression:
        return self + (-other)

    def __neg__(self) -> Expression:
        return self.scale(-1)

    def scale(self, c: Scalar) -> Expression:
        if c == 0:
            return Expression.zero()
        return Expression(tuple(m.scale(c) for m in self.monomials))

    def __rmul__(self, c: Scalar) -> Expression:
        return self.scale(c)

    def __mul__(self, other: Expression | Scalar) -> Expression:
        if isinstance(other, Expression):
            return multiply(self, other)
        return self.scale(other)

    def relabel(self, mapping: Mapping[str, str]) -> Expression:
        return Expression(tuple(m.relabel(mapping) for m in self.monomials))

    def to_text(self) -> str:
        return to_text(self)

    def __str__(self) -> str:
        return to_text(self)


def multiply(a: Expression, b: Expression) -> Expression:
    """Product of two expressions; shared free labels become contractions."""
    out = []
    for ma in a:
        for mb in b:
            fresh = fresh_labels(ma.labels | mb.labels)
            ma2 = ma.relabel({x: next(fresh) for x in sorted(ma.dummy_labels & mb.free_labels)})
            mb2 = mb.relabel({x: next(fresh) for x in sorted(mb.dummy_labels & ma2.labels)})
            out.append(Monomial(ma2.coeff * mb2.coeff, ma2.factors + mb2.factors))
    return Expression(tuple(out))


def fresh_labels(used: Iterable[str], prefix: str = "_") -> Iterator[str]:
    """Yield labels ``_0, _1, ...`` that do not collide with ``used``."""
    taken = set(used)
    n = 0
    while True:
        name = f"{prefix}{n}"
        n += 1
        if name not in taken:
            taken.add(name)
            yield name


def factor(kind: str, body: Iterable[str] = (), deriv: Iterable[str] = (), commute_order: int | None = None) -> SymbolFactor:
    return SymbolFactor(kind, tuple(deriv), tuple(body), commute_order)


def term(coeff: Scalar, *factors: SymbolFactor) -> Expression:
    return Expression.of(Monomial(Fraction(coeff), tuple(factors)))


# ============================================================================
# Printer
# ============================================================================


def to_text(e: Expression) -> str:
    if not e.monomials:
        return "0"
    parts = []
    for i, m in enumerate(e.monomials):
        sign = "-" if m.coeff < 0 else "+"
        text = m.to_text()
        if i == 0:
            parts.append(f"- {text}" if sign == "-" else text)
        else:
            parts.append(f" {sign} {text}")
    return "".join(parts)


# ============================================================================
# Parser
# ============================================================================

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[\[\],*+/@-]))")
_SPACE = re.compile(r"\s*")


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        pos = _SPACE.match(text, pos).end()
        if pos >= len(text):
            break
        match = _TOKEN.match(text, pos)
        if not match:
            raise ExpressionSyntaxError(f"Unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup or "op"
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def take(self, text: str | None = None, kind: str | None = None) -> _Token:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            wanted = repr(text) if text is not None else kind
            found = repr(tok.text) if tok.kind != "end" else "end of input"
            raise ExpressionSyntaxError(f"Expected {wanted}, found {found}", tok.pos)
        self.i += 1
        return tok

    def expression(self) -> Expression:
        monomials = []
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sign = -1 if self.take().text == "-" else 1
        monomials.append(self.term(sign))
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            sign = -1 if self.take().text == "-" else 1
            monomials.append(self.term(sign))
        self.take(kind="end")
        return Expression(tuple(monomials))

    def term(self, sign: int) -> Monomial:
        coeff = Fraction(1)
        if self.tok.kind == "num":
            coeff = self.rational()
            self.take("*")
        factors = [self.factor()]
        while self.tok.text == "*":
            self.take("*")
            factors.append(self.factor())
        return Monomial(sign * coeff, tuple(factors))

    def rational(self) -> Fraction:
        num = int(self.take(kind="num").text)
        if self.tok.text == "/":
            self.take("/")
            tok = self.take(kind="num")
            den = int(tok.text)
            if den == 0:
                raise ExpressionSyntaxError("Zero denominator", tok.pos)
            return Fraction(num, den)
        return Fraction(num)

    def factor(self) -> SymbolFactor:
        deriv = []
        while self.tok.kind == "name" and self.tok.text == "D":
            self.take()
            self.take("[")
            deriv.append(self.take(kind="name").text)
            self.take("]")
        head = self.take(kind="name")
        if head.text not in BODY_ARITY:
            raise ExpressionSyntaxError(f"Unknown head {head.text!r}", head.pos)
        commute_order = None
        if self.tok.text == "@":
            self.take("@")
            commute_order = int(self.take(kind="num").text)
        self.take("[")
        body = []
        if self.tok.text != "]":
            body.append(self.take(kind="name").text)
            while self.tok.text == ",":
                self.take(",")
                body.append(self.take(kind="name").text)
        self.take("]")
        return SymbolFactor(head.text, tuple(deriv), tuple(body), commute_order)


def parse(text: str) -> Expression:
    """Parse expression text; ``"0"`` is the empty expression."""
    if text.strip() == "0":
        return Expression.zero()
    return _Parser(text).expression()
