"""Canonical keys under dummy renaming and monoterm symmetries."""

from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from cprover.canon import (
    RIEM_SYMMETRIES,
    as_key_map,
    canonical_class,
    canonical_key,
    canonicalize,
    collect,
    equal,
    first_difference,
    group_order,
)
from cprover.expr import Monomial, SymbolFactor, parse
from cprover.rules import HypothesisSet


def mono(text: str):
    return parse(text).monomials[0]


class TestRiemannSymmetries:
    """Antisymmetry, pair exchange and the zero flag."""

    @pytest.mark.parametrize(
        ("left", "right"),
        [
            ("Riem[a,b,c,d]", "- Riem[b,a,c,d]"),
            ("Riem[a,b,c,d]", "- Riem[a,b,d,c]"),
            ("Riem[a,b,c,d]", "Riem[c,d,a,b]"),
            ("Riem[a,b,c,d]", "Riem[d,c,b,a]"),
            ("Ric[a,b]", "Ric[b,a]"),
        ],
    )
    def test_monoterm_symmetries(self, left, right):
        assert equal(parse(left), parse(right))

    def test_antisymmetric_trace_is_zero(self):
        ck, rep = canonicalize(mono("Riem[a,a,b,b]"))
        assert ck.is_zero
        assert rep.coeff == 0

    def test_collect_drops_zero_flagged(self):
        assert not collect(parse("Riem[a,a,b,b]"))

    def test_group_order(self):
        assert group_order(mono("Riem[a,b,c,d] * Riem[a,b,c,d]")) == 8 * 8 * 2
        assert group_order(mono("Ric[a,b]")) == 2
        assert group_order(mono("Scal[]")) == 1


class TestDummyRenaming:
    """Keys ignore dummy names and factor order."""

    def test_dummy_names(self):
        a = canonical_key(mono("D[p] D[q] Ric[a,b] * D[p] D[q] Ric[a,b]"))
        b = canonical_key(mono("D[x] D[y] Ric[u,v] * D[x] D[y] Ric[u,v]"))
        assert a == b

    def test_factor_order(self):
        assert equal(parse("D[a] Ric[a,b] * D[b] Scal[]"), parse("D[b] Scal[] * D[a] Ric[a,b]"))

    def test_symmetric_derivatives_commute(self):
        assert equal(parse("D[x] D[y] Ric[x,z] * D[y] Ric[z,w]"), parse("D[y] D[x] Ric[x,z] * D[y] Ric[z,w]"))

    def test_ordered_derivatives_do_not_commute(self):
        f = mono("D[x] D[y] D[z] Ric[x,w] * Ric[y,z]")
        g = mono("D[y] D[x] D[z] Ric[x,w] * Ric[y,z]")
        assert canonical_key(f).key == canonical_key(g).key
        f_ord = f.with_factors((replace(f.factors[0], commute_order=1), f.factors[1]))
        g_ord = g.with_factors((replace(g.factors[0], commute_order=1), g.factors[1]))
        assert canonical_key(f_ord).key != canonical_key(g_ord).key

    def test_free_labels_are_kept(self):
        a = mono("D[x] Ric[a,b] * Ric[a,b]")
        b = mono("D[z] Ric[a,b] * Ric[a,b]")
        assert canonical_key(a) != canonical_key(b)
        assert canonical_key(a, anonymous_free=True) == canonical_key(b, anonymous_free=True)
        assert canonical_class(a)[0] == canonical_class(b)[0]

    def test_representative_renames_dummies(self):
        _, rep = canonicalize(mono("Ric[p,q] * Ric[p,q]"))
        assert rep.dummy_labels == {"_d0", "_d1"}
        assert rep.coeff == 1


class TestCollect:
    """Merging terms by key."""

    def test_merges_and_cancels(self):
        e = parse("Riem[a,b,c,d] * Riem[a,b,c,d] + Riem[b,a,d,c] * Riem[a,b,c,d] - 2 * Riem[c,d,a,b] * Riem[c,d,a,b]")
        assert not collect(e)

    def test_coefficients_add(self):
        keys = as_key_map(parse("Ric[a,b] * Ric[a,b] + 1/2 * Ric[b,a] * Ric[a,b]"))
        assert list(keys.values()) == [Fraction(3, 2)]

    def test_first_difference(self):
        a = parse("Ric[a,b] * Ric[a,b]")
        assert first_difference(a, a) is None
        assert first_difference(a, a.scale(2)).endswith(": -1")

    def test_order_bound(self):
        with pytest.raises(ValueError, match="exceeds"):
            canonicalize(mono("D[a] D[b] D[c] D[d] D[e] Scal[]"), HypothesisSet(1))


def random_riem_pair(rng: np.random.Generator) -> Monomial:
    """Riem x Riem with up to two derivatives each and a random contraction pattern."""
    orders = rng.integers(0, 3, size=2)
    slots = 8 + int(orders.sum())
    order = rng.permutation(slots)
    n_pairs = int(rng.integers(0, slots // 2 + 1))
    labels = [""] * slots
    for k in range(n_pairs):
        labels[order[2 * k]] = labels[order[2 * k + 1]] = f"m{k}"
    for k, s in enumerate(order[2 * n_pairs :]):
        labels[s] = f"f{k}"
    d1, d2 = int(orders[0]), int(orders[1])
    f1 = SymbolFactor("Riem", tuple(labels[:d1]), tuple(labels[d1 : d1 + 4]))
    rest = labels[d1 + 4 :]
    f2 = SymbolFactor("Riem", tuple(rest[:d2]), tuple(rest[d2:]))
    return Monomial(Fraction(1), (f1, f2))


def apply_symmetry(f: SymbolFactor, perm: tuple[int, ...], rng: np.random.Generator) -> SymbolFactor:
    deriv = tuple(f.deriv[i] for i in rng.permutation(len(f.deriv)))
    return replace(f, deriv=deriv, body=tuple(f.body[i] for i in perm))


class TestSignConsistency:
    """Keys and signs follow the monoterm symmetries on random monomials."""

    @pytest.mark.slow
    def test_random_riemann_pairs(self):
        rng = np.random.default_rng(20240101)
        zero_flags = 0
        for _ in range(10_000):
            m = random_riem_pair(rng)
            before = canonical_key(m)
            (p1, s1), (p2, s2) = (RIEM_SYMMETRIES[i] for i in rng.integers(0, len(RIEM_SYMMETRIES), size=2))
            factors = (apply_symmetry(m.factors[0], p1, rng), apply_symmetry(m.factors[1], p2, rng))
            if rng.integers(0, 2):
                factors = factors[::-1]
            moved = m.with_factors(factors)
            rename = {x: f"r{x}" for x in m.dummy_labels}
            after = canonical_key(moved.relabel(rename))
            assert after.key == before.key, (m.to_text(), moved.to_text())
            assert after.sign == before.sign * s1 * s2, (m.to_text(), moved.to_text())
            zero_flags += before.is_zero
        assert zero_flags > 0

    @pytest.mark.parametrize("seed", range(5))
    def test_canonicalize_is_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            m = random_riem_pair(rng)
            key, rep = canonicalize(m)
            if key.is_zero:
                continue
            again, rep2 = canonicalize(rep)
            assert again.key == key.key
            assert again.sign == 1
            assert rep2 == rep
