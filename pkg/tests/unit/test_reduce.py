"""Invariant tags, basis combinations and reduction to the basis."""

from fractions import Fraction

import pytest

from cprover.expr import parse
from cprover.reduce import (
    BasisCombination,
    InvariantTag,
    basis_tags,
    check_recursions,
    combination,
    expand_by_matchings,
    expand_gamma,
    formal_tags,
    normal_form,
    pattern,
    reduce_to_basis,
    relation_system,
)

T0 = InvariantTag("T", 0)
T1 = InvariantTag("T", 1)
M0 = InvariantTag("M", 0)
N0 = InvariantTag("N", 0)
R0 = InvariantTag("R", 0)


class TestTags:
    def test_names(self):
        assert str(T1) == "T_1"
        assert str(InvariantTag("T", 1, 3)) == "T^3_1"
        assert str(InvariantTag("M", 0, 2)) == "M^2"
        assert str(InvariantTag("T11", 1, 2)) == "T11^2"

    def test_final(self):
        assert T0.final
        assert not InvariantTag("T", 0, 2).final

    def test_laplacians(self):
        assert InvariantTag("T", 2).laplacians == (2, 2)
        assert InvariantTag("T", 1, 4).laplacians == (1, 0)
        assert InvariantTag("T11", 1, 4).laplacians == (1, 1)

    @pytest.mark.parametrize(("family", "ell"), [("Q", 0), ("T", -1)])
    def test_rejects(self, family, ell):
        with pytest.raises(ValueError):
            InvariantTag(family, ell)

    def test_basis(self):
        assert basis_tags(1) == [R0, T0, M0]
        assert basis_tags(2) == [R0, T0, T1, M0, N0]
        assert len(basis_tags(4)) == 1 + 3 + 2 + 2

    def test_formal_tags_add_riemann_laplacians(self):
        assert formal_tags(4)[-2:] == [InvariantTag("R", 1), InvariantTag("R", 2)]


class TestBasisCombination:
    """Exact arithmetic over tags."""

    def test_text(self):
        assert str(combination((1, T0), (-3, M0))) == "T_0 - 3*M_0"
        assert str(combination((Fraction(1, 2), N0), (-1, R0))) == "-R_0 + 1/2*N_0"
        assert str(BasisCombination.zero()) == "0"

    def test_cancellation(self):
        a = combination((2, T0), (1, M0))
        assert not a - a
        assert a + a == a * 2 == 2 * a

    def test_coefficient(self):
        a = combination((2, T0), (1, T0), (5, M0))
        assert a.coefficient(T0) == 3
        assert a.coefficient(N0) == 0
        assert a.tags == (T0, M0)

    def test_sorted_by_family(self):
        a = combination((1, N0), (1, T1), (1, R0), (1, T0))
        assert a.tags == (R0, T0, T1, N0)


class TestClosedForms:
    """Partially traced families against the matching count."""

    def test_t_gamma_two(self):
        assert expand_gamma(InvariantTag("T", 0, 2)) == combination((16, T0), (8, T1))

    @pytest.mark.parametrize(
        "tag",
        [InvariantTag("T", 0, g) for g in range(5)] + [InvariantTag("T", 1, g) for g in range(4)] + [InvariantTag("T11", 1, 3)],
    )
    def test_closed_form_matches_matchings(self, tag):
        assert expand_gamma(tag) == expand_by_matchings(tag)

    def test_final_tag_is_fixed(self):
        assert expand_gamma(T1) == BasisCombination.single(T1)

    def test_recursions(self):
        report = check_recursions(8)
        assert report.passed, [i.name for i in report.failures()]

    def test_recursions_need_two(self):
        with pytest.raises(ValueError):
            check_recursions(1)


class TestReduction:
    """Reduction of contracted quadratic expressions over {R_0, T_ℓ, M_ℓ, N_ℓ}."""

    @pytest.mark.parametrize("tag", [R0, T0, T1, M0, N0])
    def test_basis_patterns_reduce_to_themselves(self, h2, tag):
        assert reduce_to_basis(pattern(tag, 2), h2) == BasisCombination.single(tag)

    def test_scaled_pattern(self, h2):
        e = pattern(T0, 2).scale(Fraction(3, 2)) - pattern(M0, 2)
        assert reduce_to_basis(e, h2) == combination((Fraction(3, 2), T0), (-1, M0))

    def test_pair_exchange_is_invisible(self, h1):
        e = parse("D[k] Ric[a,b] * D[k] Ric[a,b] - D[k] Ric[b,a] * D[k] Ric[a,b]")
        assert not reduce_to_basis(e, h1)

    def test_vanishing_terms_are_dropped(self, h2):
        assert not reduce_to_basis(parse("D[k] Ric[a,b] * D[k] Ric[a,b]"), h2)

    def test_rejects_free_labels(self, h1):
        with pytest.raises(ValueError, match="fully contracted"):
            reduce_to_basis(parse("D[k] Ric[a,b] * D[k] Ric[a,c]"), h1)

    def test_rejects_wrong_order(self, h2):
        with pytest.raises(ValueError, match="total order"):
            reduce_to_basis(parse("D[k] D[l] D[m] Ric[a,b] * D[k] D[l] D[m] Ric[a,b]"), h2)

    def test_system_is_cached(self):
        assert relation_system(2) is relation_system(2)
        assert relation_system(2).stats["pivots"] > 0

    def test_normal_form_expands_gamma(self, h2):
        got = normal_form(BasisCombination.single(InvariantTag("T", 0, 2)), h2)
        assert got == combination((16, T0), (8, T1))
