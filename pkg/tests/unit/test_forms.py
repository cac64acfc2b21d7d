"""Closed-form displays and the cone tests."""

from fractions import Fraction

import pytest

from cprover.proofs.forms import (
    ConeLine,
    T,
    X,
    b_value,
    cone_decomposition,
    cone_failures,
    expand,
    final,
    final_excess,
    laplacian_margin,
    lower_bound,
    modulo_sym_ric,
    over_ell,
    qr_remainder,
    ratio_interval,
    sym_ric_cone_failures,
    sym_ric_lines,
    u_closed,
    x_final,
)
from cprover.reduce import BasisCombination, InvariantTag


class TestCone:
    """Coordinates in the cone spanned by T_ℓ, T_ℓ - M_ℓ and T_ℓ - 2M_ℓ + N_ℓ."""

    @pytest.mark.parametrize(
        ("comb", "line"),
        [
            (final("T", 0), ConeLine(0, Fraction(1), Fraction(0), Fraction(0))),
            (final("T", 1) - final("M", 1), ConeLine(1, Fraction(0), Fraction(1), Fraction(0))),
            (x_final(0), ConeLine(0, Fraction(0), Fraction(0), Fraction(1))),
        ],
    )
    def test_generators(self, comb, line):
        lines, r_part = cone_decomposition(comb)
        assert lines == [line]
        assert r_part == {}

    def test_m_alone_is_outside(self):
        assert cone_failures(final("M", 0))

    def test_r_coefficients(self):
        assert not cone_failures(final("R", 0) * 3)
        assert cone_failures(final("R", 1) * -1) == ["R_1: -1"]

    def test_needs_final_tags(self):
        with pytest.raises(ValueError, match="final tags"):
            cone_failures(T(2))

    @pytest.mark.parametrize("omega", [2, 3, 4, 5, 6])
    def test_lower_bound_in_cone(self, omega):
        assert not cone_failures(expand(lower_bound(omega)))

    @pytest.mark.parametrize("omega", [2, 3, 4, 5, 6])
    def test_remainder_in_cone(self, omega):
        assert not cone_failures(expand(qr_remainder(omega)))

    @pytest.mark.parametrize("omega", [2, 3, 4, 6])
    def test_final_excess_in_cone(self, omega):
        assert not cone_failures(expand(final_excess(omega)))


class TestSymRic:
    """Elimination through 2T_ℓ + j((j-1)N_ℓ + 4M_ℓ) = 0 with j = ω - 2ℓ."""

    def test_interval(self):
        assert ratio_interval(4) == (Fraction(-1), Fraction(1))
        assert ratio_interval(5) == (Fraction(-2, 3), Fraction(1, 3))

    def test_interval_needs_four(self):
        with pytest.raises(ValueError):
            ratio_interval(3)

    def test_eliminates_n(self):
        got = modulo_sym_ric(final("N", 0), 2)
        assert got == final("T", 0) * -1 - final("M", 0) * 4

    def test_eliminates_m_at_odd_gap(self):
        assert modulo_sym_ric(final("M", 0), 1) == final("T", 0) * Fraction(-1, 2)

    def test_drops_t_at_zero_gap(self):
        assert not modulo_sym_ric(final("T", 1), 2)

    def test_relation_is_zero(self):
        for omega in range(2, 7):
            for ell in range(0, (omega - 2) // 2 + 1):
                j = omega - 2 * ell
                rel = final("T", ell) * 2 + (final("N", ell) * (j - 1) + final("M", ell) * 4) * j
                assert not modulo_sym_ric(rel, omega), (omega, ell)

    def test_lines(self):
        lines, _ = sym_ric_lines(final("T", 0) - final("M", 0), 2)
        (line,) = lines
        assert line.a == Fraction(5, 4)
        assert line.b == Fraction(1, 4)
        assert line.values == (Fraction(1), Fraction(3, 2))
        assert not sym_ric_cone_failures(final("T", 0) - final("M", 0), 2)

    def test_negative_line_fails(self):
        assert sym_ric_cone_failures(final("N", 0) * -8, 2)


class TestClosedForms:
    def test_u_closed_two(self):
        assert expand(u_closed(2)) == x_final(0) * 2

    def test_x_expands_like_t(self):
        assert expand(X(0)) == x_final(0)

    def test_laplacian_margin(self):
        assert laplacian_margin(2) == final("T", 1) * 16
        assert not laplacian_margin(1)

    def test_over_ell_empty(self):
        assert over_ell(-1, lambda ell: final("T", ell)) == BasisCombination.zero()

    def test_table_rows(self):
        assert b_value(1, 3) == BasisCombination.single(InvariantTag("T", 0, 3))
        assert b_value(6, 2) == BasisCombination.single(InvariantTag("R", 0, 2))
        assert not b_value(19, 3)
        with pytest.raises(ValueError):
            b_value(28, 2)
