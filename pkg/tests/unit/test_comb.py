"""Closed-form coefficients and combinatorial identities."""

from fractions import Fraction
from math import factorial

import pytest

from cprover.comb import (
    ROWS_DOUBLE_PRIMED,
    ROWS_FULL,
    ROWS_PRIMED,
    U_FORMULA,
    C,
    K,
    C_by_double_factorial,
    all_pairings,
    binom,
    c_list,
    checksum,
    checksum_report,
    coeffs,
    comb_identities,
    d,
    double_factorial,
    e,
    prop_s_weights,
)


class TestPrimitives:
    @pytest.mark.parametrize(("p", "q", "expected"), [(5, 2, 10), (3, 5, 0), (5, -1, 0), (0, 0, 1), (-1, 0, 0)])
    def test_binom(self, p, q, expected):
        assert binom(p, q) == expected

    @pytest.mark.parametrize(("n", "expected"), [(0, 1), (1, 1), (5, 15), (6, 48)])
    def test_double_factorial(self, n, expected):
        assert double_factorial(n) == expected

    @pytest.mark.parametrize("n", [0, 2, 4, 6, 8])
    def test_pairing_count(self, n):
        assert sum(1 for _ in all_pairings(list(range(n)))) == double_factorial(n - 1)

    def test_pairings_are_perfect(self):
        for pairing in all_pairings("abcdef"):
            flat = sorted(x for pair in pairing for x in pair)
            assert flat == list("abcdef")


class TestConstants:
    """C(ω), K(ω), d, e and the c-list."""

    def test_leading_constant(self):
        assert C(1) == Fraction(3, 2)
        assert C(2) == Fraction(36, 5)

    def test_conformal_constant(self):
        assert K(1) == Fraction(11, 1008)

    def test_d_and_e(self):
        assert d(0, 0) == 1
        assert d(2, 0) == 16
        assert d(2, 1) == 8
        assert d(2, 2) == 0
        assert e(2, 0) == 2
        assert e(3, 1) == 0
        assert e(1, 0) == 0

    def test_c_list_at_one(self):
        assert c_list(1) == (24, 48, 0, 0, 0, 0)

    def test_c_list_at_four(self):
        c1, c2, c3, c4, c5, c6 = c_list(4)
        assert c1 == 12 * 10
        assert c2 == 2 * 64 * c1
        assert c3 == 2 * 16 * 3 * c1
        assert c4 == 4 * 64 * 27 * c1
        assert c5 == 4 * 16 * 9 * 2 * 1 * c1
        assert c6 == 4 * 64 * 9 * 2 * c1

    def test_rows_partition(self):
        rows = sorted(ROWS_FULL + ROWS_PRIMED + ROWS_DOUBLE_PRIMED)
        assert rows == list(range(1, 28))
        assert set(U_FORMULA) == set(rows)

    def test_coeff_table(self):
        table = coeffs(2)
        assert table.c1 == 48
        assert table.u[1] == 48
        assert table.u[2] == 2 * table.c[1]
        assert table.d[(2, 1)] == 8
        assert table.e[(2, 0)] == 2

    def test_coeffs_rejects_zero(self):
        with pytest.raises(ValueError):
            coeffs(0)


class TestChecksum:
    """Multiplicities of the 27 contraction types add up to (2ω+4)!."""

    @pytest.mark.parametrize("omega", [2, 3, 4, 5, 8])
    def test_balances(self, omega):
        lhs, rhs = checksum(omega)
        assert lhs == rhs == factorial(2 * omega + 4)

    def test_values(self):
        assert checksum(2) == (40320, 40320)
        assert checksum(3)[0] == factorial(10)

    def test_needs_omega_two(self):
        with pytest.raises(ValueError):
            checksum(1)

    def test_report(self):
        report = checksum_report(2)
        assert report.passed
        assert report.items[0].name == "multiplicity-sum"
        assert report.items[0].computed == "40320"

    @pytest.mark.parametrize("omega", range(1, 13))
    def test_leading_constant_two_ways(self, omega):
        assert C_by_double_factorial(omega) == C(omega)

    def test_leading_constant_item(self, monkeypatch):
        report = checksum_report(3)
        assert [i.name for i in report.items] == ["multiplicity-sum", "C(omega)"]
        assert report.notes == [f"K(omega) = {K(3)}"]
        monkeypatch.setattr("cprover.comb.C_by_double_factorial", lambda omega: C(omega) + 1)
        broken = checksum_report(3)
        assert broken.status == "fail"
        assert broken.failures()[0].name == "C(omega)"


class TestIdentities:
    """The sum identities behind the S-weights."""

    def test_spot_values(self):
        report = comb_identities(omega_max=2, n_max=4)
        by_name = {i.name: i for i in report.items}
        assert by_name["comb1[omega=2]"].computed == "180"
        assert by_name["comb2[omega=2]"].computed == "72"

    def test_all_hold(self):
        report = comb_identities(omega_max=10, n_max=12)
        assert report.passed, [i.name for i in report.failures()]

    @pytest.mark.parametrize("omega", [1, 2, 3, 6])
    def test_prop_s_weights(self, omega):
        s1, s2, s3, s4 = prop_s_weights(omega)
        assert s1 == 2 * (omega + 2) ** 2
        assert s2 == s3 == 2 * (omega + 3) ** 2 * C(omega)
        assert s4 == 2 * omega * (omega + 3) * C(omega)

    def test_prop_s_weights_at_one(self):
        assert prop_s_weights(1) == (18, 48, 48, 12)
