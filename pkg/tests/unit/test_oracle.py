"""Numeric oracle on random admissible jets."""

from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest

from cprover.expr import Expression, parse
from cprover.oracle import (
    OracleError,
    component_count,
    cross_check,
    eval_combination,
    eval_expression,
    eval_invariant,
    positivity,
    project,
    property_items,
    sample_jet,
    samples,
    symmetry_residuals,
    witness_items,
)
from cprover.reduce import InvariantTag, basis_tags, combination, pattern
from cprover.rules import HypothesisSet

T0 = InvariantTag("T", 0)
M0 = InvariantTag("M", 0)


class TestJetConstruction:
    """Admissible order-ω jets from a random metric jet."""

    @pytest.fixture(scope="class")
    def jet(self):
        return sample_jet(4, 2, seed=11)

    def test_shape(self, jet):
        assert jet.jet.shape == (4,) * 6
        assert jet.ric.shape == (4,) * 4
        assert jet.scal.shape == (4, 4)

    def test_symmetries_hold(self, jet):
        res = symmetry_residuals(jet)
        assert set(res) == {"antisym", "pair-exchange", "first-bianchi", "second-bianchi", "deriv-symmetry"}
        scale = float(np.abs(jet.jet).max())
        for name, value in res.items():
            assert value <= 1e-12 * max(1.0, scale), name

    def test_scal_jet_vanishes(self, jet):
        npt.assert_allclose(jet.scal, 0.0, atol=1e-12)

    def test_sym_ric_constraint(self):
        j = sample_jet(4, 1, seed=3, h=HypothesisSet(1, sym_ric_vanish=True))
        ric = j.ric
        sym = sum(np.transpose(ric, p) for p in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)])
        npt.assert_allclose(sym, 0.0, atol=1e-12)
        assert j.residual <= 1e-12

    @pytest.mark.parametrize("sym_ric", [False, True])
    def test_projection_is_idempotent(self, sym_ric):
        j = sample_jet(4, 1, seed=9, h=HypothesisSet(1, sym_ric_vanish=sym_ric))
        again = project(j)
        npt.assert_allclose(again.params, j.params, atol=1e-12)
        npt.assert_allclose(again.jet, j.jet, atol=1e-12)
        npt.assert_allclose(project(again).jet, again.jet, atol=1e-12)

    def test_projection_removes_off_constraint_part(self, jet):
        bumped = replace(jet, params=jet.params + 1.0)
        back = project(bumped)
        npt.assert_allclose(back.scal, 0.0, atol=1e-12)
        npt.assert_allclose(project(back).params, back.params, atol=1e-12)

    def test_scaled_carries_parameters(self, jet):
        npt.assert_allclose(project(jet.scaled(2.0)).jet, 2 * jet.jet, atol=1e-11)

    def test_seeded(self):
        a = sample_jet(3, 1, seed=5)
        b = sample_jet(3, 1, seed=5)
        npt.assert_array_equal(a.jet, b.jet)
        assert not np.array_equal(a.jet, sample_jet(3, 1, seed=6).jet)

    def test_samples_advance_seed(self):
        jets = samples(3, 1, seed=100, count=3)
        assert [j.seed for j in jets] == [100, 101, 102]

    @pytest.mark.parametrize(("n", "omega"), [(2, 1), (4, 0), (10, 4)])
    def test_rejects(self, n, omega):
        with pytest.raises(OracleError):
            sample_jet(n, omega, seed=0)

    def test_component_count(self):
        assert component_count(4, 2) == 4**6


class TestEvaluation:
    """Einsum evaluation of scalar expressions."""

    @pytest.fixture(scope="class")
    def jet(self):
        return sample_jet(4, 1, seed=21)

    def test_square_norm(self, jet):
        got = eval_expression(parse("D[k] Ric[a,b] * D[k] Ric[a,b]"), jet).value
        npt.assert_allclose(got, float(np.sum(jet.ric**2)), rtol=1e-12)

    def test_invariant_matches_pattern(self, jet):
        a = eval_invariant(T0, jet).value
        b = eval_expression(pattern(T0, 1), jet).value
        assert a == pytest.approx(b)
        assert a >= 0

    def test_combination(self, jet):
        comb = combination((2, T0), (-1, M0))
        expected = 2 * eval_invariant(T0, jet).value - eval_invariant(M0, jet).value
        assert eval_combination(comb, jet) == pytest.approx(expected)

    def test_lower_order_factors_vanish(self, jet):
        assert eval_expression(parse("Ric[a,b] * D[k] D[k] Ric[a,b]"), jet).value == 0.0

    def test_rejects_free_labels(self, jet):
        with pytest.raises(ValueError, match="scalars"):
            eval_expression(parse("D[k] Ric[a,b] * D[k] Ric[a,c]"), jet)

    def test_empty_expression(self, jet):
        assert eval_expression(Expression.zero(), jet).value == 0.0

    def test_quadratic_scaling(self, jet):
        a = eval_invariant(T0, jet).value
        assert eval_invariant(T0, jet.scaled(3.0)).value == pytest.approx(9 * a)


class TestReportFragments:
    """Items the verifiers attach from oracle runs."""

    @pytest.fixture(scope="class")
    def jets(self):
        return samples(4, 2, seed=40, count=3)

    def test_cross_check_pass(self, jets):
        item = cross_check("x", pattern(T0, 2).scale(2), combination((2, T0)), jets)
        assert item.status == "pass"
        assert not item.exact
        assert item.computed == "3/3"

    def test_cross_check_negative_control(self, jets):
        item = cross_check("x", pattern(T0, 2), combination((2, T0)), jets)
        assert item.status == "fail"

    def test_positivity(self):
        assert positivity("p", [0.0, 1.0]).status == "pass"
        assert positivity("p", [1.0, -1e-3]).status == "fail"

    def test_witnesses(self, jets):
        items = witness_items(jets, basis_tags(2))
        names = {i.name for i in items}
        assert "oracle-nonneg[T_0]" in names
        assert "oracle-nonneg[T_0-2M_0+N_0]" in names
        assert all(i.status == "pass" for i in items), [i.name for i in items if i.status != "pass"]

    def test_properties(self, jets):
        items = property_items(jets[0])
        assert [i.name for i in items] == ["oracle-residuals", "oracle-projection", "oracle-scaling"]
        assert all(i.status == "pass" for i in items)
