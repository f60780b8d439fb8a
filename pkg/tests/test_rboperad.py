import random
from fractions import Fraction

import pytest

from opcalc.exact import (
    THETA,
    THETA0,
    FactoredRatFn,
    QFrac,
    QPoly,
    ThetaScalar,
    ratfn_eq,
    theta_const,
)
from opcalc.rboperad import (
    Leaf,
    Mul,
    NestedRBMon,
    RBLinComb,
    RBParseError,
    RNode,
    census,
    comb_to_rf,
    direct_rf_image,
    hilbert_coeffs,
    independence_report,
    integration_model_report,
    iter_monomials,
    minimal_model_series,
    counting_series_coeff,
    nested_to_rf,
    poincare_inverse_report,
    rb_normalize,
    rb_parse,
    render_expr,
)


class TestParser:
    def test_examples(self):
        assert rb_parse("(* (R a1) (R a2))") == Mul((RNode(Leaf(1)), RNode(Leaf(2))))
        assert rb_parse("(R (* a1 a2))") == RNode(Mul((Leaf(1), Leaf(2))))
        assert rb_parse("  a1 ") == Leaf(1)
        assert rb_parse("(*   a2\n a1)") == Mul((Leaf(2), Leaf(1)))

    def test_repeated_leaf(self):
        with pytest.raises(RBParseError, match="repeated"):
            rb_parse("(* a1 a1)")

    def test_missing_leaf(self):
        with pytest.raises(RBParseError, match="missing"):
            rb_parse("(* a1 a3)")

    def test_syntax_errors_carry_positions(self):
        with pytest.raises(RBParseError) as err:
            rb_parse("(R a1")
        assert "position" in str(err.value)
        with pytest.raises(RBParseError):
            rb_parse("(Q a1)")
        with pytest.raises(RBParseError):
            rb_parse("(* a1)")
        with pytest.raises(RBParseError):
            rb_parse("a1 a2")

    def test_render_round_trip(self):
        text = "(R (* a2 (R a1) a3))"
        assert rb_parse(render_expr(rb_parse(text))) == rb_parse(text)


M = NestedRBMon


class TestNormalize:
    def test_weight_rule(self):
        nf = rb_normalize(rb_parse("(* (R a1) (R a2))"))
        want = RBLinComb(2, {
            M(2, (frozenset({1}), frozenset({1, 2})), (1, 1)): 1,
            M(2, (frozenset({2}), frozenset({1, 2})), (1, 1)): 1,
            M(2, (frozenset({1, 2}),), (1,)): THETA,
        })
        assert nf == want

    def test_already_normal(self):
        nf = rb_normalize(rb_parse("(R (* a1 a2))"))
        assert nf == RBLinComb(2, {M(2, (frozenset({1, 2}),), (1,)): 1})
        nf2 = rb_normalize(rb_parse("(* a1 a2)"))
        assert nf2 == RBLinComb(2, {M(2, (), ()): 1})

    def test_specialized_theta(self):
        nf0 = rb_normalize(rb_parse("(* (R a1) (R a2))"), THETA0)
        assert len(nf0.terms) == 2
        nf1 = rb_normalize(rb_parse("(* (R a1) (R a2))"), theta_const(1))
        assert nf1.terms[M(2, (frozenset({1, 2}),), (1,))] == ThetaScalar.one()

    def test_strategy_independence_examples(self):
        for text in ["(* (R a1) (R a2) (R a3))",
                     "(R (* (R (R a1)) (R a2)))",
                     "(* (R (R a1)) (R (R a2)) a3)"]:
            e = rb_parse(text)
            assert rb_normalize(e, strategy="innermost") == rb_normalize(e, strategy="outermost")

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            rb_normalize(Leaf(1), strategy="diagonal")

    def test_r_tower_counts(self):
        nf = rb_normalize(rb_parse("(R (R a1))"))
        assert nf == RBLinComb(1, {M(1, (frozenset({1}),), (2,)): 1})

    def test_step_budget_is_reported(self):
        from opcalc.rboperad import RewriteBudgetError

        e = rb_parse("(* (R (R a1)) (R (R a2)) (R (R a3)))")
        with pytest.raises(RewriteBudgetError):
            rb_normalize(e, step_budget=3)


class TestMonomials:
    def test_validation(self):
        with pytest.raises(ValueError):
            M(2, (frozenset({1, 2}), frozenset({1})), (1, 1))
        with pytest.raises(ValueError):
            M(2, (frozenset({1}),), (0,))
        with pytest.raises(ValueError):
            M(2, (frozenset(),), (1,))

    def test_images(self):
        m = M(2, (frozenset({1}),), (1,))
        img = nested_to_rf(m)
        assert img.nvars == 2 and img.den == {frozenset({1}): 1}
        m2 = M(2, (frozenset({1}), frozenset({1, 2})), (1, 1))
        assert nested_to_rf(m2).den == {frozenset({1}): 1, frozenset({1, 2}): 1}
        m3 = M(1, (frozenset({1}),), (2,))
        assert nested_to_rf(m3).den == {frozenset({1}): 2}

    def test_render(self):
        m2 = M(2, (frozenset({1}), frozenset({1, 2})), (1, 1))
        assert m2.render() == "R(R(a1) a2)"
        assert M(2, (), ()).render() == "a1 a2"


class TestSoundness:
    def test_direct_image_examples(self):
        e = rb_parse("(* (R a1) (R a2))")
        assert ratfn_eq(direct_rf_image(e),
                        FactoredRatFn.inverse_factors(2, [{1}, {2}]), THETA)
        e2 = rb_parse("(R (* (R a1) a2))")
        assert ratfn_eq(direct_rf_image(e2),
                        FactoredRatFn.inverse_factors(2, [{1}, {1, 2}]), THETA)

    def test_normal_form_image_matches(self):
        for text in ["(* (R a1) (R a2))",
                     "(R (* (R a1) (R a2)))",
                     "(* (R (R a1)) (R a2) a3)"]:
            e = rb_parse(text)
            nf = rb_normalize(e)
            assert ratfn_eq(direct_rf_image(e), comb_to_rf(nf, THETA), THETA)


class TestCensus:
    def test_examples(self):
        assert census(1, 5) == [1, 1, 1, 1, 1, 1]
        assert census(2, 1) == [1, 3]
        assert census(2, 2) == [1, 3, 5]

    def test_enumeration_matches_hand_count(self):
        mons = [m for m in iter_monomials(2, 2) if m.weight == 2]
        # three single-step chains with exponent 2, two nested chains (1,1)
        assert len(mons) == 5
        assert sum(1 for m in mons if len(m.chain) == 2) == 2

    def test_against_hilbert(self):
        for n in range(1, 6):
            assert census(n, 5) == hilbert_coeffs(n, 5)

    def test_hilbert_examples(self):
        assert hilbert_coeffs(1, 4) == [1, 1, 1, 1, 1]
        assert hilbert_coeffs(2, 3) == [1, 3, 5, 7]
        assert hilbert_coeffs(3, 1) == [1, 7]


class TestPoincare:
    def test_hand_values(self):
        f = minimal_model_series(2)
        g = f.comp_inverse()
        one_minus_q = QPoly([1, -1])
        assert g.coeff(1) == QFrac(QPoly.one(), one_minus_q)
        assert g.coeff(1) == counting_series_coeff(1)
        assert g.coeff(2) == counting_series_coeff(2)

    def test_report(self):
        rep = poincare_inverse_report(6)
        assert [n for n, _ in rep] == list(range(1, 7))
        assert all(ok for _, ok in rep)
        assert poincare_inverse_report(0) == []
        with pytest.raises(ValueError):
            poincare_inverse_report(9)


class TestIndependence:
    def test_displayed_triple_has_rank_three(self):
        # the three weight-laden images 1/(x1(x1+x2)), 1/(x2(x1+x2)), 1/(x1+x2)
        from opcalc.rboperad import _rank_exact
        from opcalc.exact import ratfn_eval

        mons = [
            M(2, (frozenset({1}), frozenset({1, 2})), (1, 1)),
            M(2, (frozenset({2}), frozenset({1, 2})), (1, 1)),
            M(2, (frozenset({1, 2}),), (1,)),
        ]
        pts = [(Fraction(1), Fraction(2)), (Fraction(2), Fraction(3)),
               (Fraction(1), Fraction(5)), (Fraction(3), Fraction(7))]
        for tv in (Fraction(0), Fraction(1)):
            rows = [[ratfn_eval(nested_to_rf(m), p, tv) for p in pts] for m in mons]
            assert _rank_exact(rows) == 3

    def test_full_report(self):
        rep = independence_report(2, 2, [Fraction(0), Fraction(1), Fraction(2)])
        assert all(ok for *_, ok in rep)
        assert all(count == 9 for _, count, _, _ in rep)

    def test_bounds(self):
        with pytest.raises(ValueError):
            independence_report(4, 1, [Fraction(0)])


def test_integration_model():
    assert integration_model_report(0)
    assert integration_model_report(6)
