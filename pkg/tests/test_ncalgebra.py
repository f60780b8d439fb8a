from fractions import Fraction

import pytest

from opcalc.ncalgebra import (
    FoissyDomainError,
    NCPoly,
    TensorSquare,
    TwoDWordError,
    apply_group_algebra,
    beta_powers,
    bracket,
    conjugator_group,
    conjugator_log,
    coproduct,
    drift_sequence,
    exp_adjoint,
    foissy_prec,
    foissy_pre_lie,
    foissy_succ,
    nc_exp,
    nc_log,
    tensor_of,
    weighted_drift,
)
from opcalc.symgroup import GroupAlgElem, eulerian_idempotent

W = 5


def b(i, bound=W):
    return NCPoly.gen(bound, i)


def d(bound=W):
    return NCPoly.dword(bound)


class TestWordsAndProducts:
    def test_bracket_examples(self):
        assert bracket(b(1), d()) == NCPoly(W, {(1, 0): 1, (0, 1): -1})
        assert bracket(b(1), b(1)).is_zero
        assert bracket(b(1), bracket(b(1), d())) == NCPoly(W, {
            (1, 1, 0): 1, (1, 0, 1): -2, (0, 1, 1): 1})

    def test_truncation(self):
        p = b(3) * b(3)
        assert p.is_zero  # weight 6 exceeds the bound of 5
        assert not (b(2) * b(3)).is_zero

    def test_two_d_rejected(self):
        with pytest.raises(TwoDWordError):
            d() * d()
        with pytest.raises(TwoDWordError):
            NCPoly(W, {(0, 0): 1})

    def test_weight_components(self):
        p = b(1) + b(2) + b(1) * b(1)
        comps = p.weight_components()
        assert set(comps) == {1, 2}
        assert comps[2] == b(2) + b(1) * b(1)


class TestFoissy:
    def test_adjunction_rules(self):
        assert foissy_prec(b(1), d()) == NCPoly(W, {(1, 0): 1})
        assert foissy_succ(d(), b(1)) == NCPoly(W, {(0, 1): 1})
        assert foissy_prec(d(), b(1)).is_zero
        assert foissy_succ(b(1), d()).is_zero

    def test_weight_fractions(self):
        assert foissy_prec(b(1), b(1)) == NCPoly(W, {(1, 1): Fraction(1, 2)})
        assert foissy_succ(b(1), b(2)) == NCPoly(W, {(1, 2): Fraction(2, 3)})
        # the two halves recompose the product
        assert foissy_prec(b(1), b(2)) + foissy_succ(b(1), b(2)) == b(1) * b(2)

    def test_domain_errors(self):
        with pytest.raises(FoissyDomainError):
            foissy_prec(d(), d())
        with pytest.raises(FoissyDomainError):
            foissy_prec(NCPoly.unit(W), b(1))

    def test_pre_lie_weights(self):
        x = bracket(b(1), b(2))
        y = b(1)
        out = foissy_pre_lie(x, y)
        assert out == bracket(x, y).scale(Fraction(3, 4))


class TestDrift:
    def test_first_terms(self):
        seq = drift_sequence(W)
        assert seq[0] == bracket(b(1), d())
        a2 = bracket(b(2), d()) + bracket(b(1), bracket(b(1), d())).scale(Fraction(1, 2))
        assert seq[1] == a2

    def test_weighted_recursion(self):
        # the rescaled sequence solves the unshifted bracket equation
        seq = drift_sequence(4)
        lam = weighted_drift(seq)
        f = [b(i, 4).scale(i) for i in range(1, 5)]
        dd = d(4)
        for n in range(1, 5):
            rhs = lam[n - 1]
            for i in range(1, n):
                j = n - i
                rhs = rhs - bracket(f[i - 1], lam[j - 1]).scale(Fraction(1, j))
            assert bracket(f[n - 1], dd) == rhs


class TestConjugator:
    def test_log_low_weights(self):
        assert conjugator_log(0).is_zero
        assert conjugator_log(1) == NCPoly(1, {(1,): 1})
        assert conjugator_log(2) == NCPoly(2, {(1,): 1, (2,): 1})

    def test_exp_adjoint_examples(self):
        assert exp_adjoint(NCPoly.zero(W), d()) == d()
        out = exp_adjoint(b(1, 1), d(1))
        assert out == d(1) + bracket(b(1, 1), d(1))
        with pytest.raises(ValueError):
            exp_adjoint(d(), d())

    def test_exp_adjoint_matches_drift_at_2(self):
        out = exp_adjoint(conjugator_log(2), d(2))
        seq = drift_sequence(2)
        assert out == d(2) + seq[0] + seq[1]

    def test_group_element_weights(self):
        assert conjugator_group(0) == NCPoly.unit(0)
        G = conjugator_group(W)
        assert G.weight_component(1) == b(1)
        assert G.weight_component(2) == b(2) + NCPoly(W, {(1, 1): Fraction(1, 2)})

    def test_log_examples(self):
        assert nc_log(NCPoly.unit(W)).is_zero
        p = NCPoly.unit(2) + b(1, 2)
        assert nc_log(p) == NCPoly(2, {(1,): 1, (1, 1): Fraction(-1, 2)})
        G = conjugator_group(W)
        assert nc_log(G).weight_component(1) == b(1)
        with pytest.raises(ValueError):
            nc_log(b(1))

    def test_exp_log_round_trip(self):
        x = b(1) + b(2).scale(Fraction(1, 3))
        assert nc_log(nc_exp(x)) == x


class TestCoproduct:
    def test_primitive(self):
        dp = coproduct(b(1))
        assert dp == TensorSquare(W, {((1,), ()): 1, ((), (1,)): 1})

    def test_square(self):
        p = b(1) * b(1)
        dp = coproduct(p)
        want = TensorSquare(W, {
            ((1, 1), ()): 1, ((), (1, 1)): 1, ((1,), (1,)): 2})
        assert dp == want

    def test_unit(self):
        assert coproduct(NCPoly.unit(W)) == TensorSquare(W, {((), ()): 1})

    def test_rejects_d(self):
        with pytest.raises(ValueError):
            coproduct(d())

    def test_multiplicativity_on_samples(self):
        for p, q in [(b(1), b(2)), (b(1) * b(2), b(1)), (b(2), b(2))]:
            lhs = coproduct(p * q)
            rhs = TensorSquare(W)
            for (u1, u2), cu in coproduct(p).terms.items():
                for (v1, v2), cv in coproduct(q).terms.items():
                    w1, w2 = u1 + v1, u2 + v2
                    rhs = rhs + TensorSquare(W, {(w1, w2): cu * cv})
            assert lhs.restrict_total_weight(W) == rhs.restrict_total_weight(W)


class TestBetaPowers:
    def test_right_normed(self):
        pws = beta_powers(4, 3)
        beta = pws[0]
        assert pws[1] == foissy_prec(beta, beta)
        assert pws[2] == foissy_prec(beta, pws[1])


def test_apply_group_algebra():
    E = eulerian_idempotent(2)
    out = apply_group_algebra(E, [1, 2], 3)
    assert out == NCPoly(3, {(1, 2): Fraction(1, 2), (2, 1): Fraction(-1, 2)})
    with pytest.raises(ValueError):
        apply_group_algebra(E, [1, 2, 3], 6)
