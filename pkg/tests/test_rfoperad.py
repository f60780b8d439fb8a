import random
from fractions import Fraction

import pytest

from opcalc.exact import (
    THETA,
    THETA0,
    FactoredRatFn,
    MPoly,
    ratfn_eval,
    ratfn_scale,
)
from opcalc.rfoperad import (
    ConvFamily,
    RFOperad,
    conv_exp_value,
    conv_log_value,
    flag_value,
    log_kernel_value,
    pinned_kernel_value,
)
from opcalc.symgroup import all_perms, invert_perm


def inv(nvars, *subsets):
    return FactoredRatFn.inverse_factors(nvars, subsets)


class TestCompose:
    def test_constants(self):
        ops = RFOperad(THETA)
        out = ops.compose(ops.mu(), ops.mu(), 1)
        assert ops.eq(out, FactoredRatFn.one(3))

    def test_half_products(self):
        ops = RFOperad(THETA0)
        nu = ops.nu()
        assert ops.eq(ops.compose(nu, nu, 1), inv(3, {1}, {1, 2}))
        assert ops.eq(ops.compose(nu, nu, 2), inv(3, {1}, {2}))

    def test_nested_averaging_theta_symbolic(self):
        ops = RFOperad(THETA)
        nu = ops.compose(ops.mu(), ops.rb(), 1)
        out = ops.compose(ops.rb(), nu, 1)
        assert ops.eq(out, inv(2, {1, 2}, {1}))

    def test_slot_out_of_range(self):
        ops = RFOperad(THETA)
        with pytest.raises(ValueError):
            ops.compose(ops.mu(), ops.rb(), 3)

    def test_arity_zero_plug_in(self):
        ops = RFOperad(THETA)
        scalar = FactoredRatFn.const(0, 5)
        out = ops.compose(ops.mu(), scalar, 2)
        assert ops.eq(out, FactoredRatFn.const(1, 5))


class TestAction:
    def test_examples(self):
        ops = RFOperad(THETA0)
        f = inv(2, {1})
        assert ops.eq(ops.act(f, (1, 2)), f)
        assert ops.eq(ops.act(f, (2, 1)), inv(2, {2}))
        sym = inv(2, {1, 2})
        assert ops.eq(ops.act(sym, (2, 1)), sym)

    def test_size_mismatch(self):
        ops = RFOperad(THETA)
        with pytest.raises(ValueError):
            ops.act(inv(2, {1}), (1,))


class TestConvolution:
    def test_unit(self):
        ops = RFOperad(THETA0)
        F = ConvFamily(3, {0: FactoredRatFn.one(0), 1: inv(1, {1})})
        assert ops.conv_eq(ops.conv_mul(F, ops.conv_unit(3)), F)

    def test_single_splitting(self):
        ops = RFOperad(THETA0)
        F = ConvFamily(2, {1: inv(1, {1})})
        FF = ops.conv_mul(F, F)
        assert ops.eq(FF.component(2), inv(2, {1}, {2}))

    def test_exp_example(self):
        ops = RFOperad(THETA0)
        F = ConvFamily(2, {1: inv(1, {1})})
        X = ops.conv_exp(F)
        assert ops.eq(X.component(2), ratfn_scale(inv(2, {1}, {2}), Fraction(1, 2)))
        assert ops.eq(X.component(0), FactoredRatFn.one(0))

    def test_exp_requires_zero_head(self):
        ops = RFOperad(THETA0)
        with pytest.raises(ValueError):
            ops.conv_exp(ops.conv_unit(2))
        with pytest.raises(ValueError):
            ops.conv_log(ConvFamily(2, {1: inv(1, {1})}))

    def test_exp_of_zero_is_unit(self):
        ops = RFOperad(THETA0)
        assert ops.conv_eq(ops.conv_exp(ConvFamily(3)), ops.conv_unit(3))
        assert ops.conv_eq(ops.conv_log(ops.conv_unit(3)), ConvFamily(3))

    def test_log_exp_round_trip(self):
        ops = RFOperad(THETA0)
        rng = random.Random(31)
        for _ in range(6):
            comps = {}
            for n in range(1, 5):
                c = Fraction(rng.randint(-2, 2), rng.randint(1, 2))
                if c:
                    comps[n] = ratfn_scale(ops.flag_fraction(n), c)
            F = ConvFamily(4, comps)
            assert ops.conv_eq(ops.conv_log(ops.conv_exp(F)), F)


class TestKernels:
    def test_pinned_small(self):
        ops = RFOperad(THETA0)
        assert ops.eq(ops.pinned_log_kernel(1), inv(1, {1}))
        g2 = ops.pinned_log_kernel(2)
        assert ops.eq(g2, ratfn_scale(inv(2, {1}, {1, 2}), Fraction(1, 2)))
        # two permutations fix 1 in S_3
        g3 = ops.pinned_log_kernel(3)
        manual = ops.sum([
            ratfn_scale(inv(3, {1}, {1, 2}, {1, 2, 3}), Fraction(1, 3)),
            ratfn_scale(inv(3, {1}, {1, 3}, {1, 2, 3}), Fraction(-1, 6)),
        ], 3)
        assert ops.eq(g3, manual)

    def test_full_small(self):
        ops = RFOperad(THETA0)
        assert ops.eq(ops.log_kernel(1), inv(1, {1}))
        f2 = ops.log_kernel(2)
        manual = ops.sum([
            ratfn_scale(inv(2, {1}, {1, 2}), Fraction(1, 2)),
            ratfn_scale(inv(2, {2}, {1, 2}), Fraction(-1, 2)),
        ], 2)
        assert ops.eq(f2, manual)
        assert ops.eq(f2, ops.log_kernel(2, "vshaped"))

    def test_routes_agree_exactly(self):
        ops = RFOperad(THETA0)
        for n in range(1, 5):
            assert ops.eq(ops.log_kernel(n, "full"), ops.log_kernel(n, "vshaped"))

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            RFOperad(THETA0).log_kernel(2, "sideways")

    def test_value_functions_match_exact_builders(self):
        ops = RFOperad(THETA0)
        rng = random.Random(11)
        for n in range(1, 5):
            full = ops.log_kernel(n)
            pinned = ops.pinned_log_kernel(n)
            for _ in range(3):
                pt = tuple(Fraction(rng.randint(1, 30), rng.randint(1, 7)) for _ in range(n))
                assert ratfn_eval(full, pt, Fraction(0)) == log_kernel_value(pt)
                assert ratfn_eval(pinned, pt, Fraction(0)) == pinned_kernel_value(pt)
                assert ratfn_eval(ops.flag_fraction(n), pt, Fraction(0)) == flag_value(pt)

    def test_numeric_conv_log_exp(self):
        rng = random.Random(13)
        for n in (3, 4):
            pt = tuple(Fraction(rng.randint(1, 20), rng.randint(1, 5)) for _ in range(n))
            assert conv_log_value(flag_value, pt) == log_kernel_value(pt)
            assert conv_exp_value(log_kernel_value, pt) == flag_value(pt)
