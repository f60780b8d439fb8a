from fractions import Fraction
from math import comb, factorial

import pytest

from opcalc.exact import QPoly
from opcalc.symgroup import (
    GroupAlgElem,
    all_perms,
    compose_perm,
    descents,
    eulerian_idempotent,
    eulerian_poly,
    ga_mul,
    identity_perm,
    inflate_perm,
    invert_perm,
    vshaped,
    vshaped_signed_sum,
)


def test_descents_examples():
    assert descents((1, 2, 3, 4)) == 0
    assert descents((3, 2, 1)) == 2
    assert descents((1, 3, 2)) == 1


def test_compose_convention():
    sigma = (2, 3, 1)
    tau = (3, 1, 2)
    # (sigma . tau)(i) = sigma(tau(i))
    assert compose_perm(sigma, tau) == (1, 2, 3)
    assert invert_perm(sigma) == tau


def test_eulerian_poly_small():
    assert eulerian_poly(1) == QPoly([1])
    assert eulerian_poly(2) == QPoly([1, 1])
    assert eulerian_poly(3) == QPoly([1, 4, 1])
    with pytest.raises(ValueError):
        eulerian_poly(0)


def test_eulerian_poly_properties():
    for n in range(1, 9):
        P = eulerian_poly(n)
        assert P.degree() == n - 1
        assert P.coeffs == tuple(reversed(P.coeffs))
        assert P.eval_at(Fraction(1)) == factorial(n)


def test_vshaped_small():
    assert vshaped(1) == [(1,)]
    assert set(vshaped(2)) == {(1, 2), (2, 1)}
    assert set(vshaped(3)) == {(1, 2, 3), (2, 1, 3), (3, 1, 2), (3, 2, 1)}


def test_vshaped_counts_and_filter_oracle():
    for n in range(1, 9):
        assert len(vshaped(n)) == 2 ** (n - 1)
    # brute-force oracle: decreasing to the position of 1, then increasing
    for n in range(1, 7):
        brute = set()
        for p in all_perms(n):
            k = p.index(1)
            left_ok = all(p[i] > p[i + 1] for i in range(k))
            right_ok = all(p[i] < p[i + 1] for i in range(k, n - 1))
            if left_ok and right_ok:
                brute.add(p)
        assert brute == set(vshaped(n))


def test_group_algebra_unit_and_involution():
    n = 3
    e = GroupAlgElem.unit(n)
    s = GroupAlgElem.of((2, 1, 3))
    a = GroupAlgElem(n, {identity_perm(n): 1, (2, 1, 3): -1})
    assert ga_mul(e, a) == a
    # (id - s) s = s - id since s^2 = id
    assert ga_mul(a, s) == GroupAlgElem(n, {(2, 1, 3): 1, identity_perm(n): -1})


def test_idempotent_small_values():
    assert eulerian_idempotent(1) == GroupAlgElem.unit(1)
    E2 = eulerian_idempotent(2)
    assert E2.coeff((1, 2)) == Fraction(1, 2)
    assert E2.coeff((2, 1)) == Fraction(-1, 2)
    assert ga_mul(E2, E2) == E2
    E3 = eulerian_idempotent(3)
    for p in all_perms(3):
        d = descents(p)
        assert E3.coeff(p) == Fraction((-1) ** d, 3 * comb(2, d))


def test_idempotent_coefficients_depend_on_descents_only():
    for n in range(2, 6):
        E = eulerian_idempotent(n)
        by_descents = {}
        for p, c in E.terms.items():
            by_descents.setdefault(descents(p), set()).add(c)
        assert all(len(v) == 1 for v in by_descents.values())


def test_idempotency_up_to_5():
    for n in range(1, 6):
        E = eulerian_idempotent(n)
        assert ga_mul(E, E) == E


def test_vsum_examples():
    assert vshaped_signed_sum(2, 1) == GroupAlgElem.of((1, 2))
    assert vshaped_signed_sum(2, 2) == GroupAlgElem.of((2, 1), -1)
    assert vshaped_signed_sum(1, 1) == GroupAlgElem.unit(1)
    with pytest.raises(ValueError):
        vshaped_signed_sum(2, 3)


def test_inflate_perm_shape():
    # inflating the swap of two slots with a block of 2 letters
    tau = inflate_perm((2, 1), 1, 2)
    assert sorted(tau) == [1, 2, 3]
    tau2 = inflate_perm(identity_perm(3), 2, 3)
    assert tau2 == (1, 2, 3, 4, 5)
