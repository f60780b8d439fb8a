"""Permutations, descent statistics, and the rational group algebra of S_n.

Permutations are tuples in one-line notation with values 1..n.  The fixed
composition convention is (sigma * tau)(i) = sigma(tau(i)); the descent
algebra checks exercise both orders explicitly because the convention matters
there.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator

from .exact import QPoly

Perm = tuple[int, ...]


def is_perm(p: Perm) -> bool:
    return sorted(p) == list(range(1, len(p) + 1))


def identity_perm(n: int) -> Perm:
    return tuple(range(1, n + 1))


def all_perms(n: int) -> Iterator[Perm]:
    return itertools.permutations(range(1, n + 1))


def compose_perm(sigma: Perm, tau: Perm) -> Perm:
    """(sigma * tau)(i) = sigma(tau(i))."""
    if len(sigma) != len(tau):
        raise ValueError("size mismatch")
    return tuple(sigma[t - 1] for t in tau)


def invert_perm(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v - 1] = i + 1
    return tuple(inv)


def descents(p: Perm) -> int:
    """Number of positions i with p(i) > p(i+1)."""
    return sum(1 for a, b in zip(p, p[1:]) if a > b)


def eulerian_poly(n: int) -> QPoly:
    """sum over S_n of q^descents, by direct enumeration."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = [0] * n
    for p in all_perms(n):
        counts[descents(p)] += 1
    return QPoly(counts)


def vshaped(n: int) -> list[Perm]:
    """Permutations strictly decreasing down to the value 1, then increasing.

    One permutation per choice of the set of values placed left of 1, so
    there are 2^(n-1) of them; the output is ordered by that choice.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rest = list(range(2, n + 1))
    out = []
    for r in range(0, n):
        for left in itertools.combinations(rest, r):
            right = [v for v in rest if v not in left]
            out.append(tuple(sorted(left, reverse=True)) + (1,) + tuple(right))
    return out


class GroupAlgElem:
    """Rational linear combination of permutations of S_n."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        t: dict[Perm, Fraction] = {}
        if terms:
            for p, c in terms.items():
                p = tuple(p)
                if len(p) != self.n or not is_perm(p):
                    raise ValueError(f"not a permutation of S_{self.n}: {p}")
                c = Fraction(c)
                if c:
                    t[p] = c
        self.terms = t

    @staticmethod
    def zero(n: int) -> "GroupAlgElem":
        return GroupAlgElem(n)

    @staticmethod
    def unit(n: int) -> "GroupAlgElem":
        return GroupAlgElem(n, {identity_perm(n): Fraction(1)})

    @staticmethod
    def of(p: Perm, c=1) -> "GroupAlgElem":
        return GroupAlgElem(len(p), {tuple(p): Fraction(c)})

    def __add__(self, other: "GroupAlgElem") -> "GroupAlgElem":
        if self.n != other.n:
            raise ValueError("arity mismatch")
        t = dict(self.terms)
        for p, c in other.terms.items():
            s = t.get(p, Fraction(0)) + c
            if s:
                t[p] = s
            else:
                t.pop(p, None)
        out = GroupAlgElem.__new__(GroupAlgElem)
        out.n = self.n
        out.terms = t
        return out

    def __neg__(self) -> "GroupAlgElem":
        out = GroupAlgElem.__new__(GroupAlgElem)
        out.n = self.n
        out.terms = {p: -c for p, c in self.terms.items()}
        return out

    def __sub__(self, other: "GroupAlgElem") -> "GroupAlgElem":
        return self + (-other)

    def scale(self, c) -> "GroupAlgElem":
        c = Fraction(c)
        if not c:
            return GroupAlgElem.zero(self.n)
        out = GroupAlgElem.__new__(GroupAlgElem)
        out.n = self.n
        out.terms = {p: v * c for p, v in self.terms.items()}
        return out

    def __eq__(self, other):
        if not isinstance(other, GroupAlgElem):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items()))))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, p: Perm) -> Fraction:
        return self.terms.get(tuple(p), Fraction(0))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for p in sorted(self.terms):
            c = self.terms[p]
            word = "".join(str(v) for v in p) if self.n < 10 else ",".join(map(str, p))
            parts.append(f"{c}*({word})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"GroupAlgElem({self.render()})"


def ga_mul(a: GroupAlgElem, b: GroupAlgElem) -> GroupAlgElem:
    """Bilinear extension of (sigma * tau)(i) = sigma(tau(i))."""
    if a.n != b.n:
        raise ValueError("arity mismatch")
    t: dict[Perm, Fraction] = {}
    for p, cp in a.terms.items():
        for q, cq in b.terms.items():
            r = compose_perm(p, q)
            s = t.get(r, Fraction(0)) + cp * cq
            if s:
                t[r] = s
            else:
                t.pop(r, None)
    out = GroupAlgElem.__new__(GroupAlgElem)
    out.n = a.n
    out.terms = t
    return out


def eulerian_idempotent(n: int) -> GroupAlgElem:
    """First Eulerian idempotent: coefficient of sigma is
    (1/n) * (-1)^des(sigma) / C(n-1, des(sigma))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    terms = {}
    for p in all_perms(n):
        d = descents(p)
        terms[p] = Fraction((-1) ** d, n * comb(n - 1, d))
    return GroupAlgElem(n, terms)


def vshaped_signed_sum(n: int, i: int) -> GroupAlgElem:
    """(-1)^(i-1) times the sum of V-shaped permutations placing 1 at slot i."""
    if not 1 <= i <= n:
        raise ValueError(f"slot {i} out of range 1..{n}")
    sign = Fraction((-1) ** (i - 1))
    terms: dict[Perm, Fraction] = {}
    for lam in vshaped(n):
        if lam[i - 1] == 1:
            terms[lam] = sign
    return GroupAlgElem(n, terms)


def inflate_perm(sigma: Perm, slot: int, block: int) -> Perm:
    """Replace letter `slot` of sigma's domain by a block of `block` letters.

    The resulting permutation tau of m+block-1 letters satisfies
    A_sigma(f) o_i g = A_tau(f o_{sigma^{-1}(i)} g) for the variable-relabel
    action A and partial composition at i = sigma(slot).
    """
    m = len(sigma)
    i = sigma[slot - 1]

    def shift(v: int) -> int:
        return v if v < i else v + block - 1

    tau = []
    for k in range(1, m + 1):
        if k == slot:
            tau.extend(range(i, i + block))
        else:
            tau.append(shift(sigma[k - 1]))
    return tuple(tau)
