"""Words with distinct letters: shuffle, half shuffle, deconcatenation.

The half shuffle keeps the last letter of its right argument final, so left
combs come out as single words; the word w = l_1...l_n corresponds to the
fraction prod_{j=1}^{n-1} 1/(x_{l_1}+...+x_{l_j}), and appending the full-set
factor (one application of the averaging operator) turns that dictionary into
a morphism from the shuffle product to the plain product of rational
functions.  Taking the logarithm of the identity map in the convolution
algebra built from the shuffle product and deconcatenation recovers the first
Eulerian idempotent with inverted permutations.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import THETA0, FactoredRatFn, ratfn_fold_sum, ratfn_mul, ratfn_scale
from .symgroup import GroupAlgElem

Word = tuple[int, ...]


class LetterClashError(ValueError):
    """Operands share letters; the multilinear setting forbids that."""


class TensorElem:
    """Rational linear combination of words."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, Fraction] | None = None):
        t: dict[Word, Fraction] = {}
        if terms:
            for w, c in terms.items():
                w = tuple(int(x) for x in w)
                if len(set(w)) != len(w):
                    raise ValueError(f"word {w} repeats a letter")
                c = Fraction(c)
                if c:
                    t[w] = c
        self.terms = t

    @staticmethod
    def of(w: Iterable[int], c=1) -> "TensorElem":
        return TensorElem({tuple(w): Fraction(c)})

    @staticmethod
    def zero() -> "TensorElem":
        return TensorElem()

    def __add__(self, other: "TensorElem") -> "TensorElem":
        t = dict(self.terms)
        for w, c in other.terms.items():
            s = t.get(w, Fraction(0)) + c
            if s:
                t[w] = s
            else:
                t.pop(w, None)
        out = TensorElem.__new__(TensorElem)
        out.terms = t
        return out

    def __sub__(self, other: "TensorElem") -> "TensorElem":
        return self + other.scale(-1)

    def scale(self, c) -> "TensorElem":
        c = Fraction(c)
        out = TensorElem.__new__(TensorElem)
        out.terms = {w: v * c for w, v in self.terms.items()} if c else {}
        return out

    def __eq__(self, other):
        if not isinstance(other, TensorElem):
            return NotImplemented
        return self.terms == other.terms

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            c = self.terms[w]
            word = "".join(map(str, w)) if all(x < 10 for x in w) else ",".join(map(str, w))
            parts.append(word if c == 1 else f"{c}*{word}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"TensorElem({self.render()})"


def _check_disjoint(u: Word, v: Word):
    if set(u) & set(v):
        raise LetterClashError(f"words {u} and {v} share letters")


def shuffle(u: Word, v: Word) -> TensorElem:
    """All interleavings preserving the internal order of each word."""
    u, v = tuple(u), tuple(v)
    _check_disjoint(u, v)

    def rec(a: Word, b: Word):
        if not a:
            yield b
            return
        if not b:
            yield a
            return
        for rest in rec(a[1:], b):
            yield (a[0],) + rest
        for rest in rec(a, b[1:]):
            yield (b[0],) + rest

    out: dict[Word, Fraction] = {}
    for w in rec(u, v):
        out[w] = out.get(w, Fraction(0)) + 1
    return TensorElem(out)


def half_shuffle(u: Word, v: Word) -> TensorElem:
    """Interleavings of u and v in which the final letter of v stays final."""
    u, v = tuple(u), tuple(v)
    if not v:
        raise ValueError("half shuffle needs a nonempty right argument")
    _check_disjoint(u, v)
    head = shuffle(u, v[:-1])
    return TensorElem({w + (v[-1],): c for w, c in head.terms.items()})


def shuffle_elems(a: TensorElem, b: TensorElem) -> TensorElem:
    out = TensorElem.zero()
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            out = out + shuffle(u, v).scale(cu * cv)
    return out


def half_shuffle_elems(a: TensorElem, b: TensorElem) -> TensorElem:
    out = TensorElem.zero()
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            out = out + half_shuffle(u, v).scale(cu * cv)
    return out


def deconcat(w: Word) -> list[tuple[Word, Word]]:
    """All splittings w = u.v, including the empty parts."""
    w = tuple(w)
    return [(w[:k], w[k:]) for k in range(len(w) + 1)]


def log_of_identity(n: int) -> GroupAlgElem:
    """Logarithm of the identity map in the convolution algebra made from the
    shuffle product and the deconcatenation coproduct, read off on the word
    1..n as a group algebra element acting by position."""
    if n < 1:
        raise ValueError("n must be >= 1")

    # (id - e)^{*k}(w) sums shuffles of the k-block deconcatenations of w;
    # blocks of the standard word are the consecutive segments.
    word = tuple(range(1, n + 1))
    cache: dict[tuple[int, int], TensorElem] = {}

    def power_applied(start: int, k: int) -> TensorElem:
        """(id - e)^{*k} applied to word[start:]."""
        if (start, k) in cache:
            return cache[(start, k)]
        rest = word[start:]
        if k == 0:
            out = TensorElem.of(()) if not rest else TensorElem.zero()
        elif k == 1:
            out = TensorElem.of(rest) if rest else TensorElem.zero()
        else:
            out = TensorElem.zero()
            for cut in range(start + 1, n - (k - 1) + 1):
                left = word[start:cut]
                out = out + shuffle_elems(TensorElem.of(left), power_applied(cut, k - 1))
        cache[(start, k)] = out
        return out

    total = TensorElem.zero()
    for k in range(1, n + 1):
        total = total + power_applied(0, k).scale(Fraction((-1) ** (k + 1), k))
    terms = {}
    for w, c in total.terms.items():
        terms[tuple(w)] = c
    return GroupAlgElem(n, terms)


# ---------------------------------------------------------------------------
# word <-> fraction dictionary
# ---------------------------------------------------------------------------

def word_to_fraction(w: Word) -> FactoredRatFn:
    """The basis fraction of a word on letters exactly 1..n: the product of
    inverse blocks over the proper prefixes of the word."""
    w = tuple(w)
    n = len(w)
    if sorted(w) != list(range(1, n + 1)):
        raise ValueError("letters must be exactly 1..n")
    return word_fraction_in(w, n)


def word_fraction_in(w: Word, nvars: int) -> FactoredRatFn:
    """Prefix-block fraction of a word with distinct letters within 1..nvars."""
    w = tuple(w)
    subsets = [frozenset(w[:j]) for j in range(1, len(w))]
    return FactoredRatFn.inverse_factors(nvars, subsets)


def tensor_to_fraction(te: TensorElem, nvars: int) -> FactoredRatFn:
    parts = [ratfn_scale(word_fraction_in(w, nvars), c) for w, c in te.terms.items()]
    return ratfn_fold_sum(parts, nvars, THETA0)


def averaged(f: FactoredRatFn, letters: Iterable[int]) -> FactoredRatFn:
    """Multiply by the inverse block of the given letters (one application of
    the averaging operator on that support)."""
    return ratfn_mul(f, FactoredRatFn.inverse_factors(f.nvars, [frozenset(letters)]))
