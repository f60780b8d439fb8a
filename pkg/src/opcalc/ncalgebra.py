"""Weight-truncated free noncommutative calculus on letters b_1, b_2, ... and d.

Words carry the weight grading w(b_i) = i, w(d) = 0 and are truncated at a
global bound; every element arising here lies in the span of words with at
most one d letter, which is enforced (a product that would create two d's
raises instead of dropping terms).  On top of the plain product sit the
commutator bracket, the weight-fraction dendriform splitting with the
adjunction rules for d, the drift recursion, the conjugator in both its
logarithm and group-like form, the subset-splitting coproduct, and truncated
exp/log.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .rfoperad import pinned_kernel_value
from .symgroup import GroupAlgElem

D_LETTER = 0

Word = tuple[int, ...]


class TwoDWordError(ValueError):
    """A product tried to create a word with two d letters."""


class FoissyDomainError(ValueError):
    """Dendriform products are undefined on the unit or on two weight-0 operands."""


def word_weight(w: Word) -> int:
    return sum(w)


def _has_d(w: Word) -> bool:
    return D_LETTER in w


class NCPoly:
    """Linear combination of words, truncated at weight <= bound."""

    __slots__ = ("bound", "terms")

    def __init__(self, bound: int, terms: Mapping[Word, Fraction] | None = None):
        self.bound = int(bound)
        t: dict[Word, Fraction] = {}
        if terms:
            for w, c in terms.items():
                w = tuple(int(x) for x in w)
                if any(x < 0 for x in w):
                    raise ValueError("letters are b_i (i >= 1) or d (0)")
                if w.count(D_LETTER) > 1:
                    raise TwoDWordError(f"word {w} holds two d letters")
                if word_weight(w) > self.bound:
                    continue
                c = Fraction(c)
                if c:
                    t[w] = c
        self.terms = t

    @staticmethod
    def zero(bound: int) -> "NCPoly":
        return NCPoly(bound)

    @staticmethod
    def unit(bound: int) -> "NCPoly":
        return NCPoly(bound, {(): Fraction(1)})

    @staticmethod
    def gen(bound: int, i: int) -> "NCPoly":
        """The letter b_i."""
        if i < 1:
            raise ValueError("generator index must be >= 1")
        return NCPoly(bound, {(i,): Fraction(1)})

    @staticmethod
    def dword(bound: int) -> "NCPoly":
        """The letter d."""
        return NCPoly(bound, {(D_LETTER,): Fraction(1)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _require_same(self, other: "NCPoly"):
        if self.bound != other.bound:
            raise ValueError(f"bound {self.bound} != {other.bound}")

    def __add__(self, other: "NCPoly") -> "NCPoly":
        self._require_same(other)
        t = dict(self.terms)
        for w, c in other.terms.items():
            s = t.get(w, Fraction(0)) + c
            if s:
                t[w] = s
            else:
                t.pop(w, None)
        out = NCPoly.__new__(NCPoly)
        out.bound = self.bound
        out.terms = t
        return out

    def __neg__(self) -> "NCPoly":
        out = NCPoly.__new__(NCPoly)
        out.bound = self.bound
        out.terms = {w: -c for w, c in self.terms.items()}
        return out

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-other)

    def scale(self, c) -> "NCPoly":
        c = Fraction(c)
        if not c:
            return NCPoly.zero(self.bound)
        out = NCPoly.__new__(NCPoly)
        out.bound = self.bound
        out.terms = {w: v * c for w, v in self.terms.items()}
        return out

    def __mul__(self, other: "NCPoly") -> "NCPoly":
        self._require_same(other)
        bound = self.bound
        t: dict[Word, Fraction] = {}
        for u, cu in self.terms.items():
            wu = word_weight(u)
            ud = _has_d(u)
            for v, cv in other.terms.items():
                if ud and _has_d(v):
                    raise TwoDWordError(f"product {u} * {v} creates two d letters")
                if wu + word_weight(v) > bound:
                    continue
                w = u + v
                s = t.get(w, Fraction(0)) + cu * cv
                if s:
                    t[w] = s
                else:
                    t.pop(w, None)
        out = NCPoly.__new__(NCPoly)
        out.bound = bound
        out.terms = t
        return out

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.bound == other.bound and self.terms == other.terms

    def __hash__(self):
        return hash((self.bound, tuple(sorted(self.terms.items()))))

    def weight_component(self, w: int) -> "NCPoly":
        return NCPoly(self.bound, {u: c for u, c in self.terms.items() if word_weight(u) == w})

    def weight_components(self) -> dict[int, "NCPoly"]:
        buckets: dict[int, dict[Word, Fraction]] = {}
        for u, c in self.terms.items():
            buckets.setdefault(word_weight(u), {})[u] = c
        return {w: NCPoly(self.bound, t) for w, t in sorted(buckets.items())}

    def contains_d(self) -> bool:
        return any(_has_d(w) for w in self.terms)

    def constant_coeff(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def render(self) -> str:
        if not self.terms:
            return "0"

        def letter(x: int) -> str:
            return "d" if x == D_LETTER else f"b{x}"

        parts = []
        for w in sorted(self.terms, key=lambda u: (word_weight(u), len(u), u)):
            c = self.terms[w]
            word = ".".join(letter(x) for x in w) if w else "1"
            parts.append(f"{c}*{word}" if c != 1 else word)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"NCPoly({self.render()})"


def bracket(u: NCPoly, v: NCPoly) -> NCPoly:
    return u * v - v * u


# ---------------------------------------------------------------------------
# dendriform splitting with the d adjunction
# ---------------------------------------------------------------------------

def _dendriform(u: NCPoly, v: NCPoly, left_heavy: bool) -> NCPoly:
    u._require_same(v)
    bound = u.bound
    acc = NCPoly.zero(bound)
    for a, ca in u.terms.items():
        wa = word_weight(a)
        for b, cb in v.terms.items():
            wb = word_weight(b)
            if a == () or b == ():
                raise FoissyDomainError("dendriform products are undefined on the unit")
            if wa == 0 and wb == 0:
                raise FoissyDomainError("both operands have weight 0")
            if a == (D_LETTER,):
                if left_heavy:
                    continue  # d < u = 0
                word = a + b  # d > u = d.u
                coef = Fraction(1)
            elif b == (D_LETTER,):
                if not left_heavy:
                    continue  # u > d = 0
                word = a + b  # u < d = u.d
                coef = Fraction(1)
            else:
                if _has_d(a) and _has_d(b):
                    raise TwoDWordError(f"product {a} * {b} creates two d letters")
                coef = Fraction(wa, wa + wb) if left_heavy else Fraction(wb, wa + wb)
                word = a + b
            if word_weight(word) > bound:
                continue
            s = acc.terms.get(word, Fraction(0)) + ca * cb * coef
            if s:
                acc.terms[word] = s
            else:
                acc.terms.pop(word, None)
    return acc


def foissy_prec(u: NCPoly, v: NCPoly) -> NCPoly:
    """Weight-fraction left product: on homogeneous positive-weight words
    u < v = (|u|/(|u|+|v|)) uv, with u < d = ud and d < u = 0."""
    return _dendriform(u, v, left_heavy=True)


def foissy_succ(u: NCPoly, v: NCPoly) -> NCPoly:
    """Weight-fraction right product: u > v = (|v|/(|u|+|v|)) uv, with
    d > u = du and u > d = 0."""
    return _dendriform(u, v, left_heavy=False)


def foissy_pre_lie(x: NCPoly, y: NCPoly) -> NCPoly:
    """x <| y = (|x|/(|x|+|y|)) [x, y] on weight-homogeneous operands."""
    parts = NCPoly.zero(x.bound)
    for wx, px in x.weight_components().items():
        for wy, py in y.weight_components().items():
            if wx == 0 or wy == 0:
                raise FoissyDomainError("pre-lie product needs positive weights")
            parts = parts + bracket(px, py).scale(Fraction(wx, wx + wy))
    return parts


# ---------------------------------------------------------------------------
# drift recursion and the conjugator
# ---------------------------------------------------------------------------

def drift_sequence(bound: int) -> list[NCPoly]:
    """a_1..a_bound solving a_n = [b_n, d] + sum_{i+j=n} (i/n) [b_i, a_j]."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    d = NCPoly.dword(bound)
    seq: list[NCPoly] = []
    for n in range(1, bound + 1):
        acc = bracket(NCPoly.gen(bound, n), d)
        for i in range(1, n):
            j = n - i
            acc = acc + bracket(NCPoly.gen(bound, i), seq[j - 1]).scale(Fraction(i, n))
        seq.append(acc)
    return seq


def weighted_drift(seq: Sequence[NCPoly]) -> list[NCPoly]:
    """The rescaled picture: n times the n-th drift term."""
    return [a.scale(n) for n, a in enumerate(seq, start=1)]


def _compositions_bounded(max_total: int):
    """All tuples of positive integers with sum <= max_total, shortest first."""
    for total in range(1, max_total + 1):
        for k in range(1, total + 1):
            for cuts in itertools.combinations(range(1, total), k - 1):
                prev = 0
                parts = []
                for c in cuts:
                    parts.append(c - prev)
                    prev = c
                parts.append(total - prev)
                yield tuple(parts)


def conjugator_log(bound: int) -> NCPoly:
    """The logarithm of the conjugator: pinned-kernel coefficients on nested
    left brackets of the weighted generators."""
    if bound < 0:
        raise ValueError("bound must be >= 0")
    acc = NCPoly.zero(bound)
    for tup in _compositions_bounded(bound):
        coeff = pinned_kernel_value([Fraction(x) for x in tup])
        for x in tup:
            coeff *= x
        word = NCPoly.gen(bound, tup[0])
        for x in tup[1:]:
            word = bracket(NCPoly.gen(bound, x), word)
        if not word.is_zero:
            acc = acc + word.scale(coeff)
    return acc


def exp_adjoint(x: NCPoly, target: NCPoly) -> NCPoly:
    """sum_k ad_x^k(target) / k!, truncated by the weight bound."""
    if any(word_weight(w) == 0 for w in x.terms):
        raise ValueError("the exponent must have positive-weight terms only")
    acc = target
    term = target
    k = 0
    while not term.is_zero and k <= x.bound + 1:
        k += 1
        term = bracket(x, term).scale(Fraction(1, k))
        acc = acc + term
    return acc


def beta_element(bound: int) -> NCPoly:
    """Sum of all generators up to the weight bound."""
    acc = NCPoly.zero(bound)
    for i in range(1, bound + 1):
        acc = acc + NCPoly.gen(bound, i)
    return acc


def beta_powers(bound: int, kmax: int) -> list[NCPoly]:
    """Right-normed dendriform powers of beta: [beta^{<1}, beta^{<2}, ...]."""
    beta = beta_element(bound)
    out = [beta]
    for _ in range(1, kmax):
        out.append(foissy_prec(beta, out[-1]))
    return out


def conjugator_group(bound: int) -> NCPoly:
    """1 + sum_k beta^{<k}, the group-like form of the conjugator."""
    if bound < 0:
        raise ValueError("bound must be >= 0")
    acc = NCPoly.unit(bound)
    if bound == 0:
        return acc
    for p in beta_powers(bound, bound):
        acc = acc + p
    return acc


def nc_log(p: NCPoly) -> NCPoly:
    """Truncated log of 1 + (positive-weight part)."""
    if p.constant_coeff() != 1:
        raise ValueError("log needs constant term 1")
    u = p - NCPoly.unit(p.bound)
    if any(word_weight(w) == 0 for w in u.terms):
        raise ValueError("log needs a positive-weight augmentation part")
    acc = NCPoly.zero(p.bound)
    power = NCPoly.unit(p.bound)
    for k in range(1, p.bound + 1):
        power = power * u
        if power.is_zero:
            break
        acc = acc + power.scale(Fraction((-1) ** (k + 1), k))
    return acc


def nc_exp(p: NCPoly) -> NCPoly:
    """Truncated exp of a positive-weight element."""
    if any(word_weight(w) == 0 for w in p.terms):
        raise ValueError("exp needs a positive-weight element")
    acc = NCPoly.unit(p.bound)
    power = NCPoly.unit(p.bound)
    for k in range(1, p.bound + 1):
        power = power * p
        if power.is_zero:
            break
        acc = acc + power.scale(Fraction(1, factorial(k)))
    return acc


# ---------------------------------------------------------------------------
# coproduct
# ---------------------------------------------------------------------------

class TensorSquare:
    """Linear combination of word pairs."""

    __slots__ = ("bound", "terms")

    def __init__(self, bound: int, terms: Mapping[tuple[Word, Word], Fraction] | None = None):
        self.bound = int(bound)
        t: dict[tuple[Word, Word], Fraction] = {}
        if terms:
            for (u, v), c in terms.items():
                c = Fraction(c)
                if c:
                    t[(tuple(u), tuple(v))] = c
        self.terms = t

    def __add__(self, other: "TensorSquare") -> "TensorSquare":
        t = dict(self.terms)
        for k, c in other.terms.items():
            s = t.get(k, Fraction(0)) + c
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return TensorSquare(self.bound, t)

    def __sub__(self, other: "TensorSquare") -> "TensorSquare":
        return self + other.scale(-1)

    def scale(self, c) -> "TensorSquare":
        c = Fraction(c)
        return TensorSquare(self.bound, {k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, TensorSquare):
            return NotImplemented
        return self.terms == other.terms

    def restrict_total_weight(self, w: int) -> "TensorSquare":
        return TensorSquare(self.bound, {
            (u, v): c for (u, v), c in self.terms.items()
            if word_weight(u) + word_weight(v) <= w
        })

    @property
    def is_zero(self) -> bool:
        return not self.terms


def coproduct(p: NCPoly) -> TensorSquare:
    """Subset-splitting coproduct with every generator primitive.

    Defined on the d-free subalgebra only.
    """
    if p.contains_d():
        raise ValueError("coproduct is defined on the d-free subalgebra")
    out: dict[tuple[Word, Word], Fraction] = {}
    for w, c in p.terms.items():
        ln = len(w)
        for mask in range(1 << ln):
            left = tuple(w[i] for i in range(ln) if mask & (1 << i))
            right = tuple(w[i] for i in range(ln) if not mask & (1 << i))
            key = (left, right)
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return TensorSquare(p.bound, out)


def tensor_of(p: NCPoly, q: NCPoly) -> TensorSquare:
    out: dict[tuple[Word, Word], Fraction] = {}
    for u, cu in p.terms.items():
        for v, cv in q.terms.items():
            out[(u, v)] = cu * cv
    return TensorSquare(p.bound, out)


# ---------------------------------------------------------------------------
# group algebra action on letter words
# ---------------------------------------------------------------------------

def apply_group_algebra(elem: GroupAlgElem, letters: Sequence[int], bound: int) -> NCPoly:
    """Position action: a permutation sigma sends the word l_1...l_n to
    l_{sigma(1)}...l_{sigma(n)}, extended linearly."""
    if len(letters) != elem.n:
        raise ValueError("letter count != group algebra arity")
    terms: dict[Word, Fraction] = {}
    for p, c in elem.terms.items():
        w = tuple(letters[v - 1] for v in p)
        terms[w] = terms.get(w, Fraction(0)) + c
    return NCPoly(bound, terms)
