"""Free commutative Rota-Baxter calculus of weight theta.

Multilinear expressions in letters a_1..a_n built from a commutative product
and an averaging operator R are rewritten to the nested-monomial normal form:
a chain of strictly nested subsets with positive exponents, standing for

    R^{d_k}( ... R^{d_2}( R^{d_1}(a_{I_1}) a_{I_2 \\ I_1} ) ... ) a_{[n] \\ I_k}.

The rewrite rule expands sibling pairs R(u) R(v) by the weight-theta relation
R(u)R(v) = R(R(u)v + uR(v) + theta uv); two redex strategies are provided so
strategy independence can be checked.  Monomials map to factored rational
functions (one inverse family factor per chain entry), the census of monomials
is compared against the Hilbert-series expansion driven by Eulerian
polynomials, and the compositional inverse of the counting series is verified
coefficient by coefficient.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

from .exact import (
    THETA,
    FactoredRatFn,
    MPoly,
    QFrac,
    QPoly,
    ThetaScalar,
    TruncSeries,
    factor_key,
    ratfn_eq,
    ratfn_eval,
    ratfn_fold_sum,
    ratfn_mul,
    ratfn_sum,
)
from .symgroup import eulerian_poly


class RBParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class RewriteBudgetError(RuntimeError):
    """The rewrite step budget was exhausted; reported, never silent."""


# ---------------------------------------------------------------------------
# expression trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    index: int


@dataclass(frozen=True)
class RNode:
    child: "RBExpr"


@dataclass(frozen=True)
class Mul:
    children: tuple


RBExpr = Leaf | RNode | Mul


def leaf_set(e: RBExpr) -> frozenset[int]:
    if isinstance(e, Leaf):
        return frozenset((e.index,))
    if isinstance(e, RNode):
        return leaf_set(e.child)
    out: set[int] = set()
    for c in e.children:
        out |= leaf_set(c)
    return frozenset(out)


def expr_arity(e: RBExpr) -> int:
    return len(leaf_set(e))


def render_expr(e: RBExpr) -> str:
    if isinstance(e, Leaf):
        return f"a{e.index}"
    if isinstance(e, RNode):
        return f"(R {render_expr(e.child)})"
    return "(* " + " ".join(render_expr(c) for c in e.children) + ")"


# ---------------------------------------------------------------------------
# parser:  expr ::= atom | "(R " expr ")" | "(* " expr (" " expr)+ ")"
# ---------------------------------------------------------------------------

def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()*R":
            tokens.append((ch, i))
            i += 1
            continue
        if ch == "a":
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise RBParseError("letter 'a' must be followed by an index", i)
            tokens.append((("atom", int(text[i + 1:j])), i))
            i = j
            continue
        raise RBParseError(f"unexpected character {ch!r}", i)
    return tokens


def rb_parse(text: str) -> RBExpr:
    """Parse an expression and validate its leaves as a multilinear set."""
    tokens = _tokenize(text)
    pos = 0

    def need(kind):
        nonlocal pos
        if pos >= len(tokens):
            raise RBParseError("unexpected end of input", len(text))
        tok, at = tokens[pos]
        if tok != kind:
            raise RBParseError(f"expected {kind!r}", at)
        pos += 1
        return at

    def parse_expr() -> RBExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise RBParseError("unexpected end of input", len(text))
        tok, at = tokens[pos]
        if isinstance(tok, tuple) and tok[0] == "atom":
            pos += 1
            if tok[1] < 1:
                raise RBParseError("leaf index must be >= 1", at)
            return Leaf(tok[1])
        if tok == "(":
            pos += 1
            if pos >= len(tokens):
                raise RBParseError("unexpected end of input", len(text))
            head, hat = tokens[pos]
            if head == "R":
                pos += 1
                child = parse_expr()
                need(")")
                return RNode(child)
            if head == "*":
                pos += 1
                children = [parse_expr(), parse_expr()]
                while pos < len(tokens) and tokens[pos][0] != ")":
                    children.append(parse_expr())
                need(")")
                return Mul(tuple(children))
            raise RBParseError("expected 'R' or '*' after '('", hat)
        raise RBParseError("expected an atom or '('", at)

    expr = parse_expr()
    if pos != len(tokens):
        raise RBParseError("trailing input", tokens[pos][1])
    seen: set[int] = set()

    def walk(e: RBExpr):
        if isinstance(e, Leaf):
            if e.index in seen:
                raise RBParseError(f"repeated leaf index a{e.index}", 0)
            seen.add(e.index)
        elif isinstance(e, RNode):
            walk(e.child)
        else:
            for c in e.children:
                walk(c)

    walk(expr)
    if seen != set(range(1, len(seen) + 1)):
        missing = sorted(set(range(1, max(seen) + 1)) - seen)
        raise RBParseError(f"missing leaf indices {missing}", 0)
    return expr


# ---------------------------------------------------------------------------
# nested monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NestedRBMon:
    """Strictly nested chain of subsets of 1..n with positive exponents."""

    n: int
    chain: tuple[frozenset[int], ...]
    exps: tuple[int, ...]

    def __post_init__(self):
        if len(self.chain) != len(self.exps):
            raise ValueError("chain and exponent lengths differ")
        prev: frozenset[int] | None = None
        for I in self.chain:
            if not I or not I <= frozenset(range(1, self.n + 1)):
                raise ValueError("chain entries must be nonempty subsets of 1..n")
            if prev is not None and not prev < I:
                raise ValueError("chain must be strictly nested")
            prev = I
        if any(d < 1 for d in self.exps):
            raise ValueError("exponents must be positive")

    @property
    def weight(self) -> int:
        return sum(self.exps)

    def sort_key(self):
        return (
            len(self.chain),
            tuple(sorted(I) for I in self.chain),
            self.exps,
        )

    def render(self) -> str:
        body = ""
        used: frozenset[int] = frozenset()
        for I, d in zip(self.chain, self.exps):
            fresh = " ".join(f"a{i}" for i in sorted(I - used))
            inner = f"{body} {fresh}".strip() if body else fresh
            for _ in range(d):
                inner = f"R({inner})"
            body = inner
            used = I
        outer = " ".join(f"a{i}" for i in sorted(frozenset(range(1, self.n + 1)) - used))
        return f"{body} {outer}".strip() if body else (outer or "1")


class RBLinComb:
    """Linear combination of nested monomials with Q[theta] coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        t: dict[NestedRBMon, ThetaScalar] = {}
        if terms:
            for m, c in terms.items():
                if m.n != self.n:
                    raise ValueError("mixed arities")
                if not isinstance(c, ThetaScalar):
                    c = ThetaScalar.of(c)
                if not c.is_zero:
                    t[m] = c
        self.terms = t

    def __eq__(self, other):
        if not isinstance(other, RBLinComb):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(((m.sort_key(), c) for m, c in self.terms.items()), key=lambda kv: kv[0]))))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=NestedRBMon.sort_key):
            c = self.terms[m].render()
            if c == "1":
                parts.append(m.render())
            else:
                if "+" in c or "-" in c.lstrip("-") or " " in c:
                    c = f"({c})"
                parts.append(f"{c} {m.render()}")
        return "  +  ".join(parts)


# ---------------------------------------------------------------------------
# rewriting to normal form
# ---------------------------------------------------------------------------

# canonical internal terms: ("leaf", i) | ("R", term) | ("mul", (children...))
# mul children are leaf/R nodes only (flattened), sorted by minimal leaf index

def _min_leaf(t) -> int:
    if t[0] == "leaf":
        return t[1]
    if t[0] == "R":
        return _min_leaf(t[1])
    return min(_min_leaf(c) for c in t[1])


def _mk_mul(children: Iterable) -> tuple:
    flat = []
    for c in children:
        if c[0] == "mul":
            flat.extend(c[1])
        else:
            flat.append(c)
    flat.sort(key=_min_leaf)
    if len(flat) == 1:
        return flat[0]
    return ("mul", tuple(flat))


def _canon(e: RBExpr) -> tuple:
    if isinstance(e, Leaf):
        return ("leaf", e.index)
    if isinstance(e, RNode):
        return ("R", _canon(e.child))
    return _mk_mul(_canon(c) for c in e.children)


def _find_redex(t, innermost: bool):
    """Path to a mul node holding >= 2 R children, or None.

    A path is a tuple of child positions; for a mul node the position indexes
    its children tuple, for an R node it is 0.
    """
    if t[0] == "leaf":
        return None
    if t[0] == "R":
        sub = _find_redex(t[1], innermost)
        return ((0,) + sub) if sub is not None else None
    children = t[1]
    here = sum(1 for c in children if c[0] == "R") >= 2
    order = range(len(children)) if innermost else range(len(children) - 1, -1, -1)
    if innermost:
        for i in order:
            sub = _find_redex(children[i], innermost)
            if sub is not None:
                return (i,) + sub
        return () if here else None
    if here:
        return ()
    for i in order:
        sub = _find_redex(children[i], innermost)
        if sub is not None:
            return (i,) + sub
    return None


def _rewrite_at(t, path, leftpair: bool, theta: ThetaScalar):
    """Expand one sibling R-pair at the path; returns [(coeff, term), ...]."""
    if path:
        i = path[0]
        if t[0] == "R":
            return [(c, ("R", s)) for c, s in _rewrite_at(t[1], path[1:], leftpair, theta)]
        children = list(t[1])
        out = []
        for c, s in _rewrite_at(children[i], path[1:], leftpair, theta):
            rebuilt = children[:i] + [s] + children[i + 1:]
            out.append((c, _mk_mul(rebuilt)))
        return out
    children = list(t[1])
    rpos = [i for i, c in enumerate(children) if c[0] == "R"]
    if leftpair:
        i, j = rpos[0], rpos[1]
    else:
        i, j = rpos[-2], rpos[-1]
    ru, rv = children[i], children[j]
    u, v = ru[1], rv[1]
    rest = [c for k, c in enumerate(children) if k not in (i, j)]
    one = ThetaScalar.one()
    combos = [
        (one, ("R", _mk_mul([ru, v]))),
        (one, ("R", _mk_mul([u, rv]))),
        (theta, ("R", _mk_mul([u, v]))),
    ]
    out = []
    for coeff, repl in combos:
        if coeff.is_zero:
            continue
        out.append((coeff, _mk_mul(rest + [repl])))
    return out


def _term_to_monomial(t, n: int) -> NestedRBMon:
    chain: list[frozenset[int]] = []
    exps: list[int] = []

    def peel(node):
        # returns after appending the chain of `node` bottom-up
        if node[0] == "leaf":
            return
        if node[0] == "R":
            d = 0
            while node[0] == "R":
                d += 1
                node = node[1]
            peel(node)
            chain.append(_support(node))
            exps.append(d)
            return
        rn = [c for c in node[1] if c[0] == "R"]
        if len(rn) > 1:
            raise ValueError("term is not in normal form")
        if rn:
            peel(rn[0])

    def _support(node) -> frozenset[int]:
        if node[0] == "leaf":
            return frozenset((node[1],))
        if node[0] == "R":
            return _support(node[1])
        out: set[int] = set()
        for c in node[1]:
            out |= _support(c)
        return frozenset(out)

    peel(t)
    return NestedRBMon(n, tuple(chain), tuple(exps))


def rb_normalize(
    e: RBExpr,
    theta: ThetaScalar = THETA,
    strategy: str = "innermost",
    step_budget: int = 10**6,
) -> RBLinComb:
    """Rewrite to the nested-monomial normal form.

    strategy "innermost" picks the deepest-leftmost sibling R-pair,
    "outermost" the shallowest-rightmost one; the results agree, which the
    verification suite checks on a random corpus.
    """
    if strategy not in ("innermost", "outermost"):
        raise ValueError(f"unknown strategy {strategy!r}")
    innermost = strategy == "innermost"
    n = expr_arity(e)
    state: dict[tuple, ThetaScalar] = {_canon(e): ThetaScalar.one()}
    done: dict[tuple, ThetaScalar] = {}
    steps = 0
    while state:
        term = next(iter(state))
        coeff = state.pop(term)
        path = _find_redex(term, innermost)
        if path is None:
            prev = done.get(term)
            s = coeff if prev is None else prev + coeff
            if s.is_zero:
                done.pop(term, None)
            else:
                done[term] = s
            continue
        steps += 1
        if steps > step_budget:
            raise RewriteBudgetError(f"step budget {step_budget} exhausted")
        for c, s in _rewrite_at(term, path, leftpair=innermost, theta=theta):
            w = state.get(s)
            w = coeff * c if w is None else w + coeff * c
            if w.is_zero:
                state.pop(s, None)
            else:
                state[s] = w
    return RBLinComb(n, {_term_to_monomial(t, n): c for t, c in done.items()})


# ---------------------------------------------------------------------------
# images in the rational-function operad
# ---------------------------------------------------------------------------

def nested_to_rf(m: NestedRBMon) -> FactoredRatFn:
    """1 / prod_j F_{I_j}^{d_j} as a factored rational function."""
    den: dict[frozenset, int] = {}
    for I, d in zip(m.chain, m.exps):
        den[I] = den.get(I, 0) + d
    return FactoredRatFn(m.n, MPoly.one(m.n), den)


def direct_rf_image(e: RBExpr) -> FactoredRatFn:
    """Operadic image of a raw expression: product over subexpressions of the
    inverse family factors attached to each R node."""
    n = expr_arity(e)

    def walk(node: RBExpr) -> FactoredRatFn:
        if isinstance(node, Leaf):
            return FactoredRatFn.one(n)
        if isinstance(node, RNode):
            inner = walk(node.child)
            return ratfn_mul(inner, FactoredRatFn.inverse_factors(n, [leaf_set(node.child)]))
        acc = FactoredRatFn.one(n)
        for c in node.children:
            acc = ratfn_mul(acc, walk(c))
        return acc

    return walk(e)


def comb_to_rf(lc: RBLinComb, theta: ThetaScalar) -> FactoredRatFn:
    """Image of a normalized combination: coefficient-weighted sum of the
    monomial fractions.

    Summed by recursive grouping on the outermost chain factor, so the large
    outer factors never enter a numerator expansion; the inner partial sums
    telescope and stay small.
    """
    items = [(tuple(zip(m.chain, m.exps)), c) for m, c in lc.terms.items()]
    return _grouped_image(items, lc.n, theta)


def _grouped_image(items, n: int, theta: ThetaScalar) -> FactoredRatFn:
    parts = []
    groups: dict[tuple, list] = {}
    for chain, c in items:
        if not chain:
            parts.append(FactoredRatFn(n, MPoly.const(n, c)))
        else:
            groups.setdefault(chain[-1], []).append((chain[:-1], c))
    for (J, d), inner in sorted(groups.items(), key=lambda kv: (factor_key(kv[0][0]), kv[0][1])):
        inner_img = _grouped_image(inner, n, theta)
        parts.append(ratfn_mul(inner_img, FactoredRatFn.inverse_factors(n, [J] * d)))
    return ratfn_fold_sum(parts, n, theta)


# ---------------------------------------------------------------------------
# census and Hilbert series
# ---------------------------------------------------------------------------

def iter_chains(n: int) -> Iterator[tuple[frozenset[int], ...]]:
    """All strictly nested chains of nonempty subsets of 1..n (incl. empty chain)."""
    subsets = []
    universe = list(range(1, n + 1))
    for r in range(1, n + 1):
        for S in itertools.combinations(universe, r):
            subsets.append(frozenset(S))
    subsets.sort(key=lambda S: (len(S), tuple(sorted(S))))

    def extend(chain: tuple):
        yield chain
        last = chain[-1] if chain else None
        for S in subsets:
            if last is None or last < S:
                yield from extend(chain + (S,))

    yield from extend(())


def iter_monomials(n: int, max_weight: int) -> Iterator[NestedRBMon]:
    """All nested monomials of arity n and weight <= max_weight."""
    for chain in iter_chains(n):
        k = len(chain)
        if k == 0:
            yield NestedRBMon(n, (), ())
            continue
        if k > max_weight:
            continue
        for exps in _positive_tuples(k, max_weight):
            yield NestedRBMon(n, chain, exps)


def _positive_tuples(k: int, total_max: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for first in range(1, total_max - k + 2):
        for rest in _positive_tuples(k - 1, total_max - first):
            yield (first,) + rest


def census(n: int, dmax: int) -> list[int]:
    """Number of nested monomials of arity n per weight 0..dmax, enumerated."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if dmax < 0:
        raise ValueError("dmax must be >= 0")
    counts = [0] * (dmax + 1)
    for m in iter_monomials(n, dmax):
        counts[m.weight] += 1
    return counts


def hilbert_coeffs(n: int, dmax: int) -> list[int]:
    """q-expansion of eulerian_poly(n) / (1-q)^n up to q^dmax."""
    if n < 1:
        raise ValueError("n must be >= 1")
    P = eulerian_poly(n)
    out = []
    for d in range(dmax + 1):
        acc = 0
        for k in range(min(d, P.degree()) + 1):
            c = P.coeff(k)
            acc += int(c) * comb(d - k + n - 1, n - 1)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# counting-series inversion
# ---------------------------------------------------------------------------

def minimal_model_series(order: int) -> TruncSeries:
    """sum_{n>=1} (-1)^(n-1) t^n (1-q^n) / n."""
    coeffs = {}
    for n in range(1, order + 1):
        poly = QPoly([1] + [0] * (n - 1) + [-1])  # 1 - q^n
        coeffs[n] = QFrac(poly.scale(Fraction((-1) ** (n - 1), n)))
    return TruncSeries(order, coeffs)


def counting_series_coeff(n: int) -> QFrac:
    """P_n(q) / (n! (1-q)^n)."""
    one_minus_q = QPoly([1, -1])
    den = QPoly.one()
    for _ in range(n):
        den = den * one_minus_q
    return QFrac(eulerian_poly(n).scale(Fraction(1, factorial(n))), den)


def poincare_inverse_report(maxn: int) -> list[tuple[int, bool]]:
    """Compare the compositional inverse of the minimal-model series with the
    Eulerian counting series, coefficient by coefficient."""
    if maxn > 8:
        raise ValueError("maxn must be <= 8")
    results = []
    if maxn < 1:
        return results
    f = minimal_model_series(maxn)
    g = f.comp_inverse()
    for n in range(1, maxn + 1):
        results.append((n, g.coeff(n) == counting_series_coeff(n)))
    return results


# ---------------------------------------------------------------------------
# independence of monomial images
# ---------------------------------------------------------------------------

_RANK_PRIMES = (2**61 - 1, 2**31 - 1)


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    rows = [[v % p for v in r] for r in rows]
    cols = len(rows[0]) if rows else 0
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][c]:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        inv = pow(prow[c], -1, p)
        for r in range(rank + 1, len(rows)):
            f = rows[r][c]
            if f:
                f = f * inv % p
                rr = rows[r]
                for j in range(c, cols):
                    rr[j] = (rr[j] - f * prow[j]) % p
        rank += 1
        if rank == len(rows):
            break
    return rank


def _rank_exact(rows: list[list[Fraction]]) -> int:
    rows = [list(r) for r in rows]
    cols = len(rows[0]) if rows else 0
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][c]:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        for r in range(rank + 1, len(rows)):
            if rows[r][c]:
                f = rows[r][c] / prow[c]
                rr = rows[r]
                for j in range(c, cols):
                    rr[j] -= f * prow[j]
        rank += 1
        if rank == len(rows):
            break
    return rank


def independence_report(
    n: int,
    dmax: int,
    thetas: Sequence[Fraction],
    seed: int = 0xC0FFEE,
) -> list[tuple[Fraction, int, int, bool]]:
    """Rank of the span of monomial images, per specialized theta.

    Every image is evaluated at count+8 shared positive rational points (no
    family factor can vanish there for theta >= 0); rows are scaled to
    integers.  Full rank modulo a large prime already certifies full rank
    over Q, hence full functional rank; a deficient modular rank falls back
    to exact elimination before reporting failure.
    """
    import random
    from math import lcm

    if n > 3 or dmax > 4:
        raise ValueError("independence check supported for n <= 3, d <= 4")
    monomials = sorted(iter_monomials(n, dmax), key=NestedRBMon.sort_key)
    count = len(monomials)
    rng = random.Random(f"independence:{seed}:{n}:{dmax}")
    npoints = count + 8
    points = []
    for _ in range(npoints):
        points.append(tuple(Fraction(rng.randint(1, 97), rng.randint(1, 19)) for _ in range(n)))
    out = []
    for tv in thetas:
        tv = Fraction(tv)
        rows = []
        for m in monomials:
            img = nested_to_rf(m)
            vals = [ratfn_eval(img, pt, tv) for pt in points]
            scale = lcm(*(v.denominator for v in vals)) if vals else 1
            rows.append([int(v * scale) for v in vals])
        rank = 0
        for p in _RANK_PRIMES:
            rank = max(rank, _rank_mod_p(rows, p))
            if rank == count:
                break
        if rank < count:
            rank = _rank_exact([[Fraction(v) for v in r] for r in rows])
        out.append((tv, count, rank, rank == count))
    return out


# ---------------------------------------------------------------------------
# the antiderivative model on polynomials
# ---------------------------------------------------------------------------

def integration_model_report(amax: int) -> bool:
    """Weight-zero identity for R = antiderivative on monomials z^a, z^b."""
    if amax < 0:
        raise ValueError("amax must be >= 0")

    def integrate(p: QPoly) -> QPoly:
        return QPoly([Fraction(0)] + [c / (k + 1) for k, c in enumerate(p.coeffs)])

    for a in range(amax + 1):
        for b in range(amax + 1):
            za, zb = QPoly.monomial(a), QPoly.monomial(b)
            lhs = integrate(za) * integrate(zb)
            rhs = integrate(integrate(za) * zb + za * integrate(zb))
            if lhs != rhs:
                return False
    return True
