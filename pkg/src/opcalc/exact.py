"""Exact arithmetic kernel.

Scalars live in Q[theta] with theta an exact polynomial parameter, so every
identity checked on top of this module holds for all weights simultaneously.
Multivariate polynomials are sparse maps from exponent vectors to Q[theta]
coefficients; internally theta is carried as one more packed exponent slot so
the hot loops run on integer keys and plain Fractions.  Rational functions
keep their denominators as multisets of factors drawn from the fixed family
of formal-group blocks

    F_J = x_{j1} (+) x_{j2} (+) ... (+) x_{js},   x (+) y = x + y + theta*x*y,

which makes common denominators and cancellation cheap: divisibility against
a family factor is decided by structured long division, never by a
multivariate gcd.  Truncated power series in t with coefficients that are
rational functions of q round out the kernel.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence


class ArityMismatchError(ValueError):
    """Operands are defined over different variable counts."""


class FactorFamilyError(ValueError):
    """A substitution or cancellation left the supported denominator family."""


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected int or Fraction, got {type(v).__name__}")


# ---------------------------------------------------------------------------
# scalars: Q[theta]
# ---------------------------------------------------------------------------

class ThetaScalar:
    """Element of Q[theta], stored as a sparse {exponent: Fraction} map.

    Values are immutable by convention: no method mutates self after
    construction, and normalization (no zero coefficients) happens in the
    constructor.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, Fraction] | None = None):
        c: dict[int, Fraction] = {}
        if coeffs:
            for e, v in coeffs.items():
                v = _frac(v)
                if v:
                    c[int(e)] = v
        self._c = c

    @staticmethod
    def of(v) -> "ThetaScalar":
        return ThetaScalar({0: _frac(v)})

    @staticmethod
    def zero() -> "ThetaScalar":
        return _TS_ZERO

    @staticmethod
    def one() -> "ThetaScalar":
        return _TS_ONE

    @staticmethod
    def theta(power: int = 1) -> "ThetaScalar":
        return ThetaScalar({power: Fraction(1)})

    def _coerced(self, other) -> "ThetaScalar":
        if isinstance(other, ThetaScalar):
            return other
        return ThetaScalar.of(other)

    @property
    def is_zero(self) -> bool:
        return not self._c

    def items(self):
        return self._c.items()

    def __add__(self, other):
        other = self._coerced(other)
        c = dict(self._c)
        for e, v in other._c.items():
            w = c.get(e, _F0) + v
            if w:
                c[e] = w
            else:
                c.pop(e, None)
        out = ThetaScalar.__new__(ThetaScalar)
        out._c = c
        return out

    __radd__ = __add__

    def __neg__(self):
        out = ThetaScalar.__new__(ThetaScalar)
        out._c = {e: -v for e, v in self._c.items()}
        return out

    def __sub__(self, other):
        return self + (-self._coerced(other))

    def __rsub__(self, other):
        return self._coerced(other) + (-self)

    def __mul__(self, other):
        other = self._coerced(other)
        c: dict[int, Fraction] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                e = e1 + e2
                w = c.get(e, _F0) + v1 * v2
                if w:
                    c[e] = w
                else:
                    c.pop(e, None)
        out = ThetaScalar.__new__(ThetaScalar)
        out._c = c
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial scalar")
        acc = ThetaScalar.one()
        for _ in range(k):
            acc = acc * self
        return acc

    def __eq__(self, other):
        if not isinstance(other, (ThetaScalar, int, Fraction)):
            return NotImplemented
        return self._c == self._coerced(other)._c

    def __hash__(self):
        return hash(tuple(sorted(self._c.items())))

    def __bool__(self):
        return bool(self._c)

    def eval_at(self, t: Fraction) -> Fraction:
        t = _frac(t)
        acc = Fraction(0)
        for e, v in self._c.items():
            acc += v * t**e
        return acc

    def degree(self) -> int:
        return max(self._c) if self._c else -1

    def constant(self) -> Fraction:
        """The rational value, if there is no theta dependence."""
        if any(e for e in self._c):
            raise ValueError("scalar depends on theta")
        return self._c.get(0, _F0)

    def render(self, var: str = "theta") -> str:
        if not self._c:
            return "0"
        parts = []
        for e in sorted(self._c):
            v = self._c[e]
            if e == 0:
                parts.append(str(v))
            else:
                head = var if e == 1 else f"{var}^{e}"
                if v == 1:
                    parts.append(head)
                elif v == -1:
                    parts.append(f"-{head}")
                else:
                    parts.append(f"{v}*{head}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self):
        return f"ThetaScalar({self.render()})"


_F0 = Fraction(0)
_F1 = Fraction(1)
_TS_ZERO = ThetaScalar()
_TS_ONE = ThetaScalar({0: Fraction(1)})

THETA = ThetaScalar.theta()
THETA0 = ThetaScalar.of(0)


def theta_const(v) -> ThetaScalar:
    return ThetaScalar.of(v)


# ---------------------------------------------------------------------------
# sparse multivariate polynomials over Q[theta]
#
# Internal representation: {packed_key: Fraction} where the packed key holds
# the theta exponent in the lowest _PACK_BITS bits and the exponent of x_i in
# the i-th higher slot.  Keys add under multiplication; slots never overflow
# at the degrees this package reaches (< 2^16).
# ---------------------------------------------------------------------------

_PACK_BITS = 16
_PACK_MASK = (1 << _PACK_BITS) - 1


def _numnorm(v):
    """Coefficients stay plain ints whenever exact, for speed; Fractions only
    when a denominator is genuinely needed."""
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _xshift(i: int) -> int:
    """Bit offset of the exponent slot of x_i (1-indexed label)."""
    return _PACK_BITS * i


def _pack(exps: Sequence[int], theta_exp: int = 0) -> int:
    key = theta_exp
    for i, e in enumerate(exps):
        if e:
            key += e << (_PACK_BITS * (i + 1))
    return key


def _unpack(key: int, nvars: int) -> tuple[int, tuple[int, ...]]:
    theta_exp = key & _PACK_MASK
    exps = tuple((key >> (_PACK_BITS * (i + 1))) & _PACK_MASK for i in range(nvars))
    return theta_exp, exps


class MPoly:
    """Sparse polynomial in x_1..x_n over Q[theta]."""

    __slots__ = ("nvars", "_d")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = int(nvars)
        d: dict[int, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != self.nvars:
                    raise ValueError("exponent vector length != nvars")
                if not isinstance(c, ThetaScalar):
                    c = ThetaScalar.of(c)
                base = _pack(e)
                for texp, v in c.items():
                    key = base + texp
                    w = d.get(key, 0) + _numnorm(v)
                    if w:
                        d[key] = w
                    else:
                        d.pop(key, None)
        self._d = d

    @classmethod
    def _raw(cls, nvars: int, d: dict[int, Fraction]) -> "MPoly":
        out = cls.__new__(cls)
        out.nvars = nvars
        out._d = d
        return out

    @staticmethod
    def zero(nvars: int) -> "MPoly":
        return MPoly._raw(nvars, {})

    @staticmethod
    def const(nvars: int, c) -> "MPoly":
        if not isinstance(c, ThetaScalar):
            c = ThetaScalar.of(c)
        return MPoly._raw(nvars, {texp: _numnorm(v) for texp, v in c.items()})

    @staticmethod
    def one(nvars: int) -> "MPoly":
        return MPoly._raw(nvars, {0: 1})

    @staticmethod
    def variable(nvars: int, i: int) -> "MPoly":
        """x_i with 1-indexed label i."""
        if not 1 <= i <= nvars:
            raise ValueError(f"variable index {i} out of range 1..{nvars}")
        return MPoly._raw(nvars, {1 << _xshift(i): 1})

    @property
    def is_zero(self) -> bool:
        return not self._d

    @property
    def terms(self) -> dict[tuple, ThetaScalar]:
        """Exponent-vector view with Q[theta] coefficients."""
        grouped: dict[tuple, dict[int, Fraction]] = {}
        for key, v in self._d.items():
            texp, exps = _unpack(key, self.nvars)
            grouped.setdefault(exps, {})[texp] = v
        return {e: ThetaScalar(c) for e, c in grouped.items()}

    def const_coeff(self) -> ThetaScalar:
        """Coefficient of the exponent-free monomial, as a Q[theta] scalar."""
        c = {key: v for key, v in self._d.items() if key >> _PACK_BITS == 0}
        return ThetaScalar(c)

    def _require_same(self, other: "MPoly"):
        if self.nvars != other.nvars:
            raise ArityMismatchError(f"nvars {self.nvars} != {other.nvars}")

    def __add__(self, other: "MPoly") -> "MPoly":
        self._require_same(other)
        d = dict(self._d)
        get = d.get
        for key, v in other._d.items():
            w = get(key, 0) + v
            if w:
                d[key] = w
            else:
                del d[key]
        return MPoly._raw(self.nvars, d)

    def __neg__(self) -> "MPoly":
        return MPoly._raw(self.nvars, {k: -v for k, v in self._d.items()})

    def __sub__(self, other: "MPoly") -> "MPoly":
        self._require_same(other)
        d = dict(self._d)
        get = d.get
        for key, v in other._d.items():
            w = get(key, 0) - v
            if w:
                d[key] = w
            else:
                del d[key]
        return MPoly._raw(self.nvars, d)

    def __mul__(self, other: "MPoly") -> "MPoly":
        self._require_same(other)
        a, b = self._d, other._d
        if len(a) > len(b):
            a, b = b, a
        d: dict[int, object] = {}
        get = d.get
        for k1, v1 in a.items():
            for k2, v2 in b.items():
                k = k1 + k2
                w = get(k, 0) + v1 * v2
                if w:
                    d[k] = w
                else:
                    del d[k]
        return MPoly._raw(self.nvars, d)

    def scale(self, c) -> "MPoly":
        if isinstance(c, ThetaScalar):
            items = [(texp, _numnorm(v)) for texp, v in c.items()]
            if not items:
                return MPoly.zero(self.nvars)
            if len(items) == 1:
                texp, v = items[0]
                return MPoly._raw(self.nvars, {k + texp: w * v for k, w in self._d.items()})
            d: dict[int, object] = {}
            get = d.get
            for texp, v in items:
                for k, w in self._d.items():
                    key = k + texp
                    s = get(key, 0) + w * v
                    if s:
                        d[key] = s
                    else:
                        del d[key]
            return MPoly._raw(self.nvars, d)
        c = _numnorm(_frac(c))
        if not c:
            return MPoly.zero(self.nvars)
        return MPoly._raw(self.nvars, {k: v * c for k, v in self._d.items()})

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._d == other._d

    def __hash__(self):
        return hash((self.nvars, frozenset(self._d.items())))

    def pow(self, k: int) -> "MPoly":
        acc = MPoly.one(self.nvars)
        for _ in range(k):
            acc = acc * self
        return acc

    def support(self) -> set[int]:
        """1-indexed labels of variables that actually occur."""
        s: set[int] = set()
        for key in self._d:
            key >>= _PACK_BITS
            i = 1
            while key:
                if key & _PACK_MASK:
                    s.add(i)
                key >>= _PACK_BITS
                i += 1
        return s

    def subst(self, images: Sequence["MPoly"], nvars_out: int) -> "MPoly":
        """Substitute x_i -> images[i-1]; all images live in nvars_out variables."""
        if len(images) != self.nvars:
            raise ArityMismatchError("len(images) != nvars")
        for img in images:
            if img.nvars != nvars_out:
                raise ArityMismatchError("image nvars != target nvars")
        pow_cache: dict[tuple[int, int], MPoly] = {}

        def img_pow(i: int, k: int) -> MPoly:
            got = pow_cache.get((i, k))
            if got is None:
                got = images[i].pow(k)
                pow_cache[(i, k)] = got
            return got

        acc = MPoly.zero(nvars_out)
        for key, v in self._d.items():
            texp, exps = _unpack(key, self.nvars)
            part = MPoly._raw(nvars_out, {texp: v})
            for i, k in enumerate(exps):
                if k:
                    part = part * img_pow(i, k)
            acc = acc + part
        return acc

    def eval_at(self, point: Sequence[Fraction], theta_value: Fraction) -> Fraction:
        if len(point) != self.nvars:
            raise ArityMismatchError("point length != nvars")
        theta_value = _frac(theta_value)
        acc = Fraction(0)
        for key, v in self._d.items():
            texp, exps = _unpack(key, self.nvars)
            if texp:
                v = v * theta_value**texp
            for x, k in zip(point, exps):
                if k:
                    v = v * _frac(x) ** k
            acc += v
        return Fraction(acc)

    def as_poly_in(self, i: int) -> dict[int, "MPoly"]:
        """Coefficient layers of x_i (1-indexed); layer keys are x_i-degrees."""
        shift = _xshift(i)
        layers: dict[int, dict[int, Fraction]] = {}
        for key, v in self._d.items():
            k = (key >> shift) & _PACK_MASK
            layers.setdefault(k, {})[key - (k << shift)] = v
        return {k: MPoly._raw(self.nvars, d) for k, d in layers.items()}

    def mul_var_power(self, i: int, k: int) -> "MPoly":
        delta = k << _xshift(i)
        return MPoly._raw(self.nvars, {key + delta: v for key, v in self._d.items()})

    def mul_theta_power(self, k: int) -> "MPoly":
        return MPoly._raw(self.nvars, {key + k: v for key, v in self._d.items()})

    def render(self, theta_var: str = "theta") -> str:
        if not self._d:
            return "0"
        parts = []
        for exps, c in sorted(self.terms.items(), reverse=True):
            mono = " ".join(
                f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}"
                for i, k in enumerate(exps)
                if k
            )
            ctext = c.render(theta_var)
            if len(list(c.items())) > 1:
                ctext = f"({ctext})"
            if not mono:
                parts.append(ctext)
            elif ctext == "1":
                parts.append(mono)
            elif ctext == "-1":
                parts.append(f"-{mono}")
            else:
                parts.append(f"{ctext} {mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"MPoly({self.nvars}; {self.render()})"


# ---------------------------------------------------------------------------
# the denominator family F_J and division against it
# ---------------------------------------------------------------------------

def factor_key(subset: frozenset) -> tuple:
    return (len(subset), tuple(sorted(subset)))


_FAMILY_CACHE: dict[tuple, MPoly] = {}


def family_poly(subset: Iterable[int], nvars: int, theta: ThetaScalar) -> MPoly:
    """Expanded family factor: sum over nonempty S <= J of theta^(|S|-1) x_S."""
    J = frozenset(int(j) for j in subset)
    if not J:
        raise ValueError("family factor over the empty set")
    if not all(1 <= j <= nvars for j in J):
        raise ValueError("factor subset not within 1..nvars")
    key = (J, nvars, theta)
    got = _FAMILY_CACHE.get(key)
    if got is not None:
        return got
    elems = sorted(J)
    acc = MPoly.zero(nvars)
    for r in range(1, len(elems) + 1):
        coef = theta ** (r - 1)
        if coef.is_zero:
            continue
        for S in itertools.combinations(elems, r):
            keybits = 0
            for j in S:
                keybits += 1 << _xshift(j)
            acc = acc + MPoly._raw(nvars, {keybits: 1}).scale(coef)
    _FAMILY_CACHE[key] = acc
    return acc


def family_value(subset: Iterable[int], point: Sequence[Fraction], theta_value: Fraction) -> Fraction:
    """Evaluate F_J at a rational point by folding x (+) y = x + y + theta x y."""
    theta_value = _frac(theta_value)
    elems = sorted(set(subset))
    acc = None
    for j in elems:
        v = _frac(point[j - 1])
        acc = v if acc is None else acc + v + theta_value * acc * v
    if acc is None:
        raise ValueError("family factor over the empty set")
    return acc


def _div_linear_unit(p: MPoly, j: int, theta: ThetaScalar) -> MPoly | None:
    """Exact quotient p / (1 + theta*x_j), or None when not divisible."""
    if theta.is_zero:
        return p
    if p.is_zero:
        return p
    layers = p.as_poly_in(j)
    top = max(layers)
    zero = MPoly.zero(p.nvars)
    # constant term of the divisor is 1, so synthesize the quotient bottom-up
    q_layers: dict[int, MPoly] = {}
    prev = zero
    for k in range(top):
        qk = layers.get(k, zero) - prev.scale(theta)
        q_layers[k] = qk
        prev = qk
    if layers.get(top, zero) != prev.scale(theta):
        return None
    acc = zero
    for k, qk in q_layers.items():
        acc = acc + qk.mul_var_power(j, k)
    return acc


def divide_by_family_factor(p: MPoly, subset: frozenset, theta: ThetaScalar) -> MPoly | None:
    """Exact quotient p / F_subset, or None when F_subset does not divide p."""
    if p.is_zero:
        return p
    elems = sorted(subset)
    if len(elems) == 1:
        j = elems[0]
        layers = p.as_poly_in(j)
        if 0 in layers:
            return None
        acc = MPoly.zero(p.nvars)
        for k, layer in layers.items():
            acc = acc + layer.mul_var_power(j, k - 1)
        return acc
    jstar = elems[-1]
    rest = elems[:-1]
    A = family_poly(rest, p.nvars, theta)
    layers = p.as_poly_in(jstar)
    top = max(layers)
    if top == 0:
        return None
    # F_J = A + x_jstar * prod_{j in rest} (1 + theta x_j); divide top-down,
    # each coefficient step dividing out the linear units bottom-up.
    zero = MPoly.zero(p.nvars)
    c = {k: layers.get(k, zero) for k in range(top + 1)}
    q_layers = {}
    for k in range(top, 0, -1):
        qk = c[k]
        if not qk.is_zero:
            for j in rest:
                qk = _div_linear_unit(qk, j, theta)
                if qk is None:
                    return None
        q_layers[k - 1] = qk
        c[k - 1] = c[k - 1] - qk * A
    if not c[0].is_zero:
        return None
    acc = zero
    for k, qk in q_layers.items():
        acc = acc + qk.mul_var_power(jstar, k)
    return acc


# ---------------------------------------------------------------------------
# factored rational functions
# ---------------------------------------------------------------------------

class FactoredRatFn:
    """numerator / prod_J F_J^m, with the denominator kept as a factor multiset.

    The canonical zero carries an empty denominator.  No further normal form
    is imposed; equality is semantic, by cross multiplication.
    """

    __slots__ = ("nvars", "num", "den")

    def __init__(self, nvars: int, num: MPoly, den: Mapping[frozenset, int] | None = None):
        if num.nvars != nvars:
            raise ArityMismatchError("numerator nvars != nvars")
        d: dict[frozenset, int] = {}
        if den and not num.is_zero:
            for J, m in den.items():
                J = frozenset(int(j) for j in J)
                m = int(m)
                if m < 0:
                    raise ValueError("negative factor multiplicity")
                if not J:
                    raise ValueError("empty factor subset")
                if not all(1 <= j <= nvars for j in J):
                    raise ValueError("factor subset not within 1..nvars")
                if m:
                    d[J] = d.get(J, 0) + m
        self.nvars = int(nvars)
        self.num = num
        self.den = d

    @staticmethod
    def zero(nvars: int) -> "FactoredRatFn":
        return FactoredRatFn(nvars, MPoly.zero(nvars))

    @staticmethod
    def one(nvars: int) -> "FactoredRatFn":
        return FactoredRatFn(nvars, MPoly.one(nvars))

    @staticmethod
    def const(nvars: int, c) -> "FactoredRatFn":
        return FactoredRatFn(nvars, MPoly.const(nvars, c))

    @staticmethod
    def inverse_factors(nvars: int, subsets: Iterable[Iterable[int]]) -> "FactoredRatFn":
        """1 / prod F_J over the listed subsets (with multiplicity)."""
        den: dict[frozenset, int] = {}
        for J in subsets:
            J = frozenset(J)
            den[J] = den.get(J, 0) + 1
        return FactoredRatFn(nvars, MPoly.one(nvars), den)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def den_sorted(self):
        return sorted(self.den.items(), key=lambda kv: factor_key(kv[0]))

    def render(self, theta_var: str = "theta", theta: "ThetaScalar | None" = None) -> str:
        """Compact form by default; pass theta to print each factor expanded
        as a polynomial under that weight."""
        num = self.num.render(theta_var)
        if not self.den:
            return num
        parts = []
        for J, m in self.den_sorted():
            if theta is not None:
                body = family_poly(J, self.nvars, theta).render(theta_var)
                text = body if len(J) == 1 else f"({body})"
            elif len(J) == 1:
                text = f"x{sorted(J)[0]}"
            else:
                text = "(" + "+".join(f"x{j}" for j in sorted(J)) + ")"
            parts.append(text if m == 1 else f"{text}^{m}")
        if " " in num or "+" in num or "-" in num.lstrip("-"):
            num = f"({num})"
        return f"{num} / " + " ".join(parts)

    def __repr__(self):
        return f"FactoredRatFn({self.nvars}; {self.render()})"


def _require_same_arity(f: FactoredRatFn, g: FactoredRatFn):
    if f.nvars != g.nvars:
        raise ArityMismatchError(f"arity {f.nvars} != {g.nvars}")


def den_expand(den: Mapping[frozenset, int], nvars: int, theta: ThetaScalar) -> MPoly:
    acc = MPoly.one(nvars)
    for J, m in sorted(den.items(), key=lambda kv: factor_key(kv[0])):
        fp = family_poly(J, nvars, theta)
        for _ in range(m):
            acc = acc * fp
    return acc


def _cancel(num: MPoly, den: dict[frozenset, int], theta: ThetaScalar):
    """Divide family factors out of the numerator while divisibility holds."""
    if num.is_zero:
        return num, {}
    den = dict(den)
    for J in sorted(den, key=factor_key):
        while den.get(J, 0) > 0:
            q = divide_by_family_factor(num, J, theta)
            if q is None:
                break
            num = q
            den[J] -= 1
            if not den[J]:
                del den[J]
    return num, den


def ratfn_scale(f: FactoredRatFn, c) -> FactoredRatFn:
    return FactoredRatFn(f.nvars, f.num.scale(c), f.den)


def ratfn_neg(f: FactoredRatFn) -> FactoredRatFn:
    return FactoredRatFn(f.nvars, -f.num, f.den)


def ratfn_mul(f: FactoredRatFn, g: FactoredRatFn) -> FactoredRatFn:
    _require_same_arity(f, g)
    if f.is_zero or g.is_zero:
        return FactoredRatFn.zero(f.nvars)
    den = dict(f.den)
    for J, m in g.den.items():
        den[J] = den.get(J, 0) + m
    return FactoredRatFn(f.nvars, f.num * g.num, den)


def ratfn_sum(items: Sequence[FactoredRatFn], nvars: int, theta: ThetaScalar) -> FactoredRatFn:
    """Sum over a shared common denominator, then cancel family factors."""
    items = [f for f in items if not f.is_zero]
    if not items:
        return FactoredRatFn.zero(nvars)
    for f in items:
        if f.nvars != nvars:
            raise ArityMismatchError("mixed arities in sum")
    common: dict[frozenset, int] = {}
    for f in items:
        for J, m in f.den.items():
            if common.get(J, 0) < m:
                common[J] = m
    num = MPoly.zero(nvars)
    for f in items:
        deficit = {J: m - f.den.get(J, 0) for J, m in common.items() if m - f.den.get(J, 0) > 0}
        num = num + f.num * den_expand(deficit, nvars, theta)
    num, den = _cancel(num, common, theta)
    return FactoredRatFn(nvars, num, den)


def ratfn_add(f: FactoredRatFn, g: FactoredRatFn, theta: ThetaScalar) -> FactoredRatFn:
    _require_same_arity(f, g)
    return ratfn_sum([f, g], f.nvars, theta)


def ratfn_sub(f: FactoredRatFn, g: FactoredRatFn, theta: ThetaScalar) -> FactoredRatFn:
    return ratfn_add(f, ratfn_neg(g), theta)


def ratfn_fold_sum(items: Sequence[FactoredRatFn], nvars: int, theta: ThetaScalar) -> FactoredRatFn:
    """Balanced pairwise sum; cheaper than ratfn_sum when many terms share
    nested factor chains and the total telescopes."""
    parts = [f for f in items if not f.is_zero]
    if not parts:
        return FactoredRatFn.zero(nvars)
    parts = sorted(parts, key=lambda f: sorted((factor_key(J), m) for J, m in f.den.items()))
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            nxt.append(ratfn_sum(parts[i:i + 2], nvars, theta))
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = [p for p in nxt if not p.is_zero]
        if not parts:
            return FactoredRatFn.zero(nvars)
    return parts[0]


def ratfn_eq(f: FactoredRatFn, g: FactoredRatFn, theta: ThetaScalar) -> bool:
    """Semantic equality by cross multiplication over the factor family."""
    _require_same_arity(f, g)
    fd = dict(f.den)
    gd = dict(g.den)
    for J in set(fd) & set(gd):
        m = min(fd[J], gd[J])
        fd[J] -= m
        gd[J] -= m
    fd = {J: m for J, m in fd.items() if m}
    gd = {J: m for J, m in gd.items() if m}
    return f.num * den_expand(gd, f.nvars, theta) == g.num * den_expand(fd, f.nvars, theta)


def ratfn_expand(f: FactoredRatFn, theta: ThetaScalar) -> tuple[MPoly, MPoly]:
    """Plain numerator/denominator pair with the factors multiplied out."""
    return f.num, den_expand(f.den, f.nvars, theta)


def _classify_image(img: MPoly, theta: ThetaScalar):
    """Recognize an image as zero or as a family block; otherwise fail."""
    if img.is_zero:
        return None
    support = frozenset(img.support())
    if not support:
        raise FactorFamilyError("constant image cannot enter a family factor")
    if img != family_poly(support, img.nvars, theta):
        raise FactorFamilyError("image is not a family block")
    return support


def ratfn_subst(
    f: FactoredRatFn,
    images: Sequence[MPoly],
    nvars_out: int,
    theta: ThetaScalar,
) -> FactoredRatFn:
    """Substitute x_i -> images[i-1].

    Denominator factors must map back into the family, which holds whenever
    each image occurring in a factor is a family block (or a plain variable,
    or zero) on pairwise disjoint variables.  Anything else raises
    FactorFamilyError, signalling a caller bug.
    """
    if len(images) != f.nvars:
        raise ArityMismatchError("len(images) != arity")
    num = f.num.subst(images, nvars_out)
    if num.is_zero:
        return FactoredRatFn.zero(nvars_out)
    den: dict[frozenset, int] = {}
    cls_cache: dict[int, frozenset | None] = {}
    for J, m in f.den.items():
        union: set[int] = set()
        for i in sorted(J):
            if i - 1 not in cls_cache:
                cls_cache[i - 1] = _classify_image(images[i - 1], theta)
            block = cls_cache[i - 1]
            if block is None:
                continue
            if union & block:
                raise FactorFamilyError("factor images overlap")
            union |= block
        if not union:
            raise FactorFamilyError("factor collapsed to the empty block")
        K = frozenset(union)
        den[K] = den.get(K, 0) + m
    return FactoredRatFn(nvars_out, num, den)


def ratfn_eval(f: FactoredRatFn, point: Sequence[Fraction], theta_value: Fraction) -> Fraction:
    """Evaluate at a rational point (denominator factors must not vanish)."""
    acc = f.num.eval_at(point, theta_value)
    for J, m in f.den.items():
        acc /= family_value(J, point, theta_value) ** m
    return acc


# ---------------------------------------------------------------------------
# univariate polynomials and rational functions in q
# ---------------------------------------------------------------------------

class QPoly:
    """Dense univariate polynomial over Q, coefficients ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def zero() -> "QPoly":
        return QPoly()

    @staticmethod
    def one() -> "QPoly":
        return QPoly((1,))

    @staticmethod
    def x() -> "QPoly":
        return QPoly((0, 1))

    @staticmethod
    def monomial(k: int, c=1) -> "QPoly":
        return QPoly((0,) * k + (_frac(c),))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "QPoly") -> "QPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return QPoly(out)

    def __neg__(self) -> "QPoly":
        return QPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "QPoly") -> "QPoly":
        return self + (-other)

    def __mul__(self, other: "QPoly") -> "QPoly":
        if self.is_zero or other.is_zero:
            return QPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] += a * b
        return QPoly(out)

    def scale(self, c) -> "QPoly":
        c = _frac(c)
        return QPoly(tuple(v * c for v in self.coeffs))

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)

    def eval_at(self, x) -> Fraction:
        x = _frac(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, QPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def divmod(self, other: "QPoly") -> tuple["QPoly", "QPoly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = other.degree()
        lead = other.coeffs[-1]
        q = [Fraction(0)] * max(0, len(rem) - dd)
        for i in range(len(rem) - 1, dd - 1, -1):
            c = rem[i]
            if c:
                f = c / lead
                q[i - dd] = f
                for j, b in enumerate(other.coeffs):
                    rem[i - dd + j] -= f * b
        return QPoly(q), QPoly(rem)

    @staticmethod
    def gcd(a: "QPoly", b: "QPoly") -> "QPoly":
        while not b.is_zero:
            a, b = b, a.divmod(b)[1]
        if a.is_zero:
            return a
        return a.scale(1 / a.coeffs[-1])

    def render(self, var: str = "q") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                head = var if k == 1 else f"{var}^{k}"
                if c == 1:
                    parts.append(head)
                elif c == -1:
                    parts.append(f"-{head}")
                else:
                    parts.append(f"{c}*{head}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"QPoly({self.render()})"


class QFrac:
    """Rational function in q stored as a polynomial pair.

    The pair is reduced by a univariate gcd to keep degrees small, but
    equality stays semantic (cross multiplication), as the rest of the kernel
    expects.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: QPoly, den: QPoly | None = None):
        if den is None:
            den = QPoly.one()
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if num.is_zero:
            den = QPoly.one()
        else:
            g = QPoly.gcd(num, den)
            if g.degree() > 0:
                num = num.divmod(g)[0]
                den = den.divmod(g)[0]
            lead = den.coeffs[-1]
            if lead != 1:
                num = num.scale(1 / lead)
                den = den.scale(1 / lead)
        self.num = num
        self.den = den

    @staticmethod
    def of(v) -> "QFrac":
        return QFrac(QPoly((_frac(v),)))

    @staticmethod
    def zero() -> "QFrac":
        return QFrac(QPoly.zero())

    @staticmethod
    def one() -> "QFrac":
        return QFrac(QPoly.one())

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __add__(self, other: "QFrac") -> "QFrac":
        return QFrac(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "QFrac":
        return QFrac(-self.num, self.den)

    def __sub__(self, other: "QFrac") -> "QFrac":
        return self + (-other)

    def __mul__(self, other: "QFrac") -> "QFrac":
        return QFrac(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "QFrac") -> "QFrac":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return QFrac(self.num * other.den, self.den * other.num)

    def scale(self, c) -> "QFrac":
        return QFrac(self.num.scale(c), self.den)

    def __eq__(self, other):
        if not isinstance(other, QFrac):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def render(self, var: str = "q") -> str:
        if self.den == QPoly.one():
            return self.num.render(var)
        return f"({self.num.render(var)}) / ({self.den.render(var)})"

    def __repr__(self):
        return f"QFrac({self.render()})"


# ---------------------------------------------------------------------------
# truncated power series in t over rational functions of q
# ---------------------------------------------------------------------------

class TruncSeries:
    """Series sum_{n=1..order} c_n t^n, truncated; no constant term."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Mapping[int, QFrac] | None = None):
        self.order = int(order)
        cs: dict[int, QFrac] = {}
        if coeffs:
            for n, c in coeffs.items():
                n = int(n)
                if n < 1:
                    raise ValueError("series carry no constant term")
                if n <= self.order and not c.is_zero:
                    cs[n] = c
        self.coeffs = cs

    def coeff(self, n: int) -> QFrac:
        return self.coeffs.get(n, QFrac.zero())

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        if self.order != other.order:
            raise ValueError("order mismatch")
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            s = out.get(n, QFrac.zero()) + c
            if s.is_zero:
                out.pop(n, None)
            else:
                out[n] = s
        return TruncSeries(self.order, out)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.order, {n: -c for n, c in self.coeffs.items()})

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        if self.order != other.order:
            raise ValueError("order mismatch")
        out: dict[int, QFrac] = {}
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                n = a + b
                if n > self.order:
                    continue
                out[n] = out.get(n, QFrac.zero()) + ca * cb
        return TruncSeries(self.order, out)

    def scale(self, c: QFrac) -> "TruncSeries":
        return TruncSeries(self.order, {n: v * c for n, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if self.order != other.order:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(n) == other.coeff(n) for n in keys)

    @staticmethod
    def identity(order: int) -> "TruncSeries":
        return TruncSeries(order, {1: QFrac.one()})

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """self(inner(t)) mod t^(order+1); inner has no constant term."""
        if self.order != inner.order:
            raise ValueError("order mismatch")
        acc = TruncSeries(self.order)
        power = None
        for k in range(1, self.order + 1):
            power = inner if power is None else power * inner
            c = self.coeff(k)
            if not c.is_zero:
                acc = acc + power.scale(c)
            if not power.coeffs:
                break
        return acc

    def comp_inverse(self) -> "TruncSeries":
        """g with self(g(t)) = t mod t^(order+1), solved degree by degree."""
        f1 = self.coeff(1)
        if f1.is_zero:
            raise ValueError("zero linear coefficient is not invertible")
        g: dict[int, QFrac] = {1: QFrac.one() / f1}
        for n in range(2, self.order + 1):
            partial = TruncSeries(self.order, g)
            total = QFrac.zero()
            power = partial
            for k in range(2, n + 1):
                power = power * partial if k > 2 else partial * partial
                fk = self.coeff(k)
                if not fk.is_zero:
                    total = total + fk * power.coeff(n)
            g[n] = -(total / f1)
        return TruncSeries(self.order, g)
