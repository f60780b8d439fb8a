"""The parametric operad of rational functions and its convolution algebra.

Components are factored rational functions of x_1..x_n.  Partial composition
substitutes a formal-group block for the chosen slot and multiplies by the
inserted element; the symmetric groups act by relabelling variables.  On the
product over all arities, splitting variables into consecutive blocks gives a
convolution product with well-defined truncated exp and log.

The module also builds the descent-weighted kernels: the flag fractions
prod_j 1/(x_1+...+x_j), their convolution logarithm expressed as an explicit
sum over permutations, and the pinned variant summed over permutations fixing
the first letter, together with fast numeric evaluation of all three.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterable, Sequence

from .exact import (
    THETA,
    FactoredRatFn,
    MPoly,
    ThetaScalar,
    family_poly,
    ratfn_eq,
    ratfn_eval,
    ratfn_mul,
    ratfn_neg,
    ratfn_scale,
    ratfn_subst,
    ratfn_sum,
)
from .symgroup import Perm, all_perms, descents, invert_perm, vshaped


class ConvFamily:
    """Arity-indexed family of operad elements, truncated at `order`."""

    __slots__ = ("order", "components")

    def __init__(self, order: int, components=None):
        self.order = int(order)
        comps: dict[int, FactoredRatFn] = {}
        if components:
            for n, f in components.items():
                n = int(n)
                if not 0 <= n <= self.order:
                    continue
                if f.nvars != n:
                    raise ValueError(f"component at arity {n} has nvars {f.nvars}")
                if not f.is_zero:
                    comps[n] = f
        self.components = comps

    def component(self, n: int) -> FactoredRatFn:
        return self.components.get(n, FactoredRatFn.zero(n))

    def __repr__(self):
        inner = ", ".join(f"{n}: {f.render()}" for n, f in sorted(self.components.items()))
        return f"ConvFamily({self.order}; {inner})"


class RFOperad:
    """Operations of the rational-function operad for one fixed weight theta."""

    def __init__(self, theta: ThetaScalar = THETA):
        self.theta = theta
        self._kernel_cache: dict = {}

    # -- basic elements ---------------------------------------------------

    def one(self, n: int) -> FactoredRatFn:
        return FactoredRatFn.one(n)

    def mu(self) -> FactoredRatFn:
        """The commutative product generator: 1 at arity 2."""
        return FactoredRatFn.one(2)

    def rb(self) -> FactoredRatFn:
        """The averaging generator 1/x1 at arity 1."""
        return FactoredRatFn.inverse_factors(1, [{1}])

    def nu(self) -> FactoredRatFn:
        """The half product 1/x1 at arity 2 (product with slot 1 averaged)."""
        return FactoredRatFn.inverse_factors(2, [{1}])

    # -- structure maps ---------------------------------------------------

    def compose(self, f: FactoredRatFn, g: FactoredRatFn, slot: int) -> FactoredRatFn:
        """Partial composition f o_slot g."""
        m, n = f.nvars, g.nvars
        if not 1 <= slot <= m:
            raise ValueError(f"slot {slot} out of range 1..{m}")
        if n == 0:
            # scalar plug-in: the empty block is the unit of the group law
            images = []
            for j in range(1, m + 1):
                if j < slot:
                    images.append(MPoly.variable(m - 1, j))
                elif j == slot:
                    images.append(MPoly.zero(m - 1))
                else:
                    images.append(MPoly.variable(m - 1, j - 1))
            fsub = ratfn_subst(f, images, m - 1, self.theta)
            return ratfn_scale(fsub, g.num.const_coeff())
        out_n = m + n - 1
        images_f = []
        for j in range(1, m + 1):
            if j < slot:
                images_f.append(MPoly.variable(out_n, j))
            elif j == slot:
                images_f.append(family_poly(range(slot, slot + n), out_n, self.theta))
            else:
                images_f.append(MPoly.variable(out_n, j + n - 1))
        images_g = [MPoly.variable(out_n, slot + j - 1) for j in range(1, n + 1)]
        fsub = ratfn_subst(f, images_f, out_n, self.theta)
        gsub = ratfn_subst(g, images_g, out_n, self.theta)
        return ratfn_mul(fsub, gsub)

    def act(self, f: FactoredRatFn, p: Perm) -> FactoredRatFn:
        """Relabel variables x_i -> x_{p(i)}."""
        if len(p) != f.nvars:
            raise ValueError("permutation size != arity")
        images = [MPoly.variable(f.nvars, p[i]) for i in range(f.nvars)]
        return ratfn_subst(f, images, f.nvars, self.theta)

    # -- ring wrappers bound to theta --------------------------------------

    def add(self, f, g):
        return ratfn_sum([f, g], f.nvars, self.theta)

    def sub(self, f, g):
        return ratfn_sum([f, ratfn_neg(g)], f.nvars, self.theta)

    def sum(self, items: Sequence[FactoredRatFn], nvars: int):
        return ratfn_sum(items, nvars, self.theta)

    def mul(self, f, g):
        return ratfn_mul(f, g)

    def eq(self, f, g) -> bool:
        return ratfn_eq(f, g, self.theta)

    # -- convolution algebra ----------------------------------------------

    def embed(self, f: FactoredRatFn, nvars_out: int, offset: int) -> FactoredRatFn:
        """View f(x_1..x_m) as f(x_{offset+1}..x_{offset+m}) in nvars_out."""
        images = [MPoly.variable(nvars_out, offset + j) for j in range(1, f.nvars + 1)]
        return ratfn_subst(f, images, nvars_out, self.theta)

    def conv_unit(self, order: int) -> ConvFamily:
        return ConvFamily(order, {0: FactoredRatFn.one(0)})

    def conv_mul(self, A: ConvFamily, B: ConvFamily) -> ConvFamily:
        if A.order != B.order:
            raise ValueError("order mismatch")
        out: dict[int, FactoredRatFn] = {}
        for k in range(A.order + 1):
            parts = []
            for m in range(k + 1):
                fa = A.components.get(m)
                fb = B.components.get(k - m)
                if fa is None or fb is None:
                    continue
                parts.append(ratfn_mul(self.embed(fa, k, 0), self.embed(fb, k, m)))
            if parts:
                s = ratfn_sum(parts, k, self.theta)
                if not s.is_zero:
                    out[k] = s
        return ConvFamily(A.order, out)

    def conv_add(self, A: ConvFamily, B: ConvFamily) -> ConvFamily:
        if A.order != B.order:
            raise ValueError("order mismatch")
        out = {}
        for n in range(A.order + 1):
            s = ratfn_sum([A.component(n), B.component(n)], n, self.theta)
            if not s.is_zero:
                out[n] = s
        return ConvFamily(A.order, out)

    def conv_scale(self, A: ConvFamily, c) -> ConvFamily:
        return ConvFamily(A.order, {n: ratfn_scale(f, c) for n, f in A.components.items()})

    def conv_eq(self, A: ConvFamily, B: ConvFamily) -> bool:
        if A.order != B.order:
            return False
        return all(
            ratfn_eq(A.component(n), B.component(n), self.theta)
            for n in range(A.order + 1)
        )

    def conv_exp(self, A: ConvFamily) -> ConvFamily:
        if 0 in A.components:
            raise ValueError("exp needs a zero arity-0 component")
        acc = self.conv_unit(A.order)
        power = None
        for k in range(1, A.order + 1):
            power = A if power is None else self.conv_mul(power, A)
            if not power.components:
                break
            acc = self.conv_add(acc, self.conv_scale(power, Fraction(1, factorial(k))))
        return acc

    def conv_log(self, A: ConvFamily) -> ConvFamily:
        a0 = A.component(0)
        if not ratfn_eq(a0, FactoredRatFn.one(0), self.theta):
            raise ValueError("log needs arity-0 component equal to 1")
        u = ConvFamily(A.order, {n: f for n, f in A.components.items() if n >= 1})
        acc = ConvFamily(A.order)
        power = None
        for k in range(1, A.order + 1):
            power = u if power is None else self.conv_mul(power, u)
            if not power.components:
                break
            acc = self.conv_add(acc, self.conv_scale(power, Fraction((-1) ** (k + 1), k)))
        return acc

    # -- descent-weighted kernels -------------------------------------------

    def flag_fraction(self, n: int) -> FactoredRatFn:
        """prod_{j=1..n} 1/F_{1..j}: the nested prefix-block fraction."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return FactoredRatFn.inverse_factors(n, [frozenset(range(1, j + 1)) for j in range(1, n + 1)])

    def flag_family(self, order: int) -> ConvFamily:
        comps = {0: FactoredRatFn.one(0)}
        for n in range(1, order + 1):
            comps[n] = self.flag_fraction(n)
        return ConvFamily(order, comps)

    def pinned_log_kernel(self, n: int) -> FactoredRatFn:
        """Descent-weighted sum of flag fractions over permutations fixing 1."""
        key = ("pinned", n)
        if key in self._kernel_cache:
            return self._kernel_cache[key]
        if n < 1:
            raise ValueError("n must be >= 1")
        parts = []
        for p in all_perms(n):
            if p[0] != 1:
                continue
            parts.append(ratfn_scale(_flag_of_perm(n, p), _descent_coeff(n, p)))
        out = ratfn_sum(parts, n, self.theta)
        self._kernel_cache[key] = out
        return out

    def log_kernel(self, n: int, route: str = "full") -> FactoredRatFn:
        """Arity-n component of the log of the flag family, as an explicit sum.

        route "full" sums descent-weighted flag fractions over all of S_n;
        route "vshaped" takes the signed V-shaped relabellings of the pinned
        kernel.  Both describe the same element.
        """
        key = ("log", n, route)
        if key in self._kernel_cache:
            return self._kernel_cache[key]
        if n < 1:
            raise ValueError("n must be >= 1")
        if route == "full":
            parts = [
                ratfn_scale(_flag_of_perm(n, p), _descent_coeff(n, p))
                for p in all_perms(n)
            ]
            out = ratfn_sum(parts, n, self.theta)
        elif route == "vshaped":
            pinned = self.pinned_log_kernel(n)
            parts = []
            for sigma in vshaped(n):
                inv = invert_perm(sigma)
                sign = Fraction((-1) ** (inv[0] - 1))
                parts.append(ratfn_scale(self.act(pinned, inv), sign))
            out = ratfn_sum(parts, n, self.theta)
        else:
            raise ValueError(f"unknown route {route!r}")
        self._kernel_cache[key] = out
        return out

    def eval(self, f: FactoredRatFn, point, theta_value: Fraction) -> Fraction:
        return ratfn_eval(f, point, theta_value)


def _flag_of_perm(n: int, p: Perm) -> FactoredRatFn:
    return FactoredRatFn.inverse_factors(n, [frozenset(p[:j]) for j in range(1, n + 1)])


def _descent_coeff(n: int, p: Perm) -> Fraction:
    d = descents(invert_perm(p))
    return Fraction((-1) ** d, n * comb(n - 1, d))


# ---------------------------------------------------------------------------
# numeric evaluation of the kernels and of convolution exp/log
# ---------------------------------------------------------------------------

def flag_value(point: Sequence[Fraction]) -> Fraction:
    """Value of the flag fraction at a point (plain partial sums)."""
    acc = Fraction(1)
    run = Fraction(0)
    for v in point:
        run += v
        acc /= run
    return acc


def pinned_kernel_value(args: Sequence[Fraction]) -> Fraction:
    """Value of the pinned kernel at exact arguments."""
    n = len(args)
    acc = Fraction(0)
    for p in all_perms(n):
        if p[0] != 1:
            continue
        acc += _descent_coeff(n, p) * flag_value([args[v - 1] for v in p])
    return acc


def log_kernel_value(args: Sequence[Fraction]) -> Fraction:
    """Value of the full descent-weighted kernel at exact arguments."""
    n = len(args)
    acc = Fraction(0)
    for p in all_perms(n):
        acc += _descent_coeff(n, p) * flag_value([args[v - 1] for v in p])
    return acc


def _compositions(n: int, k: int):
    """Ordered tuples of k positive integers with sum n."""
    for cuts in itertools.combinations(range(1, n), k - 1):
        prev = 0
        parts = []
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(n - prev)
        yield tuple(parts)


def conv_power_value(component: Callable[[Sequence[Fraction]], Fraction],
                     k: int, point: Sequence[Fraction]) -> Fraction:
    """Value of the k-th convolution power of an arity-positive family."""
    n = len(point)
    if k > n:
        return Fraction(0)
    acc = Fraction(0)
    for parts in _compositions(n, k):
        prod = Fraction(1)
        pos = 0
        for size in parts:
            prod *= component(point[pos:pos + size])
            pos += size
        acc += prod
    return acc


def conv_log_value(component, point) -> Fraction:
    """Value of log(unit + family) at a point, via block splittings."""
    n = len(point)
    acc = Fraction(0)
    for k in range(1, n + 1):
        acc += Fraction((-1) ** (k + 1), k) * conv_power_value(component, k, point)
    return acc


def conv_exp_value(component, point) -> Fraction:
    """Value of (exp(family) - unit) at a point, via block splittings."""
    n = len(point)
    acc = Fraction(0)
    for k in range(1, n + 1):
        acc += Fraction(1, factorial(k)) * conv_power_value(component, k, point)
    return acc
