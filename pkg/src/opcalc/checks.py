"""Named identity checks and the runner behind the command line.

Every check is registered under a fixed id, takes the shared bounds record,
and reports pass/fail with a deterministic detail string.  Identity failures
come back as failed reports; only unknown ids and out-of-range bounds raise.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Sequence

from . import ncalgebra as nca
from . import rboperad as rb
from . import wordmodels as wm
from .exact import (
    THETA,
    THETA0,
    FactoredRatFn,
    MPoly,
    ThetaScalar,
    ratfn_eq,
    ratfn_fold_sum,
    ratfn_mul,
    ratfn_scale,
    theta_const,
)
from .rfoperad import (
    ConvFamily,
    RFOperad,
    conv_exp_value,
    conv_log_value,
    flag_value,
    log_kernel_value,
    pinned_kernel_value,
)
from .symgroup import (
    GroupAlgElem,
    all_perms,
    eulerian_idempotent,
    eulerian_poly,
    ga_mul,
    inflate_perm,
    invert_perm,
    vshaped,
    vshaped_signed_sum,
)

DEFAULT_SEED = 0xC0FFEE


class BoundsError(ValueError):
    """A requested bound exceeds the documented maximum for a check."""


class UnknownCheckError(KeyError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Shared knobs; None picks each check's documented default."""

    max_arity: int | None = None
    max_weight: int | None = None
    theta: str | tuple[Fraction, ...] = "symbolic"
    seed: int = DEFAULT_SEED


@dataclass
class Report:
    id: str
    params: dict
    status: str  # pass | fail | skipped
    detail: str
    millis: int


GLOBAL_MAX_ARITY = 6
GLOBAL_MAX_WEIGHT = 8


def _validate_bounds(b: Bounds):
    if b.max_arity is not None and not 1 <= b.max_arity <= GLOBAL_MAX_ARITY:
        raise BoundsError(f"--max-arity {b.max_arity} outside 1..{GLOBAL_MAX_ARITY}")
    if b.max_weight is not None and not 0 <= b.max_weight <= GLOBAL_MAX_WEIGHT:
        raise BoundsError(f"--max-weight {b.max_weight} outside 0..{GLOBAL_MAX_WEIGHT}")


def _resolve(requested: int | None, default: int, hard_max: int, minimum: int = 1) -> int:
    """Each check clamps the shared knobs to its own documented range."""
    if requested is None:
        return default
    return max(minimum, min(requested, hard_max))


def _theta_scalars(b: Bounds) -> list[ThetaScalar]:
    if b.theta == "symbolic":
        return [THETA]
    return [theta_const(v) for v in b.theta]


def _theta_values(b: Bounds, default: Sequence[int]) -> list[Fraction]:
    if b.theta == "symbolic":
        return [Fraction(v) for v in default]
    return [Fraction(v) for v in b.theta]


def _theta_label(t: ThetaScalar) -> str:
    return "symbolic" if t == THETA else str(t.constant())


def _eval_points(nvars: int, count: int, seed: int, tag: str) -> list[tuple[Fraction, ...]]:
    """Deterministic positive rational points, distinct per variable."""
    rng = random.Random(f"{tag}:{seed}:{nvars}:{count}")
    columns: list[list[Fraction]] = []
    for _ in range(nvars):
        seen: set[Fraction] = set()
        col: list[Fraction] = []
        while len(col) < count:
            v = Fraction(rng.randint(1, 499), rng.randint(1, 61))
            if v not in seen:
                seen.add(v)
                col.append(v)
        columns.append(col)
    return [tuple(columns[i][t] for i in range(nvars)) for t in range(count)]


# ---------------------------------------------------------------------------
# rational-function operad checks
# ---------------------------------------------------------------------------

def _axiom_pool(ops: RFOperad) -> list[FactoredRatFn]:
    x1_of_1 = FactoredRatFn(1, MPoly.variable(1, 1))
    pole2 = FactoredRatFn(1, MPoly.variable(1, 1), {frozenset({1}): 2})
    mixed = FactoredRatFn(2, MPoly.variable(2, 2), {frozenset({1}): 1, frozenset({1, 2}): 1})
    return [
        ops.rb(), ops.one(1), x1_of_1, pole2,
        ops.mu(), ops.nu(), FactoredRatFn.inverse_factors(2, [{1, 2}]), mixed,
    ]


def check_operad_axioms(b: Bounds):
    arity = _resolve(b.max_arity, 4, 4, minimum=2)
    counts = {"nested": 0, "parallel": 0, "equivariance": 0}
    labels = []
    for theta in _theta_scalars(b):
        ops = RFOperad(theta)
        pool = _axiom_pool(ops)
        labels.append(_theta_label(theta))
        for f, g, h in itertools.product(pool, repeat=3):
            m, n, p = f.nvars, g.nvars, h.nvars
            if m + n + p - 2 > arity:
                continue
            for i in range(1, m + 1):
                for j in range(1, n + 1):
                    lhs = ops.compose(ops.compose(f, g, i), h, i - 1 + j)
                    rhs = ops.compose(f, ops.compose(g, h, j), i)
                    if not ops.eq(lhs, rhs):
                        return False, f"nested associativity fails at slots ({i},{j})", {"max_arity": arity}
                    counts["nested"] += 1
                for i2 in range(1, m + 1):
                    for j2 in range(i2 + 1, m + 1):
                        lhs = ops.compose(ops.compose(f, g, i2), h, j2 + n - 1)
                        rhs = ops.compose(ops.compose(f, h, j2), g, i2)
                        if not ops.eq(lhs, rhs):
                            return False, f"parallel commutation fails at slots ({i2},{j2})", {"max_arity": arity}
                        counts["parallel"] += 1
        for f, g in itertools.product(pool, repeat=2):
            m, n = f.nvars, g.nvars
            if m + n - 1 > arity:
                continue
            for sigma in all_perms(m):
                sinv = invert_perm(sigma)
                for i in range(1, m + 1):
                    lhs = ops.compose(ops.act(f, sigma), g, i)
                    slot = sinv[i - 1]
                    rhs = ops.act(ops.compose(f, g, slot), inflate_perm(sigma, slot, n))
                    if not ops.eq(lhs, rhs):
                        return False, f"equivariance fails for sigma={sigma}, slot {i}", {"max_arity": arity}
                    counts["equivariance"] += 1
    detail = (f"nested={counts['nested']} parallel={counts['parallel']} "
              f"equivariance={counts['equivariance']} theta={','.join(labels)}")
    return True, detail, {"max_arity": arity, "theta": ",".join(labels)}


def check_zinbiel_nu(b: Bounds):
    ops = RFOperad(THETA0)
    nu = ops.nu()
    lhs = ops.compose(nu, nu, 2)
    right1 = ops.compose(nu, nu, 1)
    swap12 = (2, 1, 3)
    rhs = ops.add(right1, ops.act(right1, swap12))
    ok = ops.eq(lhs, rhs)
    ok = ok and ops.eq(lhs, FactoredRatFn.inverse_factors(3, [{1}, {2}]))
    ok = ok and ops.eq(right1, FactoredRatFn.inverse_factors(3, [{1}, {1, 2}]))
    return ok, "nu o2 nu = nu o1 nu + (nu o1 nu)^(12): " + ("exact" if ok else "FAILED"), {}


def check_rb_identity_rf(b: Bounds):
    labels = []
    for theta in _theta_scalars(b):
        ops = RFOperad(theta)
        labels.append(_theta_label(theta))
        mu, R = ops.mu(), ops.rb()
        r_r1_2 = ops.compose(R, ops.compose(mu, R, 1), 1)   # R(R(a1) a2)
        r_1_r2 = ops.compose(R, ops.compose(mu, R, 2), 1)   # R(a1 R(a2))
        r_12 = ops.compose(R, mu, 1)                        # R(a1 a2)
        r1_r2 = ops.compose(ops.compose(mu, R, 1), R, 2)    # R(a1) R(a2)
        displayed = [
            (r_r1_2, FactoredRatFn.inverse_factors(2, [{1, 2}, {1}])),
            (r_1_r2, FactoredRatFn.inverse_factors(2, [{1, 2}, {2}])),
            (r_12, FactoredRatFn.inverse_factors(2, [{1, 2}])),
            (r1_r2, FactoredRatFn.inverse_factors(2, [{1}, {2}])),
        ]
        for got, want in displayed:
            if not ops.eq(got, want):
                return False, "a displayed composition is off", {"theta": _theta_label(theta)}
        rhs = ops.sum([r_r1_2, r_1_r2, ratfn_scale(r_12, theta)], 2)
        if not ops.eq(r1_r2, rhs):
            return False, "weight identity fails", {"theta": _theta_label(theta)}
    return True, f"four displayed compositions and the weight identity hold (theta={','.join(labels)})", {"theta": ",".join(labels)}


def _exact_and_eval_arities(b: Bounds) -> tuple[int, list[int]]:
    arity = _resolve(b.max_arity, 5, 5)
    exact = min(arity, 4)
    evaluated = [n for n in range(5, arity + 1)]
    return exact, evaluated


def check_solomon(b: Bounds):
    exact, evaluated = _exact_and_eval_arities(b)
    ops = RFOperad(THETA0)
    log_fam = ops.conv_log(ops.flag_family(exact))
    for n in range(1, exact + 1):
        if not ops.eq(log_fam.component(n), ops.log_kernel(n)):
            return False, f"exact mismatch at arity {n}", {"max_arity": exact}
    for n in evaluated:
        for pt in _eval_points(n, 8, b.seed, "solomon"):
            if conv_log_value(flag_value, pt) != log_kernel_value(pt):
                return False, f"evaluation mismatch at arity {n}", {"max_arity": max([exact] + evaluated)}
    detail = f"log of the flag family matches the descent kernel: exact n<={exact}"
    if evaluated:
        detail += f", 8-point evaluation at n={evaluated} seed={b.seed:#x}"
    return True, detail, {"max_arity": max([exact] + evaluated), "seed": b.seed}


def check_log_general(b: Bounds):
    exact, evaluated = _exact_and_eval_arities(b)
    ops = RFOperad(THETA0)
    for n in range(1, exact + 1):
        if not ops.eq(ops.log_kernel(n, "full"), ops.log_kernel(n, "vshaped")):
            return False, f"route mismatch at arity {n}", {"max_arity": exact}
    for n in evaluated:
        for pt in _eval_points(n, 8, b.seed, "log-general"):
            acc = Fraction(0)
            for sigma in vshaped(n):
                inv = invert_perm(sigma)
                sign = Fraction((-1) ** (inv[0] - 1))
                acc += sign * pinned_kernel_value([pt[inv[j] - 1] for j in range(n)])
            if acc != log_kernel_value(pt):
                return False, f"evaluation route mismatch at arity {n}", {"max_arity": n}
    detail = f"descent kernel equals the signed V-shaped sum of pinned kernels: exact n<={exact}"
    if evaluated:
        detail += f", 8-point evaluation at n={evaluated} seed={b.seed:#x}"
    return True, detail, {"max_arity": max([exact] + evaluated), "seed": b.seed}


def check_exp_f_e(b: Bounds):
    exact, evaluated = _exact_and_eval_arities(b)
    ops = RFOperad(THETA0)
    kern = ConvFamily(exact, {n: ops.log_kernel(n) for n in range(1, exact + 1)})
    expd = ops.conv_exp(kern)
    for n in range(1, exact + 1):
        if not ops.eq(expd.component(n), ops.flag_fraction(n)):
            return False, f"exact mismatch at arity {n}", {"max_arity": exact}
    if not ops.eq(expd.component(0), FactoredRatFn.one(0)):
        return False, "arity-0 component is not 1", {"max_arity": exact}
    for n in evaluated:
        for pt in _eval_points(n, 8, b.seed, "exp-f-e"):
            if conv_exp_value(log_kernel_value, pt) != flag_value(pt):
                return False, f"evaluation mismatch at arity {n}", {"max_arity": n}
    detail = f"exp of the descent kernels rebuilds the flag family: exact n<={exact}"
    if evaluated:
        detail += f", 8-point evaluation at n={evaluated} seed={b.seed:#x}"
    return True, detail, {"max_arity": max([exact] + evaluated), "seed": b.seed}


# ---------------------------------------------------------------------------
# descent algebra checks
# ---------------------------------------------------------------------------

def check_euler_idempotent(b: Bounds):
    nmax = _resolve(b.max_arity, 6, 6)
    for n in range(1, nmax + 1):
        E = eulerian_idempotent(n)
        if ga_mul(E, E) != E:
            return False, f"E^2 != E at n={n}", {"max_n": nmax}
    return True, f"E^2 = E for n<={nmax}", {"max_n": nmax}


def _load_golden_e_dot_vi() -> dict:
    data = resources.files("opcalc").joinpath("golden/e_dot_vi.json").read_text()
    return json.loads(data)


def check_e_dot_vi(b: Bounds):
    nmax = _resolve(b.max_arity, 6, 6, minimum=2)
    golden = _load_golden_e_dot_vi()
    seen = {}
    for n in range(2, nmax + 1):
        E = eulerian_idempotent(n)
        left = all(ga_mul(E, vshaped_signed_sum(n, i)) == E for i in range(1, n + 1))
        right = all(ga_mul(vshaped_signed_sum(n, i), E) == E for i in range(1, n + 1))
        seen[str(n)] = {"idempotent_times_vsum": left, "vsum_times_idempotent": right}
    pinned = golden["pinned_order"]
    ok = all(seen[k][pinned] for k in seen)
    ok = ok and all(seen[k] == golden["per_n"][k] for k in seen)
    held = {k: v for k, v in seen.items()}
    detail = f"pinned order {pinned} under {golden['composition_convention']}; per-n results {held}"
    return ok, detail, {"max_n": nmax}


def check_solomon_dynkin(b: Bounds):
    nmax = _resolve(b.max_arity, 5, 6)
    for n in range(1, nmax + 1):
        bound = n * (n + 1) // 2
        letters = list(range(1, n + 1))
        E = eulerian_idempotent(n)
        lhs = nca.apply_group_algebra(E, letters, bound)
        rhs = nca.NCPoly.zero(bound)
        for p, c in E.terms.items():
            if p[0] != 1:
                continue
            word = nca.NCPoly.gen(bound, 1)
            for k in range(1, n):
                word = nca.bracket(word, nca.NCPoly.gen(bound, p[k]))
            rhs = rhs + word.scale(c)
        if lhs != rhs:
            return False, f"mismatch at n={n}", {"max_n": nmax}
    return True, f"descent-weighted words equal the nested-bracket sum for n<={nmax}", {"max_n": nmax}


def check_preparation_lemma(b: Bounds):
    nmax = _resolve(b.max_arity, 4, 5)
    for n in range(1, nmax + 1):
        bound = n * (n + 1) // 2
        d = nca.NCPoly.dword(bound)
        ell = [nca.NCPoly.gen(bound, i) for i in range(1, n + 1)]
        nest = ell[0]
        for j in range(1, n):
            nest = nca.bracket(ell[j], nest)
        lhs = nca.bracket(nest, d)
        rhs = nca.NCPoly.zero(bound)
        for sigma in vshaped(n):
            inv = invert_perm(sigma)
            sign = Fraction((-1) ** (inv[0] - 1))
            term = d
            for k in range(n):
                term = nca.bracket(ell[sigma[k] - 1], term)
            rhs = rhs + term.scale(sign)
        if lhs != rhs:
            return False, f"mismatch at n={n}", {"max_n": nmax}
    return True, f"bracket of the nested word expands over V-shaped permutations for n<={nmax}", {"max_n": nmax}


# ---------------------------------------------------------------------------
# truncated free-algebra checks
# ---------------------------------------------------------------------------

def check_formula_lie(b: Bounds):
    W = _resolve(b.max_weight, 5, 6)
    low = nca.conjugator_log(2)
    hand = nca.NCPoly(2, {(1,): 1, (2,): 1})
    if low != hand:
        return False, "weight-2 hand computation of the conjugator log fails", {"max_weight": W}
    a2 = nca.drift_sequence(2)[1]
    hand_a2 = (nca.bracket(nca.NCPoly.gen(2, 2), nca.NCPoly.dword(2))
               + nca.bracket(nca.NCPoly.gen(2, 1),
                             nca.bracket(nca.NCPoly.gen(2, 1), nca.NCPoly.dword(2))).scale(Fraction(1, 2)))
    if a2 != hand_a2:
        return False, "weight-2 hand computation of the drift fails", {"max_weight": W}
    log_form = nca.conjugator_log(W)
    lhs = nca.exp_adjoint(log_form, nca.NCPoly.dword(W))
    rhs = nca.NCPoly.dword(W)
    for an in nca.drift_sequence(W):
        rhs = rhs + an
    ok = lhs == rhs
    return ok, f"exp(ad of the conjugator log) moves d to d + drift at W={W}", {"max_weight": W}


def check_formula_gp(b: Bounds):
    W = _resolve(b.max_weight, 5, 6)
    G = nca.conjugator_group(W)
    d = nca.NCPoly.dword(W)
    rhs = d
    for an in nca.drift_sequence(W):
        rhs = rhs + an
    ok = G * d == rhs * G
    return ok, f"G d = (d + drift) G at W={W}", {"max_weight": W}


def check_grouplike(b: Bounds):
    W = _resolve(b.max_weight, 5, 6)
    G = nca.conjugator_group(W)
    lhs = nca.coproduct(G)
    rhs = nca.tensor_of(G, G).restrict_total_weight(W)
    ok = lhs == rhs
    return ok, f"Delta(G) = G (x) G truncated at W={W}", {"max_weight": W}


def check_coproduct_bsm(b: Bounds):
    W = _resolve(b.max_weight, 5, 6)
    mmax = 3
    powers = nca.beta_powers(W, mmax)
    by_m = {m + 1: powers[m] for m in range(mmax)}
    by_m[0] = nca.NCPoly.unit(W)

    def component(s: int, m: int) -> nca.NCPoly:
        if m not in by_m:
            return nca.NCPoly.zero(W)
        return by_m[m].weight_component(s)

    for m in range(1, mmax + 1):
        for s in range(1, W + 1):
            lhs = nca.coproduct(component(s, m))
            rhs = nca.TensorSquare(W)
            for p in range(0, m + 1):
                for r in range(0, s + 1):
                    rhs = rhs + nca.tensor_of(component(r, p), component(s - r, m - p))
            if lhs != rhs:
                return False, f"coproduct of the weight-{s} part of the {m}-th power fails", {"max_weight": W}
    return True, f"Delta splits the graded parts of the right-normed powers (s<={W}, m<={mmax})", {"max_weight": W, "max_power": mmax}


def check_comparison_log(b: Bounds):
    W = _resolve(b.max_weight, 5, 6)
    G = nca.conjugator_group(W)
    log_form = nca.conjugator_log(W)
    if nca.nc_log(G) != log_form:
        return False, "log of the group form differs from the Lie form", {"max_weight": W}
    Wp = min(W, 4)
    G4 = nca.conjugator_group(Wp)
    log4 = nca.conjugator_log(Wp)
    prim = nca.coproduct(nca.nc_log(G4))
    expect = (nca.tensor_of(log4, nca.NCPoly.unit(Wp))
              + nca.tensor_of(nca.NCPoly.unit(Wp), log4)).restrict_total_weight(Wp)
    ok = prim.restrict_total_weight(Wp) == expect
    return ok, f"log(G) equals the conjugator log at W={W}; log is primitive at W={Wp}", {"max_weight": W}


def check_telescope(b: Bounds):
    nmax = _resolve(b.max_weight, 5, 6)
    kmax = 3
    seq = nca.drift_sequence(nmax)
    lam = nca.weighted_drift(seq)
    d = nca.NCPoly.dword(nmax)

    def f(i: int) -> nca.NCPoly:
        return nca.NCPoly.gen(nmax, i).scale(i)

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for k in range(1, kmax + 1):
        for n in range(k, nmax + 1):
            lhs = nca.NCPoly.zero(nmax)
            for tup in compositions(n, k):
                coef = Fraction(1)
                run = 0
                for x in tup:
                    run += x
                    coef /= run
                term = d
                for x in tup:
                    term = nca.bracket(f(x), term)
                lhs = lhs + term.scale(coef)
            rhs = nca.NCPoly.zero(nmax)
            for tup in compositions(n, k):
                coef = Fraction(1)
                run = 0
                for x in tup:
                    run += x
                    coef /= run
                term = lam[tup[0] - 1]
                for x in tup[1:]:
                    term = nca.bracket(f(x), term)
                rhs = rhs + term.scale(coef)
            if n >= k + 1:
                for tup in compositions(n, k + 1):
                    coef = Fraction(1)
                    run = 0
                    for x in tup:
                        run += x
                        coef /= run
                    term = lam[tup[0] - 1]
                    for x in tup[1:]:
                        term = nca.bracket(f(x), term)
                    rhs = rhs - term.scale(coef)
            if lhs != rhs:
                return False, f"telescoping step fails at k={k}, n={n}", {"max_k": kmax, "max_n": nmax}
    return True, f"telescoping steps hold for k<={kmax}, n<={nmax}", {"max_k": kmax, "max_n": nmax}


def check_foissy_axioms(b: Bounds):
    wmax = _resolve(b.max_weight, 4, 5)
    bound = 3 * wmax
    # weight-homogeneous Lie elements of the letter subalgebra
    b1 = nca.NCPoly.gen(bound, 1)
    b2 = nca.NCPoly.gen(bound, 2)
    b3 = nca.NCPoly.gen(bound, 3)
    b4 = nca.NCPoly.gen(bound, 4)
    lie = [b1, b2, b3, b4, nca.bracket(b1, b2), nca.bracket(b1, b3),
           nca.bracket(nca.bracket(b1, b2), b1)]
    lie = [x for x in lie
           if not x.is_zero and max(nca.word_weight(w) for w in x.terms) <= wmax]
    for x, y, z in itertools.product(lie, repeat=3):
        a1 = nca.foissy_pre_lie(nca.foissy_pre_lie(x, y), z) - nca.foissy_pre_lie(x, nca.foissy_pre_lie(y, z))
        a2 = nca.foissy_pre_lie(nca.foissy_pre_lie(x, z), y) - nca.foissy_pre_lie(x, nca.foissy_pre_lie(z, y))
        if a1 != a2:
            return False, "pre-lie associator asymmetry", {"max_weight": wmax}
    words = []
    for total in range(1, wmax + 1):
        for tup in _int_compositions(total):
            words.append(nca.NCPoly(bound, {tup: 1}))
    dendriform_ok = 0
    for x, y, z in itertools.product(words, repeat=3):
        xy = nca.foissy_prec(x, y) + nca.foissy_succ(x, y)
        yz = nca.foissy_prec(y, z) + nca.foissy_succ(y, z)
        if nca.foissy_prec(nca.foissy_prec(x, y), z) != nca.foissy_prec(x, yz):
            return False, "first dendriform identity fails", {"max_weight": wmax}
        if nca.foissy_prec(nca.foissy_succ(x, y), z) != nca.foissy_succ(x, nca.foissy_prec(y, z)):
            return False, "second dendriform identity fails", {"max_weight": wmax}
        if nca.foissy_succ(xy, z) != nca.foissy_succ(x, nca.foissy_succ(y, z)):
            return False, "third dendriform identity fails", {"max_weight": wmax}
        dendriform_ok += 1
    detail = (f"pre-lie identity on {len(lie)} Lie elements, dendriform identities on "
              f"{dendriform_ok} word triples (weights <= {wmax})")
    return True, detail, {"max_weight": wmax}


def _int_compositions(total: int):
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _int_compositions(total - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# Rota-Baxter checks
# ---------------------------------------------------------------------------

def _corpus(seed: int, count: int, max_arity: int, max_depth: int) -> list[rb.RBExpr]:
    rng = random.Random(f"rb-corpus:{seed}:{count}:{max_arity}:{max_depth}")

    def build(ls: list[int], depth: int) -> rb.RBExpr:
        if len(ls) == 1:
            e: rb.RBExpr = rb.Leaf(ls[0])
            d = depth
            while d > 0 and rng.random() < 0.5:
                e = rb.RNode(e)
                d -= 1
            return e
        k = rng.randint(2, len(ls))
        rng.shuffle(ls)
        cuts = sorted(rng.sample(range(1, len(ls)), k - 1))
        parts, prev = [], 0
        for c in cuts + [len(ls)]:
            parts.append(ls[prev:c])
            prev = c
        e = rb.Mul(tuple(build(p, depth - 1 if depth > 0 else 0) for p in parts))
        if depth > 0 and rng.random() < 0.6:
            e = rb.RNode(e)
        return e

    out = []
    for _ in range(count):
        n = rng.randint(1, max_arity)
        out.append(build(list(range(1, n + 1)), max_depth))
    return out


def check_rb_confluence(b: Bounds):
    arity = _resolve(b.max_arity, 4, 5)
    corpus = _corpus(b.seed, 200, arity, 3)
    for theta in _theta_scalars(b):
        for e in corpus:
            if rb.rb_normalize(e, theta, "innermost") != rb.rb_normalize(e, theta, "outermost"):
                return False, f"strategies disagree on {rb.render_expr(e)}", {"count": len(corpus)}
    return True, f"{len(corpus)} expressions, innermost and outermost strategies agree (seed={b.seed:#x})", {
        "count": len(corpus), "max_arity": arity, "seed": b.seed}


def check_rb_normal_soundness(b: Bounds):
    arity = _resolve(b.max_arity, 4, 5)
    corpus = _corpus(b.seed, 200, arity, 3)
    for theta in _theta_scalars(b):
        for e in corpus:
            nf = rb.rb_normalize(e, theta)
            if not ratfn_eq(rb.direct_rf_image(e), rb.comb_to_rf(nf, theta), theta):
                return False, f"image mismatch on {rb.render_expr(e)}", {"count": len(corpus)}
    labels = ",".join(_theta_label(t) for t in _theta_scalars(b))
    return True, (f"{len(corpus)} expressions, direct images equal normal-form images "
                  f"(theta={labels}, seed={b.seed:#x})"), {
        "count": len(corpus), "max_arity": arity, "seed": b.seed, "theta": labels}


def check_census_hilbert(b: Bounds):
    nmax = _resolve(b.max_arity, 5, 6)
    dmax = _resolve(b.max_weight, 5, 8, minimum=0)
    for n in range(1, nmax + 1):
        if rb.census(n, dmax) != rb.hilbert_coeffs(n, dmax):
            return False, f"count mismatch at arity {n}", {"max_n": nmax, "max_weight": dmax}
    return True, f"monomial census equals the Hilbert expansion for n<={nmax}, d<={dmax}", {
        "max_n": nmax, "max_weight": dmax}


def check_poincare_inverse(b: Bounds):
    nmax = _resolve(b.max_weight, 6, 8)
    results = rb.poincare_inverse_report(nmax)
    bad = [n for n, ok in results if not ok]
    if bad:
        return False, f"coefficient mismatch at t^{bad[0]}", {"max_order": nmax}
    return True, f"compositional inverse matches the Eulerian counting series through t^{nmax}", {"max_order": nmax}


def check_injectivity(b: Bounds):
    nmax = _resolve(b.max_arity, 3, 3)
    dmax = _resolve(b.max_weight, 3, 4, minimum=0)
    thetas = _theta_values(b, (0, 1, 2))
    parts = []
    for n in range(1, nmax + 1):
        for tv, count, rank, ok in rb.independence_report(n, dmax, thetas, b.seed):
            if not ok:
                return False, f"rank {rank} < {count} monomials at n={n}, theta={tv}", {
                    "max_n": nmax, "max_weight": dmax}
            parts.append(f"n={n},theta={tv}:{rank}/{count}")
    return True, "full rank: " + " ".join(parts), {
        "max_n": nmax, "max_weight": dmax, "theta": ",".join(str(t) for t in thetas), "seed": b.seed}


def check_rb_poly_model(b: Bounds):
    amax = _resolve(b.max_weight, 6, 10, minimum=0)
    ok = rb.integration_model_report(amax)
    return ok, f"antiderivative model satisfies the weight-0 identity up to degree {amax}", {"max_degree": amax}


# ---------------------------------------------------------------------------
# word-model checks
# ---------------------------------------------------------------------------

def check_wordmodel_dictionary(b: Bounds):
    total_max = _resolve(b.max_arity, 4, 5, minimum=2)
    zin = 0
    for total in range(2, min(total_max + 1, 6)):
        pool = list(range(1, total + 1))
        for ua in range(1, total):
            for u_set in itertools.combinations(pool, ua):
                v_set = [x for x in pool if x not in u_set]
                for u in itertools.permutations(u_set):
                    for v in itertools.permutations(v_set):
                        if wm.shuffle(u, v) != wm.half_shuffle(u, v) + wm.half_shuffle(v, u):
                            return False, "shuffle does not split into half shuffles", {}
                        zin += 1
    morphism = 0
    for total in range(2, total_max + 1):
        pool = list(range(1, total + 1))
        for ua in range(1, total):
            for u_set in itertools.combinations(pool, ua):
                v_set = [x for x in pool if x not in u_set]
                for u in itertools.permutations(u_set):
                    for v in itertools.permutations(v_set):
                        lhs = wm.tensor_to_fraction(wm.half_shuffle(u, v), total)
                        rhs = wm.averaged(ratfn_mul(wm.word_fraction_in(u, total),
                                                    wm.word_fraction_in(v, total)), u)
                        if not ratfn_eq(lhs, rhs, THETA0):
                            return False, f"half-shuffle dictionary fails on {u},{v}", {}
                        parts = [ratfn_scale(wm.averaged(wm.word_fraction_in(w, total), w), c)
                                 for w, c in wm.shuffle(u, v).terms.items()]
                        lhs2 = ratfn_fold_sum(parts, total, THETA0)
                        rhs2 = ratfn_mul(wm.averaged(wm.word_fraction_in(u, total), u),
                                         wm.averaged(wm.word_fraction_in(v, total), v))
                        if not ratfn_eq(lhs2, rhs2, THETA0):
                            return False, f"averaged dictionary is not multiplicative on {u},{v}", {}
                        morphism += 1
    return True, (f"half-shuffle dictionary and averaged product morphism on {morphism} pairs "
                  f"(length <= {total_max}); {zin} shuffle splittings"), {"max_length": total_max}


def check_wordmodel_log(b: Bounds):
    nmax = _resolve(b.max_arity, 5, 6)
    for n in range(1, nmax + 1):
        li = wm.log_of_identity(n)
        E = eulerian_idempotent(n)
        inv = GroupAlgElem(n, {invert_perm(p): c for p, c in E.terms.items()})
        if li != inv:
            return False, f"mismatch at n={n}", {"max_n": nmax}
    return True, f"log of the identity equals the idempotent with inverted permutations for n<={nmax}", {
        "max_n": nmax}


# ---------------------------------------------------------------------------
# registry and runners
# ---------------------------------------------------------------------------

REGISTRY: list[tuple[str, Callable]] = [
    ("operad-axioms", check_operad_axioms),
    ("zinbiel-nu", check_zinbiel_nu),
    ("rb-identity-rf", check_rb_identity_rf),
    ("solomon", check_solomon),
    ("log-general", check_log_general),
    ("exp-f-e", check_exp_f_e),
    ("euler-idempotent", check_euler_idempotent),
    ("e-dot-vi", check_e_dot_vi),
    ("solomon-dynkin", check_solomon_dynkin),
    ("preparation-lemma", check_preparation_lemma),
    ("formula-lie", check_formula_lie),
    ("formula-gp", check_formula_gp),
    ("grouplike", check_grouplike),
    ("coproduct-bsm", check_coproduct_bsm),
    ("comparison-log", check_comparison_log),
    ("telescope", check_telescope),
    ("foissy-axioms", check_foissy_axioms),
    ("rb-confluence", check_rb_confluence),
    ("rb-normal-soundness", check_rb_normal_soundness),
    ("census-hilbert", check_census_hilbert),
    ("poincare-inverse", check_poincare_inverse),
    ("injectivity", check_injectivity),
    ("rb-poly-model", check_rb_poly_model),
    ("wordmodel-dictionary", check_wordmodel_dictionary),
    ("wordmodel-log", check_wordmodel_log),
]

CHECK_IDS = [cid for cid, _ in REGISTRY]
_BY_ID = dict(REGISTRY)


def run_check(check_id: str, bounds: Bounds | None = None) -> Report:
    """Run one registered check; unknown ids and bad bounds raise."""
    if check_id not in _BY_ID:
        raise UnknownCheckError(check_id)
    bounds = bounds or Bounds()
    _validate_bounds(bounds)
    start = time.perf_counter()
    try:
        ok, detail, params = _BY_ID[check_id](bounds)
    except BoundsError:
        raise
    except Exception as exc:  # a crash is a failed check, not a crashed run
        ok, detail, params = False, f"crashed: {type(exc).__name__}: {exc}", {}
    millis = int((time.perf_counter() - start) * 1000)
    return Report(check_id, params, "pass" if ok else "fail", detail, millis)


def _run_one(args) -> Report:
    check_id, bounds = args
    return run_check(check_id, bounds)


def run_all(bounds: Bounds | None = None, workers: int = 1) -> list[Report]:
    """Run every registered check in registry order.

    With workers > 1 the checks execute in a process pool; reports still come
    back in registry order.
    """
    bounds = bounds or Bounds()
    _validate_bounds(bounds)
    if workers <= 1:
        return [run_check(cid, bounds) for cid in CHECK_IDS]
    import concurrent.futures as cf

    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, [(cid, bounds) for cid in CHECK_IDS]))


def emit_report(reports: Sequence[Report], fmt: str, params: dict | None = None) -> str:
    """Render reports as text lines or as the versioned JSON document."""
    if fmt == "text":
        width = max((len(r.id) for r in reports), default=0)
        lines = [f"{r.status.upper():4}  {r.id:<{width}}  {r.millis:>6} ms  {r.detail}" for r in reports]
        return "\n".join(lines)
    if fmt == "json":
        doc = {
            "version": 1,
            "params": params or {},
            "checks": [
                {
                    "id": r.id,
                    "params": r.params,
                    "status": r.status,
                    "detail": r.detail,
                    "millis": r.millis,
                }
                for r in reports
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)
    raise ValueError(f"unknown format {fmt!r}")


def exit_code(reports: Sequence[Report]) -> int:
    return 0 if all(r.status == "pass" for r in reports) else 1
