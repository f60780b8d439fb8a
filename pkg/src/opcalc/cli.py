"""Command line interface.

    opcalc verify all [bounds]
    opcalc verify <check-id> [bounds]
    opcalc rb normalize <expr-or-@file> [--theta ...]
    opcalc rb census --arity N --max-weight D
    opcalc rf compose <f> <g> --slot I --arity-f M --arity-g N [--theta ...]

Fractions for `rf compose` use the mini-grammar

    fraction   := polynomial [ "/" factor+ ]
    factor     := atom [ "^" INT ]
    atom       := xK | "(" xK ("+" xK)* ")" | "{" INT ("," INT)* "}"
    polynomial := [+-] term ([+-] term)*
    term       := INT [xK [^INT]]*  |  xK [^INT] ...

where a factor atom names the family block F_J on the listed variables (at
theta = 0 that is the plain subset sum).  Exit codes: 0 all pass, 1 any check
failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction

from .checks import (
    CHECK_IDS,
    Bounds,
    BoundsError,
    UnknownCheckError,
    emit_report,
    exit_code,
    run_all,
    run_check,
)
from .exact import (
    THETA,
    FactoredRatFn,
    FactorFamilyError,
    MPoly,
    ThetaScalar,
    theta_const,
)
from .rboperad import RBParseError, census, rb_parse, rb_normalize
from .rfoperad import RFOperad


class UsageError(ValueError):
    pass


def _parse_theta(text: str) -> str | tuple[Fraction, ...]:
    if text == "symbolic":
        return "symbolic"
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --theta value {text!r}: {exc}") from None


def _theta_scalar(spec: str | tuple[Fraction, ...]) -> ThetaScalar:
    if spec == "symbolic":
        return THETA
    if len(spec) != 1:
        raise UsageError("this subcommand takes a single theta value or 'symbolic'")
    return theta_const(spec[0])


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"bad --seed value {text!r} (use decimal or 0x... hex)") from None


# ---------------------------------------------------------------------------
# fraction mini-grammar
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"\s*([+-])?\s*(\d+)?\s*((?:x\d+(?:\^\d+)?\s*)*)\s*")
_VAR_RE = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_polynomial(text: str, nvars: int) -> MPoly:
    text = text.strip()
    if not text:
        raise UsageError("empty polynomial")
    acc = MPoly.zero(nvars)
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise UsageError(f"cannot parse polynomial near {text[pos:pos+12]!r}")
        sign, coeff, vars_part = m.group(1), m.group(2), m.group(3)
        if sign is None and not first:
            raise UsageError(f"missing +/- near {text[pos:pos+12]!r}")
        if coeff is None and not vars_part.strip():
            raise UsageError(f"empty term near {text[pos:pos+12]!r}")
        c = Fraction(int(coeff)) if coeff is not None else Fraction(1)
        if sign == "-":
            c = -c
        exps = [0] * nvars
        for vm in _VAR_RE.finditer(vars_part):
            i = int(vm.group(1))
            if not 1 <= i <= nvars:
                raise UsageError(f"variable x{i} out of range 1..{nvars}")
            exps[i - 1] += int(vm.group(2) or 1)
        acc = acc + MPoly(nvars, {tuple(exps): c})
        pos = m.end()
        first = False
    return acc


def _parse_factor_atom(text: str, nvars: int) -> frozenset[int]:
    text = text.strip()
    if text.startswith("x"):
        i = int(text[1:])
        subset = {i}
    elif text.startswith("(") and text.endswith(")"):
        subset = set()
        for part in text[1:-1].split("+"):
            part = part.strip()
            if not part.startswith("x"):
                raise UsageError(f"bad factor atom {text!r}")
            subset.add(int(part[1:]))
    elif text.startswith("{") and text.endswith("}"):
        subset = {int(p) for p in text[1:-1].split(",")}
    else:
        raise UsageError(f"bad factor atom {text!r}")
    if not subset or not all(1 <= j <= nvars for j in subset):
        raise UsageError(f"factor {text!r} out of range 1..{nvars}")
    return frozenset(subset)


_FACTOR_SPLIT_RE = re.compile(r"(\([^)]*\)|\{[^}]*\}|x\d+)(?:\^(\d+))?")


def parse_fraction(text: str, nvars: int) -> FactoredRatFn:
    if "/" in text:
        num_text, den_text = text.split("/", 1)
    else:
        num_text, den_text = text, ""
    num = parse_polynomial(num_text, nvars)
    den: dict[frozenset, int] = {}
    rest = den_text.strip()
    pos = 0
    while pos < len(rest):
        if rest[pos].isspace():
            pos += 1
            continue
        m = _FACTOR_SPLIT_RE.match(rest, pos)
        if not m:
            raise UsageError(f"cannot parse denominator near {rest[pos:pos+12]!r}")
        J = _parse_factor_atom(m.group(1), nvars)
        mult = int(m.group(2) or 1)
        den[J] = den.get(J, 0) + mult
        pos = m.end()
    return FactoredRatFn(nvars, num, den)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_verify(args) -> int:
    bounds = Bounds(
        max_arity=args.max_arity,
        max_weight=args.max_weight,
        theta=_parse_theta(args.theta),
        seed=_parse_seed(args.seed),
    )
    params = {
        "target": args.target,
        "max_arity": args.max_arity,
        "max_weight": args.max_weight,
        "theta": args.theta,
        "seed": f"{bounds.seed:#x}",
        "workers": args.workers,
    }
    if args.target == "all":
        reports = run_all(bounds, workers=args.workers)
    else:
        reports = [run_check(args.target, bounds)]
    if args.format == "json":
        print(emit_report(reports, "json", params))
    else:
        print(emit_report(reports, "text"))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(emit_report(reports, "json", params))
            fh.write("\n")
    return exit_code(reports)


def _read_expr_argument(text: str) -> str:
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return fh.read()
    return text


def _cmd_rb_normalize(args) -> int:
    theta = _theta_scalar(_parse_theta(args.theta))
    expr = rb_parse(_read_expr_argument(args.expr))
    nf = rb_normalize(expr, theta)
    print(nf.render())
    return 0


def _cmd_rb_census(args) -> int:
    counts = census(args.arity, args.max_weight)
    for d, c in enumerate(counts):
        print(f"weight {d}: {c}")
    return 0


def _cmd_rf_compose(args) -> int:
    theta = _theta_scalar(_parse_theta(args.theta))
    ops = RFOperad(theta)
    f = parse_fraction(args.f, args.arity_f)
    g = parse_fraction(args.g, args.arity_g)
    try:
        out = ops.compose(f, g, args.slot)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(out.render(theta=theta))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opcalc",
        description="Exact verification of operadic, Rota-Baxter, and descent-algebra identities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run one named check or the whole registry")
    verify.add_argument("target", help="'all' or a check id; see --list")
    verify.add_argument("--max-arity", type=int, default=None)
    verify.add_argument("--max-weight", type=int, default=None)
    verify.add_argument("--theta", default="symbolic",
                        help="'symbolic' or a comma-separated list of rationals")
    verify.add_argument("--seed", default=hex(0xC0FFEE))
    verify.add_argument("--json", default=None, metavar="PATH",
                        help="also write the JSON report to PATH")
    verify.add_argument("--format", choices=["text", "json"], default="text")
    verify.add_argument("--workers", type=int, default=1,
                        help="run checks in a process pool of this size")
    verify.set_defaults(func=_cmd_verify)

    rbp = sub.add_parser("rb", help="Rota-Baxter expression tools")
    rbsub = rbp.add_subparsers(dest="rb_command", required=True)
    norm = rbsub.add_parser("normalize", help="rewrite an expression to nested normal form")
    norm.add_argument("expr", help="expression text, or @file")
    norm.add_argument("--theta", default="symbolic")
    norm.set_defaults(func=_cmd_rb_normalize)
    cen = rbsub.add_parser("census", help="count nested monomials per weight")
    cen.add_argument("--arity", type=int, required=True)
    cen.add_argument("--max-weight", type=int, required=True)
    cen.set_defaults(func=_cmd_rb_census)

    rfp = sub.add_parser("rf", help="rational-function operad tools")
    rfsub = rfp.add_subparsers(dest="rf_command", required=True)
    comp = rfsub.add_parser("compose", help="partial composition f o_slot g")
    comp.add_argument("f")
    comp.add_argument("g")
    comp.add_argument("--slot", type=int, required=True)
    comp.add_argument("--arity-f", type=int, required=True)
    comp.add_argument("--arity-g", type=int, required=True)
    comp.add_argument("--theta", default="symbolic")
    comp.set_defaults(func=_cmd_rf_compose)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, BoundsError, RBParseError, FactorFamilyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnknownCheckError as exc:
        known = ", ".join(CHECK_IDS)
        print(f"error: unknown check id {exc}; known ids: {known}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
