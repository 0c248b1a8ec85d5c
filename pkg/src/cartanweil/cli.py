"""Command line surface: transgressions, universal string classes, verification.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 internal
invariant violation.  Identical (config, seed) produces byte-identical JSON;
for that reason the verify report omits runtime fields.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .engine import (
    CartanWeilError,
    GradedElement,
    Q,
    apply_derivation,
    latex_element,
)
from .lie_data import (
    InvariantPolynomial,
    LieAlgebraData,
    Scale,
    UnknownAlgebraError,
    builtin_algebra,
    cubic_polynomial,
    load_algebra,
    metric_polynomial,
    sym_power_polynomial,
    validate_algebra,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _resolve_algebra(spec: str) -> LieAlgebraData:
    if os.path.exists(spec) and spec not in ("su2", "su3"):
        return load_algebra(spec)
    return builtin_algebra(spec)


def _resolve_polynomial(spec: str, algebra: LieAlgebraData) -> InvariantPolynomial:
    if spec == "metric":
        return metric_polynomial(algebra)
    if spec == "metric-normalized":
        return metric_polynomial(algebra, Scale(Q(-1, 8), 2))
    if spec == "cubic":
        return cubic_polynomial(algebra)
    if spec.startswith("sym_power:"):
        return sym_power_polynomial(algebra, int(spec.split(":", 1)[1]))
    raise UnknownAlgebraError(f"unknown polynomial spec {spec!r}")


def _structured_latex(p: InvariantPolynomial, equivariant: bool) -> str:
    from .transgression import transgression_coefficient

    k = p.degree
    coeff = transgression_coefficient(k)
    num, den = coeff.numerator, coeff.denominator
    if den == 1:
        cs = str(num)
    else:
        cs = ("-" if num < 0 else "") + f"\\tfrac{{{abs(num)}}}{{{den}}}"
    slots = "\\Theta" + ", [\\Theta,\\Theta]" * (k - 1)
    body = f"{cs} \\left\\langle {slots} \\right\\rangle_p"
    if equivariant:
        body += " + \\text{(chi terms)}"
    return body


def _emit_form(form: GradedElement, fmt: str, header: str | None = None, extra=None):
    if fmt == "json":
        obj = {"form": form.to_json_obj()}
        if extra:
            obj.update(extra)
        print(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    elif fmt == "latex":
        if header:
            print("% " + header)
        print(latex_element(form))
    else:
        if header:
            print(header)
        print(form)


def cmd_transgress(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    p = _resolve_polynomial(args.poly, algebra)
    from .transgression import equivariant_transgress, transgress_closed, transgress_integral

    if args.equivariant:
        result = equivariant_transgress(p)
        header = f"tau_G({args.poly}) on {algebra.name}"
    else:
        result = transgress_integral(p)
        closed = transgress_closed(p)
        if result.form != closed.form:
            print("internal error: integral and closed transgression disagree", file=sys.stderr)
            return EXIT_INTERNAL
        header = f"tau({args.poly}) on {algebra.name}"
    if args.format == "latex":
        print("% " + header)
        print("% closed formula: " + _structured_latex(p, args.equivariant))
        print(latex_element(result.form))
    else:
        _emit_form(result.form, args.format, header)
    return EXIT_OK


def cmd_string_universal(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    p = _resolve_polynomial(args.poly, algebra)
    from .gforms import oracle_equal
    from .mq import NotBasicError
    from .string_universal import based_string_class, universal_string_class
    from .transgression import equivariant_transgress

    if args.based:
        form = based_string_class(p, algebra)
        _emit_form(form, args.format, f"based string class ({args.poly}) on {algebra.name}")
        return EXIT_OK
    try:
        cls = universal_string_class(
            p, algebra, samples=args.samples, seed=args.seed
        )
    except NotBasicError as exc:
        print(json.dumps({"error": "basicness", "witness": exc.witness}, sort_keys=True))
        return EXIT_INTERNAL
    tau = equivariant_transgress(p)
    verdict = oracle_equal(
        algebra, cls.element, tau.form, samples=args.samples, seed=args.seed
    )
    extra = {"tau_G_comparison": "PASS" if verdict.equal else "FAIL"}
    if args.format == "json":
        _emit_form(cls.element, "json", extra=extra)
    else:
        _emit_form(cls.element, args.format, f"s_{{{args.poly}}}(ELG) on {algebra.name}")
        print(f"tau_G comparison: {extra['tau_G_comparison']}")
    return EXIT_OK if verdict.equal else EXIT_FAIL


def _suite_algebra(algebra, p_spec, samples, seed) -> list[dict]:
    report = validate_algebra(algebra)
    out = [
        {"check": f"algebra:{c.name}", "pass": c.passed, **({"witness": c.witness} if c.witness else {})}
        for c in report.checks
    ]
    try:
        p = _resolve_polynomial(p_spec, algebra)
        out.append({"check": "polynomial:invariance", "pass": True,
                    "detail": p.describe()})
    except CartanWeilError as exc:
        out.append({"check": "polynomial:invariance", "pass": False, "witness": str(exc)})
    return out


def _suite_weil(algebra, samples, seed) -> list[dict]:
    import random

    from .engine import el, mu, theta
    from .weil import chern_weil_element, is_basic, weil_complex

    out = []
    try:
        w = weil_complex(algebra)
        out.append({"check": "weil:d_squared_on_generators", "pass": True})
    except CartanWeilError as exc:
        return [{"check": "weil:d_squared_on_generators", "pass": False, "witness": str(exc)}]
    rng = random.Random(f"weil:{seed}")
    n = algebra.dim
    ok = True
    for _ in range(20):
        x = GradedElement.zero()
        for _ in range(3):
            word = GradedElement.scalar(Q(rng.randint(-3, 3) or 1, rng.randint(1, 3)))
            for _ in range(rng.randint(1, 3)):
                g = theta(rng.randint(1, n)) if rng.random() < 0.5 else mu(rng.randint(1, n))
                word = word * el(g)
            x = x + word
        if apply_derivation(w.d, apply_derivation(w.d, x)).terms:
            ok = False
            break
        i = rng.randint(1, n)
        lhs = apply_derivation(w.lie[i - 1], x)
        rhs = apply_derivation(w.d, apply_derivation(w.iota[i - 1], x)) + apply_derivation(
            w.iota[i - 1], apply_derivation(w.d, x)
        )
        if lhs != rhs:
            ok = False
            break
    out.append({"check": "weil:d_squared_and_magic_on_random_elements", "pass": ok})
    pm = metric_polynomial(algebra)
    out.append({"check": "weil:chern_weil_metric_basic",
                "pass": is_basic(w, chern_weil_element(pm))})
    return out


def _suite_mq(algebra, samples, seed) -> list[dict]:
    import random

    from .engine import Theta, el, mu, theta
    from .mq import mq_phi, mq_phi_inv, tensor_complex
    from .weil import chern_weil_element

    out = []
    try:
        ts = tensor_complex(algebra)
        out.append({"check": "mq:total_d_squared_on_generators", "pass": True})
    except CartanWeilError as exc:
        return [{"check": "mq:total_d_squared_on_generators", "pass": False, "witness": str(exc)}]
    rng = random.Random(f"mq:{seed}")
    n = algebra.dim
    ok = True
    for _ in range(15):
        x = GradedElement.zero()
        for _ in range(2):
            word = GradedElement.scalar(Q(rng.randint(-3, 3) or 2, rng.randint(1, 3)))
            for _ in range(rng.randint(1, 3)):
                r = rng.random()
                if r < 0.4:
                    word = word * el(Theta(rng.randint(1, n)))
                elif r < 0.7:
                    word = word * el(theta(rng.randint(1, n)))
                else:
                    word = word * el(mu(rng.randint(1, n)))
            x = x + word
        if mq_phi(ts, mq_phi_inv(ts, x)) != x:
            ok = False
            break
        if apply_derivation(ts.total_d, apply_derivation(ts.total_d, x)).terms:
            ok = False
            break
    out.append({"check": "mq:phi_invertible_and_total_d_squared", "pass": ok})
    from .gforms import oracle_equal
    from .mq import drop_exterior, is_basic_tensor

    cw_el = chern_weil_element(metric_polynomial(algebra))
    v = is_basic_tensor(ts, cw_el, samples=samples, seed=seed)
    out.append({"check": "mq:chern_weil_basic", "pass": v.equal})
    phi = mq_phi(ts, cw_el)
    v2 = oracle_equal(algebra, phi - drop_exterior(phi), GradedElement.zero(),
                      samples=samples, seed=seed)
    out.append({"check": "mq:phi_of_basic_exterior_free", "pass": v2.equal})
    return out


def _suite_transgression(algebra, p_spec, samples, seed) -> list[dict]:
    from .mq import EquivariantForm, tensor_complex
    from .transgression import (
        check_equivariantly_closed,
        equivariant_transgress,
        transgress_closed,
        transgress_integral,
    )

    out = []
    p = _resolve_polynomial(p_spec, algebra)
    agree = transgress_integral(p).form == transgress_closed(p).form
    out.append({"check": "transgression:integral_equals_closed", "pass": agree})
    ts = tensor_complex(algebra)
    d_tau = apply_derivation(ts.gforms.d, transgress_closed(p).form)
    out.append({"check": "transgression:tau_closed", "pass": not d_tau.terms})
    tau_g = equivariant_transgress(p)
    v = check_equivariantly_closed(
        ts, EquivariantForm(algebra, tau_g.form), samples=samples, seed=seed
    )
    out.append({"check": "transgression:tau_G_equivariantly_closed", "pass": v.equal})
    return out


def _suite_string(algebra, p_spec, samples, seed) -> list[dict]:
    from .string_universal import verify_prop14, verify_theorem15_consistency

    p = _resolve_polynomial(p_spec, algebra)
    rep14 = verify_prop14(p, algebra, samples=samples, seed=seed)
    rep15 = verify_theorem15_consistency(p, algebra, samples=samples, seed=seed)
    out = [
        {"check": "string:prop14", "pass": rep14.passed,
         **({"witness": rep14.witness} if rep14.witness else {})},
        {"check": "string:theorem15_consistency", "pass": rep15.passed,
         **({"witness": rep15.witness} if rep15.witness else {})},
    ]
    return out


def cmd_verify(args) -> int:
    algebra = _resolve_algebra(args.algebra)
    suites = {
        "algebra": lambda: _suite_algebra(algebra, args.poly, args.samples, args.seed),
        "weil": lambda: _suite_weil(algebra, args.samples, args.seed),
        "mq": lambda: _suite_mq(algebra, args.samples, args.seed),
        "transgression": lambda: _suite_transgression(algebra, args.poly, args.samples, args.seed),
        "string": lambda: _suite_string(algebra, args.poly, args.samples, args.seed),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    checks: list[dict] = []
    for name in names:
        checks.extend(suites[name]())
    checks.sort(key=lambda c: c["check"])
    passed = all(c["pass"] for c in checks)
    print(
        json.dumps(
            {
                "algebra": algebra.name,
                "seed": args.seed,
                "samples": args.samples,
                "suite": args.suite,
                "pass": passed,
                "checks": checks,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
    )
    return EXIT_OK if passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cartanweil",
        description="Exact Weil/Cartan model computations: transgressions and universal string classes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--algebra", required=True,
                        help="builtin name (su2, su3, abelian:N) or algebra JSON file")
        sp.add_argument("--poly", default="metric",
                        help="metric | metric-normalized | cubic | sym_power:K")
        sp.add_argument("--format", choices=("text", "json", "latex"), default="text")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=8)

    sp = sub.add_parser("transgress", help="compute tau(p) or tau_G(p)")
    common(sp)
    sp.add_argument("--equivariant", action="store_true")
    sp.set_defaults(func=cmd_transgress)

    sp = sub.add_parser("string-universal", help="universal string class and tau_G comparison")
    common(sp)
    sp.add_argument("--based", action="store_true",
                    help="the chi-free based specialisation instead")
    sp.set_defaults(func=cmd_string_universal)

    sp = sub.add_parser("verify", help="run verification suites")
    common(sp)
    sp.add_argument("--suite", default="all",
                    choices=("algebra", "weil", "mq", "transgression", "string", "all"))
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.samples < 1:
        parser.error("--samples must be >= 1")
    env_seed = os.environ.get("CARTANWEIL_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print(f"invalid CARTANWEIL_SEED {env_seed!r}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (UnknownAlgebraError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CartanWeilError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
