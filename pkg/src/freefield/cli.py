"""``ff``: command-line front end.

Exit codes: 0 success (or "equal"), 1 a negative answer ("distinct", a false
identity, disagreeing evaluation), 2 usage or parse errors, 3 undefined
elements (inversion of zero).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .als import ALS, ALSFormatError, Alphabet, parse_als, serialize
from .apps import ParanoiaError, check_identity, eq, lgcd, rgcd
from .expr import ExprSyntaxError, UndefinedElement, compile_expr, eval_expr, parse_expr
from .linalg import Mat, format_rat
from .minimize import minimize
from .ops import normalize_regular
from .oracle import eval_matrices, random_assignment, series_coeffs
from .refine import refine

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_UNDEFINED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def als_to_json(a: ALS) -> dict:
    """Field names follow the headers of the text format."""
    out = {
        "ALS": 1,
        "letters": list(a.alphabet.letters),
        "dim": a.n,
        "u": [format_rat(x) for x in a.u.entries()],
        "v": [format_rat(x) for x in a.v.entries()],
        "A0": _rows(a.coeffs[0]),
    }
    for name, c in zip(a.alphabet.letters, a.coeffs[1:]):
        out[f"A[{name}]"] = _rows(c)
    return out


def _rows(m: Mat) -> list[list[str]]:
    return [[format_rat(x) for x in row] for row in m.tolist()]


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--letters", default=d("x,y,z"), help="comma separated alphabet (default x,y,z)")
    p.add_argument("--format", choices=("text", "json"), default=d("text"))
    p.add_argument("--paranoid", action="store_true", default=d(False),
                   help="cross-check equality verdicts at random matrix points")
    p.add_argument("--lazy", action="store_true", default=d(False),
                   help="minimize only at the root of an expression")
    p.add_argument("--seed", type=int, default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ff", description="Exact free field arithmetic.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="print the ALS of an expression")
    p.add_argument("expr")
    p = sub.add_parser("min", parents=[common], help="minimize an expression or an ALS file")
    p.add_argument("source")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--refine-report", action="store_true")
    p = sub.add_parser("rank", parents=[common], help="minimal dimension")
    p.add_argument("expr")
    p = sub.add_parser("eq", parents=[common], help="decide equality (exit 0 equal, 1 distinct)")
    p.add_argument("lhs")
    p.add_argument("rhs")
    for name in ("lgcd", "rgcd"):
        side = "left" if name == "lgcd" else "right"
        p = sub.add_parser(name, parents=[common], help=f"{side} gcd of two polynomials")
        p.add_argument("p")
        p.add_argument("q")
    p = sub.add_parser("series", parents=[common], help="power series coefficients at 0")
    p.add_argument("expr")
    p.add_argument("--max-len", type=int, default=4)
    p = sub.add_parser("eval", parents=[common], help="evaluate at random rational matrices")
    p.add_argument("expr")
    p.add_argument("--size", type=int, default=2)
    p.add_argument("--trials", type=int, default=3)
    p = sub.add_parser("check", parents=[common], help="verify a file of 'lhs == rhs' lines")
    p.add_argument("file")
    return parser


def _alphabet(spec: str) -> Alphabet:
    try:
        return Alphabet.of([s.strip() for s in spec.split(",") if s.strip()])
    except ValueError as exc:
        raise UsageError(f"--letters: {exc}") from None


def _compile(text: str, alphabet: Alphabet, lazy: bool) -> ALS:
    return compile_expr(parse_expr(text, alphabet), alphabet, lazy=lazy)


def _emit(args, text: str, payload: dict) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def cmd_parse(args, alphabet):
    a = compile_expr(parse_expr(args.expr, alphabet), alphabet, lazy=True) if args.lazy \
        else _compile(args.expr, alphabet, False)
    _emit(args, serialize(a).rstrip("\n"), als_to_json(a))
    return EXIT_OK


def cmd_min(args, alphabet):
    if os.path.isfile(args.source):
        with open(args.source) as fh:
            a = parse_als(fh.read())
    else:
        a = _compile(args.source, alphabet, args.lazy)
    m, trace = minimize(a)
    report = refine(m)[1] if args.refine_report else None
    if args.format == "json":
        payload = {"als": als_to_json(m)}
        if args.trace:
            payload["trace"] = [s.render() for s in trace.steps]
        if report is not None:
            payload["refine_report"] = [b.render() for b in report.blocks]
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(serialize(m).rstrip("\n"))
    if args.trace:
        print("# trace")
        if trace.steps:
            print(trace.render())
    if report is not None:
        print("# refine report")
        if report.blocks:
            print(report.render())
    return EXIT_OK


def cmd_rank(args, alphabet):
    n = minimize(_compile(args.expr, alphabet, args.lazy))[0].n
    _emit(args, str(n), {"rank": n})
    return EXIT_OK


def cmd_eq(args, alphabet):
    a = _compile(args.lhs, alphabet, args.lazy)
    b = _compile(args.rhs, alphabet, args.lazy)
    same = eq(a, b, alphabet, paranoid=args.paranoid)
    ra, rb = minimize(a)[0].n, minimize(b)[0].n
    text = f"equal (rank {ra})" if same else f"distinct (ranks {ra}, {rb})"
    _emit(args, text, {"equal": same, "lhs_rank": ra, "rhs_rank": rb})
    return EXIT_OK if same else EXIT_NO


def cmd_gcd(args, alphabet):
    fn = lgcd if args.command == "lgcd" else rgcd
    try:
        r = fn(parse_expr(args.p, alphabet), parse_expr(args.q, alphabet), alphabet)
    except ValueError as exc:
        if isinstance(exc, ExprSyntaxError):
            raise
        raise UsageError(str(exc)) from None
    for note in r.notes:
        print(f"note: {note}", file=sys.stderr)
    _emit(args, str(r.gcd), {
        "gcd": str(r.gcd),
        "factors": [str(f) for f in r.factors],
        "intermediate_dim": r.intermediate_dim,
        "verified": r.verified,
        "example_grade": r.example_grade,
    })
    return EXIT_OK


def cmd_series(args, alphabet):
    if args.max_len < 0:
        raise UsageError("--max-len must be nonnegative")
    m = minimize(_compile(args.expr, alphabet, args.lazy))[0]
    r = normalize_regular(m)
    if r is None:
        raise UsageError("element is not regular at 0, no power series expansion")
    table = series_coeffs(r, args.max_len)
    text = table.dump()
    payload = {table.word_text(w): format_rat(c) for w, c in
               sorted(table.coeffs.items(), key=lambda kv: (len(kv[0]), kv[0]))}
    _emit(args, text if text else "0", {"max_len": args.max_len, "coefficients": payload})
    return EXIT_OK


def cmd_eval(args, alphabet):
    if args.size < 1 or args.trials < 1:
        raise UsageError("--size and --trials must be positive")
    e = parse_expr(args.expr, alphabet)
    a = compile_expr(e, alphabet, lazy=args.lazy)
    rng = random.Random(args.seed)
    lines, results, agree = [], [], True
    for t in range(1, args.trials + 1):
        x = random_assignment(alphabet.d, args.size, rng)
        via_als = eval_matrices(a, x)
        direct = eval_expr(e, x.mats, alphabet)
        if via_als is None or direct is None:
            lines.append(f"trial {t}: undefined")
            results.append(None)
            continue
        ok = via_als == direct
        agree &= ok
        lines.append(f"trial {t}: {'agree' if ok else 'DISAGREE'}")
        lines.extend(" ".join(format_rat(v) for v in row) for row in via_als.tolist())
        results.append({"agree": ok, "value": _rows(via_als)})
    _emit(args, "\n".join(lines), {"size": args.size, "seed": args.seed, "trials": results})
    return EXIT_OK if agree else EXIT_NO


def cmd_check(args, alphabet):
    try:
        with open(args.file) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    verdicts = check_identity(lines, alphabet, lazy=args.lazy)
    _emit(args, "\n".join(v.render() for v in verdicts), {"results": [
        {"line": v.line, "text": v.text, "verdict": v.verdict, "lhs_rank": v.lhs_rank,
         "rhs_rank": v.rhs_rank, "message": v.message} for v in verdicts]})
    kinds = {v.verdict for v in verdicts}
    if "error" in kinds:
        return EXIT_USAGE
    if "undefined" in kinds:
        return EXIT_UNDEFINED
    return EXIT_NO if "false" in kinds else EXIT_OK


COMMANDS = {
    "parse": cmd_parse, "min": cmd_min, "rank": cmd_rank, "eq": cmd_eq,
    "lgcd": cmd_gcd, "rgcd": cmd_gcd, "series": cmd_series, "eval": cmd_eval, "check": cmd_check,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        alphabet = _alphabet(args.letters)
        return COMMANDS[args.command](args, alphabet)
    except UndefinedElement as exc:
        print(f"ff: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (UsageError, ExprSyntaxError, ALSFormatError) as exc:
        print(f"ff: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParanoiaError as exc:
        print(f"ff: paranoid check failed: {exc}", file=sys.stderr)
        return EXIT_NO


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
