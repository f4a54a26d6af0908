"""Command-line front end: ``uslope <subcommand> ...``.

Exit codes: 0 success, 1 a verification failed, 2 usage error,
3 precondition violation (the violated inequality is printed on stderr).
All numbers are printed exactly; rationals appear as ``"p/q"`` strings.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import kernel as K
from . import opmatrices as O
from . import qseries as Q
from . import spectral as S
from . import suites
from .valuation import PreconditionError, Scalar, format_val

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _scalar(text: str) -> Scalar:
    try:
        return Scalar.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}") from None


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def thread_cap() -> int:
    raw = os.environ.get("USLOPE_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"USLOPE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"USLOPE_THREADS must be a positive integer, got {raw!r}")
    return n


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _scalar_cells(x: Scalar) -> list[str]:
    return [format_val(x.a), format_val(x.b)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_series(args) -> tuple[int, str]:
    if args.name == "hs":
        if args.s is None:
            raise UsageError("--name hs needs --s")
        ser = Q.h_pow(args.s, args.prec)
    else:
        ser = Q.standard(args.name, args.prec)
    if args.format == "text":
        return EXIT_OK, Q.format_text(ser)
    if args.format == "csv":
        return EXIT_OK, _csv([[n, *_scalar_cells(c)] for n, c in enumerate(ser.coeffs)], ["n", "a", "b"])
    return EXIT_OK, _dump({"name": args.name, **ser.to_json()})


def cmd_matrix(args) -> tuple[int, str]:
    if args.kind in O.U_KINDS:
        S.check_admissible(args.kind, args.s, args.r)
    else:
        O.check_w_admissible(args.s, args.r)
    mat = O.op_matrix(args.kind, args.s, args.r, args.size)
    if args.format == "json":
        return EXIT_OK, _dump(mat.to_json())
    rows = [[i, j, *_scalar_cells(e.coef), format_val(e.exp2)]
            for i, row in enumerate(mat.entries) for j, e in enumerate(row) if e.coef]
    if args.format == "csv":
        return EXIT_OK, _csv(rows, ["i", "j", "coef_a", "coef_b", "exp2"])
    lines = [f"{args.kind} matrix at s = {args.s}, r = {format_val(args.r)}, size {args.size}"]
    lines += [f"({i},{j}) {e.coef} * 2^({format_val(e.exp2)})"
              for i, row in enumerate(mat.entries) for j, e in enumerate(row) if e.coef]
    return EXIT_OK, "\n".join(lines)


def cmd_charpoly(args) -> tuple[int, str]:
    cp = S.charpoly(args.kind, args.s, args.size, args.r)
    if args.format == "text":
        return EXIT_OK, cp.format_text()
    if args.format == "csv":
        return EXIT_OK, _csv([[k, *_scalar_cells(c)] for k, c in enumerate(cp.coeffs)], ["k", "a", "b"])
    out = cp.to_json()
    out["newton"] = S.newton_slopes(cp).to_json() if cp.degree >= 1 else None
    return EXIT_OK, _dump(out)


def cmd_slopes(args) -> tuple[int, str]:
    tab = S.slope_table(args.kind, args.s, args.size, args.bound, args.r)
    code = EXIT_OK if tab.stable else EXIT_FAIL
    if args.format == "csv":
        return code, tab.to_csv().rstrip("\n")
    if args.format == "text":
        slopes = ", ".join(f"{format_val(sl)} (x{m})" for sl, m in tab.segments)
        flag = "stable" if tab.stable else f"UNSTABLE against N = {2 * args.size}"
        return code, f"slopes <= {format_val(tab.bound)} at N = {args.size}: {slopes or 'none'} [{flag}]"
    return code, _dump(tab.to_json())


def cmd_classify(args) -> tuple[int, str]:
    cl = K.classify(args.s)
    if args.format == "json":
        return EXIT_OK, _dump(cl.to_json())
    if args.format == "csv":
        r = "" if cl.r_critical is None else format_val(cl.r_critical)
        return EXIT_OK, _csv([[*_scalar_cells(cl.s), cl.case, r]], ["s_a", "s_b", "case", "r_critical"])
    lines = [f"s = {cl.s}", f"case: {cl.case}",
             f"r_critical: {'-' if cl.r_critical is None else format_val(cl.r_critical)}"]
    if cl.shifted_s is not None:
        lines.append(f"shifted parameter s'' = {cl.shifted_s} (twist by h^s/E2): "
                     f"{cl.shifted_case}, r_critical {format_val(cl.shifted_r_critical)}")
    if cl.note:
        lines.append(cl.note)
    return EXIT_OK, "\n".join(lines)


def cmd_kernel(args) -> tuple[int, str]:
    wit = K.kernel_witness(args.s, args.size, args.r_alt, kind=args.kind,
                           check_residual=not args.no_residual, odd_prec=args.odd_prec)
    code = EXIT_FAIL if wit.residual_zero is False or wit.odd_support is False else EXIT_OK
    out = wit.to_json()
    if args.n_max:
        cl = K.classify(args.s)
        if cl.case not in ("ExcludedUnit", "WeightIn4N"):
            rep = K.nondecay_report(args.s, args.n_max, kind=args.kind)
            out["nondecay"] = rep.to_json()
            if not rep.ok and not rep.inconclusive:
                code = EXIT_FAIL
    if args.format == "json":
        return code, _dump(out)
    rows = [[r["n"], r["i"], format_val(r["v_b"]),
             format_val(r["sigma"]) if "sigma" in r else "", format_val(r["sigma_prime"])] for r in wit.rows]
    if args.format == "csv":
        return code, _csv(rows, ["n", "i", "v_b", "sigma", "sigma_prime"])
    lines = [f"kernel witness s = {wit.s}, N = {wit.N}, kind {wit.kind}",
             f"residual zero: {wit.residual_zero}",
             "n  i  v(b_i)  sigma  sigma'"]
    lines += ["  ".join(str(c) for c in row) for row in rows]
    return code, "\n".join(lines)


def _run_items(items, opts, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
            return list(pool.map(suites.run_item, items, [opts] * len(items)))
    return [suites.run_item(it, opts) for it in items]


def cmd_verify(args) -> tuple[int, str]:
    opts = {"prec": args.prec, "size": args.size}
    items = suites.items_for(args.suite)
    results = _run_items(items, opts, thread_cap())
    code = EXIT_FAIL if any(r["status"] == "fail" for r in results) else EXIT_OK
    if args.format == "json":
        return code, _dump({"suite": args.suite, "items": results})
    if args.format == "csv":
        return code, _csv([[r["id"], r["desc"], r["status"], r["detail"]] for r in results],
                          ["id", "desc", "status", "detail"])
    lines = [f"[{r['status'].upper():7}] {r['id']}: {r['desc']} ({r['detail']})" for r in results]
    return code, "\n".join(lines)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uslope", description="Exact 2-adic slope and kernel computations.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, fmt="json"):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--format", choices=("json", "csv", "text"), default=fmt)
        sp.set_defaults(func=fn)
        return sp

    sp = add("series", cmd_series, "q-expansion of a standard series", fmt="text")
    sp.add_argument("--name", required=True, choices=(*Q.STANDARD_NAMES, "hs"))
    sp.add_argument("--prec", type=_positive, required=True)
    sp.add_argument("--s", type=_scalar, default=None, help="exponent for --name hs")

    for name, fn, help_ in (("matrix", cmd_matrix, "closed-form operator matrix"),
                            ("charpoly", cmd_charpoly, "det(1 - T M_N)")):
        sp = add(name, fn, help_)
        sp.add_argument("--kind", choices=O.KINDS, default="U")
        sp.add_argument("--s", type=_scalar, required=True)
        sp.add_argument("--r", type=_rational, default=Fraction(0))
        sp.add_argument("--size", type=_positive, required=True)

    sp = add("slopes", cmd_slopes, "stable slope table (size N against 2N)", fmt="csv")
    sp.add_argument("--kind", choices=O.KINDS, default="U")
    sp.add_argument("--s", type=_scalar, required=True)
    sp.add_argument("--r", type=_rational, default=Fraction(0))
    sp.add_argument("--size", type=_positive, required=True)
    sp.add_argument("--bound", type=_rational, required=True)

    sp = add("classify", cmd_classify, "case and critical radius of s", fmt="text")
    sp.add_argument("--s", type=_scalar, required=True)

    sp = add("kernel", cmd_kernel, "explicit kernel-of-U witness")
    sp.add_argument("--s", type=_scalar, required=True)
    sp.add_argument("--size", type=_positive, required=True)
    sp.add_argument("--r-alt", type=_rational, default=Fraction(1, 12))
    sp.add_argument("--kind", choices=("W", "Wprime"), default="W")
    sp.add_argument("--no-residual", action="store_true", help="skip the exact (Id + W_N) b = 0 check")
    sp.add_argument("--odd-prec", type=_positive, default=None,
                    help="also check odd q-support of the untwisted form to this many terms")
    sp.add_argument("--n-max", type=_positive, default=None, help="append the non-decay report up to n")

    sp = add("verify", cmd_verify, "run verification suites", fmt="text")
    sp.add_argument("--suite", choices=(*suites.SUITES, "all"), default="all")
    sp.add_argument("--prec", type=_positive, default=None)
    sp.add_argument("--size", type=_positive, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        code, text = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRE
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
