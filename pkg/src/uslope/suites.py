"""Verification items grouped into suites, as run by ``uslope verify``.

Each item returns ``(status, detail)`` with status ``pass``, ``fail`` or
``skipped``.  Items are independent so a suite can run them in parallel;
the ledger order is always the declared order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import kernel as K
from . import opmatrices as O
from . import qseries as Q
from . import spectral as S
from .valuation import (
    INF,
    PreconditionError,
    Scalar,
    factorial_bounds_check,
    product_window_check,
    profile,
    smalldisc_check,
)

SUITES = ("identities", "matrices", "valuations", "combinatorial", "spectral", "kernel")

SAMPLE_S = ("0", "-1", "1/3", "1/4*sqrt2", "1+sqrt2", "2+2*sqrt2")


@dataclass(frozen=True)
class Item:
    id: str
    suite: str
    desc: str
    run: Callable[[dict], tuple[str, str]]


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# ---------------------------------------------------------------------------
# identities


def _degree16(opts):
    rep = Q.verify_identities(opts.get("prec") or 1000, which=["degree16"])
    item = rep["degree16"]
    return _status(item.ok), f"{rep.prec} terms" + (f"; first failure at q^{item.first_failure}" if not item.ok else "")


def _c_coeffs(opts):
    n = 200
    g = Q.W(Q.standard("f", n + 1))
    exp = Q.expand_in_f(g)
    for i in range(1, n + 1):
        c1, c2 = Q.c_coeff(i, 1), Q.c_coeff(i, 2)
        if not (c1 == c2 == exp[i]):
            return "fail", f"mismatch at i = {i}"
    return "pass", f"1 <= i <= {n}"


def _twist_identities(opts):
    rep = Q.verify_identities(300, which=["W=2VU-id", "Utheta=2thetaU", "2Vtheta=thetaV", "thetaf=fE2"])
    bad = [it.name for it in rep.items if not it.ok]
    return _status(not bad), "300 terms" + (f"; failing: {', '.join(bad)}" if bad else "")


def _misc_identities(opts):
    prec = opts.get("prec") or 300
    # re-summing against f^0..f^(n-1) costs about n^3 big-integer products, so cap it
    resum = min(prec, 300)
    items = (Q.verify_identities(prec, which=["hf=delta"]).items
             + Q.verify_identities(resum, which=["g=sum c_i f^i"]).items)
    bad = [it.name for it in items if not it.ok]
    detail = f"h f = Delta to {prec} terms; g = sum c_i f^i to {resum} terms"
    return _status(not bad), detail + (f"; failing: {', '.join(bad)}" if bad else "")


def _hecke_delta(opts):
    n = 200
    d2 = Q.standard("delta", 2 * n)
    t2 = Q.U(d2) + Q.V(Q.standard("delta", n // 2 + 1)).truncate(n) * (2 ** 11)
    ok = t2.truncate(n) == Q.standard("delta", n) * (-24)
    return _status(ok), f"T2 Delta = -24 Delta to {n} terms"


# ---------------------------------------------------------------------------
# matrices


def _oracle(kind, ms, size):
    def run(opts):
        n = size if not opts.get("size") else min(size, opts["size"])
        out = O.oracle_sweep(kind, ms, n)
        detail = f"m in {list(ms)}, 0 <= i,j < {n}, {out['checked']} entries"
        if not out["ok"]:
            detail += f"; first mismatch {out['first_mismatch']}"
        return _status(out["ok"]), detail
    return run


def _entry_examples(opts):
    checks = [
        O.entry("U", 0, 0, 0, Fraction(1, 12)).value() == 1,
        O.entry("U", 1, 1, 0, 0).value() == 24,
        O.entry("U", 2, 1, 0, 0).value() == 2048,
        O.entry("W", 3, 2, 0, 0).value() == -96,
        O.entry("U", 0, 1, 1, 0).is_zero(),
        all(O.entry("W", i, i, Scalar.parse("1+sqrt2"), Fraction(1, 12)).value() == (-1) ** i for i in range(21)),
        O.direct_matrix("U", 1, 2)[1, 1].coef == 72,
    ]
    return _status(all(checks)), f"{sum(checks)}/{len(checks)} spot values"


def _involution(opts):
    bad = []
    for s in ("0", "1/4*sqrt2", "1+sqrt2"):
        for r in (Fraction(0), Fraction(1, 12)):
            if not K.involution_check(Scalar.parse(s), 40, r):
                bad.append((s, str(r)))
    return _status(not bad), "N = 40, s in {0, sqrt2/4, 1+sqrt2}, r in {0, 1/12}" + (f"; failing {bad}" if bad else "")


# ---------------------------------------------------------------------------
# valuations


def _bounds(opts):
    size = 61
    lines = []
    ok = True
    for s in SAMPLE_S:
        sc = Scalar.parse(s)
        for kind, r in (("U", Fraction(5, 24)), ("W", Fraction(1, 12))):
            try:
                rep = O.valuation_bounds_report(kind, sc, r, size,
                                                epsilon=Fraction(1, 24) if kind == "U" else None)
            except PreconditionError:
                lines.append(f"{kind}@{s}: inadmissible")
                continue
            if not rep.ok:
                ok = False
                lines.append(f"{kind}@{s}: {len(rep.violations)} bound, {len(rep.margin_violations)} margin violations")
    return _status(ok), f"0 <= i,j <= {size - 1}" + ("; " + "; ".join(lines) if lines else "")


def smalldisc_grid():
    """Ten ``s`` spanning the three cases, each paired with ten ``s'`` at distance <= 1."""
    s_vals = ["1/4*sqrt2", "3/4*sqrt2", "1+1/4*sqrt2", "1/2*sqrt2", "sqrt2", "1+sqrt2", "2+2*sqrt2",
              "0", "1/3", "-1"]
    deltas = ["0", "1", "-1", "2", "1/3", "sqrt2", "3", "-2/3", "5", "1+sqrt2"]
    return [(Scalar.parse(s), Scalar.parse(s) + Scalar.parse(d)) for s in s_vals for d in deltas]


def _smalldisc(opts):
    grid = smalldisc_grid()
    cases = set()
    for s, sp in grid:
        v = profile(s).v
        cases.add("big" if v < -1 else ("z2" if profile(2 * s).beta == INF else "mid"))
        if not smalldisc_check(s, sp):
            return "fail", f"false at s = {s}, s' = {sp}"
    errs = 0
    for s in ("1/2", "3/2", "-1/2", "1/6", "5/2", "-7/6"):
        try:
            smalldisc_check(Scalar.parse(s), Scalar.parse(s))
        except PreconditionError:
            errs += 1
    ok = errs == 6 and cases == {"big", "mid", "z2"}
    return _status(ok), f"{len(grid)} pairs, cases {sorted(cases)}, unit cases rejected {errs}/6"


def product_window_samples(count: int = 50, seed: int = 7):
    """Deterministic ``(x, m, N)`` triples covering every beta regime."""
    rng = random.Random(seed)
    pools = {
        "nonpositive": ["1/2", "1/2*sqrt2", "3/4+1/2*sqrt2", "1/4", "1/2+sqrt2"],
        "finite": ["sqrt2", "1+sqrt2", "2+2*sqrt2", "3+4*sqrt2", "4*sqrt2"],
        "infinite": ["0", "1", "1/3", "-5", "12"],
    }
    out = []
    names = list(pools)
    for k in range(count):
        regime = names[k % 3]
        x = Scalar.parse(rng.choice(pools[regime]))
        m = rng.randint(-20, 20)
        N = rng.choice([1, 2, 4, 8, 16, 32, 64, rng.randint(1, 100)])
        out.append((x, m, N))
    return out


def _product_windows(opts):
    samples = product_window_samples()
    parts = set()
    for x, m, N in samples:
        rep = product_window_check(x, m, N)
        parts.update(rep["checks"])
        if not rep["ok"]:
            return "fail", f"x = {x}, m = {m}, N = {N}: {rep['checks']}"
    ok = parts == {"part1", "part2", "part3", "part4"}
    return _status(ok), f"{len(samples)} triples, parts exercised {sorted(parts)}"


# ---------------------------------------------------------------------------
# combinatorial


def _comb(opts):
    for i in range(2, 81):
        for j in range(1, i):
            if not O.comb_identity_check(i, j):
                return "fail", f"fails at (i, j) = ({i}, {j})"
    return "pass", "1 <= j < i <= 80"


def _factorials(opts):
    bad = [m for m in range(0, 4097) if not factorial_bounds_check(m)["ok"]]
    return _status(not bad), "0 <= m <= 4096" + (f"; failing m = {bad[:5]}" if bad else "")


def _fn_offsets(opts):
    res = {u: K.lemma68_scan(u, 10)["ok"] for u in (0, 4, 1, Fraction(1, 3))}
    return _status(all(res.values())), f"n <= 10, u in {{0, 4, 1, 1/3}}: {res}"


# ---------------------------------------------------------------------------
# spectral


def _rinv(opts):
    bad = []
    for kind in ("U", "W"):
        for s in ("0", "-1", "1/4*sqrt2"):
            if not S.r_invariance_check(kind, Scalar.parse(s), 25, 0, Fraction(1, 12)):
                bad.append((kind, s, "1/12"))
            if not S.r_invariance_check(kind, Scalar.parse(s), 25, 0, Fraction(1, 6)):
                bad.append((kind, s, "1/6"))
    return _status(not bad), "N = 25, r in {0, 1/12, 1/6}" + (f"; failing {bad}" if bad else "")


def _weight12(opts):
    tab = S.slope_table("U", -1, 40, 10)
    ok = tab.stable and Fraction(3) in tab.slopes()
    return _status(ok), f"slopes <= 10 at N = 40: {[str(x) for x in tab.slopes()]}, stable vs 80: {tab.stable}"


def _weight0(opts):
    cp = S.charpoly("U", 0, 2)
    ok1 = cp.coeffs == (Scalar(1), Scalar(-25), Scalar(24))
    ok2 = S.newton_slopes(cp).slopes() == [0, 3]
    tab = S.slope_table("U", 0, 30, 20)
    ok3 = tab.stable and tab.slopes()[:1] == [0]
    return _status(ok1 and ok2 and ok3), (f"charpoly(U,0,2) = {cp.format_text()}; slopes <= 20 at N = 30: "
                                          f"{[str(x) for x in tab.slopes()]}, stable vs 60: {tab.stable}")


def _finite_slope(opts):
    out = []
    ok = True
    for s in (0, -1):
        rep = S.finite_slope_extension_demo(s, 16, Fraction(1, 12), Fraction(5, 12))
        if rep.skipped:
            return "skipped", rep.skipped
        ok = ok and rep.increasing_tail
        out.append(f"s = {s}: slope {rep.slope}, tail from i = {rep.tail_start}")
    return _status(ok), "; ".join(out)


# ---------------------------------------------------------------------------
# kernel


def _eta_column_nonpositive(opts):
    s = Scalar.parse("1/4*sqrt2")
    rep = K.nondecay_report(s, 12)
    exact = all(row.v_eta_i1 == 1 for row in rep.rows) and len(rep.rows) == 12
    consts = rep.c1 == 1 and rep.c3 == 0 and all(
        row.N_i == row.n and row.c2_i == Fraction(row.n + 1, 2) for row in rep.rows)
    return _status(exact and consts and rep.ok), f"n = 1..12, conditions met: {rep.ok}"


def _cor69(opts):
    details = []
    found = {}
    for s in (Scalar(0), Scalar(Fraction(1, 3))):
        r = K.classify(s).r_critical
        found[s] = [n for n in range(1, 13) if K._ValTable("W", 2 ** n + 1, s, r)(1) in (0, 1)]
        details.append(f"s = {s}: n in {found[s]}")
    v31 = O.entry_valuation("W", 3, 1, 0, Fraction(1, 3))
    ok = all(found.values()) and found[Scalar(0)][0] == 1 and v31 == 0
    return _status(ok), "; ".join(details) + f"; v(eta_31(0)) = {v31}"


def _witness(opts):
    N = opts.get("size") or 1026
    prec = min(512, N - 2)
    f = Q.standard("f", prec)
    F = (f - Q.W(f)) * Fraction(1, 2)
    even_zero = all(not c for c in F.coeffs[0::2])
    wit = K.kernel_witness(Scalar(0), N, Fraction(1, 12))
    rows = [row for row in wit.rows if 2 <= row["n"] <= 10]
    sp = [row["sigma_prime"] for row in rows]
    sig = [row["sigma"] for row in rows]
    increasing = all(a < b for a, b in zip(sp, sp[1:]))
    window = max(abs(x - sig[0]) for x in sig) <= 2 if sig else False
    ok = even_zero and bool(wit.residual_zero) and increasing and window
    return _status(ok), (f"even coefficients zero to {prec}: {even_zero}; residual zero at N = {N}: "
                         f"{wit.residual_zero}; sigma' increasing: {increasing}; "
                         f"sigma in [{min(sig)}, {max(sig)}]")


ITEMS: list[Item] = [
    Item("C1", "identities", "degree-16 identity in f and g", _degree16),
    Item("C2", "identities", "closed forms of c_i against W(f) expanded in f", _c_coeffs),
    Item("C14", "identities", "theta/twist identities on monomial bases", _twist_identities),
    Item("I1", "identities", "h f = Delta and g = sum c_i f^i", _misc_identities),
    Item("C7a", "identities", "T2 Delta = -24 Delta from q-expansions", _hecke_delta),
    Item("M0", "matrices", "entry spot values", _entry_examples),
    Item("C3U", "matrices", "closed-form U entries against q-expansion oracle", _oracle("U", (0, 1, 2, 3), 41)),
    Item("C3W", "matrices", "closed-form W entries against q-expansion oracle", _oracle("W", (0, 1, 2), 41)),
    Item("C3Up", "matrices", "primed U entries against oracle", _oracle("Uprime", (0, 1, 2), 31)),
    Item("C3Wp", "matrices", "primed W entries against oracle", _oracle("Wprime", (0, 1, 2), 31)),
    Item("C9", "matrices", "W_N(s)^2 = Id", _involution),
    Item("C5", "valuations", "entrywise valuation bounds and factorisation margin", _bounds),
    Item("C13", "valuations", "small-disc radius inequality grid", _smalldisc),
    Item("C15b", "valuations", "product valuation windows by beta regime", _product_windows),
    Item("C4", "combinatorial", "binomial-sum identity", _comb),
    Item("C15a", "combinatorial", "factorial valuation bounds", _factorials),
    Item("L68", "combinatorial", "f_n(u) valuation offsets", _fn_offsets),
    Item("C6", "spectral", "charpoly independent of r", _rinv),
    Item("C7b", "spectral", "weight-12 slope 3 stable", _weight12),
    Item("C8", "spectral", "weight-0 charpoly and stable slope table", _weight0),
    Item("FS", "spectral", "finite-slope eigenvector tails", _finite_slope),
    Item("C10", "kernel", "eta column at s = sqrt2/4 and non-decay conditions", _eta_column_nonpositive),
    Item("C11", "kernel", "rows with v(eta_i1) in {0, 1} for s in Z_2", _cor69),
    Item("C12", "kernel", "kernel witness at s = 0", _witness),
]


def items_for(suite: str) -> list[Item]:
    if suite == "all":
        return list(ITEMS)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return [it for it in ITEMS if it.suite == suite]


def run_item(item: Item, opts: dict) -> dict:
    try:
        status, detail = item.run(opts)
    except PreconditionError as exc:
        status, detail = "fail", f"precondition: {exc}"
    return {"id": item.id, "desc": item.desc, "status": status, "detail": detail}
