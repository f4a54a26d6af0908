"""Kernel of ``U``: case split on ``s``, eta-column scans and explicit witnesses.

Writing ``F`` in the basis ``(2^(12 r) f)^j`` at the critical radius
``r = (3 + nu(2s))/12``, a form in the kernel of ``U`` satisfies
``a_i = -sum_j a_j eta_ij``.  The routines here compute the eta valuations
that control whether such ``a_i`` can tend to zero, and build the
witness ``(e_1 - W e_1)/2`` explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .opmatrices import W_KINDS, _kind, entry
from .qseries import FExpansion, QSeries, h_pow, standard
from .valuation import (
    INF,
    ZERO,
    PreconditionError,
    Scalar,
    as_scalar,
    factorial_val,
    format_val,
    in_z2,
    is_z2_unit,
    nu_from_beta,
    profile,
    beta as beta_of,
    v2_int,
    val2,
)

__all__ = [
    "CASES",
    "Classification",
    "classify",
    "UtilityReport",
    "nondecay_report",
    "lemma68_scan",
    "involution_check",
    "KernelWitness",
    "kernel_witness",
]

CASES = ("BetaNonpositive", "BetaFinitePositive", "SInZ2Generic", "WeightIn4N", "ExcludedUnit")


@dataclass(frozen=True)
class Classification:
    s: Scalar
    case: str
    r_critical: Fraction | None
    beta: object
    nu: Fraction | None
    shifted_s: Scalar | None = None
    shifted_case: str | None = None
    shifted_r_critical: Fraction | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"s": self.s.to_json(), "case": self.case,
               "r_critical": None if self.r_critical is None else format_val(self.r_critical),
               "beta": format_val(self.beta), "nu": None if self.nu is None else format_val(self.nu)}
        if self.shifted_s is not None:
            out.update({"shifted_s": self.shifted_s.to_json(), "shifted_case": self.shifted_case,
                        "shifted_r_critical": format_val(self.shifted_r_critical)})
        if self.note:
            out["note"] = self.note
        return out


def classify(s) -> Classification:
    """Case of ``s`` (with ``|s| < 4``) and the critical radius ``(3 + nu(2s))/12``.

    When ``2s`` is a 2-adic unit the untwisted argument does not apply; the
    returned ``shifted_s = s + 1/6`` is the parameter for the twist by
    ``h^s/E2`` and is classified as well.
    """
    s = as_scalar(s)
    if not val2(s) > -2:
        raise PreconditionError(f"need v(s) > -2 (|s| < 4), got v(s) = {format_val(val2(s))}")
    two_s = 2 * s
    b = beta_of(two_s)
    if is_z2_unit(two_s):
        s2 = s + Fraction(1, 6)
        inner = classify(s2)
        return Classification(s, "ExcludedUnit", None, b, None, s2, inner.case, inner.r_critical,
                              "2s is a 2-adic unit; use the weight-2 twist h^s/E2 at s'' = s + 1/6")
    nu = nu_from_beta(b)
    r = (3 + nu) / 12
    if b != INF:
        case = "BetaNonpositive" if b <= 0 else "BetaFinitePositive"
        return Classification(s, case, r, b, nu)
    six_s = 6 * s.a
    if six_s.denominator == 1 and six_s < 0 and six_s % 2 == 0:
        return Classification(s, "WeightIn4N", r, b, nu,
                              note="weight -12s lies in 4N; handled geometrically, no witness")
    return Classification(s, "SInZ2Generic", r, b, nu)


# ---------------------------------------------------------------------------
# column scans


class _ValTable:
    """``v(eta_ij)`` for one row, using prefix sums over the product factors."""

    def __init__(self, kind: str, i: int, s: Scalar, r: Fraction):
        self.kind, self.i, self.s, self.r = kind, i, s, r
        p, q, d = 6 * s._p, 6 * s._q, s._d
        vq = v2_int(q) + Fraction(1, 2) if q else INF
        vd = v2_int(d)
        lo, hi = i + 1, 3 * i
        pref = [Fraction(0)]
        self._inf_at = []
        for t in range(lo, hi + 1):
            v = min(v2_int(t * d + p), vq)
            if v == INF:
                self._inf_at.append(t)
                v = 0
            pref.append(pref[-1] + v - vd)
        self.lo, self.pref = lo, pref

    def __call__(self, j: int):
        i, s = self.i, self.s
        if j > i:
            return INF
        if j == i:
            return Fraction(0)
        lo_t, hi_t = i + 2 * j + 1, 2 * i + j - 1
        if any(lo_t <= t <= hi_t for t in self._inf_at):
            return INF
        lin = val2((j if self.kind == "W" else i) + 2 * s)
        if lin == INF:
            return INF
        d = i - j
        prod = self.pref[hi_t - self.lo + 1] - self.pref[lo_t - self.lo] if hi_t >= lo_t else 0
        return lin + prod + 4 * d - factorial_val(d) - 12 * self.r * d


@dataclass
class UtilityRow:
    n: int
    i: int
    N_i: int
    c2_i: Fraction
    v_eta_i1: object
    min_mid: object
    min_all: object
    cond_i: bool
    cond_ii: bool
    cond_iii: bool

    def to_json(self) -> dict:
        return {"n": self.n, "i": self.i, "v_eta_i1": format_val(self.v_eta_i1), "N_i": self.N_i,
                "c2_i": format_val(self.c2_i), "min_mid_valuations": format_val(self.min_mid),
                "min_all": format_val(self.min_all),
                "cond_i": self.cond_i, "cond_ii": self.cond_ii, "cond_iii": self.cond_iii}


@dataclass
class UtilityReport:
    s: Scalar
    kind: str
    case: str
    r_critical: Fraction
    c1: Fraction
    c3: Fraction
    j_max: int
    rows: list[UtilityRow] = field(default_factory=list)
    inconclusive: bool = False
    note: str = ""

    @property
    def ok(self) -> bool:
        c2 = [r.c2_i for r in self.rows]
        increasing = all(a < b for a, b in zip(c2, c2[1:]))
        return (not self.inconclusive and bool(self.rows) and increasing
                and all(r.cond_i and r.cond_ii and r.cond_iii for r in self.rows))

    def to_json(self) -> dict:
        return {"s": self.s.to_json(), "kind": self.kind, "case": self.case,
                "r_critical": format_val(self.r_critical), "c1": format_val(self.c1),
                "c3": format_val(self.c3), "j_max": self.j_max, "ok": self.ok,
                "inconclusive": self.inconclusive, "note": self.note,
                "rows": [r.to_json() for r in self.rows]}


def _row(kind, s, r, n, N_i, c2, c1, c3, j_max) -> UtilityRow:
    i = 2 ** n + 1
    vt = _ValTable(kind, i, s, r)
    v1 = vt(1)
    mid = [vt(j) for j in range(2, N_i + 1)]
    allv = [vt(j) for j in range(0, min(j_max, i) + 1)]
    min_mid = min(mid) if mid else INF
    min_all = min(allv)
    return UtilityRow(n, i, N_i, c2, v1, min_mid, min_all,
                      v1 <= c1, min_mid >= c2, min_all >= c3)


def _generic_schedule(s: Scalar, n_max: int):
    """``(n, m)`` pairs from the constant schedule for ``s`` in Z_2.

    For ``m = 1, 2, ...``: ``N = c2 = m``, ``M = v(prod_{t=0}^{2N-2}(3 + 6s + t))``;
    ``n`` must exceed every ``v(3 + 6s + t)`` (so that adding ``2^n`` leaves
    those valuations unchanged) and satisfy ``n - M >= c2``.
    """
    used = set()
    m = 1
    while True:
        terms = [3 + 6 * s + t for t in range(0, 2 * m - 1)]
        vals = [val2(x) for x in terms]
        if INF in vals:
            return
        M = sum(vals)
        n0 = int(max(vals)) + 1
        n1 = max(n0, math.ceil(m + M), 1)
        yield m, n1, used
        m += 1
        if n1 > n_max:
            return


def nondecay_report(s, n_max: int, j_max: int = 64, kind: str = "W") -> UtilityReport:
    """Check the three non-decay conditions on rows ``i = 2^n + 1``, ``n <= n_max``.

    Valuations are taken at the critical radius.  Constants follow the case
    of ``s``; for ``s`` in Z_2 the rows are picked by the increasing schedule
    among ``n`` with ``v(eta_{i1})`` in ``{0, 1}``.
    """
    kind = _kind(kind)
    if kind not in W_KINDS:
        raise ValueError("nondecay_report works with W or Wprime")
    if n_max < 2:
        raise PreconditionError("need n_max >= 2")
    s = as_scalar(s)
    cl = classify(s)
    if cl.case in ("ExcludedUnit", "WeightIn4N"):
        raise PreconditionError(f"nondecay_report does not apply to case {cl.case}")
    r = cl.r_critical
    b, nu = cl.beta, cl.nu
    if cl.case == "BetaNonpositive":
        rep = UtilityReport(s, kind, cl.case, r, Fraction(1), Fraction(0), j_max)
        for n in range(1, n_max + 1):
            rep.rows.append(_row(kind, s, r, n, n, Fraction(n + 1, 2), rep.c1, rep.c3, j_max))
        return rep
    if cl.case == "BetaFinitePositive":
        c1 = 2 * b - nu + 1
        c3 = min(Fraction(0), 1 - b - nu)
        rep = UtilityReport(s, kind, cl.case, r, c1, c3, j_max)
        for n in range(1, n_max + 1):
            rep.rows.append(_row(kind, s, r, n, n, Fraction(n + 1, 2) - nu - b, c1, c3, j_max))
        return rep
    rep = UtilityReport(s, kind, cl.case, r, Fraction(1), Fraction(0), j_max)
    for m, n1, used in _generic_schedule(s, n_max):
        found = None
        for n in range(n1, n_max + 1):
            if n in used:
                continue
            if _ValTable(kind, 2 ** n + 1, s, r)(1) in (0, 1):
                found = n
                break
        if found is None:
            rep.inconclusive = not rep.rows
            rep.note = f"schedule stopped at m = {m}: no n in [{n1}, {n_max}] with v(eta_i1) in {{0, 1}}"
            break
        used.add(found)
        rep.rows.append(_row(kind, s, r, found, m, Fraction(m), rep.c1, rep.c3, j_max))
    return rep


# ---------------------------------------------------------------------------
# the products f_n(u)


def lemma68_scan(u, n_max: int) -> dict:
    """Valuation of ``f_n(u) = prod_{tau=0}^{2^n-1} (2^n + u + tau)`` against ``v((2^n)!)``.

    Also replays the closed form ``v((2^n - 1)!) + v(2^(n+1) + u - u_n)``
    with ``0 < u_n <= 2^n``, ``u = u_n mod 2^n``.
    """
    u = as_scalar(u)
    if not in_z2(u):
        raise PreconditionError("lemma68_scan needs u in Z_2")
    ua = u.a
    rows = []
    for n in range(0, n_max + 1):
        size = 2 ** n
        total = Fraction(0)
        for tau in range(size):
            total += val2(ua + size + tau)
        base = factorial_val(size)
        offset = total - base if total != INF else INF
        un = ua.numerator * pow(ua.denominator, -1, size) % size if size > 1 else 0
        un = un or size
        predicted = factorial_val(size - 1) + val2(2 * size + ua - un)
        rows.append({"n": n, "v": total, "offset": offset,
                     "class": offset if offset in (0, 1) else "other",
                     "predicted": predicted, "replay_ok": predicted == total})
    return {"u": u, "rows": rows,
            "ok": any(r["offset"] in (0, 1) for r in rows[1:]) and all(r["replay_ok"] for r in rows)}


# ---------------------------------------------------------------------------
# W as an involution


def involution_check(s, N: int, r=0, kind: str = "W") -> bool:
    """``W_N(s)^2 == Id`` exactly.

    Every product ``eta_ik eta_kj`` carries the same power ``2^(12 r (j - i))``,
    so the square is computed on the r-free coefficients and the radius only
    enters through the admissibility test.
    """
    kind = _kind(kind)
    if kind not in W_KINDS:
        raise ValueError("involution_check works with W or Wprime")
    s = as_scalar(s)
    prof = profile(s)
    r = Fraction(r)
    if not 12 * r < 3 + prof.lam:
        raise PreconditionError(f"need 12r < 3 + lambda(s) = {format_val(3 + prof.lam)}")
    c = [[entry(kind, i, j, s, r).coef if j <= i else ZERO for j in range(N)] for i in range(N)]
    for i in range(N):
        for j in range(i + 1):
            acc = ZERO
            for k in range(j, i + 1):
                if c[i][k] and c[k][j]:
                    acc = acc + c[i][k] * c[k][j]
            if acc != (1 if i == j else 0):
                return False
    return True


# ---------------------------------------------------------------------------
# explicit witnesses


class _Zs:
    """Exact arithmetic in Z[sqrt2] on pairs, or in Z when ``rational``."""

    def __init__(self, rational: bool):
        self.rational = rational

    def mul(self, a, b):
        if self.rational:
            return a * b
        return (a[0] * b[0] + 2 * a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def div(self, a, b):
        if self.rational:
            qq, rem = divmod(a, b)
            if rem:
                raise ArithmeticError("inexact division")
            return qq
        nrm = b[0] * b[0] - 2 * b[1] * b[1]
        x = a[0] * b[0] - 2 * a[1] * b[1]
        y = a[1] * b[0] - a[0] * b[1]
        if x % nrm or y % nrm:
            raise ArithmeticError("inexact division")
        return (x // nrm, y // nrm)

    def add(self, a, b):
        return a + b if self.rational else (a[0] + b[0], a[1] + b[1])

    def scale(self, a, k: int):
        return a * k if self.rational else (a[0] * k, a[1] * k)

    def is_zero(self, a) -> bool:
        return a == 0 if self.rational else a == (0, 0)

    def lin(self, t: int, k: int, a: int, b: int, d: int):
        """``d (t + k s)`` for ``s = (a + b sqrt2)/d``."""
        return t * d + k * a if self.rational else (t * d + k * a, k * b)


def _row_numerators(kind: str, i: int, s: Scalar, Z: _Zs) -> list:
    """``Z_ij`` for ``1 <= j < i`` with ``eta_ij(s, 0) = 3 (-1)^i Z_ij / ((i-1)! d^(i-1))``."""
    a, b, d = s._p, s._q, s._d
    zero = Z.lin(0, 0, 0, 0, 1)

    def direct(j):
        lin = Z.lin(j if kind == "W" else i, 2, a, b, d)
        val = Z.scale(lin, 2 ** (4 * (i - j)) * (math.factorial(i - 1) // math.factorial(i - j)) * d ** (j - 1))
        for t in range(i + 2 * j + 1, 2 * i + j):
            val = Z.mul(val, Z.lin(t, 6, a, b, d))
        return val

    out = [zero, direct(1)] if i > 1 else [zero]
    for j in range(1, i - 1):
        cur = out[-1]
        if kind == "W":
            num_lin, den_lin = Z.lin(j + 1, 2, a, b, d), Z.lin(j, 2, a, b, d)
        else:
            num_lin = den_lin = None
        den1, den2 = Z.lin(i + 2 * j + 1, 6, a, b, d), Z.lin(i + 2 * j + 2, 6, a, b, d)
        dens = [den1, den2] + ([den_lin] if den_lin is not None else [])
        if Z.is_zero(cur) or any(Z.is_zero(x) for x in dens):
            out.append(direct(j + 1))
            continue
        val = Z.scale(cur, (i - j) * d)
        val = Z.mul(val, Z.lin(2 * i + j, 6, a, b, d))
        if num_lin is not None:
            val = Z.mul(val, num_lin)
        den = Z.mul(den1, den2)
        if den_lin is not None:
            den = Z.mul(den, den_lin)
        val = Z.div(val, Z.scale(den, 16) if Z.rational else Z.mul(den, (16, 0)))
        out.append(val)
    return out


def _to_scalar(z, Z: _Zs, den: int) -> Scalar:
    if Z.rational:
        return Scalar._raw(z, 0, den)
    return Scalar._raw(z[0], z[1], den)


@dataclass
class KernelWitness:
    s: Scalar
    kind: str
    N: int
    b: FExpansion
    residual_max_order: int
    residual_zero: bool | None
    r_critical: Fraction | None
    r_alt: Fraction
    rows: list[dict]
    sigma_window: tuple | None
    sigma_prime_increasing: bool
    odd_support: bool | None = None
    odd_support_prec: int | None = None

    def to_json(self) -> dict:
        fv = format_val
        return {"s": self.s.to_json(), "kind": self.kind, "N": self.N,
                "b_head": [c.to_json() for c in self.b.coeffs[:8]],
                "residual_zero": self.residual_zero, "residual_max_order": self.residual_max_order,
                "r_critical": None if self.r_critical is None else fv(self.r_critical),
                "r_alt": fv(self.r_alt),
                "rows": [{k: (fv(v) if isinstance(v, (Fraction, float)) else v) for k, v in row.items()}
                         for row in self.rows],
                "sigma_window": None if self.sigma_window is None else [fv(x) for x in self.sigma_window],
                "sigma_prime_increasing": self.sigma_prime_increasing,
                "odd_support": self.odd_support, "odd_support_prec": self.odd_support_prec}


def kernel_witness(s, N: int, r_alt=Fraction(1, 12), kind: str = "W", check_residual: bool = True,
                   odd_prec: int | None = None) -> KernelWitness:
    """``F = (e_1 - W_N e_1)/2`` with its exact residual and valuation sequences.

    ``b_i`` are the coefficients of ``F`` on plain powers ``f^i`` (so
    ``b_1 = 1``, ``b_i = -eta_i1/2``).  Along ``i = 2^n + 1 < N`` the report
    lists ``sigma(i) = v(b_i) - 12 r_critical i`` and
    ``sigma'(i) = v(b_i) - 12 r_alt i``, the valuations of the coordinates
    on ``(2^(12 r) f)^i`` at the two radii.
    """
    kind = _kind(kind)
    if kind not in W_KINDS:
        raise ValueError("kernel_witness works with W or Wprime")
    s = as_scalar(s)
    if N < 8:
        raise PreconditionError("kernel_witness needs N >= 8")
    cl = classify(s)
    if cl.case == "ExcludedUnit":
        raise PreconditionError("kernel_witness does not apply when 2s is a 2-adic unit")
    r_alt = Fraction(r_alt)
    Z = _Zs(s.is_rational())
    d = s._d
    # column 1 of W_N via the row numerators Z_i1
    col = [ZERO, Scalar(-1)]
    rows_cache = {}
    for i in range(2, N):
        if check_residual:
            rows_cache[i] = _row_numerators(kind, i, s, Z)
            z1 = rows_cache[i][1]
        else:
            z1 = _row_numerators_first(kind, i, s, Z)
        sign = -1 if i % 2 else 1
        col.append(_to_scalar(Z.scale(z1, 3 * sign), Z, math.factorial(i - 1) * d ** (i - 1)))
    b = [ZERO, Scalar(1)] + [-c / 2 for c in col[2:]]
    residual_zero = None
    max_order = 0
    if check_residual:
        residual_zero = True
        L = math.factorial(N - 1) * d ** (N - 1)
        # w_j = L * eta_j1
        w = [None, Z.scale(Z.lin(-1, 0, 0, 0, 1), L)]
        for j in range(2, N):
            sign = -1 if j % 2 else 1
            w.append(Z.scale(rows_cache[j][1], 3 * sign * (math.factorial(N - 1) // math.factorial(j - 1)) * d ** (N - j)))
        for i in range(2, N):
            acc = Z.scale(w[i], math.factorial(i - 1) * d ** (i - 1))
            row = rows_cache[i]
            tot = Z.lin(0, 0, 0, 0, 1)
            for j in range(1, i):
                tot = Z.add(tot, Z.mul(row[j], w[j]))
            acc = Z.add(acc, Z.scale(tot, 3))
            if not Z.is_zero(acc):
                residual_zero = False
                break
            max_order = i
    # valuation sequences along i = 2^n + 1
    rows = []
    r_c = cl.r_critical
    n = 1
    while 2 ** n + 1 < N:
        i = 2 ** n + 1
        vb = val2(b[i])
        row = {"n": n, "i": i, "v_b": vb}
        if r_c is not None:
            row["sigma"] = vb - 12 * r_c * i
        row["sigma_prime"] = vb - 12 * r_alt * i
        rows.append(row)
        n += 1
    window = None
    if r_c is not None and rows:
        sig = [row["sigma"] for row in rows]
        window = (min(sig), max(sig))
    sp = [row["sigma_prime"] for row in rows if row["n"] >= 2]
    increasing = all(x < y for x, y in zip(sp, sp[1:])) and len(sp) >= 2
    wit = KernelWitness(s, kind, N, FExpansion(tuple(b)), max_order, residual_zero, r_c, r_alt,
                        rows, window, increasing)
    if odd_prec:
        wit.odd_support = untwisted_odd_support(wit, odd_prec)
        wit.odd_support_prec = odd_prec
    return wit


def _row_numerators_first(kind: str, i: int, s: Scalar, Z: _Zs):
    a, b, d = s._p, s._q, s._d
    lin = Z.lin(1 if kind == "W" else i, 2, a, b, d)
    val = Z.scale(lin, 2 ** (4 * (i - 1)))
    for t in range(i + 3, 2 * i + 1):
        val = Z.mul(val, Z.lin(t, 6, a, b, d))
    return val


def untwisted_q_expansion(wit: KernelWitness, prec: int) -> QSeries:
    """``G = h^(-s) F`` (times ``E2`` for the primed twist) as a q-series."""
    if prec > len(wit.b.coeffs):
        raise PreconditionError("prec exceeds the witness length")
    F = FExpansion(wit.b.coeffs[:prec]).resum(prec)
    G = h_pow(-wit.s, prec) * F
    if wit.kind == "Wprime":
        G = standard("e2", prec) * G
    return G


def untwisted_odd_support(wit: KernelWitness, prec: int) -> bool:
    G = untwisted_q_expansion(wit, prec)
    return all(not c for c in G.coeffs[0::2])
