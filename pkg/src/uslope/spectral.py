"""Characteristic polynomials, Newton polygons and slope tables.

``charpoly`` returns ``det(1 - T M_N)`` for the ``N x N`` truncation of an
operator matrix.  Coefficients are exact Scalars; the heavy lifting is a
multi-modular computation over Z[sqrt2] (see ``_modcharpoly``), with a
division-free Berkowitz routine kept as an independent oracle.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._modcharpoly import charpoly_zsqrt2
from .opmatrices import (
    U_KINDS,
    W_KINDS,
    _kind,
    _param,
    op_matrix,
)
from .valuation import (
    INF,
    ONE,
    ZERO,
    PreconditionError,
    Scalar,
    as_scalar,
    format_val,
    profile,
    val2,
)

__all__ = [
    "CharPoly",
    "NewtonPolygon",
    "SlopeTable",
    "charpoly",
    "charpoly_of",
    "berkowitz",
    "newton_slopes",
    "slope_table",
    "r_invariance_check",
    "check_admissible",
    "finite_slope_extension_demo",
    "FiniteSlopeReport",
]


def check_admissible(kind: str, s, r) -> None:
    """Radius check for spectral work.

    ``U``-kinds: ``0 <= r < 1/2 + mu(s)/6`` (``r = 0`` is the formal basis,
    on which the truncations have the same characteristic polynomial).
    ``W``-kinds: ``0 <= r`` and ``12 r < 3 + lambda(s)``.
    """
    prof = profile(s)
    r = Fraction(r)
    if r < 0:
        raise PreconditionError(f"need r >= 0, got r = {format_val(r)}")
    if kind in U_KINDS:
        top = Fraction(1, 2) + prof.mu / 6
        if not r < top:
            raise PreconditionError(f"need r < 1/2 + mu(s)/6 = {format_val(top)}, got r = {format_val(r)}")
    else:
        if not 12 * r < 3 + prof.lam:
            raise PreconditionError(f"need 12r < 3 + lambda(s) = {format_val(3 + prof.lam)}, got 12r = {format_val(12 * r)}")


@dataclass(frozen=True)
class CharPoly:
    """``sum_k coeffs[k] T^k = det(1 - T M)``."""

    coeffs: tuple[Scalar, ...]
    kind: str | None = None
    s: Scalar | None = None
    r: Fraction | None = None

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and not self.coeffs[d]:
            d -= 1
        return d

    def __eq__(self, other):
        if not isinstance(other, CharPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = a + (ZERO,) * (n - len(a))
        b = b + (ZERO,) * (n - len(b))
        return a == b

    def __hash__(self):
        return hash(self.coeffs[: self.degree + 1])

    def format_text(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
            cs = str(c)
            if mono:
                if cs == "1":
                    cs = ""
                elif cs == "-1":
                    cs = "-"
                elif not c.is_rational() and c.a:
                    cs = f"({cs})"
            parts.append(cs + mono)
        out = " + ".join(parts) if parts else "0"
        return out.replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": None if self.s is None else self.s.to_json(),
                "r": None if self.r is None else format_val(self.r),
                "coeffs": [c.to_json() for c in self.coeffs]}


def _split(mat: list[list[Scalar]]):
    """Common denominator ``D`` and integer parts of ``D * mat``."""
    d = 1
    for row in mat:
        for x in row:
            if x._d != 1:
                d = d * x._d // math.gcd(d, x._d)
    xs = [[x._p * (d // x._d) for x in row] for row in mat]
    ys = [[x._q * (d // x._d) for x in row] for row in mat]
    return d, xs, ys


def charpoly_of(mat: list[list[Scalar]]) -> tuple[Scalar, ...]:
    """Coefficients of ``det(1 - T mat)`` for a square Scalar matrix."""
    n = len(mat)
    d, xs, ys = _split(mat)
    u, w = charpoly_zsqrt2(xs, ys)
    # det(X - A) = sum_k e_k X^k with A = d * mat; c_k = e_{n-k} / d^k
    out = []
    for k in range(n + 1):
        out.append(Scalar._raw(u[n - k], w[n - k], d ** k))
    return tuple(out)


def berkowitz(mat: list[list[Scalar]]) -> tuple[Scalar, ...]:
    """Division-free Berkowitz algorithm; returns ``det(1 - T mat)`` coefficients."""
    n = len(mat)
    if n == 0:
        return (ONE,)
    # vector of det(X - A_k) coefficients, highest first, grown one row at a time
    poly = [ONE, -as_scalar(mat[0][0])]
    for k in range(1, n):
        # A_{k+1} = [[A_k, C], [R, a]] with R row k, C column k
        a = mat[k][k]
        R = [mat[k][j] for j in range(k)]
        C = [mat[i][k] for i in range(k)]
        # Toeplitz column: 1, -a, -R C, -R A C, ..., -R A^{k-1} C
        col = [ONE, -a]
        vec = C
        for _ in range(k):
            col.append(-sum((R[j] * vec[j] for j in range(k)), ZERO))
            vec = [sum((mat[i][j] * vec[j] for j in range(k)), ZERO) for i in range(k)]
        new = []
        for i in range(k + 2):
            acc = ZERO
            for j in range(min(i, k) + 1):
                if i - j < len(col):
                    acc = acc + col[i - j] * poly[j]
            new.append(acc)
        poly = new
    # poly[k] is the coefficient of X^(n-k) in det(X - A), which is c_k
    return tuple(poly)


def charpoly(kind: str, s, N: int, r=0) -> CharPoly:
    """``det(1 - T M_N)`` for the closed-form matrix of ``kind`` at ``(s, r)``.

    Entries are formed at ``r`` itself when ``24 r`` is integral (so they
    stay in Q(sqrt2)); otherwise at ``r = 0``, which has the same answer.
    """
    kind = _kind(kind)
    s = _param(s)
    r = Fraction(r)
    if N < 1:
        raise PreconditionError("need N >= 1")
    check_admissible(kind, s, r)
    at = r if (24 * r).denominator == 1 else Fraction(0)
    if kind in W_KINDS:
        # lower triangular with diagonal (-1)^i
        coeffs = [ONE]
        for i in range(N):
            sign = -1 if i % 2 else 1
            coeffs = [a - b * sign for a, b in zip(coeffs + [ZERO], [ZERO] + coeffs)]
        return CharPoly(tuple(coeffs), kind, s, at)
    mat = op_matrix(kind, s, at, N).values()
    return CharPoly(charpoly_of(mat), kind, s, at)


# ---------------------------------------------------------------------------
# Newton polygons


@dataclass(frozen=True)
class NewtonPolygon:
    segments: tuple[tuple[Fraction, int], ...]
    vertices: tuple[tuple[int, Fraction], ...] = field(default=())

    def slopes(self) -> list[Fraction]:
        return [sl for sl, mult in self.segments for _ in range(mult)]

    def to_json(self) -> dict:
        return {"segments": [[format_val(sl), m] for sl, m in self.segments],
                "vertices": [[k, format_val(v)] for k, v in self.vertices]}


def newton_slopes(P) -> NewtonPolygon:
    """Lower convex hull of ``(k, v(c_k))``; slopes with multiplicities."""
    coeffs = P.coeffs if isinstance(P, CharPoly) else tuple(as_scalar(c) for c in P)
    pts = [(k, val2(c)) for k, c in enumerate(coeffs) if c]
    if not pts:
        raise ValueError("zero polynomial has no Newton polygon")
    if pts[-1][0] < 1:
        raise ValueError("Newton polygon needs degree >= 1")
    if pts[0][0] != 0:
        raise ValueError("constant term is zero")
    hull: list[tuple[int, Fraction]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it is on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    segs: list[tuple[Fraction, int]] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segs.append((Fraction(y2 - y1) / (x2 - x1), x2 - x1))
    return NewtonPolygon(tuple(segs), tuple(hull))


# ---------------------------------------------------------------------------
# slope tables


@dataclass
class SlopeTable:
    kind: str
    s: Scalar
    N: int
    bound: Fraction
    segments: list[tuple[Fraction, int]]
    check_segments: list[tuple[Fraction, int]]
    stable: bool

    def slopes(self) -> list[Fraction]:
        return [sl for sl, mult in self.segments for _ in range(mult)]

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": self.s.to_json(), "N": self.N, "bound": format_val(self.bound),
                "stable": self.stable, "segments": [[format_val(a), m] for a, m in self.segments],
                "check_N": 2 * self.N, "check_segments": [[format_val(a), m] for a, m in self.check_segments]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "s_a", "s_b", "N", "slope_num", "slope_den", "multiplicity", "stable"])
        for sl, mult in self.segments:
            w.writerow([self.kind, format_val(self.s.a), format_val(self.s.b), self.N,
                        sl.numerator, sl.denominator, mult, int(self.stable)])
        return buf.getvalue()


def _below(poly: NewtonPolygon, bound: Fraction) -> list[tuple[Fraction, int]]:
    return [(sl, m) for sl, m in poly.segments if sl <= bound]


def slope_table(kind: str, s, N: int, bound, r=0) -> SlopeTable:
    """Slopes ``<= bound`` at size ``N``, accepted only if size ``2N`` agrees.

    A slope at the edge of the truncation can shift or split as ``N`` grows,
    so the comparison is made on the full list of segments below ``bound``.
    """
    if N < 4:
        raise PreconditionError("slope_table needs N >= 4")
    s = as_scalar(s)
    bound = Fraction(bound)
    small = _below(newton_slopes(charpoly(kind, s, N, r)), bound)
    big = _below(newton_slopes(charpoly(kind, s, 2 * N, r)), bound)
    return SlopeTable(kind, s, N, bound, small, big, small == big)


def r_invariance_check(kind: str, s, N: int, r1, r2) -> bool:
    """Characteristic polynomials at two radii with ``12 r`` integral agree."""
    r1, r2 = Fraction(r1), Fraction(r2)
    for r in (r1, r2):
        if (12 * r).denominator != 1:
            raise PreconditionError(f"need 12r integral, got r = {format_val(r)}")
    return charpoly(kind, s, N, r1).coeffs == charpoly(kind, s, N, r2).coeffs


# ---------------------------------------------------------------------------
# finite-slope eigenvectors


def _to_mod(x: Fraction, mod: int) -> int:
    """A 2-adic integer given as a rational, reduced mod ``mod`` (a power of 2)."""
    den = x.denominator
    if den % 2 == 0:
        raise ValueError("not a 2-adic integer")
    return x.numerator * pow(den, -1, mod) % mod


def _hensel_root(poly: list[Fraction], slope: Fraction, bits: int) -> int:
    """Root of ``sum poly[k] X^k`` of valuation ``slope`` (simple), mod ``2^(bits + slope)``.

    After ``X = 2^slope Y`` and removal of the content, the reduction of
    the polynomial has ``Y = 1`` as a simple root, so Newton's iteration on
    2-adic integers converges quadratically from ``Y = 1``.
    """
    sl = int(slope)
    scaled = [c * Fraction(2) ** (sl * k) for k, c in enumerate(poly)]
    content = min(val2(c) for c in scaled if c)
    scaled = [c / Fraction(2) ** int(content) for c in scaled]
    mod = 1 << (bits + 8)
    q = [_to_mod(c, mod) for c in scaled]
    dq = [k * c % mod for k, c in enumerate(q)][1:]

    def ev(cs, y):
        acc = 0
        for c in reversed(cs):
            acc = (acc * y + c) % mod
        return acc

    if ev(q, 1) % 2 or not ev(dq, 1) % 2:
        raise ArithmeticError("eigenvalue is not a simple 2-adic root")
    y, prec = 1, 1
    while prec < bits + 8:
        prec = min(2 * prec, bits + 8)
        m = 1 << prec
        y = (y - ev(q, y) * pow(ev(dq, y), -1, m)) % m
    return y << sl


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(mat)
    a = [list(row) + [b] for row, b in zip(mat, rhs)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c])
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n] for row in a]


def _eigvec_vals(mat, lam: int) -> list:
    n = len(mat)
    shifted = [[mat[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
    x = _solve(shifted, [Fraction(1)] * n)
    vals = [val2(c) for c in x]
    base = min(vals)
    return [v - base if v != INF else INF for v in vals]


@dataclass
class FiniteSlopeReport:
    s: Scalar
    N: int
    r_small: Fraction
    r_big: Fraction
    slope: Fraction | None
    coeff_valuations: list = field(default_factory=list)
    small_sequence: list = field(default_factory=list)
    big_sequence: list = field(default_factory=list)
    cutoff: int | None = None
    tail_start: int | None = None
    increasing_tail: bool = False
    skipped: str | None = None

    def to_json(self) -> dict:
        fv = lambda seq: [None if v is None else format_val(v) for v in seq]
        return {"s": self.s.to_json(), "N": self.N, "r_small": format_val(self.r_small),
                "r_big": format_val(self.r_big),
                "slope": None if self.slope is None else format_val(self.slope),
                "coeff_valuations": fv(self.coeff_valuations), "small_sequence": fv(self.small_sequence),
                "big_sequence": fv(self.big_sequence), "cutoff": self.cutoff, "tail_start": self.tail_start,
                "increasing_tail": self.increasing_tail, "skipped": self.skipped}


def finite_slope_extension_demo(s, N: int, r_small, r_big, bits: int | None = None) -> FiniteSlopeReport:
    """Coordinates of a finite-slope eigenvector in two radii.

    Takes the smallest positive slope of the ``N x N`` truncation of ``U(s)``
    (which must be simple), finds the eigenvalue 2-adically, and computes
    the eigenvector ``sum alpha_i f^i`` by one exact inverse-iteration
    solve.  Valuations are kept only where working precisions ``bits`` and
    ``2 bits`` agree.  The reported sequences are ``v(alpha_i) - 12 r i``,
    the valuations of the coordinates on ``(2^(12 r) f)^i``, normalised so
    the smallest ``v(alpha_i)`` is 0; ``None`` marks a coordinate whose
    valuation is at least ``cutoff`` (zero to the working precision).
    Only rational ``s`` is supported.
    """
    s = _param(s)
    r_small, r_big = Fraction(r_small), Fraction(r_big)
    check_admissible("U", s, r_small)
    check_admissible("U", s, r_big)
    if r_small <= 0 or r_small > r_big:
        raise PreconditionError("need 0 < r_small <= r_big")
    if not s.is_rational():
        raise PreconditionError("finite_slope_extension_demo needs rational s")
    rep = FiniteSlopeReport(s, N, r_small, r_big, None)
    bits = 32 * N if bits is None else bits
    cp = charpoly("U", s, N, 0)
    poly = newton_slopes(cp)
    target = next(((sl, m) for sl, m in poly.segments if sl > 0), None)
    if target is None:
        rep.skipped = "no positive slope"
        return rep
    rep.slope = target[0]
    if target[1] != 1 or target[0].denominator != 1:
        rep.skipped = f"slope {format_val(target[0])} has multiplicity {target[1]}"
        return rep
    # det(X - M) = X^N c(1/X)
    rev = [c.a for c in reversed(cp.coeffs)]
    mat = [[x.a for x in row] for row in op_matrix("U", s, 0, N).values()]
    runs = []
    for b in (bits, 2 * bits):
        lam = _hensel_root(rev, rep.slope, b)
        runs.append(_eigvec_vals(mat, lam))
    lo, hi = runs
    cutoff = bits // 2
    vals = []
    for a, b in zip(lo, hi):
        vals.append(a if (a == b and a != INF and a < cutoff) else None)
    rep.coeff_valuations = vals
    rep.small_sequence = [None if v is None else v - 12 * r_small * i for i, v in enumerate(vals)]
    rep.big_sequence = [None if v is None else v - 12 * r_big * i for i, v in enumerate(vals)]
    rep.cutoff = cutoff
    # unresolved entries are >= cutoff, above every resolved one
    seq = [(i, v) for i, v in enumerate(rep.big_sequence) if v is not None]
    t = len(seq) - 1
    while t > 0 and seq[t - 1][1] < seq[t][1]:
        t -= 1
    rep.tail_start = seq[t][0] if seq else None
    rep.increasing_tail = r_small == r_big or len(seq) - t >= 2
    return rep
