"""Closed-form matrices of the twisted ``U`` and ``W`` operators.

The operators act on weight-0 functions written in the basis
``e_j = (2^(12 r) f)^j``.  Every entry factors as an element of Q(sqrt2)
times a power of two whose exponent is ``12 r (j - i)``; keeping that
power symbolic (:class:`MatEntry`) means an irrational-looking radius never
pushes the arithmetic outside Q(sqrt2).

Four kinds are supported: ``U`` and ``W`` for the twist by ``h^s`` and
their primed versions ``Uprime``/``Wprime`` for the twist by ``h^s/E2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import _intpoly as ip
from .qseries import _f_power_ints, _solve_f_ints, _combine_f_ints, _standard_ints
from .valuation import (
    INF,
    ZERO,
    PreconditionError,
    Scalar,
    as_scalar,
    format_val,
    profile,
    v2_int,
    val2,
)

__all__ = [
    "KINDS",
    "MatEntry",
    "OpMatrix",
    "entry",
    "entry_valuation",
    "op_matrix",
    "direct_matrix",
    "valuation_bound",
    "valuation_bounds_report",
    "BoundsReport",
    "comb_identity_check",
    "comb_identity_sides",
    "interpolation_check",
    "oracle_sweep",
    "check_u_admissible",
    "check_w_admissible",
]

KINDS = ("U", "W", "Uprime", "Wprime")
U_KINDS = ("U", "Uprime")
W_KINDS = ("W", "Wprime")


def _kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    return kind


def _param(s) -> Scalar:
    s = as_scalar(s)
    if not val2(s) > -3:
        raise PreconditionError(f"need v(s) > -3 (|s| < 8), got v(s) = {format_val(val2(s))}")
    return s


@dataclass(frozen=True)
class MatEntry:
    """The number ``coef * 2^exp2``."""

    coef: Scalar
    exp2: Fraction = Fraction(0)

    @property
    def valuation(self):
        v = val2(self.coef)
        return v if v == INF else v + self.exp2

    def is_zero(self) -> bool:
        return not self.coef

    def __mul__(self, other: "MatEntry") -> "MatEntry":
        return MatEntry(self.coef * other.coef, self.exp2 + other.exp2)

    def __add__(self, other: "MatEntry") -> "MatEntry":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        diff = self.exp2 - other.exp2
        if diff.denominator != 1:
            raise ValueError("cannot add entries whose exponents differ by a non-integer")
        if diff >= 0:
            return MatEntry(self.coef * 2 ** int(diff) + other.coef, other.exp2)
        return MatEntry(self.coef + other.coef * 2 ** int(-diff), self.exp2)

    def value(self) -> Scalar:
        """The entry as a Scalar; needs ``2 * exp2`` to be an integer."""
        e = self.exp2
        if (2 * e).denominator != 1:
            raise ValueError(f"2^{e} is not in Q(sqrt2)")
        k = math.floor(e)
        out = self.coef * (Fraction(2) ** k)
        if e != k:
            out = out * Scalar(0, 1)
        return out

    def to_json(self) -> dict:
        return {"coef": self.coef.to_json(), "exp2": format_val(self.exp2)}


_ZERO_ENTRY = MatEntry(ZERO, Fraction(0))


def _affine_product(start: int, n: int, k: int, s: Scalar) -> tuple[int, int, int]:
    """``prod_{t=0}^{n-1} (start + t + k s)`` as ``(X, Y, D)`` meaning ``(X + Y sqrt2)/D``."""
    p, q, d = s._p * k, s._q * k, s._d
    x, y = 1, 0
    for t in range(start, start + n):
        a = t * d + p
        if q:
            x, y = x * a + 2 * y * q, x * q + y * a
        else:
            x, y = x * a, y * a
    return x, y, d ** n


def _affine_val(start: int, n: int, k: int, s: Scalar):
    """Valuation of the same product, summed factor by factor."""
    p, q, d = s._p * k, s._q * k, s._d
    vq = v2_int(q) + Fraction(1, 2) if q else INF
    vd = v2_int(d)
    total = Fraction(0)
    for t in range(start, start + n):
        va = v2_int(t * d + p)
        v = min(va, vq)
        if v == INF:
            return INF
        total += v - vd
    return total


def _shape(kind: str, i: int, j: int) -> str:
    """``zero``, ``diag`` or ``gen`` for the position ``(i, j)``."""
    if kind in U_KINDS:
        if 2 * i < j:
            return "zero"
        return "diag" if 2 * i == j else "gen"
    if i < j:
        return "zero"
    return "diag" if i == j else "gen"


def _prefactor(kind: str, i: int, j: int, s: Scalar) -> tuple[Scalar, int, Fraction, int, int, int]:
    """Pieces of a generic entry.

    Returns ``(linear, 2-power, rational constant, product start, length, multiplier)``
    so that the entry is ``linear * const * 2^pow * prod_{t}(start + t + mult*s)``.
    """
    if kind in U_KINDS:
        d = 2 * i - j
        if kind == "U":
            lin, const = j + 2 * s, Fraction(3, 2 * math.factorial(d))
        else:
            lin, const = i + s, Fraction(3, math.factorial(d))
        return lin, 8 * i - 4 * j, const, 2 * j - i + 1, d - 1, 3
    d = i - j
    lin = (j if kind == "W" else i) + 2 * s
    sign = -1 if i % 2 else 1
    return lin, 4 * d, Fraction(3 * sign, math.factorial(d)), i + 2 * j + 1, d - 1, 6


def entry(kind: str, i: int, j: int, s, r=0) -> MatEntry:
    """Closed-form matrix entry at row ``i``, column ``j``.

    Zero patterns: ``U``-kinds vanish for ``2i < j``, ``W``-kinds for ``i < j``.
    """
    kind = _kind(kind)
    s = _param(s)
    if i < 0 or j < 0:
        raise ValueError("indices must be nonnegative")
    r = Fraction(r)
    shape = _shape(kind, i, j)
    if shape == "zero":
        return _ZERO_ENTRY
    exp2 = 12 * r * (j - i)
    if shape == "diag":
        if kind in U_KINDS:
            return MatEntry(Scalar(1), exp2)
        return MatEntry(Scalar(-1 if i % 2 else 1), exp2)
    lin, pw, const, start, n, k = _prefactor(kind, i, j, s)
    x, y, dd = _affine_product(start, n, k, s)
    coef = lin * Scalar._raw(x, y, dd) * (const * Fraction(2) ** pw)
    return MatEntry(coef, exp2)


def entry_valuation(kind: str, i: int, j: int, s, r=0):
    """``v`` of :func:`entry`, obtained additively from the factors.

    Cheap even for very large indices since no big product is formed.
    """
    kind = _kind(kind)
    s = _param(s)
    r = Fraction(r)
    shape = _shape(kind, i, j)
    if shape == "zero":
        return INF
    exp2 = 12 * r * (j - i)
    if shape == "diag":
        return exp2
    lin, pw, const, start, n, k = _prefactor(kind, i, j, s)
    vl = val2(lin)
    vp = _affine_val(start, n, k, s)
    if vl == INF or vp == INF:
        return INF
    vc = v2_int(const.numerator) - v2_int(const.denominator)
    return vl + vp + vc + pw + exp2


# ---------------------------------------------------------------------------
# matrices


@dataclass
class OpMatrix:
    kind: str
    s: Scalar
    r: Fraction
    size: int
    entries: list[list[MatEntry]] = field(repr=False)

    def __getitem__(self, ij) -> MatEntry:
        i, j = ij
        return self.entries[i][j]

    def values(self) -> list[list[Scalar]]:
        """Entries as Scalars (requires ``24 r`` integral)."""
        return [[e.value() if e.coef else ZERO for e in row] for row in self.entries]

    def coefs(self) -> list[list[Scalar]]:
        return [[e.coef for e in row] for row in self.entries]

    def to_json(self) -> dict:
        items = []
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                if e.coef:
                    items.append({"i": i, "j": j, **e.to_json()})
        return {"kind": self.kind, "s": self.s.to_json(), "r": format_val(self.r),
                "size": self.size, "entries": items}


def op_matrix(kind: str, s, r, size: int) -> OpMatrix:
    """The ``size x size`` principal truncation from the closed forms."""
    kind = _kind(kind)
    s = _param(s)
    r = Fraction(r)
    rows = [[entry(kind, i, j, s, r) for j in range(size)] for i in range(size)]
    return OpMatrix(kind, s, r, size, rows)


# ---------------------------------------------------------------------------
# q-expansion oracle


@lru_cache(maxsize=4)
def _e2_ints(prec: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    e2 = list(_standard_ints("e2", prec))
    return tuple(e2), tuple(ip.inv(e2, prec))


def _oracle_column(kind: str, m: int, j: int, prec: int, rows: int) -> list[int]:
    powers = _f_power_ints(prec)
    phi = list(powers[2 * m + j]) if 2 * m + j < prec else [0] * prec
    primed = kind in ("Uprime", "Wprime")
    if primed:
        e2, e2inv = _e2_ints(prec)
        phi = ip.mul(list(e2), phi, prec)
    if kind in U_KINDS:
        out = phi[::2]
        shift = m
    else:
        out = [-c if n % 2 else c for n, c in enumerate(phi)]
        shift = 2 * m
    n = len(out)
    if primed:
        out = ip.mul(list(_e2_ints(prec)[1][:n]), out, n)
    coeffs = _solve_f_ints(out, n)
    if any(coeffs[:shift]):
        raise ArithmeticError(f"column {j} is not divisible by f^{shift}")
    col = coeffs[shift:shift + rows]
    if len(col) < rows:
        raise PreconditionError("precision too small for the requested size")
    return col


def direct_matrix(kind: str, m: int, size: int, prec: int | None = None, check: bool = True) -> OpMatrix:
    """Matrix at ``s = m`` (an integer), ``r = 0``, computed from q-expansions.

    Column ``j`` is the expansion in powers of ``f`` of ``f^(-m) U(f^(2m+j))``
    (``U``-kinds) or ``f^(-2m) W(f^(2m+j))`` (``W``-kinds), with an ``E2``
    factor inside and ``1/E2`` outside for the primed kinds.
    """
    kind = _kind(kind)
    if m < 0 or int(m) != m:
        raise PreconditionError("direct_matrix needs an integer m >= 0")
    m = int(m)
    need = 2 * (size + 2 * m) + 8
    prec = need if prec is None else prec
    if prec < need:
        raise PreconditionError(f"need prec >= 2(size + 2m) + 8 = {need}, got {prec}")
    cols = [_oracle_column(kind, m, j, prec, size) for j in range(size)]
    if check:
        _round_trip(kind, m, cols, prec)
    rows = [[MatEntry(Scalar(cols[j][i])) if cols[j][i] else _ZERO_ENTRY for j in range(size)]
            for i in range(size)]
    return OpMatrix(kind, Scalar(m), Fraction(0), size, rows)


def _round_trip(kind: str, m: int, cols: list[list[int]], prec: int) -> None:
    # Re-sum the first column and compare with the q-expansion it came from.
    if kind not in ("U", "W") or not cols:
        return
    shift = m if kind == "U" else 2 * m
    n = (prec + 1) // 2 if kind == "U" else prec
    vec = [0] * shift + list(cols[0])
    vec = (vec + [0] * n)[:n]
    series = _combine_f_ints(vec, n)
    phi = _f_power_ints(prec)[2 * m]
    want = phi[::2] if kind == "U" else [-c if k % 2 else c for k, c in enumerate(phi)]
    lim = len(cols[0]) + shift
    if series[:lim] != list(want[:lim]):
        raise ArithmeticError("round-trip failure: precision insufficient")


def oracle_sweep(kind: str, m_values, size: int) -> dict:
    """Compare closed forms with :func:`direct_matrix` on ``size x size`` blocks."""
    out = {"kind": kind, "size": size, "ok": True, "first_mismatch": None, "checked": 0}
    for m in m_values:
        oracle = direct_matrix(kind, m, size)
        for i in range(size):
            for j in range(size):
                e = entry(kind, i, j, m, 0)
                out["checked"] += 1
                if e.value() != oracle[i, j].coef:
                    out["ok"] = False
                    out["first_mismatch"] = {"m": m, "i": i, "j": j, "closed": str(e.value()),
                                             "oracle": str(oracle[i, j].coef)}
                    return out
    return out


def interpolation_check(kind: str, i: int, j: int, m_list) -> dict:
    """Closed form versus oracle at ``(i, j)`` for each integer ``m``."""
    kind = _kind(kind)
    size = max(i, j) + 1
    for m in m_list:
        if m < 0:
            raise PreconditionError("interpolation_check needs m >= 0")
        closed = entry(kind, i, j, m, 0).value()
        oracle = _cached_oracle(kind, int(m), size)[i][j]
        if closed != oracle:
            return {"ok": False, "first_failure": m, "closed": str(closed), "oracle": str(oracle)}
    return {"ok": True, "first_failure": None}


@lru_cache(maxsize=32)
def _cached_oracle(kind: str, m: int, size: int):
    mat = direct_matrix(kind, m, max(size, 16))
    return [[e.coef for e in row] for row in mat.entries]


# ---------------------------------------------------------------------------
# valuation bounds


def check_u_admissible(s, r) -> None:
    s = as_scalar(s)
    r = Fraction(r)
    top = Fraction(1, 2) + profile(s).mu / 6
    if not 0 < r < top:
        raise PreconditionError(f"need 0 < r < 1/2 + mu(s)/6 = {format_val(top)}, got r = {format_val(r)}")


def check_w_admissible(s, r) -> None:
    s = as_scalar(s)
    r = Fraction(r)
    lam = profile(s).lam
    if not 12 * r < 3 + lam:
        raise PreconditionError(f"need 12r < 3 + lambda(s) = {format_val(3 + lam)}, got 12r = {format_val(12 * r)}")


def valuation_bound(kind: str, i: int, j: int, s, r):
    """Closed-form lower bound on ``v(entry)``; ``None`` where none is claimed."""
    prof = profile(s)
    r = Fraction(r)
    if kind in U_KINDS:
        if 2 * i < j:
            return None
        return (3 + prof.mu - 6 * r) * (2 * i - j) + 6 * r * j
    if i <= j:
        return None
    return (3 - 12 * r + prof.lam) * (i - j) + 1


@dataclass
class BoundsReport:
    kind: str
    s: Scalar
    r: Fraction
    size: int
    checked: int = 0
    violations: list = field(default_factory=list)
    epsilon: Fraction | None = None
    epsilon_in_range: bool | None = None
    margin_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.margin_violations

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": self.s.to_json(), "r": format_val(self.r), "size": self.size,
                "checked": self.checked, "ok": self.ok,
                "violations": [[i, j, format_val(a), format_val(b)] for i, j, a, b in self.violations],
                "epsilon": None if self.epsilon is None else format_val(self.epsilon),
                "epsilon_in_range": self.epsilon_in_range,
                "margin_violations": [[i, j, format_val(a), format_val(b)] for i, j, a, b in self.margin_violations]}


def valuation_bounds_report(kind: str, s, r, size: int, epsilon=None) -> BoundsReport:
    """Check the entrywise lower bound on a ``size x size`` block.

    For ``U``-kinds, ``epsilon`` (default ``min(r, 1/2 + mu/6 - r)/2``)
    also triggers the factorisation margin: ``v(u_ij) - 12 eps i`` must be
    at least ``(2i-j)(3+mu-6r-6eps) + 6j(r-eps)``, itself nonnegative.
    """
    kind = _kind(kind)
    s = _param(s)
    r = Fraction(r)
    if kind in U_KINDS:
        check_u_admissible(s, r)
    else:
        check_w_admissible(s, r)
    rep = BoundsReport(kind, s, r, size)
    prof = profile(s)
    if kind in U_KINDS:
        room = min(r, Fraction(1, 2) + prof.mu / 6 - r)
        eps = room / 2 if epsilon is None else Fraction(epsilon)
        rep.epsilon = eps
        rep.epsilon_in_range = 0 < eps < room
    for i in range(size):
        for j in range(size):
            bound = valuation_bound(kind, i, j, s, r)
            if bound is None:
                continue
            v = entry_valuation(kind, i, j, s, r)
            rep.checked += 1
            if v < bound:
                rep.violations.append((i, j, v, bound))
            if rep.epsilon is not None:
                eps = rep.epsilon
                mid = (2 * i - j) * (3 + prof.mu - 6 * r - 6 * eps) + 6 * j * (r - eps)
                lhs = v - 12 * eps * i
                if not (lhs >= mid and mid >= 0):
                    rep.margin_violations.append((i, j, lhs, mid))
    return rep


# ---------------------------------------------------------------------------
# the binomial-sum identity behind W^2 = id


@lru_cache(maxsize=None)
def _fac(n: int) -> int:
    return math.factorial(n)


def comb_identity_sides(i: int, j: int) -> tuple[Fraction, Fraction]:
    if j < 1 or i < j + 1:
        raise ValueError("need j >= 1 and i >= j + 1")
    f = _fac
    lhs = sum(Fraction(3 * f(2 * a + j - 1) * j * f(2 * i - 2 * a),
                       f(a - j) * f(a + 2 * j) * f(i - a - 1) * f(i - a + 2))
              for a in range(j, i))
    rhs = Fraction(f(2 * i + j) * (j + 1), f(i - j - 1) * f(i + 2 * j + 2))
    return lhs, rhs


def comb_identity_check(i: int, j: int) -> bool:
    lhs, rhs = comb_identity_sides(i, j)
    return lhs == rhs
