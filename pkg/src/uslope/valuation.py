"""Exact 2-adic valuations over the field Q(sqrt2).

Every scalar in the package is an element ``a + b*sqrt2`` with ``a, b``
rational.  That field is small enough to be exact and large enough to
realise all three regimes of the distance-to-Z_2 invariant ``beta``:
negative (``1/2``), strictly positive and finite (``sqrt2``) and infinite
(any 2-adic integer).

Valuations are ``fractions.Fraction`` values, with ``math.inf`` standing in
for the valuation of zero.  ``Fraction`` and ``inf`` compare and add the
way one expects, so plain ``min``/``+`` work on them.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = [
    "INF",
    "PreconditionError",
    "Scalar",
    "SQRT2",
    "PadicProfile",
    "as_scalar",
    "v2_int",
    "v2_rat",
    "val2",
    "in_z2",
    "is_z2_unit",
    "nu_from_beta",
    "beta",
    "profile",
    "mu",
    "factorial_val",
    "product_val",
    "factorial_bounds_check",
    "product_window_check",
    "smalldisc_check",
    "format_val",
    "parse_rat",
]

INF = math.inf

Val = Union[Fraction, float]


class PreconditionError(ValueError):
    """An argument lies outside the region where an operation is defined."""


def v2_int(n: int) -> float | int:
    """2-adic valuation of an integer, ``inf`` for zero."""
    if n == 0:
        return INF
    return (n & -n).bit_length() - 1


def v2_rat(x) -> Val:
    x = Fraction(x)
    if x == 0:
        return INF
    return Fraction(v2_int(x.numerator) - v2_int(x.denominator))


def parse_rat(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, Rational)):
        return Fraction(text)
    return Fraction(str(text).strip())


# rational part must end at a sign or the end, so "10*sqrt2" cannot split as "1" + "0*sqrt2"
_SCALAR_RE = re.compile(r"(?:([+-]?\d+(?:/\d+)?)(?=[+-]|$))?(?:([+-]?)(?:(\d+(?:/\d+)?)\*)?sqrt2)?")


class Scalar:
    """An element ``a + b*sqrt2`` of Q(sqrt2), stored as ``(p + q*sqrt2)/d``.

    ``d > 0`` and ``gcd(p, q, d) == 1``; this keeps equality and hashing
    structural.
    """

    __slots__ = ("_p", "_q", "_d")

    def __init__(self, a=0, b=0):
        a = parse_rat(a)
        b = parse_rat(b)
        d = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        self._set(a.numerator * (d // a.denominator), b.numerator * (d // b.denominator), d)

    def _set(self, p: int, q: int, d: int) -> None:
        if d != 1:
            g = math.gcd(math.gcd(p, q), d)
            if g != 1:
                p //= g
                q //= g
                d //= g
        self._p, self._q, self._d = p, q, d

    @classmethod
    def _raw(cls, p: int, q: int, d: int = 1) -> "Scalar":
        obj = object.__new__(cls)
        if d < 0:
            p, q, d = -p, -q, -d
        obj._set(p, q, d)
        return obj

    @classmethod
    def parse(cls, text: str) -> "Scalar":
        """Parse ``"a"``, ``"a+b*sqrt2"``, ``"b*sqrt2"`` or ``"sqrt2"``."""
        if isinstance(text, Scalar):
            return text
        compact = str(text).replace(" ", "")
        m = _SCALAR_RE.fullmatch(compact)
        if not compact or m is None or re.search(r"\d\s+[\d/]|/\s+\d", str(text)):
            raise ValueError(f"cannot parse scalar {text!r}")
        a_txt, sign, b_txt = m.groups()
        has_root = compact.endswith("sqrt2")
        try:
            a = Fraction(a_txt) if a_txt else Fraction(0)
            b = Fraction(0)
            if has_root:
                b = Fraction(b_txt) if b_txt else Fraction(1)
                if sign == "-":
                    b = -b
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {text!r}") from None
        return cls(a, b)

    # components -----------------------------------------------------------
    @property
    def a(self) -> Fraction:
        return Fraction(self._p, self._d)

    @property
    def b(self) -> Fraction:
        return Fraction(self._q, self._d)

    def is_rational(self) -> bool:
        return self._q == 0

    def conj(self) -> "Scalar":
        return Scalar._raw(self._p, -self._q, self._d)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 2 b^2``."""
        return Fraction(self._p * self._p - 2 * self._q * self._q, self._d * self._d)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        if self._d == o._d:
            return Scalar._raw(self._p + o._p, self._q + o._q, self._d)
        return Scalar._raw(self._p * o._d + o._p * self._d,
                           self._q * o._d + o._q * self._d, self._d * o._d)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self._p, -self._q, self._d)

    def __sub__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        p1, q1, p2, q2 = self._p, self._q, o._p, o._q
        if q1 == 0 and q2 == 0:
            return Scalar._raw(p1 * p2, 0, self._d * o._d)
        return Scalar._raw(p1 * p2 + 2 * q1 * q2, p1 * q2 + q1 * p2, self._d * o._d)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        n = self._p * self._p - 2 * self._q * self._q
        if n == 0:
            raise ZeroDivisionError("inverse of zero scalar")
        # 1/((p+q r)/d) = d (p - q r) / (p^2 - 2 q^2)
        return Scalar._raw(self._d * self._p, -self._d * self._q, n)

    def __truediv__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparisons ----------------------------------------------------------
    def __eq__(self, other):
        o = as_scalar(other, strict=False)
        if o is None:
            return NotImplemented
        return self._p == o._p and self._q == o._q and self._d == o._d

    def __hash__(self):
        if self._q == 0:
            return hash(Fraction(self._p, self._d))
        return hash((self._p, self._q, self._d))

    def __bool__(self):
        return self._p != 0 or self._q != 0

    # display ----------------------------------------------------------------
    def __str__(self):
        a, b = self.a, self.b
        if b == 0:
            return str(a)
        bpart = "sqrt2" if abs(b) == 1 else f"{abs(b)}*sqrt2"
        if a == 0:
            return bpart if b > 0 else "-" + bpart
        return f"{a}{'+' if b > 0 else '-'}{bpart}"

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    def to_json(self) -> dict:
        out = {"a": _rat_str(self.a)}
        if self._q:
            out["b"] = _rat_str(self.b)
        return out

    @classmethod
    def from_json(cls, obj) -> "Scalar":
        return cls(Fraction(obj["a"]), Fraction(obj.get("b", "0")))


def _rat_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


ZERO = Scalar._raw(0, 0, 1)
ONE = Scalar._raw(1, 0, 1)
SQRT2 = Scalar._raw(0, 1, 1)


def as_scalar(x, strict: bool = True):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, int):
        return Scalar._raw(x, 0, 1)
    if isinstance(x, Rational):
        return Scalar._raw(x.numerator, 0, x.denominator)
    if strict and isinstance(x, str):
        return Scalar.parse(x)
    if strict:
        raise TypeError(f"cannot convert {type(x).__name__} to Scalar")
    return None


def format_val(v: Val) -> str:
    """Serialise a valuation: ``"num/den"`` or ``"inf"``."""
    if v == INF:
        return "inf"
    return _rat_str(Fraction(v))


# ---------------------------------------------------------------------------
# valuations


def val2(x) -> Val:
    """2-adic valuation normalised by ``v(2) = 1``.

    Since ``v(a)`` is an integer and ``v(b*sqrt2)`` is a half-integer, the two
    never tie and the valuation of the sum is simply the minimum.
    """
    x = as_scalar(x)
    if not x:
        return INF
    vd = v2_int(x._d)
    va = v2_int(x._p)
    vb = v2_int(x._q) + Fraction(1, 2)
    return Fraction(min(va, vb)) - vd


def mu(s) -> Val:
    """``min(v(s), 0)``."""
    return min(val2(s), Fraction(0))


def in_z2(x) -> bool:
    """Membership in Z_2 for a rational (reduced denominator odd)."""
    x = as_scalar(x)
    return x.is_rational() and x._d % 2 == 1


def is_z2_unit(x) -> bool:
    x = as_scalar(x)
    return in_z2(x) and val2(x) == 0


def nu_from_beta(b: Val) -> Fraction:
    """Piecewise transform of ``beta`` with breakpoints at the integers.

    ``nu = beta`` for ``beta <= 0``; on ``[n, n+1]`` it is the partial sum
    ``1/2 + ... + 1/2^n`` plus ``(beta - n)/2^(n+1)``; ``nu = 1`` at infinity.
    """
    if b == INF:
        return Fraction(1)
    b = Fraction(b)
    if b <= 0:
        return b
    n = math.floor(b)
    return (1 - Fraction(1, 2 ** n)) + (b - n) / 2 ** (n + 1)


def beta(x) -> Val:
    """``sup { v(x - n) : n in Z_2 }``, computed by the four-case rule."""
    x = as_scalar(x)
    a, b = x.a, x.b
    a_in = a.denominator % 2 == 1
    if b != 0:
        vb = v2_rat(b) + Fraction(1, 2)
        return vb if a_in else min(v2_rat(a), vb)
    return INF if a_in else v2_rat(a)


@dataclass(frozen=True)
class PadicProfile:
    v: Val
    beta: Val
    nu: Fraction
    mu: Val
    lam: Val

    def to_json(self) -> dict:
        return {k: format_val(getattr(self, k)) for k in ("v", "beta", "nu", "mu", "lam")}


def profile(x) -> PadicProfile:
    x = as_scalar(x)
    v = val2(x)
    b = beta(x)
    return PadicProfile(v=v, beta=b, nu=nu_from_beta(b), mu=min(v, Fraction(0)),
                        lam=min(val2(2 * x), Fraction(0)))


def factorial_val(m: int) -> int:
    """Legendre: ``v(m!) = floor(m/2) + floor(m/4) + ...``."""
    if m < 0:
        raise ValueError("factorial_val needs m >= 0")
    total, q = 0, m >> 1
    while q:
        total += q
        q >>= 1
    return total


def factorial_bounds_check(m: int) -> dict:
    """The three elementary bounds on ``v(m!)`` at a single ``m``.

    1. for ``m >= 1``: ``v(m!) <= m - 1``, with equality iff ``m`` is a power of 2;
    2. ``v(m!) >= (m - 1)/2``, with equality iff ``m`` is 1 or 3;
    3. for every ``n`` with ``m < 2^n`` (checked up to three values past the
       first), ``t = 2^n - m`` gives ``m - v(m!) >= n - t/2``.
    """
    v = factorial_val(m)
    out = {"m": m, "v": v}
    if m >= 1:
        power = m & (m - 1) == 0
        out["part1"] = v <= m - 1 and ((v == m - 1) == power)
    out["part2"] = 2 * v >= m - 1 and ((2 * v == m - 1) == (m in (1, 3)))
    n0 = m.bit_length() if m else 0
    out["part3"] = all(m - v >= n - Fraction(2 ** n - m, 2) for n in range(n0, n0 + 4))
    out["ok"] = all(out[k] for k in ("part1", "part2", "part3") if k in out)
    return out


def product_val(x, m: int, N: int) -> Val:
    """Valuation of ``prod_{t=1}^{N} (x + m + t)``, summed factor by factor."""
    x = as_scalar(x)
    total: Val = Fraction(0)
    for t in range(1, N + 1):
        total = total + val2(x + (m + t))
    return total


def product_window_check(x, m: int, N: int) -> dict:
    """Compare ``product_val`` with the window predicted from ``beta``/``nu``.

    Returns the computed valuation, ``N*nu`` and which parts of the window
    statement applied and held.
    """
    x = as_scalar(x)
    prof = profile(x)
    got = product_val(x, m, N)
    b, n = prof.beta, prof.nu
    checks = {}
    if b != INF and b <= 0:
        checks["part1"] = got == N * n
    elif b != INF:
        if N >= 2 and N & (N - 1) == 0 and N >= 2 ** math.ceil(b):
            checks["part2"] = got == N * n
        checks["part3"] = abs(got - N * n) < b
    else:
        checks["part4"] = got >= factorial_val(N)
    return {"value": got, "N_nu": N * n, "beta": b, "nu": n, "checks": checks,
            "ok": all(checks.values())}


def smalldisc_check(s, s_prime) -> bool:
    """Decide ``0 < (3 + nu(2s))/12 < 1/2 + mu(s')/6`` exactly.

    Raises PreconditionError unless ``v(s) > -2``, ``2s`` is not a 2-adic
    unit and ``v(s - s') >= 0``.
    """
    s = as_scalar(s)
    s_prime = as_scalar(s_prime)
    if not val2(s) > -2:
        raise PreconditionError(f"need v(s) > -2 (|s| < 4), got v(s) = {format_val(val2(s))}")
    if is_z2_unit(2 * s):
        raise PreconditionError("need 2s not in Z_2^x")
    if not val2(s - s_prime) >= 0:
        raise PreconditionError("need v(s - s') >= 0 (|s - s'| <= 1)")
    r = (3 + nu_from_beta(beta(2 * s))) / 12
    return 0 < r < Fraction(1, 2) + mu(s_prime) / 6
