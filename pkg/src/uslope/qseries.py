"""Truncated q-expansions over Q(sqrt2) and the operators U, V, W, theta.

A :class:`QSeries` knows its precision: ``coeffs[n]`` is the coefficient
of ``q^n`` for ``0 <= n < prec`` and nothing is claimed beyond that.
Products are truncated to the smaller precision, ``U`` halves it and ``V``
doubles it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import _intpoly as ip
from .valuation import (
    INF,
    ONE,
    ZERO,
    PreconditionError,
    Scalar,
    as_scalar,
    format_val,
    val2,
)

__all__ = [
    "QSeries",
    "FExpansion",
    "mul",
    "invert",
    "binom_pow",
    "binom_pow_sum",
    "hecke",
    "U",
    "V",
    "W",
    "theta",
    "standard",
    "STANDARD_NAMES",
    "h_pow",
    "f_powers",
    "expand_in_f",
    "c_coeff",
    "verify_identities",
    "IdentityCheck",
    "IdentityReport",
]


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        if v != 1:
            out = out * v // math.gcd(out, v)
    return out


class QSeries:
    """``sum_{n < prec} c_n q^n + O(q^prec)``."""

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs: Iterable, prec: int | None = None):
        cs = [as_scalar(c) for c in coeffs]
        if prec is None:
            prec = len(cs)
        if prec < 1:
            raise ValueError("prec must be positive")
        if len(cs) < prec:
            cs.extend([ZERO] * (prec - len(cs)))
        self.coeffs: tuple[Scalar, ...] = tuple(cs[:prec])
        self.prec = prec

    @classmethod
    def _from_ints(cls, ints: Sequence[int], denom: int = 1, sqrt_part: Sequence[int] | None = None,
                   prec: int | None = None) -> "QSeries":
        prec = len(ints) if prec is None else prec
        obj = object.__new__(cls)
        if sqrt_part is None:
            obj.coeffs = tuple(Scalar._raw(c, 0, denom) if c else ZERO for c in ints[:prec])
        else:
            obj.coeffs = tuple(Scalar._raw(p, q, denom) if (p or q) else ZERO
                               for p, q in zip(ints[:prec], sqrt_part[:prec]))
        obj.prec = prec
        return obj

    @classmethod
    def _wrap(cls, coeffs, prec: int) -> "QSeries":
        obj = object.__new__(cls)
        obj.coeffs = tuple(coeffs)
        obj.prec = prec
        return obj

    @classmethod
    def monomial(cls, n: int, prec: int, coeff=1) -> "QSeries":
        cs = [ZERO] * prec
        if n < prec:
            cs[n] = as_scalar(coeff)
        return cls._wrap(cs, prec)

    @classmethod
    def one(cls, prec: int) -> "QSeries":
        return cls.monomial(0, prec)

    def _components(self) -> tuple[list[int], list[int] | None, int]:
        d = _lcm(c._d for c in self.coeffs)
        p = [c._p * (d // c._d) for c in self.coeffs]
        if all(c._q == 0 for c in self.coeffs):
            return p, None, d
        q = [c._q * (d // c._d) for c in self.coeffs]
        return p, q, d

    # container protocol -------------------------------------------------
    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return self.prec

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.prec == other.prec and self.coeffs == other.coeffs

    def agrees_with(self, other: "QSeries", n: int | None = None) -> bool:
        n = min(self.prec, other.prec) if n is None else n
        return self.coeffs[:n] == other.coeffs[:n]

    def first_difference(self, other: "QSeries", n: int | None = None) -> int | None:
        """Smallest q-power below ``n`` where the two series differ."""
        n = min(self.prec, other.prec) if n is None else n
        for k in range(n):
            if self.coeffs[k] != other.coeffs[k]:
                return k
        return None

    def truncate(self, prec: int) -> "QSeries":
        if prec > self.prec:
            raise ValueError("cannot raise precision")
        return QSeries._wrap(self.coeffs[:prec], prec)

    def order(self):
        """q-adic order (index of the first non-zero coefficient) or ``inf``."""
        for n, c in enumerate(self.coeffs):
            if c:
                return n
        return INF

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.monomial(0, self.prec, other)
        n = min(self.prec, other.prec)
        return QSeries._wrap([a + b if b else a for a, b in zip(self.coeffs[:n], other.coeffs[:n])], n)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._wrap([-c if c else c for c in self.coeffs], self.prec)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.monomial(0, self.prec, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return mul(self, other)
        c = as_scalar(other, strict=False)
        if c is None:
            return NotImplemented
        return QSeries._wrap([c * x if x else x for x in self.coeffs], self.prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return invert(self) ** (-e)
        result, base = QSeries.one(self.prec), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def shift(self, k: int) -> "QSeries":
        """Multiply by ``q^k``; negative ``k`` divides and needs a zero prefix."""
        if k >= 0:
            return QSeries._wrap([ZERO] * k + list(self.coeffs), self.prec + k)
        if any(self.coeffs[:-k]):
            raise ValueError("division by q^k leaves a pole")
        return QSeries._wrap(self.coeffs[-k:], self.prec + k)

    # display / serialisation -------------------------------------------
    def __repr__(self):
        return f"QSeries({format_text(self, 6)}, prec={self.prec})"

    def to_json(self) -> dict:
        return {"prec": self.prec, "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "QSeries":
        return cls([Scalar.from_json(c) for c in obj["coeffs"]], int(obj["prec"]))


def format_text(a: QSeries, terms: int | None = None) -> str:
    """Render like ``1 - 48q + 1104q^2``; zero coefficients are skipped."""
    parts: list[str] = []
    for n, c in enumerate(a.coeffs[: terms if terms is not None else a.prec]):
        if not c:
            continue
        mono = "" if n == 0 else ("q" if n == 1 else f"q^{n}")
        if c.is_rational():
            neg = c.a < 0
            mag = abs(c.a)
            body = str(mag) if (mag != 1 or not mono) else ""
        else:
            neg = False
            body = f"({c})"
        term = body + mono
        if not parts:
            parts.append(("-" if neg else "") + term)
        else:
            parts.append(("- " if neg else "+ ") + term)
    return " ".join(parts) if parts else "0"


def mul(a: QSeries, b: QSeries) -> QSeries:
    """Exact truncated product."""
    n = min(a.prec, b.prec)
    pa, qa, da = a._components()
    pb, qb, db = b._components()
    if qa is None and qb is None:
        return QSeries._from_ints(ip.mul(pa, pb, n), da * db, prec=n)
    qa = qa or [0] * len(pa)
    qb = qb or [0] * len(pb)
    pp = ip.mul(pa, pb, n)
    qq = ip.mul(qa, qb, n)
    cross = ip.mul([x + y for x, y in zip(pa, qa)], [x + y for x, y in zip(pb, qb)], n)
    p = [x + 2 * y for x, y in zip(pp, qq)]
    q = [c - x - y for c, x, y in zip(cross, pp, qq)]
    return QSeries._from_ints(p, da * db, sqrt_part=q, prec=n)


def invert(a: QSeries) -> QSeries:
    """Multiplicative inverse; needs a non-zero constant term."""
    c0 = a.coeffs[0]
    if not c0:
        raise ZeroDivisionError("invert: constant term is zero")
    inv0 = c0.inverse()
    if c0 == ONE or c0 == -ONE:
        pa, qa, da = a._components()
        if qa is None and da == 1:
            return QSeries._from_ints(ip.inv(pa, a.prec), prec=a.prec)
    # generic field case: b_n = -inv0 * sum_{k=1}^{n} a_k b_{n-k}
    out = [inv0]
    support = [(k, c) for k, c in enumerate(a.coeffs) if k and c]
    for n in range(1, a.prec):
        acc = ZERO
        for k, c in support:
            if k > n:
                break
            acc = acc + c * out[n - k]
        out.append(-inv0 * acc)
    return QSeries(out, a.prec)


def binom_pow(a: QSeries, alpha) -> QSeries:
    """``a^alpha`` for ``a = 1 + O(q)`` as the formal binomial series.

    Evaluated with the power-series recurrence
    ``n b_n = sum_{k=1}^{n} ((alpha+1) k - n) a_k b_{n-k}``, which produces
    exactly the coefficients of ``sum_k C(alpha, k) (a - 1)^k``.
    """
    alpha = as_scalar(alpha)
    if a.coeffs[0] != ONE:
        raise ValueError("binom_pow needs constant term 1")
    support = [(k, c) for k, c in enumerate(a.coeffs) if k and c]
    out = [ONE]
    alpha1 = alpha + 1
    for n in range(1, a.prec):
        acc = ZERO
        for k, c in support:
            if k > n:
                break
            acc = acc + (alpha1 * k - n) * c * out[n - k]
        out.append(acc * Fraction(1, n))
    return QSeries(out, a.prec)


def binom_pow_sum(a: QSeries, alpha) -> QSeries:
    """Literal ``sum_k C(alpha, k) (a - 1)^k`` (slow; used as a cross-check)."""
    alpha = as_scalar(alpha)
    if a.coeffs[0] != ONE:
        raise ValueError("binom_pow needs constant term 1")
    x = a - 1
    total = QSeries.one(a.prec)
    term = QSeries.one(a.prec)
    binom = ONE
    for k in range(1, a.prec):
        term = term * x
        binom = binom * (alpha - (k - 1)) * Fraction(1, k)
        total = total + term * binom
    return total


# ---------------------------------------------------------------------------
# operators


def U(a: QSeries) -> QSeries:
    return QSeries._wrap(a.coeffs[::2], (a.prec + 1) // 2)


def V(a: QSeries) -> QSeries:
    out = [ZERO] * (2 * a.prec)
    out[::2] = a.coeffs
    return QSeries._wrap(out, 2 * a.prec)


def W(a: QSeries) -> QSeries:
    return QSeries._wrap([-c if (n % 2 and c) else c for n, c in enumerate(a.coeffs)], a.prec)


def theta(a: QSeries) -> QSeries:
    return QSeries._wrap([c * n if c else c for n, c in enumerate(a.coeffs)], a.prec)


_OPS = {"U": U, "V": V, "W": W, "theta": theta}


def hecke(tag: str, a: QSeries) -> QSeries:
    try:
        op = _OPS[tag]
    except KeyError:
        raise ValueError(f"unknown operator {tag!r}") from None
    return op(a)


# ---------------------------------------------------------------------------
# the standard forms


def _eta_ratio(n: int) -> list[int]:
    """``prod (1-q^k)/(1+q^k) = E(q)^2 / E(q^2)`` to ``n`` terms."""
    e = ip.euler(n)
    return ip.divide_exact(ip.mul(e, e, n), ip.dilate(e, 2, n), n)


@lru_cache(maxsize=32)
def _standard_ints(name: str, n: int) -> tuple[int, ...]:
    if name == "delta":
        e = ip.euler(n)
        return tuple([0] + ip.power(e, 24, n - 1)) if n > 1 else (0,)
    if name == "f":
        e = ip.euler(n)
        ratio = ip.divide_exact(ip.dilate(e, 2, n), e, n)  # prod (1+q^k)
        return tuple([0] + ip.power(ratio, 24, n - 1)) if n > 1 else (0,)
    if name in ("h", "h_eighth", "h_third"):
        exp = {"h": 24, "h_eighth": 3, "h_third": 8}[name]
        return tuple(ip.power(_eta_ratio(n), exp, n))
    if name == "g":
        return tuple(-c if k % 2 else c for k, c in enumerate(_standard_ints("f", n)))
    if name == "e2":
        sig = ip.sigma1(n)
        # -P(q) + 2 P(q^2) with P = 1 - 24 sum sigma_1(m) q^m
        out = [1] + [24 * sig[m] for m in range(1, n)]
        for m in range(1, (n + 1) // 2):
            out[2 * m] -= 48 * sig[m]
        return tuple(out)
    raise ValueError(f"unknown standard form {name!r}")


STANDARD_NAMES = ("delta", "f", "h", "h_eighth", "h_third", "g", "e2")


def standard(name: str, prec: int) -> QSeries:
    """Integer q-expansions of the named forms to ``prec`` terms."""
    if prec < 1:
        raise ValueError("prec must be positive")
    return QSeries._from_ints(list(_standard_ints(name, prec)), prec=prec)


def h_pow(s, prec: int) -> QSeries:
    """``h^s`` as the binomial expansion of ``(h^(1/8))^(8s)``; needs ``|s| < 8``."""
    s = as_scalar(s)
    if not val2(s) > -3:
        raise PreconditionError(f"h_pow needs v(s) > -3 (|s| < 8), got v(s) = {format_val(val2(s))}")
    if not s:
        return QSeries.one(prec)
    return binom_pow(standard("h_eighth", prec), 8 * s)


# ---------------------------------------------------------------------------
# expansion in powers of f


@lru_cache(maxsize=8)
def _f_power_ints(prec: int) -> tuple[tuple[int, ...], ...]:
    f = list(_standard_ints("f", prec))
    rows = [tuple([1] + [0] * (prec - 1))]
    cur = rows[0]
    for _ in range(1, prec):
        cur = tuple(ip.mul(list(cur), f, prec))
        rows.append(cur)
    return tuple(rows)


def f_powers(prec: int) -> list[QSeries]:
    """``[1, f, f^2, ..., f^(prec-1)]`` at precision ``prec``."""
    return [QSeries._from_ints(list(r), prec=prec) for r in _f_power_ints(prec)]


@dataclass(frozen=True)
class FExpansion:
    """Coefficients ``alpha_j`` with ``phi = sum_j alpha_j f^j``.

    Stored against the plain powers of ``f``; the coordinate on the
    normalised basis vector ``(2^(12 r) f)^j`` is ``alpha_j 2^(-12 r j)``.
    """

    coeffs: tuple[Scalar, ...]
    basis_r: Fraction = field(default=Fraction(0))

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]

    def coordinate_valuation(self, j: int, r) -> float | Fraction:
        v = val2(self.coeffs[j])
        return v if v == INF else v - 12 * Fraction(r) * j

    def resum(self, prec: int | None = None) -> QSeries:
        prec = len(self.coeffs) if prec is None else prec
        p, q, d = QSeries(self.coeffs[:prec], prec)._components()
        pt = _combine_f_ints(p, prec)
        if q is None:
            return QSeries._from_ints(pt, d, prec=prec)
        return QSeries._from_ints(pt, d, sqrt_part=_combine_f_ints(q, prec), prec=prec)

    def to_json(self) -> dict:
        return {"basis_r": format_val(self.basis_r), "coeffs": [c.to_json() for c in self.coeffs]}


def _combine_f_ints(coeffs: list[int], prec: int) -> list[int]:
    powers = _f_power_ints(prec)
    total = [0] * prec
    for j, c in enumerate(coeffs[:prec]):
        if c:
            row = powers[j]
            for n in range(j, prec):
                if row[n]:
                    total[n] += c * row[n]
    return total


def _solve_f_ints(vec: list[int], prec: int) -> list[int]:
    powers = _f_power_ints(prec)
    res = list(vec)
    out = [0] * prec
    for j in range(prec):
        c = res[j]
        out[j] = c
        if c:
            row = powers[j]
            for n in range(j + 1, prec):
                if row[n]:
                    res[n] -= c * row[n]
    return out


def expand_in_f(phi: QSeries) -> FExpansion:
    """Write ``phi`` as ``sum_j alpha_j f^j`` to the precision of ``phi``.

    ``f = q + ...`` so the change of basis is unitriangular and integral;
    forward substitution is exact.
    """
    p, q, d = phi._components()
    pc = _solve_f_ints(p, phi.prec)
    if q is None:
        coeffs = tuple(Scalar._raw(x, 0, d) if x else ZERO for x in pc)
    else:
        qc = _solve_f_ints(q, phi.prec)
        coeffs = tuple(Scalar._raw(x, y, d) if (x or y) else ZERO for x, y in zip(pc, qc))
    return FExpansion(coeffs)


def c_coeff(i: int, form: int = 1) -> Fraction:
    """Coefficient of ``f^i`` in ``g = W(f)``, from either closed form."""
    if i < 1:
        raise ValueError("c_coeff needs i >= 1")
    fac = math.factorial
    sign = -1 if i % 2 else 1
    if form == 1:
        inner = (Fraction(fac(2 * i + 2), fac(i + 1) * fac(i + 2))
                 - Fraction(fac(2 * i), fac(i) * fac(i + 1)))
        return sign * 2 ** (4 * i - 4) * inner
    if form == 2:
        return sign * 2 ** (4 * (i - 1)) * Fraction(3 * fac(2 * i), fac(i - 1) * fac(i + 2))
    raise ValueError("form must be 1 or 2")


# ---------------------------------------------------------------------------
# identity verification


@dataclass
class IdentityCheck:
    name: str
    ok: bool
    first_failure: int | None = None
    detail: str = ""


@dataclass
class IdentityReport:
    prec: int
    items: list[IdentityCheck]

    @property
    def ok(self) -> bool:
        return all(it.ok for it in self.items)

    def __getitem__(self, name: str) -> IdentityCheck:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)


def _check(name: str, lhs: QSeries, rhs: QSeries, n: int, detail: str = "") -> IdentityCheck:
    if min(lhs.prec, rhs.prec) < n:
        return IdentityCheck(name, False, None, f"insufficient precision for {n} terms")
    k = lhs.first_difference(rhs, n)
    return IdentityCheck(name, k is None, k, detail if k is None else f"first mismatch at q^{k}")


def _monomial_check(name: str, left, right, prec: int) -> IdentityCheck:
    gen = 2 * prec
    for n in range(gen):
        m = QSeries.monomial(n, gen)
        lhs, rhs = left(m), right(m)
        cmp = min(prec, lhs.prec, rhs.prec)
        k = lhs.first_difference(rhs, cmp)
        if k is not None:
            return IdentityCheck(name, False, k, f"monomial q^{n}: mismatch at q^{k}")
    return IdentityCheck(name, True, None, f"{gen} monomials")


def verify_identities(prec: int, which: Sequence[str] | None = None) -> IdentityReport:
    """Check the q-expansion identities to ``prec`` terms.

    Series are generated at twice the compared precision so that ``U``
    (which halves precision) never starves a comparison.
    """
    if prec < 1:
        raise ValueError("prec must be positive")
    gen = 2 * prec
    f = standard("f", gen)
    items: list[IdentityCheck] = []
    wanted = set(which) if which is not None else None

    def want(name):
        return wanted is None or name in wanted

    if want("degree16"):
        g = W(f)
        lhs = (1 + 48 * f - 8192 * f * f * g) ** 2
        rhs = (1 + 16 * f) ** 2 * (1 + 64 * f)
        items.append(_check("degree16", lhs, rhs, prec))
    if want("W=2VU-id"):
        items.append(_monomial_check("W=2VU-id", W, lambda m: 2 * V(U(m)) - m, prec))
    if want("Utheta=2thetaU"):
        items.append(_monomial_check("Utheta=2thetaU", lambda m: U(theta(m)),
                                     lambda m: 2 * theta(U(m)), prec))
    if want("2Vtheta=thetaV"):
        items.append(_monomial_check("2Vtheta=thetaV", lambda m: 2 * V(theta(m)),
                                     lambda m: theta(V(m)), prec))
    if want("thetaf=fE2"):
        items.append(_check("thetaf=fE2", theta(f), f * standard("e2", gen), prec))
    if want("hf=delta"):
        items.append(_check("hf=delta", standard("h", gen) * f, standard("delta", gen), prec))
    if want("g=sum c_i f^i"):
        exp = FExpansion(tuple([ZERO] + [as_scalar(c_coeff(i)) for i in range(1, prec)]))
        items.append(_check("g=sum c_i f^i", exp.resum(prec), W(f).truncate(prec), prec))
    return IdentityReport(prec, items)
