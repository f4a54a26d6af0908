"""Exact truncated power-series arithmetic on lists of Python ints.

Multiplication packs both operands into single big integers (Kronecker
substitution) so that the quadratic work happens inside CPython's long
multiplication rather than in an interpreted double loop.
"""
from __future__ import annotations

from functools import lru_cache

__all__ = ["mul", "inv", "power", "euler", "dilate", "sigma1", "divide_exact"]


def _pack(coeffs: list[int], wb: int) -> int:
    pos = b"".join((c if c > 0 else 0).to_bytes(wb, "little") for c in coeffs)
    neg = b"".join((-c if c < 0 else 0).to_bytes(wb, "little") for c in coeffs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def mul(a: list[int], b: list[int], n: int) -> list[int]:
    """First ``n`` coefficients of ``a*b``."""
    a = a[:n]
    b = b[:n]
    while a and a[-1] == 0:
        a = a[:-1]
    while b and b[-1] == 0:
        b = b[:-1]
    if not a or not b:
        return [0] * n
    if len(a) == 1 or len(b) == 1:
        if len(b) == 1:
            a, b = b, a
        c = a[0]
        out = [c * x for x in b]
        return (out + [0] * n)[:n]
    ma = max(abs(x) for x in a).bit_length()
    mb = max(abs(x) for x in b).bit_length()
    w = ma + mb + min(len(a), len(b)).bit_length() + 1
    wb = (w + 7) // 8
    w = 8 * wb
    z = _pack(a, wb) * _pack(b, wb)
    m = min(n, len(a) + len(b) - 1)
    mask = (1 << (w * m)) - 1
    half = 1 << (w - 1)
    off = int.from_bytes((b"\x00" * (wb - 1) + b"\x80") * m, "little")
    raw = (((z & mask) + off) & mask).to_bytes(wb * m, "little")
    out = [int.from_bytes(raw[k * wb:(k + 1) * wb], "little") - half for k in range(m)]
    return out + [0] * (n - m)


def inv(a: list[int], n: int) -> list[int]:
    """Inverse of a series with constant term +-1 (Newton iteration)."""
    if a[0] not in (1, -1):
        raise ValueError("integer series inverse needs a unit constant term")
    b = [a[0]]
    k = 1
    while k < n:
        k = min(2 * k, n)
        ab = mul(a, b, k)
        corr = [-x for x in ab]
        corr[0] += 2
        b = mul(b, corr, k)
    return (b + [0] * n)[:n]


def power(a: list[int], e: int, n: int) -> list[int]:
    if e < 0:
        return power(inv(a, n), -e, n)
    result = [1] + [0] * (n - 1)
    base = a[:n] + [0] * max(0, n - len(a))
    while e:
        if e & 1:
            result = mul(result, base, n)
        e >>= 1
        if e:
            base = mul(base, base, n)
    return result


def divide_exact(a: list[int], b: list[int], n: int) -> list[int]:
    """``a/b`` for ``b`` with constant term +-1, by sparse back-substitution."""
    support = [(k, c) for k, c in enumerate(b[:n]) if c and k]
    b0 = b[0]
    out = [0] * n
    for m in range(n):
        acc = a[m] if m < len(a) else 0
        for k, c in support:
            if k > m:
                break
            acc -= c * out[m - k]
        out[m] = acc * b0
    return out


@lru_cache(maxsize=16)
def _euler(n: int) -> tuple[int, ...]:
    out = [0] * n
    out[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 < n:
        sign = -1 if k % 2 else 1
        for e in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if e < n:
                out[e] += sign
        k += 1
    return tuple(out)


def euler(n: int) -> list[int]:
    """``prod_{k>=1} (1 - q^k)`` to ``n`` terms (pentagonal number theorem)."""
    return list(_euler(n))


def dilate(a: list[int], k: int, n: int) -> list[int]:
    """``a(q^k)`` to ``n`` terms."""
    out = [0] * n
    for i, c in enumerate(a):
        if i * k >= n:
            break
        out[i * k] = c
    return out


def sigma1(n: int) -> list[int]:
    """Divisor sums ``sigma_1(m)`` for ``0 <= m < n`` (``sigma_1(0) = 0``)."""
    out = [0] * n
    for d in range(1, n):
        for m in range(d, n, d):
            out[m] += d
    return out
