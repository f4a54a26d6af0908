"""Characteristic polynomials of matrices over Z[sqrt2], by multi-modular CRT.

For primes ``p = +-1 mod 8`` the field F_p contains a square root ``rho`` of
2, giving two ring maps ``Z[sqrt2] -> F_p``.  The characteristic polynomial
is computed in F_p under both maps (Hessenberg reduction in int64 numpy),
the rational and sqrt2 parts are separated, and everything is lifted by CRT
once the modulus exceeds twice a Hadamard bound.  The result is exact.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from sympy import isprime, sqrt_mod

__all__ = ["charpoly_zsqrt2", "hadamard_bits"]

_PRIME_START = (1 << 31) - 1


@lru_cache(maxsize=None)
def _primes(count: int) -> tuple[tuple[int, int], ...]:
    out = []
    n = _PRIME_START
    while len(out) < count:
        if n % 8 in (1, 7) and isprime(n):
            out.append((n, sqrt_mod(2, n)))
        n -= 2
    return tuple(out)


def _prime_list(count: int) -> tuple[tuple[int, int], ...]:
    # grow geometrically so the cache is reused
    size = 16
    while size < count:
        size *= 2
    return _primes(size)[:count]


def _hessenberg_charpoly(a: np.ndarray, p: int) -> list[int]:
    """Coefficients of ``det(X I - a)`` mod ``p``, lowest degree first."""
    n = a.shape[0]
    a = a.copy()
    for k in range(n - 2):
        col = a[k + 1:, k]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        piv = k + 1 + int(nz[0])
        if piv != k + 1:
            a[[piv, k + 1], :] = a[[k + 1, piv], :]
            a[:, [piv, k + 1]] = a[:, [k + 1, piv]]
        inv = pow(int(a[k + 1, k]), p - 2, p)
        mult = (a[k + 2:, k] * inv) % p
        if not mult.any():
            continue
        # rows: R_i -= mult_i R_{k+1}
        a[k + 2:, :] = (a[k + 2:, :] - (mult[:, None] * a[k + 1, :][None, :]) % p) % p
        # columns: C_{k+1} += sum_i mult_i C_i
        add = (a[:, k + 2:] * mult[None, :]) % p
        a[:, k + 1] = (a[:, k + 1] + add.sum(axis=1) % p) % p
    # recurrence on leading principal blocks of the Hessenberg matrix
    polys = [np.array([1], dtype=np.int64)]
    for m in range(1, n + 1):
        hmm = int(a[m - 1, m - 1])
        prev = polys[m - 1]
        new = np.zeros(m + 1, dtype=np.int64)
        new[1:] = prev
        new[:m] = (new[:m] - (prev * hmm) % p) % p
        prod = 1
        for i in range(m - 1, 0, -1):
            prod = prod * int(a[i, i - 1]) % p
            if prod == 0:
                break
            coef = prod * int(a[i - 1, m - 1]) % p
            if coef:
                q = polys[i - 1]
                new[:i] = (new[:i] - (q * coef) % p) % p
        polys.append(new)
    return [int(x) for x in polys[n]]


def _powmod_vec(x: np.ndarray, e: np.ndarray, p: np.ndarray) -> np.ndarray:
    out = np.ones_like(x)
    base = x % p
    e = e.copy()
    while e.any():
        odd = (e & 1).astype(bool)
        out = np.where(odd, (out * base) % p, out)
        base = (base * base) % p
        e >>= 1
    return out


def _batched_charpoly(a: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hessenberg charpoly for a stack of matrices, one prime per layer.

    No pivoting: layers whose pivot vanishes while the column below does
    not are flagged and must be redone by :func:`_hessenberg_charpoly`.
    """
    P, n, _ = a.shape
    a = a.copy()
    pc = p[:, None]
    pm = p[:, None, None]
    bad = np.zeros(P, dtype=bool)
    for k in range(n - 2):
        piv = a[:, k + 1, k]
        below = a[:, k + 2:, k]
        zero = piv == 0
        if zero.any():
            bad |= zero & below.any(axis=1)
        inv = _powmod_vec(piv, p - 2, p)
        mult = (below * inv[:, None]) % pc
        if not mult.any():
            continue
        a[:, k + 2:, :] = (a[:, k + 2:, :] - (mult[:, :, None] * a[:, k + 1, None, :]) % pm) % pm
        add = ((a[:, :, k + 2:] * mult[:, None, :]) % pm).sum(axis=2) % pc
        a[:, :, k + 1] = (a[:, :, k + 1] + add) % pc
    polys = [np.ones((P, 1), dtype=np.int64)]
    for m in range(1, n + 1):
        prev = polys[m - 1]
        new = np.zeros((P, m + 1), dtype=np.int64)
        new[:, 1:] = prev
        new[:, :m] = (new[:, :m] - (prev * a[:, m - 1, m - 1][:, None]) % pc) % pc
        prod = np.ones(P, dtype=np.int64)
        for i in range(m - 1, 0, -1):
            prod = (prod * a[:, i, i - 1]) % p
            if not prod.any():
                break
            coef = (prod * a[:, i - 1, m - 1]) % p
            if coef.any():
                new[:, :i] = (new[:, :i] - (polys[i - 1] * coef[:, None]) % pc) % pc
        polys.append(new)
    return polys[n], bad


def _charpoly_layers(a: np.ndarray, p: np.ndarray, chunk: int = 64) -> np.ndarray:
    out = np.empty((a.shape[0], a.shape[1] + 1), dtype=np.int64)
    for lo in range(0, a.shape[0], chunk):
        hi = min(lo + chunk, a.shape[0])
        res, bad = _batched_charpoly(a[lo:hi], p[lo:hi])
        for k in np.flatnonzero(bad):
            res[k] = _hessenberg_charpoly(a[lo + k], int(p[lo + k]))
        out[lo:hi] = res
    return out


def hadamard_bits(xs: list[list[int]], ys: list[list[int]]) -> int:
    """Bit length of ``prod_i (1 + ||row_i||)`` under either real embedding."""
    total = 1
    for rx, ry in zip(xs, ys):
        sq = 0
        for x, y in zip(rx, ry):
            t = abs(x) + (3 * abs(y) + 1) // 2
            sq += t * t
        total *= math.isqrt(sq) + 2
    return total.bit_length()


def _residues(vals: list[int], primes: list[int]) -> np.ndarray:
    out = np.empty((len(primes), len(vals)), dtype=np.int64)
    for k, p in enumerate(primes):
        out[k] = [v % p for v in vals]
    return out


def charpoly_zsqrt2(xs: list[list[int]], ys: list[list[int]] | None = None):
    """``det(X I - (xs + ys sqrt2))`` as lists ``(u_k, w_k)``, lowest degree first.

    Coefficient ``k`` equals ``u_k + w_k sqrt2``.
    """
    n = len(xs)
    if n == 0:
        return [1], [0]
    if ys is None or not any(any(r) for r in ys):
        ys = None
    bits = hadamard_bits(xs, ys if ys is not None else [[0] * n for _ in range(n)]) + 2
    count = bits // 30 + 2
    plist = _prime_list(count)
    flat_x = [v for row in xs for v in row]
    flat_y = [v for row in ys for v in row] if ys is not None else None
    primes = [p for p, _ in plist]
    rx = _residues(flat_x, primes)
    ry = _residues(flat_y, primes) if flat_y is not None else None
    pa = np.array(primes, dtype=np.int64)
    ax = rx.reshape(-1, n, n)
    if ry is None:
        us = _charpoly_layers(ax, pa).tolist()
        ws = []
    else:
        rho = np.array([r for _, r in plist], dtype=np.int64)
        ay = (ry.reshape(-1, n, n) * rho[:, None, None]) % pa[:, None, None]
        cp = _charpoly_layers((ax + ay) % pa[:, None, None], pa)
        cm = _charpoly_layers((ax - ay) % pa[:, None, None], pa)
        inv2 = (pa + 1) // 2
        inv2rho = _powmod_vec((2 * rho) % pa, pa - 2, pa)
        us = (((cp + cm) % pa[:, None]) * inv2[:, None] % pa[:, None]).tolist()
        ws = (((cp - cm) % pa[:, None]) * inv2rho[:, None] % pa[:, None]).tolist()
    u = _crt(us, primes)
    w = _crt(ws, primes) if ys is not None else [0] * (n + 1)
    return u, w


def _crt(rows: list[list[int]], primes: list[int]) -> list[int]:
    # Garner-free incremental CRT, then symmetric lift.
    ncoef = len(rows[0])
    vals = list(rows[0])
    mod = primes[0]
    for row, p in zip(rows[1:], primes[1:]):
        inv = pow(mod % p, p - 2, p)
        for k in range(ncoef):
            t = (row[k] - vals[k]) % p * inv % p
            vals[k] += mod * t
        mod *= p
    half = mod // 2
    return [v - mod if v > half else v for v in vals]
