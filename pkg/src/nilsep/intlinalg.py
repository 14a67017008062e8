"""Integer linear algebra and small number-theory helpers."""

from __future__ import annotations

from functools import reduce
from math import gcd
from typing import Sequence

from sympy import factorint, isprime, nextprime


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, s, t)`` with ``g = s*a + t*b = gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def gcd_with_cofactors(values: Sequence[int]) -> tuple[int, list[int]]:
    """``gcd(values)`` together with integer cofactors realising it."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        g2, s, t = xgcd(g, v)
        coeffs = [c * s for c in coeffs]
        coeffs[i] = t
        g = g2
    return g, coeffs


def gcd_all(values) -> int:
    return reduce(gcd, values, 0)


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """A Z-basis of ``{u in Z^ncols : M u = 0}`` for the integer matrix ``M``.

    Row-reduces ``[M^T | I]`` with unimodular integer row operations; rows
    whose ``M^T`` part vanishes carry the kernel basis.
    """
    m = len(rows)
    aug = [[rows[r][c] for r in range(m)] + [int(i == c) for i in range(ncols)]
           for c in range(ncols)]
    pivot_row = 0
    for col in range(m):
        # euclid down the column until a single nonzero entry remains
        while True:
            nz = [r for r in range(pivot_row, ncols) if aug[r][col]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda r: abs(aug[r][col]))
            for r in nz:
                if r != piv:
                    q = aug[r][col] // aug[piv][col]
                    aug[r] = [x - q * y for x, y in zip(aug[r], aug[piv])]
        if nz:
            r = nz[0]
            aug[pivot_row], aug[r] = aug[r], aug[pivot_row]
            pivot_row += 1
    return [tuple(row[m:]) for row in aug[pivot_row:]]


def smallest_non_divisor(n: int) -> int:
    """Least ``m >= 2`` with ``m`` not dividing ``n`` (``n != 0``)."""
    if n == 0:
        raise ValueError("every integer divides 0")
    m = 2
    while n % m == 0:
        m += 1
    return m


def smallest_prime_not_dividing(n: int) -> int:
    if n == 0:
        raise ValueError("every prime divides 0")
    p = 2
    while n % p == 0:
        p = nextprime(p)
    return p


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def prime_power_divisors(n: int) -> list[tuple[int, int]]:
    """All ``(p, a)`` with ``a >= 1`` and ``p**a | n``, ordered by ``p**a``."""
    out = [(p, a) for p, e in factorint(abs(n)).items() for a in range(1, e + 1)]
    return sorted(out, key=lambda pa: (pa[0] ** pa[1], pa[0]))


__all__ = [
    "xgcd", "gcd_with_cofactors", "gcd_all", "integer_kernel", "smallest_non_divisor",
    "smallest_prime_not_dividing", "valuation", "prime_power_divisors", "isprime",
]
