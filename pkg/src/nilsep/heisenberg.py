"""Closed-form arithmetic and conjugacy in H_{2k+1}(Z) and H_{2k+1}(Z/mZ).

An element is the matrix ``[[1, x, z], [0, I_k, y], [0, 0, 1]]`` and is
stored as its coordinates ``(x, y, z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd

from .intlinalg import (gcd_all, isprime, prime_power_divisors, smallest_non_divisor,
                        smallest_prime_not_dividing)
from .malcev import BudgetExceeded, UTElement
from .quotients import QuotientSpec

ORBIT_BUDGET = 10**6


@dataclass(frozen=True)
class HeisenbergElement:
    k: int
    x: tuple[int, ...]
    y: tuple[int, ...]
    z: int

    def __post_init__(self):
        if len(self.x) != self.k or len(self.y) != self.k:
            raise ValueError("x and y must have length k")

    @classmethod
    def identity(cls, k: int) -> "HeisenbergElement":
        return cls(k, (0,) * k, (0,) * k, 0)

    @classmethod
    def from_ut(cls, g: UTElement) -> "HeisenbergElement":
        d = g.dim
        k = d - 2
        for i in range(1, d - 1):
            for j in range(i + 1, d - 1):
                if g[i, j]:
                    raise ValueError("matrix is not in the Heisenberg model")
        return cls(k, tuple(g[0, 1 + i] for i in range(k)),
                   tuple(g[1 + i, d - 1] for i in range(k)), g[0, d - 1])

    def to_ut(self) -> UTElement:
        d = self.k + 2
        rows = [[int(i == j) for j in range(d)] for i in range(d)]
        for i in range(self.k):
            rows[0][1 + i] = self.x[i]
            rows[1 + i][d - 1] = self.y[i]
        rows[0][d - 1] = self.z
        return UTElement(tuple(tuple(r) for r in rows))

    def is_central(self) -> bool:
        return not any(self.x) and not any(self.y)

    def mod(self, m: int) -> "HeisenbergElement":
        return HeisenbergElement(self.k, tuple(a % m for a in self.x),
                                 tuple(a % m for a in self.y), self.z % m)

    def __mul__(self, other):
        return h_compose(self, other)


@dataclass(frozen=True)
class ModulusContext:
    m: int
    k: int

    @property
    def order(self) -> int:
        return self.m ** (2 * self.k + 1)


def _dot(a, b) -> int:
    return sum(p * q for p, q in zip(a, b))


def h_compose(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement:
    if a.k != b.k:
        raise ValueError(f"rank mismatch: {a.k} vs {b.k}")
    return HeisenbergElement(a.k, tuple(p + q for p, q in zip(a.x, b.x)),
                             tuple(p + q for p, q in zip(a.y, b.y)),
                             a.z + b.z + _dot(a.x, b.y))


def h_inverse(a: HeisenbergElement) -> HeisenbergElement:
    return HeisenbergElement(a.k, tuple(-v for v in a.x), tuple(-v for v in a.y),
                             _dot(a.x, a.y) - a.z)


def h_tau(g: HeisenbergElement) -> int:
    """gcd of all x and y entries; 0 for central elements."""
    return gcd_all(g.x + g.y)


def h_canonical(g: HeisenbergElement) -> HeisenbergElement:
    """Class representative with ``z`` reduced into ``[0, tau)`` when ``tau > 0``."""
    t = h_tau(g)
    if t == 0:
        return g
    return HeisenbergElement(g.k, g.x, g.y, g.z % t)


def h_is_conjugate(g: HeisenbergElement, h: HeisenbergElement) -> bool:
    if g.k != h.k:
        raise ValueError("rank mismatch")
    if g.x != h.x or g.y != h.y:
        return False
    t = h_tau(g)
    dz = h.z - g.z
    return dz == 0 if t == 0 else dz % t == 0


def h_is_conjugate_mod(g: HeisenbergElement, h: HeisenbergElement, m: int) -> bool:
    """Conjugacy of the images in ``H_{2k+1}(Z/m)``.

    The commutator image of ``g`` mod ``m`` is generated by ``gcd(tau, m)``.
    """
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return True
    if any((p - q) % m for p, q in zip(g.x + g.y, h.x + h.y)):
        return False
    return (h.z - g.z) % gcd(h_tau(g), m) == 0


@lru_cache(maxsize=4096)
def _class_mod(g: HeisenbergElement, m: int) -> frozenset:
    k = g.k
    if m ** (2 * k + 1) > ORBIT_BUDGET:
        raise BudgetExceeded(f"|H_{2 * k + 1}(Z/{m})| exceeds orbit budget")
    out = set()
    rng = range(m)
    for xs in product(rng, repeat=k):
        for ys in product(rng, repeat=k):
            for z in rng:
                u = HeisenbergElement(k, xs, ys, z)
                out.add(h_compose(h_compose(h_inverse(u), g), u).mod(m))
    return frozenset(out)


def conjugacy_class_mod(g: HeisenbergElement, m: int) -> frozenset:
    """Class of ``g`` in ``H(Z/m)`` by enumerating every conjugator."""
    return _class_mod(g.mod(m), m)


def h_orbit_conjugate_mod(g: HeisenbergElement, h: HeisenbergElement, m: int) -> bool:
    if g.k != h.k:
        raise ValueError("rank mismatch")
    return h.mod(m) in conjugacy_class_mod(g, m)


def h_lower_bound_pair(p: int, k: int) -> tuple[HeisenbergElement, HeisenbergElement]:
    """``(p e_1, 0, 1)`` and ``(p e_1, 0, 2)``: non-conjugate, separated first mod ``p``."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    x = (p,) + (0,) * (k - 1)
    zero = (0,) * k
    return HeisenbergElement(k, x, zero, 1), HeisenbergElement(k, x, zero, 2)


def separating_modulus_case(g: HeisenbergElement, h: HeisenbergElement) -> tuple[int, str]:
    if h_is_conjugate(g, h):
        raise ValueError("elements are conjugate; no quotient separates them")
    diffs = [q - p for p, q in zip(g.x + g.y, h.x + h.y)]
    if any(diffs):
        return smallest_non_divisor(gcd_all(diffs)), "A"
    tau = h_tau(g)
    if tau == 0:
        return smallest_prime_not_dividing(h.z - g.z), "C"
    t = (h.z - g.z) % tau
    for p, a in prime_power_divisors(tau):
        if t % p**a:
            return p**a, "B"
    raise AssertionError("no prime power of tau avoids t")


def h_separating_modulus(g: HeisenbergElement, h: HeisenbergElement) -> QuotientSpec:
    m, _ = separating_modulus_case(g, h)
    return QuotientSpec(m, m ** (2 * g.k + 1))


def congruence_cd(g: HeisenbergElement, h: HeisenbergElement, max_modulus: int = 10**6) -> int:
    """Least modulus ``m`` whose congruence quotient separates the classes."""
    if h_is_conjugate(g, h):
        raise ValueError("elements are conjugate")
    for m in range(2, max_modulus + 1):
        if not h_is_conjugate_mod(g, h, m):
            return m
    raise BudgetExceeded("no separating modulus below the cap")
