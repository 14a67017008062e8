"""Exact Lie correspondence for unitriangular lattices.

All arithmetic is over ``fractions.Fraction``.  Log and exp are the finite
series of a nilpotent matrix; the Lie basis of a lattice is ``nu_i =
Log(xi_i)`` for its compatible generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .malcev import GroupContext, UTElement, ball_enumerate, ut_inverse

MAX_BCH_CLASS = 5


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, rows) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(v) for v in r) for r in rows))

    @classmethod
    def zero(cls, d: int) -> "RationalMatrix":
        return cls(tuple((Fraction(0),) * d for _ in range(d)))

    @classmethod
    def identity(cls, d: int) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)))

    @classmethod
    def from_ut(cls, g: UTElement) -> "RationalMatrix":
        return cls.of(g.entries)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __add__(self, other):
        return RationalMatrix(tuple(tuple(a + b for a, b in zip(r, s))
                                    for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other):
        return RationalMatrix(tuple(tuple(a - b for a, b in zip(r, s))
                                    for r, s in zip(self.rows, other.rows)))

    def __neg__(self):
        return RationalMatrix(tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix(tuple(tuple(a * c for a in r) for r in self.rows))

    def __matmul__(self, other):
        cols = list(zip(*other.rows))
        return RationalMatrix(tuple(tuple(sum((a * b for a, b in zip(r, col) if a and b),
                                              Fraction(0)) for col in cols)
                                    for r in self.rows))

    def is_zero(self) -> bool:
        return not any(a for r in self.rows for a in r)

    def is_strictly_upper(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.dim) for j in range(i + 1))

    def is_unitriangular(self) -> bool:
        d = self.dim
        return all(self.rows[i][j] == (1 if i == j else 0) for i in range(d) for j in range(i + 1))

    def to_ut(self) -> UTElement:
        if not all(a.denominator == 1 for r in self.rows for a in r):
            raise ValueError("matrix has non-integral entries")
        return UTElement(tuple(tuple(int(a) for a in r) for r in self.rows))


def bracket(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    return a @ b - b @ a


def _as_rational(g) -> RationalMatrix:
    return RationalMatrix.from_ut(g) if isinstance(g, UTElement) else g


def mat_log(g) -> RationalMatrix:
    """``sum_{j>=1} (-1)^{j+1} N^j / j`` with ``N = g - I`` (finite)."""
    if isinstance(g, UTElement):
        return _log_integral(g)
    g = _as_rational(g)
    if not g.is_unitriangular():
        raise ValueError("log needs a unitriangular matrix")
    d = g.dim
    n = g - RationalMatrix.identity(d)
    total = RationalMatrix.zero(d)
    power = n
    j = 1
    while not power.is_zero():
        total = total + power.scale(Fraction((-1) ** (j + 1), j))
        power = power @ n
        j += 1
    return total


def _log_integral(g: UTElement) -> RationalMatrix:
    # powers of N stay integral; only the final combination needs fractions
    d = g.dim
    n = [[g.entries[i][j] - (i == j) for j in range(d)] for i in range(d)]
    acc = [[Fraction(0)] * d for _ in range(d)]
    power = n
    j = 1
    while any(any(r) for r in power):
        c = Fraction((-1) ** (j + 1), j)
        for i in range(d):
            for k in range(i + 1, d):
                if power[i][k]:
                    acc[i][k] += c * power[i][k]
        power = [[sum(power[i][l] * n[l][k] for l in range(i + 1, k)) for k in range(d)]
                 for i in range(d)]
        j += 1
    return RationalMatrix(tuple(tuple(r) for r in acc))


def mat_exp(a: RationalMatrix) -> RationalMatrix:
    if not a.is_strictly_upper():
        raise ValueError("exp needs a strictly upper triangular matrix")
    d = a.dim
    total = RationalMatrix.identity(d)
    power = a
    j = 1
    while not power.is_zero():
        total = total + power.scale(Fraction(1, factorial(j)))
        power = power @ a
        j += 1
    return total


def bch_product(a: RationalMatrix, b: RationalMatrix, c: int) -> RationalMatrix:
    """``A * B = Log(exp A exp B)``, computed on the matrix side."""
    if c > MAX_BCH_CLASS:
        raise ValueError(f"class {c} exceeds the supported BCH table (<= {MAX_BCH_CLASS})")
    return mat_log(mat_exp(a) @ mat_exp(b))


def _nest(ops: str, a, b):
    # "XXY" -> [X,[X,Y]]: the innermost pair is the last two letters
    env = {"X": a, "Y": b}
    acc = bracket(env[ops[-2]], env[ops[-1]])
    for ch in reversed(ops[:-2]):
        acc = bracket(env[ch], acc)
    return acc


# Coefficients of the BCH series by degree, as (coefficient, nested bracket word).
BCH_TABLE = {
    2: [(Fraction(1, 2), "XY")],
    3: [(Fraction(1, 12), "XXY"), (Fraction(1, 12), "YYX")],
    4: [(Fraction(-1, 24), "YXXY")],
    5: [(Fraction(-1, 720), "YYYYX"), (Fraction(-1, 720), "XXXXY"),
        (Fraction(1, 360), "XYYYX"), (Fraction(1, 360), "YXXXY"),
        (Fraction(1, 120), "YXYXY"), (Fraction(1, 120), "XYXYX")],
}


def bch_series(a: RationalMatrix, b: RationalMatrix, c: int) -> RationalMatrix:
    """``A + B + 1/2 [A,B] + ...`` truncated after brackets of length ``c``."""
    if c > MAX_BCH_CLASS:
        raise ValueError(f"class {c} exceeds the supported BCH table (<= {MAX_BCH_CLASS})")
    total = a + b
    for degree in range(2, c + 1):
        for coeff, word in BCH_TABLE[degree]:
            total = total + _nest(word, a, b).scale(coeff)
    return total


# ---------------------------------------------------------------------------
# coordinates in the induced basis


@dataclass(frozen=True)
class LieVector:
    coords: tuple[Fraction, ...]

    def norm(self) -> Fraction:
        return sum((abs(a) for a in self.coords), Fraction(0))


@lru_cache(maxsize=None)
def induced_basis(ctx: GroupContext) -> tuple[RationalMatrix, ...]:
    return tuple(mat_log(x) for x in ctx.generators)


@lru_cache(maxsize=None)
def _basis_solver(ctx: GroupContext):
    # reduced row echelon form of [basis columns | I] over strictly-upper entries
    basis = induced_basis(ctx)
    d = ctx.dim
    slots = [(i, j) for i in range(d) for j in range(i + 1, d)]
    h = len(basis)
    mat = [[basis[k].rows[i][j] for k in range(h)] for i, j in slots]
    r = 0
    ops = [[Fraction(int(a == b)) for b in range(len(slots))] for a in range(len(slots))]
    for col in range(h):
        piv = next((i for i in range(r, len(slots)) if mat[i][col] != 0), None)
        if piv is None:
            raise ValueError("induced basis is linearly dependent")
        mat[r], mat[piv] = mat[piv], mat[r]
        ops[r], ops[piv] = ops[piv], ops[r]
        inv = 1 / mat[r][col]
        mat[r] = [v * inv for v in mat[r]]
        ops[r] = [v * inv for v in ops[r]]
        for i in range(len(slots)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [v - f * w for v, w in zip(mat[i], mat[r])]
                ops[i] = [v - f * w for v, w in zip(ops[i], ops[r])]
        r += 1
    return slots, ops[:h], ops[h:]


@lru_cache(maxsize=None)
def _unit_positions(ctx: GroupContext):
    # elementary generators have Log(xi) = E_rc, so coordinates are matrix entries
    out = []
    for b in induced_basis(ctx):
        nz = [(i, j) for i, r in enumerate(b.rows) for j, v in enumerate(r) if v]
        if len(nz) != 1 or b.rows[nz[0][0]][nz[0][1]] != 1:
            return None
        out.append(nz[0])
    return tuple(out)


def lie_coordinates(ctx: GroupContext, a: RationalMatrix) -> LieVector:
    """Coordinates of ``a`` in the induced basis; raises if ``a`` leaves the span."""
    units = _unit_positions(ctx)
    if units is not None:
        d = ctx.dim
        used = set(units)
        if any(a.rows[i][j] for i in range(d) for j in range(d) if (i, j) not in used):
            raise ValueError("matrix is not in the Lie algebra of this lattice")
        return LieVector(tuple(a.rows[i][j] for i, j in units))
    slots, solve, residual = _basis_solver(ctx)
    vec = [a.rows[i][j] for i, j in slots]
    for row in residual:
        if sum(x * v for x, v in zip(row, vec) if x and v) != 0:
            raise ValueError("matrix is not in the Lie algebra of this lattice")
    return LieVector(tuple(sum((x * v for x, v in zip(row, vec) if x and v), Fraction(0))
                           for row in solve))


def from_lie_coordinates(ctx: GroupContext, coords: Sequence) -> RationalMatrix:
    total = RationalMatrix.zero(ctx.dim)
    for b, c in zip(induced_basis(ctx), coords):
        if c:
            total = total + b.scale(c)
    return total


def lie_norm(ctx: GroupContext, a: RationalMatrix) -> Fraction:
    """``||A||_X``: sum of absolute coordinates in the induced basis."""
    return lie_coordinates(ctx, a).norm()


def adjoint_matrix(ctx: GroupContext, g: UTElement, method: str = "series") -> tuple[tuple[Fraction, ...], ...]:
    """Matrix of ``Ad(g)`` in the induced basis (column ``j`` is ``Ad(g) nu_j``)."""
    basis = induced_basis(ctx)
    if method == "series":
        log_g = mat_log(g)

        def act(a):
            total, term, k = a, a, 1
            while True:
                term = bracket(log_g, term).scale(Fraction(1, k))
                if term.is_zero():
                    return total
                total = total + term
                k += 1
    elif method == "conjugation":
        units = _unit_positions(ctx)
        if units is not None:
            # g E_rc g^-1 is the outer product of column r of g and row c of g^-1
            gi = ut_inverse(g).entries
            return tuple(tuple(Fraction(g.entries[i][r] * gi[c][j]) for r, c in units)
                         for i, j in units)
        gm = RationalMatrix.from_ut(g)
        gi = RationalMatrix.from_ut(ut_inverse(g))

        def act(a):
            return gm @ a @ gi
    else:
        raise ValueError(f"unknown method {method!r}")
    cols = [lie_coordinates(ctx, act(b)).coords for b in basis]
    h = len(basis)
    return tuple(tuple(cols[j][i] for j in range(h)) for i in range(h))


def matmul_square(a, b):
    n = len(a)
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n))
                 for i in range(n))


def distortion_profile(ctx: GroupContext, n_max: int) -> list[tuple[int, Fraction, Fraction]]:
    """Rows ``(n, max ||Log g||_X, max |Ad(g)_{ij}|)`` over the balls ``B(n)``."""
    ball = ball_enumerate(ctx, n_max)
    best_log = [Fraction(0)] * (n_max + 1)
    best_ad = [Fraction(0)] * (n_max + 1)
    for g, r in ball.items():
        best_log[r] = max(best_log[r], lie_norm(ctx, mat_log(g)))
        ad = adjoint_matrix(ctx, g, "conjugation")
        best_ad[r] = max(best_ad[r], max(abs(v) for row in ad for v in row))
    rows = []
    lo, ad = Fraction(0), Fraction(0)
    for n in range(n_max + 1):
        lo, ad = max(lo, best_log[n]), max(ad, best_ad[n])
        rows.append((n, lo, ad))
    return rows
