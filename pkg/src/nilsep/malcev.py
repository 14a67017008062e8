"""Exact arithmetic in unitriangular integer lattices.

Elements are upper unitriangular integer matrices.  A :class:`GroupContext`
fixes a lattice together with an ordered compatible generating set
``xi_1, ..., xi_h`` (``xi_1`` central), which gives Mal'tsev coordinates
``g = xi_1**a_1 * ... * xi_h**a_h`` and the default word metric.
"""

from __future__ import annotations

import os
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """An enumeration would grow beyond the configured cap."""


class NotInLattice(ValueError):
    pass


def default_budget() -> int:
    raw = os.environ.get("NILSEP_BUDGET")
    if raw:
        return int(raw)
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class UTElement:
    """Upper unitriangular integer matrix, stored as a tuple of rows."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        d = len(self.entries)
        for i, row in enumerate(self.entries):
            if len(row) != d:
                raise ValueError("matrix must be square")
            for j, v in enumerate(row):
                if not isinstance(v, int):
                    raise TypeError("entries must be integers")
                if i == j and v != 1:
                    raise ValueError("diagonal entries must be 1")
                if i > j and v != 0:
                    raise ValueError("entries below the diagonal must be 0")

    @classmethod
    def _raw(cls, entries):
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        return obj

    @classmethod
    def identity(cls, dim: int) -> "UTElement":
        return cls._raw(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)))

    @classmethod
    def elementary(cls, dim: int, r: int, c: int, a: int = 1) -> "UTElement":
        """``I + a * E_{rc}`` for ``r < c``."""
        if not 0 <= r < c < dim:
            raise ValueError("elementary position must be strictly upper triangular")
        rows = [[int(i == j) for j in range(dim)] for i in range(dim)]
        rows[r][c] = a
        return cls._raw(tuple(tuple(row) for row in rows))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def is_identity(self) -> bool:
        d = self.dim
        return all(self.entries[i][j] == 0 for i in range(d) for j in range(i + 1, d))

    def __mul__(self, other: "UTElement") -> "UTElement":
        return ut_multiply(self, other)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __repr__(self):
        return f"UTElement({[list(r) for r in self.entries]})"


def ut_multiply(a: UTElement, b: UTElement) -> UTElement:
    d = len(a.entries)
    if len(b.entries) != d:
        raise ValueError(f"dimension mismatch: {d} vs {len(b.entries)}")
    A, B = a.entries, b.entries
    rows = []
    for i in range(d):
        Ai = A[i]
        row = [0] * d
        row[i] = 1
        for j in range(i + 1, d):
            s = Ai[j] + B[i][j]
            for m in range(i + 1, j):
                am = Ai[m]
                if am:
                    s += am * B[m][j]
            row[j] = s
        rows.append(tuple(row))
    return UTElement._raw(tuple(rows))


def ut_inverse(a: UTElement) -> UTElement:
    # back substitution on the unitriangular system a * x = I, column by column
    d = a.dim
    A = a.entries
    inv = [[int(i == j) for j in range(d)] for i in range(d)]
    for j in range(d):
        for i in range(j - 1, -1, -1):
            s = 0
            for m in range(i + 1, j + 1):
                s += A[i][m] * inv[m][j]
            inv[i][j] = -s
    return UTElement._raw(tuple(tuple(r) for r in inv))


def ut_commutator(a: UTElement, b: UTElement) -> UTElement:
    """``[a, b] = a^-1 b^-1 a b``."""
    return ut_multiply(ut_multiply(ut_inverse(a), ut_inverse(b)), ut_multiply(a, b))


def ut_power(a: UTElement, k: int) -> UTElement:
    if k < 0:
        a, k = ut_inverse(a), -k
    result = UTElement.identity(a.dim)
    base = a
    while k:
        if k & 1:
            result = ut_multiply(result, base)
        k >>= 1
        if k:
            base = ut_multiply(base, base)
    return result


def ut_conjugate(g: UTElement, u: UTElement) -> UTElement:
    """``u^-1 g u``."""
    return ut_multiply(ut_multiply(ut_inverse(u), g), u)


@dataclass(frozen=True)
class GroupContext:
    """A unitriangular lattice with an ordered compatible generating set.

    ``positions[i]`` is the matrix position of the elementary generator
    ``xi_{i+1} = I + E_{positions[i]}``.  The order must put ``xi_1`` in the
    center and make each ``xi_{i+1}`` central modulo ``<xi_1..xi_i>``;
    ``abelian_factor`` lists generator indices spanning a direct free abelian
    factor of the group.
    """

    name: str
    dim: int
    positions: tuple[tuple[int, int], ...]
    nilpotency_class: int
    abelian_factor: tuple[int, ...] = ()
    labels: tuple[str, ...] = ()
    word_generators: tuple[UTElement, ...] | None = field(default=None, compare=False)

    @property
    def hirsch(self) -> int:
        return len(self.positions)

    @property
    def generators(self) -> tuple[UTElement, ...]:
        return tuple(UTElement.elementary(self.dim, r, c) for r, c in self.positions)

    @property
    def S(self) -> tuple[UTElement, ...]:
        """Generating set for the word metric (defaults to the compatible set)."""
        return self.word_generators if self.word_generators is not None else self.generators

    def with_word_generators(self, gens: Sequence[UTElement]) -> "GroupContext":
        return GroupContext(self.name, self.dim, self.positions, self.nilpotency_class,
                            self.abelian_factor, self.labels, tuple(gens))

    def identity(self) -> UTElement:
        return UTElement.identity(self.dim)

    def coordinates(self, g: UTElement) -> tuple[int, ...]:
        """Mal'tsev coordinates, peeled from the last generator down."""
        if g.dim != self.dim:
            raise ValueError(f"{self.name} expects dimension {self.dim}, got {g.dim}")
        cur = [list(r) for r in g.entries]
        d = self.dim
        coords = [0] * self.hirsch
        for i in range(self.hirsch - 1, -1, -1):
            r, c = self.positions[i]
            a = cur[r][c]
            coords[i] = a
            if a:
                # right-multiply by I - a E_rc: column c -= a * column r
                for row in range(r + 1):
                    cur[row][c] -= a * cur[row][r]
        for i in range(d):
            for j in range(i + 1, d):
                if cur[i][j]:
                    raise NotInLattice(f"element is not in {self.name}")
        return tuple(coords)

    def from_coordinates(self, coords: Sequence[int]) -> UTElement:
        if len(coords) != self.hirsch:
            raise ValueError("wrong number of coordinates")
        g = self.identity()
        for (r, c), a in zip(self.positions, coords):
            if a:
                g = ut_multiply(g, UTElement.elementary(self.dim, r, c, a))
        return g

    def contains(self, g: UTElement) -> bool:
        try:
            self.coordinates(g)
        except NotInLattice:
            return False
        return True

    def is_central(self, g: UTElement) -> bool:
        return all(ut_commutator(g, x).is_identity() for x in self.generators)


# ---------------------------------------------------------------------------
# built-in families


def _ut_positions(d: int) -> tuple[tuple[int, int], ...]:
    # higher superdiagonals first; peeling reads level-1 entries last-in first-out
    pos = []
    for level in range(d - 1, 0, -1):
        for r in range(d - level):
            pos.append((r, r + level))
    return tuple(pos)


def free_abelian(n: int) -> GroupContext:
    """Z^n as the unipotent matrices ``[[1, a], [0, I]]``."""
    positions = tuple((0, i) for i in range(1, n + 1))
    name = "z" if n == 1 else f"z{n}"
    labels = tuple(f"e{i}" for i in range(1, n + 1))
    return GroupContext(name, n + 1, positions, 1, tuple(range(n)), labels)


def heisenberg(k: int) -> GroupContext:
    """H_{2k+1}(Z) with generators ``lambda, alpha_1..alpha_k, beta_1..beta_k``."""
    d = k + 2
    positions = ((0, d - 1),) + tuple((0, i) for i in range(1, k + 1)) \
        + tuple((i, d - 1) for i in range(1, k + 1))
    labels = ("lambda",) + tuple(f"alpha{i}" for i in range(1, k + 1)) \
        + tuple(f"beta{i}" for i in range(1, k + 1))
    return GroupContext(f"h{2 * k + 1}", d, positions, 2, (), labels)


def unitriangular(d: int) -> GroupContext:
    pos = _ut_positions(d)
    labels = tuple(f"E{r + 1}{c + 1}" for r, c in pos)
    return GroupContext(f"ut{d}", d, pos, d - 1, (), labels)


def h3_times_z() -> GroupContext:
    """H_3(Z) x Z, block diagonal in UT(5)."""
    positions = ((0, 2), (3, 4), (0, 1), (1, 2))
    return GroupContext("h3xz", 5, positions, 2, (1,), ("lambda", "z", "alpha", "beta"))


BUILTIN = {
    "z": lambda: free_abelian(1),
    "z2": lambda: free_abelian(2),
    "z3": lambda: free_abelian(3),
    "h3": lambda: heisenberg(1),
    "h5": lambda: heisenberg(2),
    "h7": lambda: heisenberg(3),
    "ut4": lambda: unitriangular(4),
    "h3xz": h3_times_z,
}


def get_group(name: str) -> GroupContext:
    try:
        return BUILTIN[name.lower()]()
    except KeyError:
        m = re.fullmatch(r"ut(\d+)", name.lower())
        if m and 2 <= int(m.group(1)) <= 6:
            return unitriangular(int(m.group(1)))
        raise KeyError(f"unknown group {name!r}; known: {', '.join(BUILTIN)}") from None


def heisenberg_rank(ctx: GroupContext) -> int | None:
    m = re.fullmatch(r"h(\d+)", ctx.name)
    if m and int(m.group(1)) % 2 == 1:
        return (int(m.group(1)) - 1) // 2
    return None


# ---------------------------------------------------------------------------
# word metric


class _BallCache:
    """Incremental BFS layers for one generating set."""

    def __init__(self, gens: Sequence[UTElement], dim: int):
        moves = []
        for s in gens:
            moves.append(s)
        for s in gens:
            moves.append(ut_inverse(s))
        # S and S^-1 may overlap (e.g. an involution); keep the first occurrence
        seen = set()
        self.moves = [m for m in moves if not (m in seen or seen.add(m))]
        ident = UTElement.identity(dim)
        self.lengths: dict[UTElement, int] = {ident: 0}
        self.frontier = [ident]
        self.radius = 0

    def grow_to(self, n: int, budget: int):
        while self.radius < n:
            # build the layer aside so a budget failure leaves the cache intact
            layer: dict[UTElement, int] = {}
            lengths = self.lengths
            r = self.radius + 1
            for g in self.frontier:
                for s in self.moves:
                    h = ut_multiply(g, s)
                    if h not in lengths and h not in layer:
                        layer[h] = r
                if len(lengths) + len(layer) > budget:
                    raise BudgetExceeded(
                        f"ball of radius {r} exceeds budget of {budget} elements")
            lengths.update(layer)
            self.frontier = list(layer)
            self.radius = r


_BALLS: dict[tuple, _BallCache] = {}


def _ball_cache(ctx: GroupContext) -> _BallCache:
    key = (ctx.dim, ctx.S)
    cache = _BALLS.get(key)
    if cache is None:
        cache = _BALLS[key] = _BallCache(ctx.S, ctx.dim)
    return cache


def ball_enumerate(ctx: GroupContext, n: int, budget: int | None = None) -> dict[UTElement, int]:
    """Every element of the ``n``-ball mapped to its exact word length.

    Iteration order is BFS order (by length, then discovery order), so it is
    deterministic for a fixed generating set.
    """
    if n < 0:
        raise ValueError("radius must be non-negative")
    budget = default_budget() if budget is None else budget
    cache = _ball_cache(ctx)
    cache.grow_to(n, budget)
    if cache.radius == n:
        return dict(cache.lengths)
    return {g: r for g, r in cache.lengths.items() if r <= n}


def ball_layers(ctx: GroupContext, n: int, budget: int | None = None) -> list[list[UTElement]]:
    """Spheres ``S(0), ..., S(n)`` in BFS order."""
    layers: list[list[UTElement]] = [[] for _ in range(n + 1)]
    for g, r in ball_enumerate(ctx, n, budget).items():
        layers[r].append(g)
    return layers


def word_length(ctx: GroupContext, g: UTElement, bound: int, budget: int | None = None) -> int | None:
    """``||g||_S`` if it is at most ``bound``, else ``None``."""
    budget = default_budget() if budget is None else budget
    cache = _ball_cache(ctx)
    if g in cache.lengths:
        r = cache.lengths[g]
        return r if r <= bound else None
    while cache.radius < bound:
        cache.grow_to(cache.radius + 1, budget)
        if g in cache.lengths:
            return cache.lengths[g]
    return None


def clear_ball_cache():
    _BALLS.clear()


# ---------------------------------------------------------------------------
# text format


def _ints(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(t) for t in text.split(",")]


def parse_element(text: str, ctx: GroupContext | None = None) -> tuple[str, UTElement]:
    """Parse ``h3:(x;y;z)``, ``h5:(x1,x2;y1,y2;z)``, ``z2:(a,b)`` or ``name:[[row],...]``."""
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    body = re.sub(r"\s+", "", body)
    if not body:
        raise ValueError(f"cannot parse element {text!r}")
    group = ctx if ctx is not None else get_group(name)
    if body.startswith("[["):
        rows = re.findall(r"\[([^\[\]]*)\]", body)
        g = UTElement(tuple(tuple(_ints(r)) for r in rows))
    elif body.startswith("(") and body.endswith(")"):
        parts = body[1:-1].split(";")
        k = heisenberg_rank(group)
        if k is not None and len(parts) == 3:
            x, y, z = _ints(parts[0]), _ints(parts[1]), _ints(parts[2])
            if len(x) != k or len(y) != k or len(z) != 1:
                raise ValueError(f"{name} expects {k} x-entries, {k} y-entries and one z")
            d = k + 2
            rows = [[int(i == j) for j in range(d)] for i in range(d)]
            for i in range(k):
                rows[0][1 + i] = x[i]
                rows[1 + i][d - 1] = y[i]
            rows[0][d - 1] = z[0]
            g = UTElement(tuple(tuple(r) for r in rows))
        elif len(parts) == 1:
            g = group.from_coordinates(_ints(parts[0]))
        else:
            raise ValueError(f"cannot parse element {text!r}")
    else:
        raise ValueError(f"cannot parse element {text!r}")
    if g.dim != group.dim:
        raise ValueError(f"{group.name} expects {group.dim}x{group.dim} matrices")
    group.coordinates(g)
    return group.name, g


def format_element(ctx: GroupContext, g: UTElement) -> str:
    k = heisenberg_rank(ctx)
    if k is not None:
        d = k + 2
        x = ",".join(str(g[0, 1 + i]) for i in range(k))
        y = ",".join(str(g[1 + i, d - 1]) for i in range(k))
        return f"{ctx.name}:({x};{y};{g[0, d - 1]})"
    if len(ctx.abelian_factor) == ctx.hirsch:
        return f"{ctx.name}:({','.join(map(str, ctx.coordinates(g)))})"
    rows = ",".join("[" + ",".join(map(str, r)) + "]" for r in g.entries)
    return f"{ctx.name}:[{rows}]"


def iter_coordinate_box(ctx: GroupContext, bound: int) -> Iterable[UTElement]:
    """All elements whose Mal'tsev coordinates lie in ``[-bound, bound]``."""
    from itertools import product
    for coords in product(range(-bound, bound + 1), repeat=ctx.hirsch):
        yield ctx.from_coordinates(coords)


def coordinate_profile(ctx: GroupContext, n_max: int, budget: int | None = None) -> list[tuple[int, int]]:
    """``(n, max |a_i|)`` over Mal'tsev coordinates of ``B(n)``."""
    ball = ball_enumerate(ctx, n_max, budget)
    best = [0] * (n_max + 1)
    for g, r in ball.items():
        best[r] = max(best[r], max((abs(a) for a in ctx.coordinates(g)), default=0))
    out, cur = [], 0
    for n in range(n_max + 1):
        cur = max(cur, best[n])
        out.append((n, cur))
    return out
