"""Quotients of a lattice by subgroups spanned by Mal'tsev generators.

A :class:`QuotientView` kills a set of generator indices.  Elements of the
quotient are represented by lattice elements and compared through the
Mal'tsev coordinates that survive.  Killed sets are built either as prefixes
``Delta_j = <xi_1..xi_j>`` of the central series or by adding generators that
are central in the current view, which keeps the surviving coordinates well
defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .intlinalg import gcd_with_cofactors, integer_kernel
from .malcev import (BudgetExceeded, GroupContext, UTElement, default_budget, ut_commutator,
                     ut_inverse, ut_multiply, ut_power)


class UnsupportedGroup(ValueError):
    """The requested computation needs structure the group does not have."""


@dataclass(frozen=True)
class QuotientSpec:
    """Finite quotient ``Gamma / (Lambda * Gamma(m))``.

    ``Gamma(m)`` is the congruence kernel (all Mal'tsev coordinates divisible
    by ``m``); ``lambda_indices`` names the generators spanning ``Lambda``.
    """

    modulus: int
    order: int
    lambda_indices: tuple[int, ...] = ()
    lambda_gens: tuple[UTElement, ...] = field(default=(), compare=False)

    @classmethod
    def build(cls, ctx: GroupContext, modulus: int, killed: Sequence[int] = ()) -> "QuotientSpec":
        killed = tuple(sorted(set(killed)))
        order = modulus ** (ctx.hirsch - len(killed))
        gens = tuple(ctx.generators[i] for i in killed)
        return cls(modulus, order, killed, gens)


@dataclass(frozen=True)
class QuotientView:
    ctx: GroupContext
    killed: frozenset[int] = frozenset()

    @cached_property
    def kept(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.ctx.hirsch) if i not in self.killed)

    @property
    def hirsch(self) -> int:
        return len(self.kept)

    def kill(self, *indices: int) -> "QuotientView":
        return QuotientView(self.ctx, self.killed | frozenset(indices))

    def prefix(self, j: int) -> "QuotientView":
        """Kill the first ``j`` surviving generators."""
        return self.kill(*self.kept[:j])

    def coords(self, g: UTElement) -> tuple[int, ...]:
        full = self.ctx.coordinates(g)
        return tuple(full[i] for i in self.kept)

    def lift(self, coords: Sequence[int]) -> UTElement:
        full = [0] * self.ctx.hirsch
        for i, a in zip(self.kept, coords):
            full[i] = a
        return self.ctx.from_coordinates(full)

    def generator(self, i: int) -> UTElement:
        return self.ctx.generators[i]

    def is_trivial(self, g: UTElement) -> bool:
        return not any(self.coords(g))

    def equal(self, g: UTElement, h: UTElement) -> bool:
        return self.coords(g) == self.coords(h)

    def commutator_coords(self, g: UTElement, h: UTElement) -> tuple[int, ...]:
        return self.coords(ut_commutator(g, h))

    @cached_property
    def central_generators(self) -> tuple[int, ...]:
        gens = self.ctx.generators
        return tuple(i for i in self.kept
                     if all(not any(self.commutator_coords(gens[i], gens[l])) for l in self.kept))

    def is_central(self, g: UTElement) -> bool:
        gens = self.ctx.generators
        return all(not any(self.commutator_coords(g, gens[l])) for l in self.kept)

    def is_abelian(self) -> bool:
        return len(self.central_generators) == len(self.kept)


# ---------------------------------------------------------------------------
# centralizers and the commutator image


def _class_two_split(view: QuotientView) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Central generators ``B`` and the rest ``T``, checking ``view/<B>`` is abelian."""
    bottom = view.central_generators
    top = tuple(i for i in view.kept if i not in bottom)
    quot = view.kill(*bottom)
    gens = view.ctx.generators
    for a in range(len(top)):
        for b in range(a + 1, len(top)):
            if any(quot.commutator_coords(gens[top[a]], gens[top[b]])):
                raise UnsupportedGroup(
                    f"quotient of {view.ctx.name} has class > 2; centralizers need class <= 2")
    return bottom, top


def centralizer_generators(view: QuotientView, g: UTElement) -> list[UTElement]:
    """Generators of the preimage of ``C_view(g)`` (killed part implied).

    In class <= 2 the map ``c -> [g, c]`` is a homomorphism into the central
    generators, linear in the non-central coordinates of ``c``; its integer
    kernel lifts to the centralizer.
    """
    gens = view.ctx.generators
    bottom, top = _class_two_split(view)
    if not top:
        return [gens[i] for i in view.kept]
    pos = {i: n for n, i in enumerate(view.kept)}
    top_pos = {pos[t] for t in top}
    columns = []
    for t in top:
        c = view.commutator_coords(g, gens[t])
        if any(c[p] for p in top_pos):
            raise UnsupportedGroup("commutator left the center of a class-2 quotient")
        columns.append([c[pos[b]] for b in bottom])
    rows = [[columns[j][i] for j in range(len(top))] for i in range(len(bottom))]
    out = []
    for u in integer_kernel(rows, len(top)):
        x = view.ctx.identity()
        for t, a in zip(top, u):
            if a:
                x = ut_multiply(x, ut_power(gens[t], a))
        out.append(x)
    out.extend(gens[b] for b in bottom)
    return out


def commutator_image(view: QuotientView, g: UTElement) -> tuple[int, UTElement]:
    """``(tau, eps)``: ``[g, .]`` maps the centralizer preimage onto ``<xi_f^tau>``.

    ``xi_f`` is the first surviving generator (central in ``view``) and
    ``[g, eps] = xi_f^tau`` in ``view``.
    """
    if not view.kept:
        return 0, view.ctx.identity()
    f = view.kept[0]
    if f not in view.central_generators:
        raise UnsupportedGroup(f"generator {f} is not central in this quotient")
    upper = view.kill(f)
    gens = centralizer_generators(upper, g) if upper.kept else []
    gens = gens + [view.generator(f)]
    images = []
    for eta in gens:
        c = view.commutator_coords(g, eta)
        if any(c[1:]):
            raise UnsupportedGroup("commutator with a centralizer element left <xi_1>")
        images.append(c[0])
    tau, cof = gcd_with_cofactors(images)
    eps = view.ctx.identity()
    for eta, a in zip(gens, cof):
        if a:
            eps = ut_multiply(eps, ut_power(eta, a))
    return tau, eps


def find_conjugator(view: QuotientView, g: UTElement, h: UTElement):
    """Integral conjugacy in ``view``.

    Returns ``("conjugate", x)`` with ``x^-1 g x = h`` in ``view``, or
    ``("obstructed", j, gp, s)``: the images are conjugate modulo the first
    ``j+1`` surviving generators, ``h = gp * xi^s`` there with ``gp`` a
    conjugate of ``g``, and ``s`` lies outside the commutator image.
    """
    kept = view.kept
    x = view.ctx.identity()
    for j in range(len(kept) - 1, -1, -1):
        level = view.prefix(j)
        gp = ut_multiply(ut_multiply(ut_inverse(x), g), x)
        d = level.coords(ut_multiply(ut_inverse(gp), h))
        if any(d[1:]):
            raise AssertionError("conjugacy descent lost its invariant")
        s = d[0]
        if s == 0:
            continue
        tau, eps = commutator_image(level, gp)
        if tau == 0 or s % tau:
            return ("obstructed", j, gp, s)
        x = ut_multiply(x, ut_power(eps, s // tau))
    return ("conjugate", x)


def is_conjugate(view: QuotientView, g: UTElement, h: UTElement) -> bool:
    return find_conjugator(view, g, h)[0] == "conjugate"


# ---------------------------------------------------------------------------
# finite quotients view / view(m)


def reduce_mod(view: QuotientView, g: UTElement, m: int) -> tuple[int, ...]:
    return tuple(a % m for a in view.coords(g))


def finite_class(view: QuotientView, g: UTElement, m: int, budget: int | None = None) -> set:
    """Conjugacy class of the image of ``g`` in ``view / view(m)``.

    Orbit closure under conjugation by the generator images; exact because
    the quotient is finite and generated by them.
    """
    budget = default_budget() if budget is None else budget
    gens = [view.generator(i) for i in view.kept]
    invs = [ut_inverse(x) for x in gens]
    start = reduce_mod(view, g, m)
    seen = {start}
    stack = [start]
    while stack:
        cur = view.lift(stack.pop())
        for x, xi in zip(gens, invs):
            nxt = reduce_mod(view, ut_multiply(ut_multiply(xi, cur), x), m)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > budget:
                    raise BudgetExceeded("conjugacy class exceeds budget")
                stack.append(nxt)
    return seen


def conjugate_in_finite_quotient(view: QuotientView, g: UTElement, h: UTElement, m: int,
                                 budget: int | None = None) -> bool:
    if m == 1:
        return True
    return reduce_mod(view, h, m) in finite_class(view, g, m, budget)
