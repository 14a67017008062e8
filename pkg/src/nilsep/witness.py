"""Invariants and certificates for residual finiteness and conjugacy separability.

The machinery works top-down through quotient views: ``tau`` measures the
commutator image of an element in the bottom generator, ``e`` accumulates
its p-adic valuations along the central series, and Lambda-subgroups cut a
group down to a quotient with rank-one center in which a given central
element survives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from math import gcd

from .heisenberg import HeisenbergElement, h_is_conjugate_mod, h_tau
from .intlinalg import (gcd_all, prime_power_divisors, smallest_non_divisor,
                        smallest_prime_not_dividing, valuation)
from .malcev import (BudgetExceeded, GroupContext, UTElement, ball_enumerate, default_budget,
                     format_element, get_group, heisenberg_rank, parse_element, ut_commutator)
from .quotients import (QuotientSpec, QuotientView, UnsupportedGroup, commutator_image,
                        conjugate_in_finite_quotient, find_conjugator)

MAX_CLASS = 3


def _check_class(ctx: GroupContext):
    if ctx.nilpotency_class > MAX_CLASS:
        raise UnsupportedGroup(f"{ctx.name} has class {ctx.nilpotency_class} > {MAX_CLASS}")


# ---------------------------------------------------------------------------
# tau and e


def tau_general(ctx: GroupContext, g: UTElement) -> int:
    """Generator exponent of ``[g, C]`` inside ``<xi_1>``.

    ``C`` is the preimage of the centralizer of ``g`` modulo ``xi_1``; it is
    computed as an integer kernel in the class-2 quotient.
    """
    _check_class(ctx)
    return commutator_image(QuotientView(ctx), g)[0]


def tau_brute_force(ctx: GroupContext, g: UTElement, radius: int) -> int:
    """gcd of the ``xi_1`` exponents of ``[g, eta]`` over ``eta`` in the ball.

    Only ``eta`` whose commutator with ``g`` lies in ``<xi_1>`` count.
    """
    view = QuotientView(ctx)
    t = 0
    for eta in ball_enumerate(ctx, radius):
        c = view.coords(ut_commutator(g, eta))
        if not any(c[1:]):
            t = gcd(t, c[0])
    return t


def _prefix_levels(view: QuotientView, g: UTElement):
    """Yield ``(level, tau)`` down the prefix chain until the view is abelian."""
    level = view
    while level.kept and not level.is_abelian():
        tau, _ = commutator_image(level, g)
        yield level, tau
        level = level.prefix(1)


def e_exponent_view(view: QuotientView, g: UTElement, p: int) -> int:
    return sum(valuation(tau, p) for _, tau in _prefix_levels(view, g) if tau)


def e_exponent(ctx: GroupContext, g: UTElement, p: int) -> int:
    """Sum of ``v_p(tau)`` over the central series; 0 for abelian groups."""
    _check_class(ctx)
    return e_exponent_view(QuotientView(ctx), g, p)


# ---------------------------------------------------------------------------
# Lambda subgroups and psi


def _lambda_view(view: QuotientView, g: UTElement) -> QuotientView:
    """Largest killed set of central generators leaving a rank-one center with g alive."""
    central = view.central_generators
    if len(central) <= 1:
        return view
    coords = dict(zip(view.kept, view.coords(g)))
    best = None
    for e in central:
        if not coords[e]:
            continue
        cand = _lambda_view(view.kill(*(c for c in central if c != e)), g)
        if best is None or cand.hirsch < best.hirsch:
            best = cand
    if best is None:
        raise ValueError("element is trivial on the center")
    return best


def lambda_view(ctx: GroupContext, g: UTElement, base: QuotientView | None = None) -> QuotientView:
    view = base if base is not None else QuotientView(ctx)
    if view.is_trivial(g):
        raise ValueError("element is trivial")
    if not view.is_central(g):
        raise ValueError("element is not central")
    return _lambda_view(view, g)


def lambda_subgroup(ctx: GroupContext, g: UTElement) -> list[UTElement]:
    """Generators of Lambda_g (empty when the center already has rank one)."""
    view = lambda_view(ctx, g)
    return [ctx.generators[i] for i in sorted(view.killed)]


def psi_invariants(ctx: GroupContext, search_radius: int = 2,
                   budget: int | None = None) -> tuple[int, int | None]:
    """``(psi_RF, psi_Conj)``; ``psi_Conj`` is None without a central commutator."""
    full = QuotientView(ctx)
    psi_rf = max(lambda_view(ctx, ctx.generators[i]).hirsch for i in full.central_generators)
    ball = list(ball_enumerate(ctx, search_radius, budget))
    psi_conj = None
    seen = set()
    for x in ball:
        for y in ball:
            c = ut_commutator(x, y)
            if c.is_identity() or c in seen:
                continue
            seen.add(c)
            if full.is_central(c):
                h = lambda_view(ctx, c).hirsch
                psi_conj = h if psi_conj is None else max(psi_conj, h)
    return psi_rf, psi_conj


# ---------------------------------------------------------------------------
# certificates


@dataclass
class SeparabilityCertificate:
    kind: str
    group: str
    inputs: tuple[str, ...]
    spec: QuotientSpec
    case_tag: str
    verified: bool
    method: str
    min_modulus: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        ctx = get_group(self.group)
        return {
            "kind": self.kind,
            "group": self.group,
            "inputs": list(self.inputs),
            "modulus": self.spec.modulus,
            "lambda_indices": list(self.spec.lambda_indices),
            "lambda_gens": [format_element(ctx, x) for x in self.spec.lambda_gens],
            "order": self.spec.order,
            "quotient_order": self.spec.order,
            "case_tag": self.case_tag,
            "case": self.case_tag,
            "verified": self.verified,
            "method": self.method,
            "min_modulus": self.min_modulus,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SeparabilityCertificate":
        ctx = get_group(d["group"])
        spec = QuotientSpec.build(ctx, d["modulus"], d.get("lambda_indices", ()))
        if spec.order != d["order"]:
            raise ValueError("certificate order does not match its quotient")
        known = {"kind", "group", "inputs", "modulus", "lambda_indices", "lambda_gens", "order",
                 "quotient_order", "case_tag", "case", "verified", "method", "min_modulus"}
        return cls(d["kind"], d["group"], tuple(d["inputs"]), spec, d["case_tag"], d["verified"],
                   d["method"], d.get("min_modulus"),
                   {k: v for k, v in d.items() if k not in known})

    @classmethod
    def from_json(cls, text: str) -> "SeparabilityCertificate":
        return cls.from_dict(json.loads(text))


def _abelian_top(view: QuotientView) -> QuotientView:
    top = view
    while not top.is_abelian():
        top = top.prefix(1)
    return top


def _separated(ctx: GroupContext, g: UTElement, h: UTElement, m: int, killed=(),
               budget: int | None = None) -> tuple[bool, str]:
    """Independent non-conjugacy check in ``view / view(m)``."""
    view = QuotientView(ctx, frozenset(killed))
    if m == 1:
        return False, "orbit-oracle"
    return not conjugate_in_finite_quotient(view, g, h, m, budget), "orbit-oracle"


def _min_congruence_modulus(ctx: GroupContext, g: UTElement, h: UTElement, upto: int,
                            budget: int) -> int | None:
    k = heisenberg_rank(ctx)
    for m in range(2, upto + 1):
        if k is not None:
            if not h_is_conjugate_mod(HeisenbergElement.from_ut(g), HeisenbergElement.from_ut(h), m):
                return m
        elif m ** ctx.hirsch > budget:
            return None
        elif _separated(ctx, g, h, m, budget=budget)[0]:
            return m
    return upto


def _choose_prime_power(view: QuotientView, j: int, gp: UTElement, s: int) -> tuple[int, str]:
    level = view.prefix(j)
    below = level.prefix(1)
    tau, _ = commutator_image(level, gp)
    best = None
    if tau:
        t = s % tau
        for p, a in prime_power_divisors(tau):
            if t % p**a:
                omega = a + e_exponent_view(below, gp, p)
                cand = (p**omega, p)
                best = cand if best is None or cand < best else best
        case = "B"
    else:
        # any p^a with p^a not dividing t works; scan primes up to the first non-divisor
        pmax = smallest_prime_not_dividing(s)
        for p in range(2, pmax + 1):
            if any(p % q == 0 for q in range(2, p)):
                continue
            omega = valuation(s, p) + 1 + e_exponent_view(below, gp, p)
            cand = (p**omega, p)
            best = cand if best is None or cand < best else best
        case = "C"
    return best[0], case


def conjugacy_witness(ctx: GroupContext, g: UTElement, h: UTElement,
                      budget: int | None = None) -> SeparabilityCertificate:
    """A congruence quotient in which ``g`` and ``h`` are not conjugate.

    Abelianization differences use the smallest non-divisor of the
    coordinate differences.  Otherwise the conjugacy descent stops at a level
    where ``h = g' xi^s`` with ``s`` outside the commutator image ``<xi^tau>``;
    a prime power ``p^a`` dividing ``tau`` but not ``s mod tau`` (any ``p^a``
    not dividing ``s`` when ``tau = 0``) is inflated by the ``e`` exponent of
    the level below.
    """
    _check_class(ctx)
    budget = default_budget() if budget is None else budget
    view = QuotientView(ctx)
    top = _abelian_top(view)
    diffs = [b - a for a, b in zip(top.coords(g), top.coords(h))]
    if any(diffs):
        modulus, case = smallest_non_divisor(gcd_all(diffs)), "A"
    else:
        res = find_conjugator(view, g, h)
        if res[0] == "conjugate":
            raise ValueError("elements are conjugate; no quotient separates them")
        _, j, gp, s = res
        modulus, case = _choose_prime_power(view, j, gp, s)
    spec = QuotientSpec.build(ctx, modulus)
    try:
        ok, method = _separated(ctx, g, h, modulus, budget=budget)
    except BudgetExceeded:
        ok, method = False, "orbit-oracle"
    try:
        least = _min_congruence_modulus(ctx, g, h, modulus, budget)
    except BudgetExceeded:
        least = None
    return SeparabilityCertificate(
        "conjugacy", ctx.name, (format_element(ctx, g), format_element(ctx, h)), spec, case, ok,
        method, least)


def rf_witness(ctx: GroupContext, g: UTElement) -> SeparabilityCertificate:
    """A quotient ``Gamma / (Lambda Gamma(p))`` in which ``g`` survives.

    Non-central elements are pushed down by killing the center until they
    become central; a Lambda-subgroup then leaves a rank-one center and ``p``
    is the smallest prime not dividing the surviving coordinates.
    """
    view = QuotientView(ctx)
    if view.is_trivial(g):
        raise ValueError("the identity survives in no quotient")
    depth = 0
    while not view.is_central(g):
        view = view.kill(*view.central_generators)
        depth += 1
    lam = lambda_view(ctx, g, view)
    alpha = gcd_all(lam.coords(g))
    p = smallest_prime_not_dividing(alpha)
    spec = QuotientSpec.build(ctx, p, lam.killed)
    ok = any(a % p for a in lam.coords(g))
    case = "central" if depth == 0 else f"center-quotient-{depth}"
    return SeparabilityCertificate(
        "residual-finiteness", ctx.name, (format_element(ctx, g),), spec, case, ok, "image-check")


def verify_certificate(cert: SeparabilityCertificate, budget: int | None = None) -> bool:
    """Re-run the independent check named by the certificate."""
    ctx = get_group(cert.group)
    elems = [parse_element(s, ctx)[1] for s in cert.inputs]
    killed = cert.spec.lambda_indices
    m = cert.spec.modulus
    if cert.kind == "residual-finiteness":
        view = QuotientView(ctx, frozenset(killed))
        return any(a % m for a in view.coords(elems[0]))
    if cert.kind == "conjugacy":
        return _separated(ctx, elems[0], elems[1], m, killed, budget)[0]
    raise ValueError(f"unknown certificate kind {cert.kind!r}")


# ---------------------------------------------------------------------------
# centralizer lifting in H_3


def h3_containment_violations(g: HeisenbergElement, p: int, alpha: int, e: int) -> int:
    """Count centralizer elements mod ``p^alpha`` that do not lift.

    Enumerates ``H_3(Z/p^alpha)``; an element centralizing ``g`` must reduce
    mod ``p^(alpha-e)`` into the image of ``C(g)``.  ``C(g)`` is ``H_3`` for
    central ``g`` and ``<(x, y)/tau> x <lambda>`` otherwise.
    """
    if g.k != 1:
        raise ValueError("containment check is written for H_3")
    M = p**alpha
    q = p ** max(alpha - e, 0)
    x0, y0 = g.x[0], g.y[0]
    tau = h_tau(g)
    if tau:
        vx, vy = x0 // tau, y0 // tau
        image = {((k * vx) % q, (k * vy) % q) for k in range(q)}
    violations = 0
    for x, y, _z in product(range(M), repeat=3):
        if (x0 * y - x * y0) % M:
            continue
        if tau and (x % q, y % q) not in image:
            violations += 1
    return violations
