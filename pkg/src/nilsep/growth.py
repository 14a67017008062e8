"""Desk-scale measurement of residual finiteness and conjugacy separability growth.

Both functions minimise quotient order over a restricted family of finite
quotients, so the values are upper bounds for the unrestricted growth
functions.  The family is recorded on every sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .heisenberg import HeisenbergElement, h_canonical, h_is_conjugate_mod, h_tau
from .intlinalg import gcd_all, prime_power_divisors, smallest_non_divisor
from .malcev import (BudgetExceeded, GroupContext, ball_enumerate, default_budget,
                     heisenberg_rank)
from .quotients import QuotientView, conjugate_in_finite_quotient, is_conjugate

CONGRUENCE = "congruence"
LAMBDA_CONGRUENCE = "lambda-congruence"


@dataclass(frozen=True)
class GrowthSample:
    n: int
    value: int
    witness_count: int
    restricted: str


@dataclass(frozen=True)
class FitReport:
    model: str
    exponent: float
    constant: float
    residual: float
    n_range: tuple[int, int]


class PartialMeasurement(BudgetExceeded):
    """Budget ran out; ``samples`` holds the radii finished before that."""

    def __init__(self, msg: str, samples: list[GrowthSample]):
        super().__init__(msg)
        self.samples = samples


def _running_max(rows: list[tuple[int, int, int]], family: str) -> list[GrowthSample]:
    out, best = [], 0
    for n, v, c in rows:
        best = max(best, v)
        out.append(GrowthSample(n, best, c, family))
    return out


# ---------------------------------------------------------------------------
# residual finiteness


def quotient_family(ctx: GroupContext) -> list[QuotientView]:
    """Views reachable by repeatedly killing subsets of central generators.

    Every such view is a quotient by a normal subgroup spanned by Mal'tsev
    generators; it contains the central-series prefixes and every
    Lambda-subgroup quotient built by the witness code.
    """
    start = QuotientView(ctx)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        central = v.central_generators
        for mask in range(1, 2 ** len(central)):
            w = v.kill(*(c for b, c in enumerate(central) if mask >> b & 1))
            if w.kept and w not in seen:
                seen.add(w)
                stack.append(w)
    return sorted(seen, key=lambda w: (len(w.killed), sorted(w.killed)))


def restricted_depth(family: list[QuotientView], g) -> int:
    """Least ``|V / V(m)|`` over the family with ``g`` nontrivial in it."""
    best = None
    for v in family:
        t = gcd_all(v.coords(g))
        if t:
            order = smallest_non_divisor(t) ** v.hirsch
            best = order if best is None else min(best, order)
    if best is None:
        raise ValueError("identity has no residual finiteness depth")
    return best


def measure_rf_growth(ctx: GroupContext, n_max: int, budget: int | None = None) -> list[GrowthSample]:
    budget = default_budget() if budget is None else budget
    family = quotient_family(ctx)
    rows = []
    for n in range(1, n_max + 1):
        try:
            ball = ball_enumerate(ctx, n, budget)
        except BudgetExceeded as exc:
            raise PartialMeasurement(str(exc), _running_max(rows, LAMBDA_CONGRUENCE)) from exc
        layer = [g for g, r in ball.items() if r == n]
        v = max((restricted_depth(family, g) for g in layer), default=0)
        rows.append((n, v, len(ball) - 1))
    return _running_max(rows, LAMBDA_CONGRUENCE)


# ---------------------------------------------------------------------------
# conjugacy separability


def _heisenberg_pair_cd(g: HeisenbergElement, h: HeisenbergElement) -> int:
    """Least congruence modulus separating two distinct class representatives."""
    if g.x == h.x and g.y == h.y:
        t = h.z - g.z
        tau = h_tau(g)
        if tau == 0:
            return smallest_non_divisor(t)
        return min(p**a for p, a in prime_power_divisors(tau) if t % p**a)
    m = 2
    while h_is_conjugate_mod(g, h, m):
        m += 1
    return m


def conj_family(ctx: GroupContext, family: str) -> list[QuotientView]:
    if family == CONGRUENCE:
        return [QuotientView(ctx)]
    if family == LAMBDA_CONGRUENCE:
        return quotient_family(ctx)
    raise ValueError(f"unknown quotient family {family!r}")


def pair_depth(views: list[QuotientView], g, h, budget: int, closed_form: bool = False) -> int:
    """Least ``|V / V(m)|`` over the views with the images of ``g, h`` non-conjugate.

    Abelian views compare coordinates; other views scan ``m`` upwards with
    orbit closure (or the Heisenberg closed form on the full group when
    ``closed_form`` is set) while ``m^h(V)`` can still beat the best so far.
    """
    best = None
    for v in sorted(views, key=lambda w: not w.is_abelian()):
        if v.is_abelian():
            t = gcd_all(b - a for a, b in zip(v.coords(g), v.coords(h)))
            if t:
                cand = smallest_non_divisor(t) ** v.hirsch
                best = cand if best is None else min(best, cand)
            continue
        if closed_form and not v.killed:
            cand = _heisenberg_pair_cd(HeisenbergElement.from_ut(g),
                                       HeisenbergElement.from_ut(h)) ** v.hirsch
            best = cand if best is None else min(best, cand)
            continue
        if is_conjugate(v, g, h):
            continue
        m = 2
        while best is None or m ** v.hirsch < best:
            if m ** v.hirsch > budget:
                raise BudgetExceeded("separating modulus search exceeds budget")
            if not conjugate_in_finite_quotient(v, g, h, m, budget):
                best = m ** v.hirsch
                break
            m += 1
    if best is None:
        raise ValueError("elements are conjugate")
    return best


def _heisenberg_class_radii(ctx: GroupContext, n_max: int, budget: int) -> dict:
    radii = {}
    for g, r in ball_enumerate(ctx, n_max, budget).items():
        radii.setdefault(h_canonical(HeisenbergElement.from_ut(g)), r)
    return radii


def _measure_conj_heisenberg(ctx: GroupContext, n_max: int, budget: int,
                             family: str) -> list[GrowthSample]:
    views = conj_family(ctx, family)
    abelian_views = [v for v in views if v.is_abelian()]
    rows = []
    try:
        radii = _heisenberg_class_radii(ctx, n_max, budget)
    except BudgetExceeded as exc:
        raise PartialMeasurement(str(exc), []) from exc
    by_xy: dict[tuple, list] = {}
    for c, r in radii.items():
        by_xy.setdefault(c.x + c.y, []).append((c, r))
    keys = sorted(by_xy)
    best = 0

    def cd(a, b):
        return pair_depth(views, a.to_ut(), b.to_ut(), budget, closed_form=True)

    for n in range(1, n_max + 1):
        groups = {k: [c for c, r in by_xy[k] if r <= n] for k in keys}
        groups = {k: v for k, v in groups.items() if v}
        n_classes = sum(len(v) for v in groups.values())
        # same (x, y): only the full group can separate, via tau and the z-offset
        for cls in groups.values():
            for i, a in enumerate(cls):
                for b in cls[i + 1:]:
                    best = max(best, cd(a, b))
        # different (x, y): any quotient seeing the difference bounds the depth
        gk = sorted(groups)
        for i, u in enumerate(gk):
            for w in gk[i + 1:]:
                diffs = [q - p for p, q in zip(u, w)]
                bound = smallest_non_divisor(gcd_all(diffs)) ** ctx.hirsch
                for v in abelian_views:
                    t = gcd_all(diffs[i - 1] for i in v.kept)
                    if t:
                        bound = min(bound, smallest_non_divisor(t) ** v.hirsch)
                if bound <= best:
                    continue
                for a in groups[u]:
                    for b in groups[w]:
                        best = max(best, cd(a, b))
        rows.append((n, best, n_classes * (n_classes - 1) // 2))
    return _running_max(rows, family)


def _measure_conj_generic(ctx: GroupContext, n_max: int, budget: int,
                          family: str) -> list[GrowthSample]:
    """Class representatives via the integral conjugacy test, then the family minimum."""
    view = QuotientView(ctx)
    views = conj_family(ctx, family)
    rows = []
    reps: list = [ctx.identity()]
    best = 0
    for n in range(1, n_max + 1):
        try:
            ball = ball_enumerate(ctx, n, budget)
        except BudgetExceeded as exc:
            raise PartialMeasurement(str(exc), _running_max(rows, family)) from exc
        new = []
        for g, r in ball.items():
            if r == n and not any(is_conjugate(view, c, g) for c in reps + new):
                new.append(g)
        try:
            for i, a in enumerate(new):
                for b in reps + new[:i]:
                    best = max(best, pair_depth(views, b, a, budget))
        except BudgetExceeded as exc:
            raise PartialMeasurement(str(exc), _running_max(rows, family)) from exc
        reps += new
        k = len(reps)
        rows.append((n, best, k * (k - 1) // 2))
    return _running_max(rows, family)


def measure_conj_growth(ctx: GroupContext, n_max: int, budget: int | None = None,
                        family: str = LAMBDA_CONGRUENCE) -> list[GrowthSample]:
    """Max restricted CD over non-conjugate class pairs meeting ``B(n)``."""
    budget = default_budget() if budget is None else budget
    if heisenberg_rank(ctx) is not None:
        return _measure_conj_heisenberg(ctx, n_max, budget, family)
    return _measure_conj_generic(ctx, n_max, budget, family)


def conj_growth_raw(ctx: GroupContext, n_max: int, budget: int | None = None,
                    family: str = LAMBDA_CONGRUENCE) -> list[GrowthSample]:
    """Raw pair scan over ``B(n) x B(n)`` with orbit-closure conjugacy (small ``n`` oracle)."""
    budget = default_budget() if budget is None else budget
    view = QuotientView(ctx)
    views = conj_family(ctx, family)
    ball = ball_enumerate(ctx, n_max, budget)
    elems = list(ball)
    rows = []
    best = 0
    count = 0
    for n in range(1, n_max + 1):
        inside = [g for g in elems if ball[g] <= n]
        for i, a in enumerate(inside):
            for b in inside[i + 1:]:
                if max(ball[a], ball[b]) != n or is_conjugate(view, a, b):
                    continue
                count += 1
                best = max(best, pair_depth(views, a, b, budget))
        rows.append((n, best, count))
    return _running_max(rows, family)


# ---------------------------------------------------------------------------
# fitting


def fit_exponent(samples: list[GrowthSample], model: str = "power", n_min: int = 3) -> FitReport:
    """Least squares of ``log value`` against ``log n`` (power) or ``log log n`` (polylog)."""
    pts = [(s.n, s.value) for s in samples if s.n >= n_min]
    if len(pts) < 4:
        raise ValueError("fit needs at least 4 samples with n >= n_min")
    if any(v <= 0 for _, v in pts):
        raise ValueError("fit needs positive values")
    if model == "power":
        xs = [log(n) for n, _ in pts]
    elif model == "polylog":
        xs = [log(log(n)) for n, _ in pts]
    else:
        raise ValueError(f"unknown model {model!r}")
    ys = np.array([log(v) for _, v in pts])
    x = np.array(xs)
    if np.ptp(x) == 0:
        raise ValueError("degenerate samples: a single abscissa")
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(a, ys, rcond=None)
    resid = float(np.sqrt(np.mean((a @ np.array([slope, icpt]) - ys) ** 2)))
    return FitReport(model, float(slope), float(np.exp(icpt)), resid,
                     (pts[0][0], pts[-1][0]))
