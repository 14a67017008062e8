import random
from itertools import product

import pytest

from nilsep.malcev import (BudgetExceeded, NotInLattice, UTElement, ball_enumerate, ball_layers,
                           coordinate_profile, format_element, get_group, parse_element,
                           ut_commutator, ut_inverse, ut_multiply, ut_power, word_length)


def test_unitriangular_validation():
    with pytest.raises(ValueError):
        UTElement(((1, 0), (1, 1)))
    with pytest.raises(ValueError):
        UTElement(((2, 0), (0, 1)))


def test_identity_and_small_products(h3, el):
    a, b = el("h3:(1;0;0)"), el("h3:(0;1;0)")
    assert ut_multiply(h3.identity(), a) == a
    assert ut_multiply(a, b) == el("h3:(1;1;1)")
    assert ut_multiply(b, a) == el("h3:(1;1;0)")
    with pytest.raises(ValueError):
        ut_multiply(a, UTElement.identity(4))


def test_commutator_and_power(h3, el):
    a, b = el("h3:(1;0;0)"), el("h3:(0;1;0)")
    assert ut_commutator(a, a).is_identity()
    assert ut_commutator(a, b) == el("h3:(0;0;1)")
    assert ut_power(a, -2) == el("h3:(-2;0;0)")
    g = el("h3:(2;-3;5)")
    assert ut_commutator(a, g) == ut_multiply(ut_multiply(ut_inverse(a), ut_inverse(g)),
                                              ut_multiply(a, g))


@pytest.mark.parametrize("name", ["z2", "h3", "h5", "ut4", "h3xz"])
def test_group_axioms_on_ball(name):
    ctx = get_group(name)
    ball = list(ball_enumerate(ctx, 2))
    rnd = random.Random(1)
    for _ in range(300):
        a, b, c = (rnd.choice(ball) for _ in range(3))
        assert ut_multiply(ut_multiply(a, b), c) == ut_multiply(a, ut_multiply(b, c))
        assert ut_multiply(a, ut_inverse(a)).is_identity()
        assert ut_multiply(ut_inverse(a), a).is_identity()


@pytest.mark.parametrize("name", ["z3", "h3", "h5", "h7", "ut4", "ut5", "h3xz"])
def test_coordinates_round_trip(name):
    ctx = get_group(name)
    rnd = random.Random(7)
    for _ in range(100):
        coords = tuple(rnd.randint(-20, 20) for _ in range(ctx.hirsch))
        assert ctx.coordinates(ctx.from_coordinates(coords)) == coords


@pytest.mark.parametrize("name", ["h3", "h5", "ut4", "h3xz"])
def test_generator_order_is_compatible(name):
    ctx = get_group(name)
    gens = ctx.generators
    assert ctx.is_central(gens[0])
    # commutators of xi_j with anything lie in <xi_1..xi_{j-1}>
    for j, x in enumerate(gens):
        for y in gens:
            c = ctx.coordinates(ut_commutator(x, y))
            assert not any(c[j:])


def test_not_in_lattice():
    ctx = get_group("h3xz")
    g = UTElement.elementary(5, 0, 4)
    with pytest.raises(NotInLattice):
        ctx.coordinates(g)
    assert not ctx.contains(g)


def test_ball_small_cases(h3):
    assert ball_enumerate(h3, 0) == {h3.identity(): 0}
    b1 = ball_enumerate(h3, 1)
    assert len(b1) == 7


def _bfs_oracle(ctx, n):
    gens = list(ctx.S) + [ut_inverse(x) for x in ctx.S]
    dist = {ctx.identity(): 0}
    frontier = [ctx.identity()]
    for r in range(1, n + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = ut_multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        frontier = nxt
    return dist


@pytest.mark.parametrize("name,n", [("h3", 2), ("h3", 4), ("ut4", 3), ("h5", 3)])
def test_ball_matches_plain_bfs(name, n):
    ctx = get_group(name)
    assert ball_enumerate(ctx, n) == _bfs_oracle(ctx, n)


def test_ball_restriction_and_layers(h3):
    b4 = ball_enumerate(h3, 4)
    b3 = ball_enumerate(h3, 3)
    assert {g: r for g, r in b4.items() if r <= 3} == b3
    layers = ball_layers(h3, 4)
    assert sum(len(l) for l in layers) == len(b4)


def test_ball_budget(h3):
    with pytest.raises(BudgetExceeded):
        ball_enumerate(get_group("h5"), 8, budget=1000)


def test_word_length(h3, el):
    assert word_length(h3, h3.identity(), 5) == 0
    assert word_length(h3, el("h3:(0;0;1)"), 5) == 1
    lam4 = el("h3:(0;0;4)")
    assert word_length(h3, lam4, 10) == _bfs_oracle(h3, 10)[lam4]
    assert word_length(h3, el("h3:(9;9;0)"), 3) is None


def test_triangle_inequality(h3):
    ball = ball_enumerate(h3, 4)
    big = ball_enumerate(h3, 8)
    items = list(ball.items())
    rnd = random.Random(3)
    for _ in range(2000):
        (a, ra), (b, rb) = rnd.choice(items), rnd.choice(items)
        assert big[ut_multiply(a, b)] <= ra + rb


def test_configurable_generating_set(h3):
    std = h3.with_word_generators(h3.generators[1:])
    assert len(ball_enumerate(std, 1)) == 5
    assert word_length(std, parse_element("h3:(0;0;1)")[1], 6) == 4


def test_parse_and_format(h3, h5):
    name, g = parse_element("h5:(1,2;3,4;5)")
    assert name == "h5"
    assert format_element(h5, g) == "h5:(1,2;3,4;5)"
    _, u = parse_element("ut4:[[1,1,0,0],[0,1,2,0],[0,0,1,3],[0,0,0,1]]")
    assert format_element(get_group("ut4"), u) == "ut4:[[1,1,0,0],[0,1,2,0],[0,0,1,3],[0,0,0,1]]"
    _, z = parse_element("z2:(3,-4)")
    assert format_element(get_group("z2"), z) == "z2:(3,-4)"
    with pytest.raises(ValueError):
        parse_element("h3:(1;2)")
    with pytest.raises(KeyError):
        parse_element("q9:(1)")


@pytest.mark.parametrize("name,n_max", [("h3", 8), ("ut4", 8), ("h5", 6)])
def test_coordinate_bound_constant(name, n_max):
    ctx = get_group(name)
    prof = coordinate_profile(ctx, n_max)
    ratios = [a / n ** ctx.nilpotency_class for n, a in prof[1:]]
    C = max(ratios)
    assert all(a <= C * n ** ctx.nilpotency_class for n, a in prof[1:])
    # the ratio settles rather than grows on the tail
    half = n_max // 2
    assert max(ratios[half:]) <= 1.1 * max(ratios[2:half])
    print(f"{name}: measured coordinate constant C = {C:.3f}, tail ratio {ratios[-1]:.3f}")


def test_budget_failure_leaves_cache_consistent():
    from nilsep.malcev import clear_ball_cache
    clear_ball_cache()
    h5 = get_group("h5")
    with pytest.raises(BudgetExceeded):
        ball_enumerate(h5, 6, budget=500)
    b = ball_enumerate(h5, 6)
    assert max(b.values()) == 6
    assert b == _bfs_oracle(h5, 6)
