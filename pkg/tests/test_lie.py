import random
from fractions import Fraction

import pytest

from nilsep.lie import (RationalMatrix, adjoint_matrix, bch_product, bch_series, bracket,
                        distortion_profile, from_lie_coordinates, induced_basis, lie_coordinates,
                        lie_norm, mat_exp, mat_log, matmul_square)
from nilsep.malcev import get_group, parse_element, ut_multiply
from nilsep.growth import GrowthSample, fit_exponent


def _rand_elem(ctx, rnd, bound=10):
    return ctx.from_coordinates([rnd.randint(-bound, bound) for _ in range(ctx.hirsch)])


def test_log_exp_small_cases(h3, el):
    assert mat_log(h3.identity()).is_zero()
    assert mat_exp(RationalMatrix.zero(3)) == RationalMatrix.identity(3)
    lam = el("h3:(0;0;1)")
    assert mat_log(lam) == RationalMatrix.from_ut(lam) - RationalMatrix.identity(3)
    alpha = el("h3:(1;0;0)")
    assert mat_exp(induced_basis(h3)[1]).to_ut() == alpha
    with pytest.raises(ValueError):
        mat_exp(RationalMatrix.identity(3))


def test_heisenberg_log_coordinates(h3, el):
    rnd = random.Random(5)
    for _ in range(50):
        x, y, z = (rnd.randint(-20, 20) for _ in range(3))
        v = lie_coordinates(h3, mat_log(el(f"h3:({x};{y};{z})")))
        # basis order (lambda, alpha, beta)
        assert v.coords == (Fraction(z) - Fraction(x * y, 2), x, y)
    assert lie_norm(h3, mat_log(el("h3:(2;3;5)"))) == 7
    assert lie_norm(h3, RationalMatrix.zero(3)) == 0
    for b in induced_basis(h3):
        assert lie_norm(h3, b) == 1


def test_coordinates_round_trip(ut4):
    rnd = random.Random(6)
    for _ in range(30):
        A = mat_log(_rand_elem(ut4, rnd))
        assert from_lie_coordinates(ut4, lie_coordinates(ut4, A).coords) == A


def test_exp_log_round_trip_random_ut4():
    rnd = random.Random(8)
    for _ in range(100):
        rows = [[int(i == j) if j <= i else rnd.randint(-1000, 1000) for j in range(4)]
                for i in range(4)]
        g = RationalMatrix.of(rows)
        assert mat_exp(mat_log(g)) == g


def test_bch_examples(h3, el):
    A = mat_log(el("h3:(2;3;5)"))
    Z = RationalMatrix.zero(3)
    assert bch_product(A, Z, 2) == A
    B = mat_log(el("h3:(-1;4;2)"))
    assert bch_product(A, B, 2) == A + B + bracket(A, B).scale(Fraction(1, 2))
    with pytest.raises(ValueError):
        bch_product(A, B, 6)


@pytest.mark.parametrize("d", [4, 5, 6])
def test_bch_table_matches_matrix_route(d):
    ctx = get_group(f"ut{d}")
    rnd = random.Random(d)
    for _ in range(25):
        A = mat_log(_rand_elem(ctx, rnd, 6))
        B = mat_log(_rand_elem(ctx, rnd, 6))
        assert bch_series(A, B, d - 1) == bch_product(A, B, d - 1)


def test_bch_truncation_needs_degree_c():
    # in class 4 the brackets of length 4 do not vanish; stopping at 3 is wrong
    ctx = get_group("ut5")
    rnd = random.Random(11)
    A = mat_log(_rand_elem(ctx, rnd, 6))
    B = mat_log(_rand_elem(ctx, rnd, 6))
    assert bch_series(A, B, 3) != bch_product(A, B, 4)
    assert bch_series(A, B, 4) == bch_product(A, B, 4)


def test_adjoint_examples(h3, el):
    one = adjoint_matrix(h3, h3.identity())
    assert one == tuple(tuple(Fraction(int(i == j)) for j in range(3)) for i in range(3))
    a, b = 4, -7
    ad = adjoint_matrix(h3, el(f"h3:({a};{b};11)"))
    assert ad[0] == (1, -b, a)
    assert ad[1] == (0, 1, 0) and ad[2] == (0, 0, 1)


def test_adjoint_routes_and_homomorphism(ut4):
    rnd = random.Random(9)
    for _ in range(20):
        g, h = _rand_elem(ut4, rnd, 5), _rand_elem(ut4, rnd, 5)
        assert adjoint_matrix(ut4, g, "series") == adjoint_matrix(ut4, g, "conjugation")
        assert adjoint_matrix(ut4, ut_multiply(g, h)) == matmul_square(adjoint_matrix(ut4, g),
                                                                      adjoint_matrix(ut4, h))
    with pytest.raises(ValueError):
        adjoint_matrix(ut4, ut4.identity(), "bogus")


@pytest.mark.parametrize("name,n_max", [("h3", 8), ("ut4", 6), ("h5", 6)])
def test_distortion_diagnostics(name, n_max):
    ctx = get_group(name)
    rows = distortion_profile(ctx, n_max)
    assert rows[0] == (0, 0, 1)
    for col in (1, 2):
        fit = fit_exponent([GrowthSample(r[0], r[col], 0, "") for r in rows], "power")
        assert fit.exponent <= ctx.nilpotency_class + 1
        print(f"{name} column {col}: fitted degree {fit.exponent:.2f}")


def test_integral_log_matches_rational_route(ut4):
    rnd = random.Random(12)
    for ctx in (ut4, get_group("ut6")):
        for _ in range(30):
            g = _rand_elem(ctx, rnd, 50)
            assert mat_log(g) == mat_log(RationalMatrix.from_ut(g))


def test_lie_coordinates_generic_solver_agrees(ut4):
    from nilsep.lie import _basis_solver
    rnd = random.Random(13)
    slots, solve, _ = _basis_solver(ut4)
    for _ in range(20):
        A = mat_log(_rand_elem(ut4, rnd, 9))
        vec = [A.rows[i][j] for i, j in slots]
        generic = tuple(sum(x * v for x, v in zip(row, vec)) for row in solve)
        assert generic == lie_coordinates(ut4, A).coords
