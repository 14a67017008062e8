import json
import math

import pytest

from nilsep.growth import (CONGRUENCE, GrowthSample, conj_growth_raw, fit_exponent,
                           measure_conj_growth, measure_rf_growth, quotient_family,
                           restricted_depth)
from nilsep.heisenberg import h_lower_bound_pair
from nilsep.intlinalg import smallest_non_divisor
from nilsep.malcev import ball_enumerate, get_group, parse_element
from nilsep.report import emit_report


def _values(samples):
    return [s.value for s in samples]


def test_fit_exact_power():
    s = [GrowthSample(n, n**3, 0, "") for n in range(1, 13)]
    f = fit_exponent(s, "power")
    assert f.exponent == pytest.approx(3.0) and f.residual == pytest.approx(0, abs=1e-9)
    assert f.n_range == (3, 12)


def test_fit_polylog_synthetic():
    s = [GrowthSample(n, 5 * math.log(n) ** 3, 0, "") for n in range(3, 20)]
    assert fit_exponent(s, "polylog").exponent == pytest.approx(3.0)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_exponent([GrowthSample(n, n, 0, "") for n in range(1, 5)])
    with pytest.raises(ValueError):
        fit_exponent([GrowthSample(n, 0, 0, "") for n in range(3, 9)])
    with pytest.raises(ValueError):
        fit_exponent([GrowthSample(n, n, 0, "") for n in range(3, 9)], "cubic")


def test_quotient_family_h3():
    fam = quotient_family(get_group("h3"))
    assert sorted(v.kept for v in fam) == [(0, 1, 2), (1,), (1, 2), (2,)]


def test_rf_small_cases():
    h3 = get_group("h3")
    fam = quotient_family(h3)
    assert restricted_depth(fam, parse_element("h3:(0;0;60)")[1]) == 343
    assert restricted_depth(fam, parse_element("h3:(1;0;0)")[1]) == 2
    assert _values(measure_rf_growth(h3, 1)) == [8]
    z = get_group("z")
    # element k has depth = least non-divisor of k; lcm(1..j) gives the records
    for j, k in [(2, 2), (3, 6), (4, 12)]:
        assert restricted_depth(quotient_family(z), parse_element(f"z:({k})")[1]) == \
            smallest_non_divisor(k)


@pytest.mark.parametrize("name", ["z", "z2", "h3", "h5"])
def test_rf_samples_monotone_and_counted(name):
    ctx = get_group(name)
    n_max = 6 if name != "h5" else 4
    samples = measure_rf_growth(ctx, n_max)
    assert _values(samples) == sorted(_values(samples))
    for s in samples:
        assert s.witness_count == len(ball_enumerate(ctx, s.n)) - 1


def test_conj_matches_raw_oracle_h3():
    h3 = get_group("h3")
    assert _values(measure_conj_growth(h3, 3)) == _values(conj_growth_raw(h3, 3))
    assert _values(measure_conj_growth(h3, 3, family=CONGRUENCE)) == \
        _values(conj_growth_raw(h3, 3, family=CONGRUENCE))


def test_conj_matches_raw_oracle_h5():
    h5 = get_group("h5")
    assert _values(measure_conj_growth(h5, 2)) == _values(conj_growth_raw(h5, 2))


def test_conj_abelian_is_depth_of_differences():
    z = get_group("z")
    fam = quotient_family(z)
    conj = measure_conj_growth(z, 8)
    for s in conj:
        diffs = range(1, 2 * s.n + 1)
        assert s.value == max(restricted_depth(fam, parse_element(f"z:({d})")[1]) for d in diffs)


def test_conj_dominates_lower_bound_curve():
    h3 = get_group("h3")
    samples = measure_conj_growth(h3, 8)
    ball = ball_enumerate(h3, 8)
    for p in (2, 3, 5):
        g, h = (x.to_ut() for x in h_lower_bound_pair(p, 1))
        if g in ball and h in ball:
            r = max(ball[g], ball[h])
            assert all(s.value >= p**3 for s in samples if s.n >= r)


def test_conj_generic_small():
    samples = measure_conj_growth(get_group("ut4"), 2)
    assert _values(samples) == sorted(_values(samples))
    assert samples[-1].value >= 2


def test_emit_report(tmp_path):
    paths = emit_report([], [], tmp_path / "empty", "x")
    assert paths[0].read_text() == "n,value,witness_count,restricted\n"
    samples = measure_conj_growth(get_group("h3"), 6)
    fits = [fit_exponent(samples, "power")]
    a = emit_report(samples, fits, tmp_path / "a", "h3")
    b = emit_report(samples, fits, tmp_path / "b", "h3")
    assert len(a) == 3
    for p, q in zip(a, b):
        assert p.read_bytes() == q.read_bytes()
    summary = json.loads(a[1].read_text())
    assert summary["max_value"] == samples[-1].value
