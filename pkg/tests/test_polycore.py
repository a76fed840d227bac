import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from derivzeros.errors import DegreeTooLarge, DerivativeZero, ExactRootHit, OrderTooLarge
from derivzeros.polycore import (
    RootSet,
    derivative_coeffs,
    differentiate_coeffs,
    elem_sym_reciprocals,
    eval_coeffs,
    expand_from_roots,
    lnk,
    log_abs_lnk_many,
    log_abs_poly,
    newton_ratio,
)
from derivzeros.scaled import ScaledComplex


def brute_esf(z, roots, k):
    u = [1 / (z - w) for w in roots]
    return sum(math.prod(c) for c in itertools.combinations(u, k))


def random_roots(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# ---------------------------------------------------------------- ScaledComplex

def test_scaled_normalization():
    for v in [1.0, 3.5 - 2j, 1e-300j, -7e250, 2.0]:
        s = ScaledComplex.from_complex(v)
        assert 1.0 <= abs(s.mantissa) < 2.0
        assert s.to_complex() == pytest.approx(v, rel=1e-15)
    assert ScaledComplex.from_complex(0).is_zero


def test_scaled_arithmetic_beyond_double_range():
    big = ScaledComplex(1.5 + 0j, 5000)
    small = ScaledComplex(1.25j, -5000)
    prod = big * small
    assert prod.to_complex() == pytest.approx(1.875j)
    assert (big / big).to_complex() == pytest.approx(1.0)
    assert (big + big).exponent == big.exponent + 1
    assert (big - big).is_zero
    assert big.log_abs() == pytest.approx(math.log(1.5) + 5000 * math.log(2))


@given(st.complex_numbers(max_magnitude=1e100, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=1e100, allow_nan=False, allow_infinity=False))
def test_scaled_matches_complex(a, b):
    sa, sb = ScaledComplex.from_complex(a), ScaledComplex.from_complex(b)
    if a != 0:
        assert 1.0 <= abs(sa.mantissa) < 2.0
    assert complex(sa * sb) == pytest.approx(a * b, rel=1e-14, abs=1e-300)
    s = complex(sa + sb)
    assert abs(s - (a + b)) <= 1e-14 * (abs(a) + abs(b)) + 1e-300


# ---------------------------------------------------------------- log_abs_poly

def test_log_abs_poly_examples():
    assert log_abs_poly(2, [1, -1]) == pytest.approx(math.log(3))
    assert log_abs_poly(0, [1j, -1j]) == 0.0
    assert log_abs_poly(2, np.zeros(1000)) == pytest.approx(1000 * math.log(2), rel=1e-14)


def test_log_abs_poly_exact_hit():
    with pytest.raises(ExactRootHit):
        log_abs_poly(1.0, [0, 1, 2])


def test_log_abs_poly_order_independent():
    rng = np.random.default_rng(3)
    r = random_roots(rng, 500)
    a = log_abs_poly(0.3 + 0.1j, r)
    b = log_abs_poly(0.3 + 0.1j, rng.permutation(r))
    assert a == b


# ---------------------------------------------------------------- elementary symmetric

def test_esf_examples():
    t = elem_sym_reciprocals(0, [1, -1], 2)
    assert complex(t[0]) == 1
    assert complex(t[1]) == 0
    assert complex(t[2]) == pytest.approx(-1)
    t = elem_sym_reciprocals(2, [1, 1, 1], 3)
    assert [complex(v) for v in t.values] == pytest.approx([1, 3, 3, 1])
    n = 40
    t = elem_sym_reciprocals(2, np.zeros(n), 6)
    for k in range(7):
        assert complex(t[k]) == pytest.approx(math.comb(n, k) * 2.0 ** -k, rel=1e-13)


def test_esf_errors():
    with pytest.raises(OrderTooLarge):
        elem_sym_reciprocals(0.5, [1, 2], 3)
    with pytest.raises(ExactRootHit):
        elem_sym_reciprocals(2, [1, 2], 1)


def test_lnk_examples():
    assert complex(lnk(0, [1, -1], 1)) == 0
    assert complex(lnk(0, [1, -1], 2)) == pytest.approx(-1)


def test_lnk_matches_brute_force_subsets():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        r = random_roots(rng, n)
        z = complex(rng.standard_normal(), rng.standard_normal())
        for k in range(1, n + 1):
            assert complex(lnk(z, r, k)) == pytest.approx(brute_esf(z, r, k), rel=1e-10)


def test_lnk_degree8_against_coefficient_oracle():
    rng = np.random.default_rng(8)
    r = random_roots(rng, 8)
    z = 0.37 - 1.1j
    pz = eval_coeffs(expand_from_roots(r), z)
    for k in range(1, 9):
        want = eval_coeffs(derivative_coeffs(r, k), z) / (math.factorial(k) * pz)
        assert complex(lnk(z, r, k)) == pytest.approx(want, rel=1e-9)


def test_permutation_invariance():
    rng = np.random.default_rng(5)
    r = random_roots(rng, 200)
    z = 0.1 + 2.5j
    for k in (1, 3, 7):
        a = complex(lnk(z, r, k))
        b = complex(lnk(z, rng.permutation(r), k))
        assert abs(a - b) <= 1e-12 * abs(a)


def test_scaling_law_exact_in_exponent():
    rng = np.random.default_rng(6)
    r = random_roots(rng, 50)
    z = 3 + 1j
    for j in (-40, 7, 300):
        c = 2.0 ** j
        for k in (1, 4):
            a = lnk(z, r, k)
            b = lnk(z * c, r * c, k)
            assert b.log2_abs() - a.log2_abs() == pytest.approx(-k * j, abs=1e-12)
            assert b.mantissa == pytest.approx(a.mantissa, rel=1e-13)


def test_conjugation_symmetry():
    rng = np.random.default_rng(7)
    r = random_roots(rng, 30)
    z = -0.4 + 0.9j
    for k in (1, 2, 5):
        a = complex(lnk(z, r, k))
        b = complex(lnk(z.conjugate(), r.conj(), k))
        assert b == pytest.approx(a.conjugate(), rel=1e-13)


def test_no_overflow_for_huge_degree():
    rng = np.random.default_rng(9)
    n = 100_000
    r = np.exp(2j * np.pi * rng.random(n)) * (1 + 0.01 * rng.random(n))
    t = elem_sym_reciprocals(0.0, r, 16)
    for v in t.values:
        assert math.isfinite(v.log_abs())


def test_scaled_fallback_far_beyond_double():
    # e_k = C(n,k) 2^{-k} * (2^-600)^{-k} overflows doubles from k = 2 on
    n = 60
    r = np.full(n, 2.0 ** -600)
    z = 2.0 ** -600 * 3
    t = elem_sym_reciprocals(z, r, 4)
    for k in range(5):
        want = math.log(math.comb(n, k)) - k * math.log(2 * 2.0 ** -600)
        assert t[k].log_abs() == pytest.approx(want, rel=1e-13)


def test_many_points_batch_agrees():
    rng = np.random.default_rng(1)
    r = random_roots(rng, 64)
    pts = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    pts[3] = r[5]
    vals, hits = log_abs_lnk_many(pts, r, 3)
    assert hits[3] == 5 and math.isnan(vals[3])
    for i in (0, 1, 9):
        assert vals[i] == pytest.approx(lnk(pts[i], r, 3).log_abs(), rel=1e-13)


# ---------------------------------------------------------------- newton_ratio

def test_newton_ratio_examples():
    # P = z(z-1)(z-2): P' = 3z^2 - 6z + 2, P'' = 6z - 6
    assert newton_ratio(0, [0, 1, 2], 1) == pytest.approx(-1 / 3, rel=1e-15)
    assert newton_ratio(2, [1, 1, 1], 0) == pytest.approx(1 / 3)
    assert newton_ratio(1, [1j, -1j], 0) == pytest.approx(1)


def test_newton_ratio_against_direct_differentiation():
    rng = np.random.default_rng(12)
    for _ in range(30):
        n = int(rng.integers(2, 10))
        r = random_roots(rng, n)
        z = complex(rng.standard_normal(), rng.standard_normal())
        for k in range(0, n):
            want = eval_coeffs(derivative_coeffs(r, k), z) / eval_coeffs(derivative_coeffs(r, k + 1), z)
            assert newton_ratio(z, r, k) == pytest.approx(want, rel=1e-8)


def test_newton_ratio_at_multiple_root():
    # P = (z-1)^3 (z+1): at z=1, P' = P'' = 0 and P''' = 6*2 = 12
    r = [1, 1, 1, -1]
    assert newton_ratio(1, r, 2) == 0
    with pytest.raises(DerivativeZero):
        newton_ratio(1, r, 0)
    with pytest.raises(OrderTooLarge):
        newton_ratio(0.5, r, 4)


# ---------------------------------------------------------------- oracle helpers

def test_expand_examples():
    assert expand_from_roots([1, -1]) == pytest.approx([1, 0, -1])
    assert expand_from_roots([0, 0, 0]) == pytest.approx([1, 0, 0, 0])
    assert expand_from_roots([1, 2, 3]) == pytest.approx([1, -6, 11, -6])
    with pytest.raises(DegreeTooLarge):
        expand_from_roots(np.arange(65))


def test_differentiate_examples():
    assert differentiate_coeffs([1, 0, -1]) == pytest.approx([2, 0])
    assert differentiate_coeffs([1, 0, 0, 0]) == pytest.approx([3, 0, 0])
    assert differentiate_coeffs([1, -6, 11, -6]) == pytest.approx([3, -12, 11])


def test_rootset_validation():
    with pytest.raises(ValueError):
        RootSet([])
    with pytest.raises(ValueError):
        RootSet([1, np.nan])
    assert RootSet([1, 2]).degree == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=10),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_oracle_equivalence_property(roots, z):
    roots = np.array(roots)
    d = np.abs(z - roots)
    if d.min() < 1e-3:
        return
    pz = eval_coeffs(expand_from_roots(roots), z)
    n = len(roots)
    for k in range(1, n + 1):
        want = eval_coeffs(derivative_coeffs(roots, k), z)
        got = math.factorial(k) * complex(lnk(z, roots, k)) * pz
        scale = max(abs(want), 1e-6 * abs(pz) * math.comb(n, k) / d.min() ** k)
        assert abs(got - want) <= 1e-8 * scale
