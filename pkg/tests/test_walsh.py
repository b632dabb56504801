from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walshwave.dyadic import as_dyadic, dyadic_add
from walshwave.walsh import (
    KACZMARZ, NATURAL, PALEY, WalshOrdering, WalshPolynomial, fwht, fwht_nd,
    gwal, gwal_nd, omega_matrix, wal, walsh_coefficients, walsh_matrix,
    walsh_poly_eval, walsh_synthesis,
)

ORDERINGS = list(WalshOrdering)


def gwal_naive(s, x):
    s, x = as_dyadic(s), as_dyadic(x)
    lo = -max(s.depth, x.depth) - 2
    hi = max(s.mant.bit_length(), x.mant.bit_length()) + 2
    e = sum(s.bit(i) * (x.bit(-1 - i) + x.bit(-i)) for i in range(lo, hi))
    v = -1 if e % 2 else 1
    return v * (-1 if s.is_negative() else 1) * (-1 if x.is_negative() else 1)


def gwal_product_form(s, x):
    # (-1)^{s_0 x_0} wal([s]; {x}) wal([x]; {s}) for non-negative arguments
    s, x = as_dyadic(s), as_dyadic(x)
    return ((-1) ** (s.bit(0) * x.bit(0))
            * wal(s.integer_part(), x.fractional_part())
            * wal(x.integer_part(), s.fractional_part()))


def dyadics(depth=8, int_bits=6, signed=False):
    lo = -(1 << (depth + int_bits)) if signed else 0
    return st.integers(lo, 1 << (depth + int_bits)).map(lambda k: Fraction(k, 1 << depth))


# --------------------------------------------------------------- wal


def test_wal_zero_is_one():
    for o in ORDERINGS:
        for k in range(16):
            assert wal(0, Fraction(k, 16), o, width=4 if o is NATURAL else None) == 1


def test_wal_one():
    for o in ORDERINGS:
        assert wal(1, 0.25, o, width=1 if o is NATURAL else None) == 1
        assert wal(1, 0.75, o, width=1 if o is NATURAL else None) == -1


def test_wal_rejects_outside_unit_interval():
    with pytest.raises(ValueError):
        wal(1, 1.5)
    with pytest.raises(ValueError):
        wal(1, -0.25)


def test_omega_shapes():
    np.testing.assert_array_equal(omega_matrix(3, KACZMARZ), [[0, 1, 1], [1, 1, 0], [1, 0, 0]])
    np.testing.assert_array_equal(omega_matrix(3, PALEY), [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    np.testing.assert_array_equal(omega_matrix(3, NATURAL), np.eye(3, dtype=int))


def test_kaczmarz_sequency():
    W = walsh_matrix(64, 12, KACZMARZ)
    changes = [(np.diff(row) != 0).sum() for row in W]
    assert changes == list(range(64))


def test_walsh_matrix_matches_scalar_wal():
    q = 4
    for o in ORDERINGS:
        W = walsh_matrix(16, q, o)
        for s in range(16):
            for j in range(16):
                assert W[s, j] == wal(s, Fraction(j, 16), o, width=q)


@pytest.mark.parametrize("o", ORDERINGS)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_fwht_matrix_is_direct_walsh(o, n):
    N = 1 << n
    implied = fwht(np.eye(N), o, "forward") * N
    np.testing.assert_array_equal(implied, walsh_matrix(N, n, o))


# --------------------------------------------------------------- gwal


@given(st.integers(0, 255), st.integers(0, 255))
def test_gwal_restricts_to_wal(k, j):
    x = Fraction(j, 256)
    assert gwal(k, x) == wal(k, x)


@settings(max_examples=300)
@given(dyadics(signed=True), dyadics(signed=True))
def test_gwal_matches_definitions(s, x):
    assert gwal(s, x) == gwal_naive(s, x)
    assert gwal(s, x) == gwal(x, s)
    if s >= 0 and x >= 0:
        assert gwal(s, x) == gwal_product_form(s, x)


@given(dyadics(), dyadics())
def test_gwal_negative_arguments(s, x):
    if s > 0:
        assert gwal(-s, x) == -gwal(s, x)
    if x > 0:
        assert gwal(s, -x) == -gwal(s, x)


@given(dyadics(), dyadics(), st.integers(1, 3))
def test_gwal_scaling(s, x, k):
    assert gwal(s * 2**k, x) == gwal(s, x * 2**k)


@settings(max_examples=300)
@given(dyadics(), dyadics(), dyadics())
def test_multiplicative_identity(s, x, t):
    assert gwal(s, x) * gwal(s, t) == gwal(s, dyadic_add(as_dyadic(x), as_dyadic(t)))


def test_gwal_nd():
    assert gwal_nd((0, 0), (0.3125, 0.75)) == 1
    assert gwal_nd((1, 1), (0.75, 0.75)) == 1
    assert gwal_nd((1, 2), (0.75, 0.25)) == gwal(1, 0.75) * gwal(2, 0.25)
    with pytest.raises(ValueError, match="dimension"):
        gwal_nd((1, 2), (0.5,))


# --------------------------------------------------------------- fwht


def test_fwht_examples():
    d = np.zeros(8)
    d[0] = 1
    np.testing.assert_allclose(fwht(d), np.full(8, 1 / 8))
    np.testing.assert_allclose(fwht(np.ones(8)), np.eye(8)[0])


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError, match="power of two"):
        fwht(np.ones(12))
    with pytest.raises(ValueError, match="power of two"):
        fwht_nd(np.ones((8, 6)))


@pytest.mark.parametrize("o", ORDERINGS)
def test_parseval_and_round_trip(o):
    rng = np.random.default_rng(1)
    for n in (6, 10, 16):
        x = rng.standard_normal(1 << n)
        X = fwht(x, o)
        assert abs((X**2).sum() - (x**2).sum() / x.size) <= 1e-12 * (X**2).sum()
        back = fwht(X, o, "inverse")
        assert np.linalg.norm(back - x) <= 1e-12 * np.linalg.norm(x)


def test_fwht_batched_columns():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((32, 5))
    B = fwht(A)
    for c in range(5):
        np.testing.assert_allclose(B[:, c], fwht(A[:, c]), atol=1e-15)


def test_fwht_nd():
    d = np.zeros((8, 8))
    d[0, 0] = 1
    np.testing.assert_allclose(fwht_nd(d), np.full((8, 8), 1 / 64))
    rng = np.random.default_rng(3)
    x = rng.standard_normal((8, 16))
    X = fwht_nd(x)
    assert abs((X**2).sum() - (x**2).sum() / x.size) < 1e-13
    sep = fwht(fwht(x).T).T
    np.testing.assert_allclose(X, sep, atol=1e-15)
    np.testing.assert_allclose(fwht_nd(X, direction="inverse"), x, atol=1e-13)


@pytest.mark.parametrize("o", ORDERINGS)
def test_shift_property(o):
    q = 8
    rng = np.random.default_rng(4)
    f = rng.standard_normal(1 << q)
    W = walsh_matrix(1 << q, q, o)
    X = fwht(f, o)
    for j0 in (1, 5, 77, 200):
        shifted = f[np.arange(1 << q) ^ j0]  # t -> f(t (+) j0/2^q)
        np.testing.assert_allclose(fwht(shifted, o), X * W[:, j0], atol=1e-14)


def test_coefficients_and_synthesis():
    rng = np.random.default_rng(5)
    f = rng.standard_normal((16, 16))
    m = walsh_coefficients(f, 5)
    assert m.shape == (25,)
    g = walsh_synthesis(m, 5, f.shape)
    np.testing.assert_allclose(walsh_coefficients(g, 5), m, atol=1e-14)
    with pytest.raises(ValueError, match="increase q"):
        walsh_coefficients(np.ones(8), 9)


# --------------------------------------------------------------- polynomials


def test_poly_single_term():
    P = WalshPolynomial((0,), (0,), [1.0])
    for k in range(8):
        assert walsh_poly_eval(P, Fraction(k, 8)) == 1.0


def test_poly_negative_indices():
    P = WalshPolynomial((-2,), (1,), [1, 0, 0, 1])
    for k in range(16):
        z = Fraction(k, 16)
        assert walsh_poly_eval(P, z) == gwal(1, z) - gwal(2, z)


def test_poly_shape_checked():
    with pytest.raises(ValueError):
        WalshPolynomial((0,), (3,), [1, 2])


def sampling_sum(P, L):
    pts = [Fraction(j, 2 * L) for j in range(2 * L)]
    if P.dim == 1:
        return sum(walsh_poly_eval(P, z) ** 2 for z in pts) / (2 * L)
    return sum(walsh_poly_eval(P, (a, b)) ** 2 for a in pts for b in pts) / (2 * L) ** 2


def test_sampling_identity_aligned_window():
    rng = np.random.default_rng(6)
    for L in (1, 2, 4, 8):
        for c in range(3):
            a = c * 2 * L + int(rng.integers(0, L))
            b = c * 2 * L + 2 * L - 1
            alpha = rng.standard_normal(b - a + 1)
            for lo, hi, al in ((a, b, alpha), (-b, -a, alpha[::-1])):
                P = WalshPolynomial((lo,), (hi,), al)
                assert abs(sampling_sum(P, L) - (al**2).sum()) <= 1e-12 * (al**2).sum()


def test_sampling_identity_needs_aligned_window():
    # window {1, 2} with L = 1 straddles two blocks of width 2L:
    # Wal(1, .) and Wal(2, .) agree on {0, 1/2}, so the sum is not Parseval
    P = WalshPolynomial((1,), (2,), [1.0, 1.0])
    assert sampling_sum(P, 1) == 4.0
    assert (P.coeffs**2).sum() == 2.0
