from fractions import Fraction

import numpy as np
import pytest

from walshwave.gramian import (
    _p_R, assemble, decay_profile, export_gramian, fit_decay, import_gramian,
    piece_transform, shift_identity_sides,
)
from walshwave.walsh import WalshOrdering, WalshSpec, gwal, walsh_matrix
from walshwave.wavelet import WaveletSpec, split_pieces


def test_haar_gramian_is_scaled_hadamard():
    U = assemble(WalshSpec("kaczmarz", 1, 8), WaveletSpec(1, 3, q=7)).matrix
    H = walsh_matrix(8, 3, "kaczmarz")
    np.testing.assert_allclose(U, 2**-1.5 * H, atol=1e-15)
    assert np.abs(U @ U.T - np.eye(8)).max() < 1e-14


@pytest.mark.parametrize("R", range(1, 8))
def test_haar_completeness(R):
    U = assemble(WalshSpec("kaczmarz", 1, 2**R), WaveletSpec(1, R)).matrix
    np.testing.assert_allclose(np.linalg.svd(U, compute_uv=False), 1.0, atol=1e-10)


@pytest.mark.parametrize("p", [2, 8])
def test_bessel(p):
    R = 5 if p == 2 else 6
    r = WaveletSpec(p, R, q=R + 4)
    g = assemble(WalshSpec("kaczmarz", 1, 2**r.q), r)
    U = g.matrix
    assert np.abs(U).max() <= 1 + 1e-12
    assert (np.sum(U**2, axis=1) <= 1 + 1e-12).all()
    cn = [np.sum(g.truncate(M).matrix ** 2, axis=0).min() for M in (2**R, 2 ** (R + 1), 2 ** (R + 3))]
    assert cn[0] <= cn[1] <= cn[2] <= 1 + 1e-12
    # all 2^q rows span the grid space, so every column norm is recovered
    np.testing.assert_allclose(np.sum(U**2, axis=0), 1.0, atol=1e-12)


@pytest.mark.parametrize("o", list(WalshOrdering))
@pytest.mark.parametrize("p,R,M", [(2, 5, 64), (8, 6, 128), (4, 4, 40)])
def test_dual_path(o, p, R, M):
    s, r = WalshSpec(o, 1, M), WaveletSpec(p, R)
    a, b = assemble(s, r, "wht"), assemble(s, r, "direct")
    assert np.abs(a.matrix - b.matrix).max() <= 1e-10


def test_dual_path_two_dim():
    s, r = WalshSpec("kaczmarz", 2, 8), WaveletSpec(2, 3, d=2, q=7)
    a, b = assemble(s, r, "wht"), assemble(s, r, "direct")
    assert a.matrix.shape == (64, 64)
    assert np.abs(a.matrix - b.matrix).max() <= 1e-10
    s2 = WalshSpec("kaczmarz", 2, (5, 9))
    a2, b2 = assemble(s2, r, "wht"), assemble(s2, r, "direct")
    assert a2.matrix.shape == (45, 64)
    assert np.abs(a2.matrix - b2.matrix).max() <= 1e-10


def test_rejects_unresolved_frequencies():
    with pytest.raises(ValueError, match="increase q"):
        assemble(WalshSpec("kaczmarz", 1, 2**12), WaveletSpec(2, 4, q=11))
    with pytest.raises(ValueError, match="direct assembly"):
        assemble(WalshSpec("kaczmarz", 1, 8), WaveletSpec(2, 8, q=15), "direct")


def test_truncate_matches_fresh_assembly():
    r = WaveletSpec(2, 3, d=2, q=8)
    big = assemble(WalshSpec("kaczmarz", 2, 16), r)
    small = assemble(WalshSpec("kaczmarz", 2, 11), r)
    np.testing.assert_array_equal(big.truncate(11).matrix, small.matrix)


def test_export_import(tmp_path):
    g = assemble(WalshSpec("paley", 1, 20), WaveletSpec(2, 4))
    path = tmp_path / "U.csv"
    export_gramian(g, path)
    back = import_gramian(path)
    np.testing.assert_array_equal(back.matrix, g.matrix)
    assert back.recon == g.recon and back.sampling == g.sampling and back.method == g.method
    text = path.read_text()
    assert "# ordering=paley" in text and "# M=20" in text


def test_haar_decay_is_zero():
    for R in (1, 3, 5):
        prof = decay_profile(1, 1, R, m_max=64)
        assert np.all(prof.samples == 0)
        assert prof.alpha_hat == np.inf


def test_decay_slopes():
    assert decay_profile(2, None, 3).slope <= -0.45
    assert decay_profile(8, None, 3).slope <= -0.9
    for i in (-0, 1, 2):
        assert decay_profile(2, i, 2).slope <= -0.45


def test_decay_is_a_function_of_frequency():
    # |W phi_i(j/L + m)| at R = 2 equals the R = 3 value at frequency 2j/8 + m
    a = decay_profile(4, 1, 2, m_max=16).samples
    b = decay_profile(4, 1, 3, m_max=16).samples
    np.testing.assert_allclose(a, b[:, ::2], atol=1e-13)


def test_piece_transform_matches_gwal_quadrature():
    ps = split_pieces(2, 6)
    R = 2
    L = 2**R
    w = piece_transform(ps, 0, R, 64)
    x = [Fraction(j, 64) for j in range(64)]
    for K in (0, 1, 5, 17, 38, 63):
        direct = sum(v * gwal(Fraction(K, L), xj) for v, xj in zip(ps.piece(0), x)) / 64
        assert abs(w[K] - direct) < 1e-13


def test_fit_decay_power_law():
    m = np.arange(1, 65)
    a, C = fit_decay(m, 3.0 * m**-1.5)
    assert abs(a - 1.5) < 1e-12 and abs(C - 3.0) < 1e-10


def test_p_R():
    R = 3
    for z in range(-40, 40):
        k = _p_R(z, R)
        assert k * 8 + z > 0 and (k - 1) * 8 + z <= 0
    assert _p_R(5, R) == 0 and _p_R(0, R) == 1


@pytest.mark.parametrize("i", [0, 1, 2])
def test_shift_identity(i):
    ps = split_pieces(2, 8)
    rng = np.random.default_rng(i)
    for n0, count in ((2, 10), (5, 20), (2, 28)):
        alpha = rng.standard_normal(count)
        lhs, rhs = shift_identity_sides(ps, i, 5, alpha, n0, np.arange(0, 1024, 3))
        assert np.abs(lhs - rhs).max() < 1e-12 * max(1, np.abs(lhs).max())
