"""Cross-Gramian U[k, n] = <phi_{R,n}, Wal(k, .)> and Walsh decay of the
scaling-function pieces."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .walsh import (
    KACZMARZ, WalshOrdering, WalshPolynomial, WalshSpec, fwht, walsh_matrix,
    walsh_poly_eval,
)
from .wavelet import PieceSet, ScalingBasis, WaveletSpec, scaling_basis, split_pieces

METHODS = ("wht", "direct")
DIRECT_MAX_POINTS = 2**14
_CHUNK = 64


@dataclass(frozen=True)
class Gramian:
    matrix: np.ndarray
    sampling: WalshSpec
    recon: WaveletSpec
    method: str
    q: int

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    def truncate(self, M) -> "Gramian":
        """Sub-Gramian for the smaller frequency box 0..M_i-1."""
        Ms = tuple(int(m) for m in np.atleast_1d(M))
        if len(Ms) == 1:
            Ms = Ms * self.sampling.dim
        if any(m > mm for m, mm in zip(Ms, self.sampling.max_freq)):
            raise ValueError(f"requested box {Ms} exceeds assembled box {self.sampling.max_freq}")
        U = self.matrix.reshape(self.sampling.max_freq + (self.N,))
        U = U[tuple(slice(0, m) for m in Ms)].reshape(-1, self.N)
        spec = WalshSpec(self.sampling.ordering, self.sampling.dim, Ms)
        return Gramian(U, spec, self.recon, self.method, self.q)


def _axis_gramian_wht(basis: ScalingBasis, M: int, ordering) -> np.ndarray:
    ax = basis.axis
    out = np.empty((M, ax.N))
    for a in range(0, ax.N, _CHUNK):
        cols = list(range(a, min(a + _CHUNK, ax.N)))
        # the 1/G of the forward transform is the exact cell quadrature weight
        out[:, cols] = fwht(ax.dense(cols), ordering, "forward")[:M]
    return out


def assemble(sampling: WalshSpec, recon: WaveletSpec, method: str = "wht",
             basis: ScalingBasis | None = None) -> Gramian:
    """Assemble U for S_M x R_N.

    'wht': fast transform of each grid column (d > 1 by separability,
    rows and columns in row-major multi-index order).
    'direct': explicit Walsh rows from the omega matrices and explicit
    tensor-product columns, one quadrature per entry; small grids only.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if sampling.dim != recon.d:
        raise ValueError("sampling and reconstruction dimensions differ")
    q = recon.q
    if max(sampling.max_freq) > 2**q:
        raise ValueError(f"frequency {max(sampling.max_freq)} exceeds grid resolution 2^{q}; increase q")
    basis = basis if basis is not None else scaling_basis(recon)
    order = sampling.ordering
    Ms = sampling.max_freq
    if method == "wht":
        U1 = _axis_gramian_wht(basis, max(Ms), order)
        U = U1[: Ms[0]]
        for m in Ms[1:]:
            U = np.kron(U, U1[:m])
        return Gramian(U, sampling, recon, method, q)

    d, G = recon.d, 2**q
    if G**d > DIRECT_MAX_POINTS:
        raise ValueError(f"direct assembly limited to {DIRECT_MAX_POINTS} grid points, got {G**d}")
    W1 = walsh_matrix(max(Ms), q, order).astype(float)
    W = W1[: Ms[0]]
    for m in Ms[1:]:
        W = np.stack([np.outer(a, b).ravel() for a in W for b in W1[:m]])
    B = np.stack([basis.column(n).ravel() for n in range(basis.N)], axis=1)
    U = W @ B / G**d
    return Gramian(U, sampling, recon, method, q)


def export_gramian(g: Gramian, path) -> None:
    meta = dict(M=g.M, N=g.N, p=g.recon.p, R=g.recon.R, J0=g.recon.J0, d=g.recon.d, q=g.q,
                ordering=g.sampling.ordering.value, method=g.method,
                box="x".join(str(m) for m in g.sampling.max_freq))
    with open(path, "w", newline="\n") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write(",".join(f"n{n}" for n in range(g.N)) + "\n")
        for row in g.matrix:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def import_gramian(path) -> Gramian:
    meta, rows = {}, []
    with open(path) as fh:
        header_seen = False
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k.strip()] = v.strip()
            elif not header_seen:
                header_seen = True
            elif line.strip():
                rows.append([float(x) for x in line.split(",")])
    U = np.array(rows)
    d = int(meta["d"])
    recon = WaveletSpec(int(meta["p"]), int(meta["R"]), int(meta["J0"]), d, int(meta["q"]))
    box = tuple(int(m) for m in meta["box"].split("x"))
    sampling = WalshSpec(meta["ordering"], d, box)
    if U.shape != (int(meta["M"]), int(meta["N"])):
        raise ValueError(f"matrix shape {U.shape} does not match header M={meta['M']}, N={meta['N']}")
    return Gramian(U, sampling, recon, meta["method"], int(meta["q"]))


# ---------------------------------------------------------------- decay


def piece_transform(pieces: PieceSet, i: int, R: int, kmax: int, ordering=KACZMARZ) -> np.ndarray:
    """Walsh transform of a piece at fractional frequencies k/2^R, k < kmax.

    Uses Wal(k/L, x) = wal(k; x/L) for x in [0, 1): the piece is compressed
    into [0, 1/L) of a zero-padded grid and transformed there.
    """
    L = 2**R
    g = np.zeros(L * pieces.pieces.shape[1])
    g[: pieces.pieces.shape[1]] = pieces.piece(i)
    if kmax > g.size:
        raise ValueError(f"kmax={kmax} exceeds resolution {g.size}; increase depth")
    return L * fwht(g, ordering, "forward")[:kmax]


@dataclass(frozen=True)
class DecayProfile:
    """samples[m-1, j] = |W phi_i(j/L + m)|, m = 1..m_max, j = 0..L-1.

    i is None for the envelope (maximum over all pieces).
    """

    p: int
    i: int | None
    L: int
    samples: np.ndarray
    alpha_hat: float
    C_hat: float

    @property
    def m(self) -> np.ndarray:
        return np.arange(1, self.samples.shape[0] + 1)

    @property
    def peak(self) -> np.ndarray:
        """max_j |W phi_i(j/L + m)| per m."""
        return self.samples.max(axis=1)

    @property
    def slope(self) -> float:
        return -self.alpha_hat


def fit_decay(m, peak) -> tuple[float, float]:
    """Least-squares slope of log peak vs log m; returns (alpha, C).

    C is the smallest constant with peak <= C m^-alpha.  An identically
    zero profile gives alpha = inf, C = 0.
    """
    m, peak = np.asarray(m, dtype=float), np.asarray(peak, dtype=float)
    ok = peak > 0
    if ok.sum() < 2:
        return float("inf"), 0.0
    slope = np.polyfit(np.log(m[ok]), np.log(peak[ok]), 1)[0]
    alpha = -slope
    return float(alpha), float(np.max(m**alpha * peak))


def decay_profile(p: int, i: int | None, R: int, m_max: int = 64, depth: int = 12,
                  ordering=KACZMARZ) -> DecayProfile:
    pieces = split_pieces(p, depth)
    L = 2**R
    idx = list(pieces.indices) if i is None else [i]
    samples = np.zeros((m_max, L))
    for ii in idx:
        v = np.abs(piece_transform(pieces, ii, R, L * (m_max + 1), ordering))
        samples = np.maximum(samples, v[L:].reshape(m_max, L))
    alpha, C = fit_decay(np.arange(1, m_max + 1), samples.max(axis=1))
    return DecayProfile(p, i, L, samples, alpha, C)


# ---------------------------------------------------------------- shift identity


def _p_R(z: int, R: int) -> int:
    """Smallest integer with p_R(z) 2^R + z > 0."""
    return (-z) // 2**R + 1


def shift_identity_sides(pieces: PieceSet, i: int, R: int, alpha, n0: int, ks):
    """Both sides of sum_n alpha_n <phi_{i,R,n}, Wal(k,.)> = 2^{-R/2} W phi_i(k/2^R) Phi_i(k/2^R).

    phi_{i,R,n} is the piece of phi_{R,n} on the cell [c, c+1) 2^-R with
    c = n + i - 1, for consecutive interior n = n0, n0+1, ...  Phi_i is
    the Walsh polynomial with coefficient alpha_n at index c + 2^R p_R(c)
    (p_R(c) = 0 whenever c >= 1, which holds for interior translates).
    """
    alpha = np.asarray(alpha, dtype=float)
    L, D = 2**R, pieces.depth
    s = 2**D
    ks = np.asarray(ks)
    # left side on the depth R + D grid
    f = np.zeros(L * s)
    idx = []
    for a, n in zip(alpha, range(n0, n0 + alpha.size)):
        c = n + i - 1
        if not 0 <= c < L:
            raise ValueError("translate leaves [0, 1); pick interior n")
        f[c * s : (c + 1) * s] += a * 2 ** (R / 2) * pieces.piece(i)
        idx.append(c + L * _p_R(c, R))
    lhs = fwht(f, KACZMARZ, "forward")[ks]
    what = piece_transform(pieces, i, R, int(ks.max()) + 1)[ks]
    P = WalshPolynomial((min(idx),), (max(idx),), np.zeros(max(idx) - min(idx) + 1))
    coeffs = P.coeffs.copy()
    for a, j in zip(alpha, idx):
        coeffs[j - min(idx)] += a
    P = WalshPolynomial(P.lower, P.upper, coeffs)
    phi = np.array([walsh_poly_eval(P, Fraction(int(k), L)) for k in ks])
    rhs = 2 ** (-R / 2) * what * phi
    return lhs, rhs
