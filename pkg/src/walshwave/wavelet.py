"""Daubechies filters, scaling functions, and boundary-corrected scaling bases
on [0, 1]^d realized as grid signals.

Support convention: phi of order p lives on [-p+1, p].  Internally the
refinement arrays start at the left end of that support (offset p-1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, comb, log2

import mpmath
import numpy as np
import scipy.sparse as sp

SQRT2 = np.sqrt(2.0)


# ---------------------------------------------------------------- filters


@dataclass(frozen=True)
class DaubFilter:
    p: int
    taps: np.ndarray

    def check(self, tol: float = 1e-12) -> dict:
        """Residuals of the sum, orthonormality and vanishing-moment constraints."""
        h, p = self.taps, self.p
        ac = np.correlate(h, h, "full")[len(h) - 1 :]
        orth = max(abs(ac[0] - 1.0), np.abs(ac[2::2]).max(initial=0.0))
        k = np.arange(2 * p)
        g = (-1.0) ** k * h[::-1]  # wavelet taps up to sign convention
        mom = max(abs(np.sum(g * k**j)) / max(1.0, np.sum(np.abs(g) * k**j)) for j in range(p))
        res = {"sum": abs(h.sum() - SQRT2), "orthonormality": orth, "moments": mom}
        res["ok"] = all(v <= tol for v in res.values())
        return res


@lru_cache(maxsize=None)
def _daub_taps(p: int) -> tuple:
    if p == 1:
        return (1 / SQRT2, 1 / SQRT2)
    with mpmath.workdps(60):
        # Q(z) with |H(z)|^2 = |(1+z)/2|^{2p} Q: sum_k C(p-1+k,k) (-(z-1)^2/(4z))^k, times z^{p-1}
        coeffs = [mpmath.mpf(0)] * (2 * p - 1)
        for k in range(p):
            c = mpmath.mpf(comb(p - 1 + k, k)) * (-1) ** k / mpmath.mpf(4) ** k
            for i in range(2 * k + 1):
                coeffs[p - 1 - k + i] += c * comb(2 * k, i) * (-1) ** (2 * k - i)
        roots = mpmath.polyroots(coeffs[::-1], maxsteps=500, extraprec=500)
        poly = [mpmath.mpc(1)]
        factors = [[1, 1]] * p + [[-r, 1] for r in roots if abs(r) < 1]
        for f in factors:
            out = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, a in enumerate(poly):
                out[i] += a * f[0]
                out[i + 1] += a * f[1]
            poly = out
        s = sum(poly)
        h = [mpmath.re(c) * mpmath.sqrt(2) / mpmath.re(s) for c in poly]
    return tuple(float(x) for x in h[::-1])


def daub_filter(p: int) -> DaubFilter:
    """Minimum-phase Daubechies low-pass filter with p vanishing moments."""
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= 10:
        raise ValueError(f"supported orders are 1 <= p <= 10, got {p!r}")
    return DaubFilter(int(p), np.array(_daub_taps(int(p))))


# ---------------------------------------------------------------- scaling function


@dataclass(frozen=True)
class ScalingSamples:
    """phi(x) at x = -p+1 + k 2^-depth, k = 0 .. (2p-1) 2^depth."""

    p: int
    depth: int
    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return -self.p + 1 + np.arange(self.values.size) / 2.0**self.depth

    def __call__(self, x) -> np.ndarray:
        """Lookup at grid points x (must lie on the sample grid)."""
        k = (np.asarray(x, dtype=float) + self.p - 1) * 2.0**self.depth
        ki = np.rint(k).astype(np.int64)
        if np.any(np.abs(k - ki) > 1e-9):
            raise ValueError("x is off the sample grid")
        out = np.zeros(ki.shape)
        ok = (ki >= 0) & (ki < self.values.size)
        out[ok] = self.values[ki[ok]]
        return out


@lru_cache(maxsize=32)
def _cascade_values(p: int, depth: int) -> np.ndarray:
    h = daub_filter(p).taps
    L = 2 * p
    n = L - 1
    # integer values: eigenvector of T[k, m] = sqrt2 h[2k - m] for eigenvalue 1
    T = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        for j in range(L):
            m = 2 * k - j
            if 0 <= m <= n:
                T[k, m] += SQRT2 * h[j]
    w, v = np.linalg.eig(T)
    close = np.abs(w - 1) < 1e-8
    if close.sum() != 1:
        raise RuntimeError(f"eigenvalue 1 of the transfer matrix has multiplicity {close.sum()}")
    vals = np.real(v[:, np.argmax(close)])
    vals = vals / vals.sum()
    for d in range(depth):
        # phi(i 2^-(d+1)) = sqrt2 sum_k h_k phi_d[i - k 2^d]
        new = np.zeros(n * 2 ** (d + 1) + 1)
        step = 2**d
        for k in range(L):
            seg = vals[: max(0, min(vals.size, new.size - k * step))]
            new[k * step : k * step + seg.size] += SQRT2 * h[k] * seg
        vals = new
    vals.flags.writeable = False
    return vals


def cascade(p: int, depth: int) -> ScalingSamples:
    """Point values of phi on [-p+1, p] at spacing 2^-depth."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if p == 1:
        v = np.zeros(2**depth + 1)
        v[:-1] = 1.0
        return ScalingSamples(1, depth, v)
    return ScalingSamples(p, depth, _cascade_values(p, depth))


@lru_cache(maxsize=32)
def discrete_cascade(p: int, depth: int) -> np.ndarray:
    """Iterated synthesis filter bank from a unit impulse, times 2^{depth/2}.

    Length (2p-1) 2^depth, starting at x = -p+1.  Unlike point samples the
    integer shifts of this vector are exactly orthonormal in the grid inner
    product 2^-depth sum u v, and it refines exactly under h.
    """
    h = daub_filter(p).taps
    c = np.array([1.0])
    for _ in range(depth):
        up = np.zeros(2 * c.size - 1)
        up[::2] = c
        c = np.convolve(up, h)
    out = np.zeros((2 * p - 1) * 2**depth)
    out[: c.size] = c * 2 ** (depth / 2)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------- specs


def min_level(p: int) -> int:
    """Smallest J0 with 2^J0 >= 2p - 1."""
    return max(0, ceil(log2(2 * p - 1))) if p > 1 else 0


@dataclass(frozen=True)
class WaveletSpec:
    p: int
    R: int
    J0: int | None = None
    d: int = 1
    q: int | None = None

    def __post_init__(self):
        daub_filter(self.p)
        J0 = min_level(self.p) if self.J0 is None else int(self.J0)
        q = self.R + 7 if self.q is None else int(self.q)
        object.__setattr__(self, "J0", J0)
        object.__setattr__(self, "q", q)
        if 2**J0 < 2 * self.p - 1:
            raise ValueError(f"coarse level J0={J0} too small: need 2^J0 >= 2p-1 = {2 * self.p - 1}")
        if J0 > self.R:
            raise ValueError(f"J0={J0} exceeds top level R={self.R}")
        if q < self.R + 4:
            raise ValueError(f"grid depth q={q} must be at least R+4 = {self.R + 4}")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def N(self) -> int:
        return 2 ** (self.d * self.R)

    @property
    def n_axis(self) -> int:
        return 2**self.R

    @property
    def grid(self) -> int:
        return 2**self.q


# ---------------------------------------------------------------- edge functions


def _translate_window(v: np.ndarray, p: int, k: int, D: int, lo: int, hi: int) -> np.ndarray:
    """phi(t - k) on level-0 cells [lo, hi) at depth D, zero outside its support."""
    s = 2**D
    out = np.zeros((hi - lo) * s)
    start = (k - p + 1 - lo) * s
    a, b = max(start, 0), min(start + v.size, out.size)
    if a < b:
        out[a:b] = v[a - start : b - start]
    return out


def edge_functions(p: int, side: str = "left", depth: int = 8, samples: str = "filterbank") -> np.ndarray:
    """Raw edge functions before orthonormalization, indexed by binomial order n.

    left:  sum_l C(l, n) phi(x + l - p + 1) on [0, 2p-1]
    right: sum_l C(l, n) phi(x - l + p) on [-(2p-1), 0], built from integer
    translates near the right end (see the decisions ledger).
    Returns an array (p, (2p-1) 2^depth).
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    v = discrete_cascade(p, depth) if samples == "filterbank" else cascade(p, depth).values[:-1]
    width = 2 * p - 1
    out = np.zeros((p, width * 2**depth))
    for n in range(p):
        for l in range(2 * p - 1):
            if side == "left":
                out[n] += comb(l, n) * _translate_window(v, p, p - 1 - l, depth, 0, width)
            else:
                out[n] += comb(l, n) * _translate_window(v, p, l - p, depth, -width, 0)
    return out


# ---------------------------------------------------------------- basis


@dataclass
class AxisBasis:
    """2^R orthonormal grid columns on [0, 1], stored as a sparse G x N matrix."""

    p: int
    R: int
    q: int
    matrix: sp.csc_matrix
    kinds: tuple = field(default=())

    @property
    def G(self) -> int:
        return 2**self.q

    @property
    def N(self) -> int:
        return 2**self.R

    def dense(self, cols=None) -> np.ndarray:
        m = self.matrix if cols is None else self.matrix[:, cols]
        return m.toarray()

    def synthesize(self, c) -> np.ndarray:
        return self.matrix @ np.asarray(c, dtype=float)

    def analyze(self, f) -> np.ndarray:
        return self.matrix.T @ np.asarray(f, dtype=float) / self.G

    def gram(self) -> np.ndarray:
        return (self.matrix.T @ self.matrix).toarray() / self.G


def _gs(vectors, against, ip, label):
    out = []
    for i, w0 in enumerate(vectors):
        w = w0.copy()
        nrm0 = np.sqrt(ip(w, w))
        for _ in range(2):
            for u in list(against) + out:
                w -= ip(w, u) * u
        nrm = np.sqrt(ip(w, w))
        if nrm <= 1e-10 * nrm0:
            raise np.linalg.LinAlgError(
                f"Gram-Schmidt: {label} column {i} is numerically dependent "
                f"(residual norm {nrm:.3e} of {nrm0:.3e})"
            )
        out.append(w / nrm)
    return out


@lru_cache(maxsize=16)
def _axis_basis(p: int, R: int, q: int) -> AxisBasis:
    N, G, D = 2**R, 2**q, q - R
    s = 2**D
    if p == 1:
        rows = np.arange(G)
        cols = rows // s
        m = sp.csc_matrix((np.full(G, 2 ** (R / 2)), (rows, cols)), shape=(G, N))
        return AxisBasis(p, R, q, m, ("interior",) * N)

    v = discrete_cascade(p, D)
    # work in level-R cell coordinates; inner product of unit-level samples
    # is 2^-D sum, final columns carry the 2^{R/2} dilation factor
    ip = lambda a, b: float(a @ b) / s

    # windows wide enough to contain every interior translate touching an edge block
    W = min(N, 4 * p)
    interior = {}
    for n in range(p, N - p):
        interior[n] = n

    def interior_on(lo, hi):
        return [(n, _translate_window(v, p, n, D, lo, hi)) for n in interior if n - p + 1 < hi and n + p > lo]

    left_raw = []
    for n in range(p):
        b = p - 1 - n  # shortest support first
        left_raw.append(sum(comb(l, b) * _translate_window(v, p, p - 1 - l, D, 0, W) for l in range(2 * p - 1)))
    right_raw = []
    for n in range(N - 1, N - p - 1, -1):
        b = p - 1 - (N - 1 - n)
        right_raw.append(sum(comb(l, b) * _translate_window(v, p, N - p + l, D, N - W, N) for l in range(2 * p - 1)))

    left = _gs(left_raw, [u for _, u in interior_on(0, W)], ip, "left edge")
    if 2 * W <= N:
        right = _gs(right_raw, [u for _, u in interior_on(N - W, N)], ip, "right edge")
        right_lo = N - W
    else:
        # edge blocks overlap: orthogonalize on the whole interval
        full = lambda a, lo: np.concatenate([np.zeros(lo * s), a, np.zeros((N - lo) * s - a.size)])
        left = [full(u, 0) for u in left]
        right_raw = [full(u, N - W) for u in right_raw]
        right = _gs(right_raw, [u for _, u in interior_on(0, N)] + left, ip, "right edge")
        right_lo = 0
        W = N

    rows, cols, vals = [], [], []

    def put(n, arr, lo):
        nz = np.nonzero(arr)[0]
        rows.append(nz + lo * s)
        cols.append(np.full(nz.size, n))
        vals.append(arr[nz])

    for n in range(p):
        put(n, left[n], 0)
    for n in range(p, N - p):
        lo, hi = max(0, n - p + 1), min(N, n + p)
        put(n, _translate_window(v, p, n, D, lo, hi), lo)
    for i, n in enumerate(range(N - 1, N - p - 1, -1)):
        put(n, right[i], right_lo)
    m = sp.csc_matrix(
        (np.concatenate(vals) * 2 ** (R / 2), (np.concatenate(rows), np.concatenate(cols))), shape=(G, N)
    )
    kinds = tuple("left" if n < p else "right" if n >= N - p else "interior" for n in range(N))
    return AxisBasis(p, R, q, m, kinds)


@dataclass
class ScalingBasis:
    """Tensor-product basis of V_R^{b,d}; column n is the row-major multi-index."""

    spec: WaveletSpec
    axis: AxisBasis

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def shape(self) -> tuple:
        return (self.spec.grid,) * self.spec.d

    def multi_index(self, n: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(n, (self.spec.n_axis,) * self.spec.d))

    def m_class(self, n_axis: int) -> int:
        """m(n): 0 for n in K_0 (left and interior), 1 for n in K_1 (right)."""
        return int(n_axis >= self.spec.n_axis - self.spec.p)

    def kind(self, n: int) -> tuple:
        return tuple(self.axis.kinds[i] for i in self.multi_index(n))

    def column(self, n: int) -> np.ndarray:
        """Explicit grid signal of one basis function."""
        idx = self.multi_index(n)
        out = self.axis.dense([idx[0]])[:, 0]
        for i in idx[1:]:
            out = np.multiply.outer(out, self.axis.dense([i])[:, 0])
        return out

    def synthesize(self, c) -> np.ndarray:
        """Grid signal sum_n c_n phi_n."""
        out = np.asarray(c, dtype=float).reshape((self.spec.n_axis,) * self.spec.d)
        B = self.axis.matrix.tocsr()
        for ax in range(self.spec.d):
            out = np.moveaxis(_apply_axis(B, np.moveaxis(out, ax, 0)), 0, ax)
        return out

    def analyze(self, f) -> np.ndarray:
        """Grid inner products <f, phi_n>, row-major flat."""
        out = np.asarray(f, dtype=float)
        Bt = self.axis.matrix.T.tocsr()
        for ax in range(self.spec.d):
            out = np.moveaxis(_apply_axis(Bt, np.moveaxis(out, ax, 0)) / self.spec.grid, 0, ax)
        return out.reshape(-1)

    def project(self, f) -> np.ndarray:
        """Grid-orthogonal projection onto the span."""
        return self.synthesize(self.analyze(f))

    def gram(self) -> np.ndarray:
        """Grid Gram matrix, using separability of the tensor inner product."""
        g = self.axis.gram()
        out = g
        for _ in range(self.spec.d - 1):
            out = np.kron(out, g)
        return out


def _apply_axis(A, x):
    flat = x.reshape(x.shape[0], -1)
    return np.asarray(A @ flat).reshape((A.shape[0],) + x.shape[1:])


def scaling_basis(spec: WaveletSpec) -> ScalingBasis:
    return ScalingBasis(spec, _axis_basis(spec.p, spec.R, spec.q))


# ---------------------------------------------------------------- pieces


@dataclass(frozen=True)
class PieceSet:
    """phi_i(x) = phi(x + i - 1) on [0, 1) for i = -p+2 .. p, from point values."""

    p: int
    depth: int
    pieces: np.ndarray  # (2p - 1, 2^depth), row r is piece i = r - p + 2

    @property
    def indices(self) -> range:
        return range(-self.p + 2, self.p + 1)

    def piece(self, i: int) -> np.ndarray:
        if i not in self.indices:
            raise ValueError(f"piece index {i} outside {-self.p + 2}..{self.p}")
        return self.pieces[i + self.p - 2]

    def reassemble(self) -> np.ndarray:
        """sum_i phi_i(x - i + 1) on [-p+1, p) at spacing 2^-depth."""
        return self.pieces.reshape(-1)


def split_pieces(p: int, depth: int) -> PieceSet:
    vals = cascade(p, depth).values[:-1]  # drop x = p, where phi vanishes
    return PieceSet(p, depth, vals.reshape(2 * p - 1, 2**depth).copy())


# ---------------------------------------------------------------- export


def export_basis(basis: ScalingBasis, path) -> None:
    """CSV: '#' header lines with the spec, then one row per grid point."""
    s = basis.spec
    M = basis.axis.dense()
    with open(path, "w", newline="\n") as fh:
        for k in ("p", "R", "J0", "d", "q"):
            fh.write(f"# {k}={getattr(s, k)}\n")
        fh.write(",".join(f"phi_{n}" for n in range(M.shape[1])) + "\n")
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def import_basis(path) -> ScalingBasis:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, val = line[1:].strip().partition("=")
                meta[k.strip()] = int(val)
            elif line.startswith("phi_"):
                continue
            elif line.strip():
                rows.append([float(x) for x in line.split(",")])
    spec = WaveletSpec(meta["p"], meta["R"], meta["J0"], meta["d"], meta["q"])
    M = np.array(rows)
    if M.shape != (spec.grid, spec.n_axis):
        raise ValueError(f"matrix shape {M.shape} does not match the header")
    kinds = tuple("left" if n < spec.p and spec.p > 1 else "right" if n >= spec.n_axis - spec.p and spec.p > 1
                  else "interior" for n in range(spec.n_axis))
    return ScalingBasis(spec, AxisBasis(spec.p, spec.R, spec.q, sp.csc_matrix(M), kinds))
