"""Walsh functions in three orderings, generalized Walsh functions, Walsh
polynomials and the fast Walsh-Hadamard transform.

Bit conventions: for ``s < 2**n`` the frequency vector is read most
significant bit first, ``(s_{n-1}, ..., s_0)``, and the argument vector is
``(x_{-1}, ..., x_{-n})``.  ``wal(s; x) = (-1)**(s_vec . omega . x_vec)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .dyadic import DyadicNumber, as_dyadic


class WalshOrdering(enum.Enum):
    KACZMARZ = "kaczmarz"
    PALEY = "paley"
    NATURAL = "natural"

    @classmethod
    def parse(cls, value) -> "WalshOrdering":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(o.value for o in cls)
            raise ValueError(f"unknown ordering {value!r} (expected one of {names})") from None


KACZMARZ = WalshOrdering.KACZMARZ
PALEY = WalshOrdering.PALEY
NATURAL = WalshOrdering.NATURAL


@dataclass(frozen=True)
class WalshSpec:
    """Sampling space S_M: Wal(k, .) for k_i in 0..M_i-1."""

    ordering: WalshOrdering = KACZMARZ
    dim: int = 1
    max_freq: tuple = (1,)

    def __post_init__(self):
        mf = tuple(int(m) for m in np.atleast_1d(self.max_freq))
        if len(mf) == 1 and self.dim > 1:
            mf = mf * self.dim
        if len(mf) != self.dim:
            raise ValueError("max_freq needs one entry per axis")
        if min(mf) < 1:
            raise ValueError("max_freq entries must be >= 1")
        object.__setattr__(self, "max_freq", mf)
        object.__setattr__(self, "ordering", WalshOrdering.parse(self.ordering))

    @property
    def size(self) -> int:
        return int(np.prod(self.max_freq))


def omega_matrix(n: int, ordering=KACZMARZ) -> np.ndarray:
    """0/1 ordering matrix acting between the bit vectors above.

    Kaczmarz has ones on the two anti-diagonals i+j = n-1 and i+j = n-2,
    Paley on the main anti-diagonal, natural is the identity.
    """
    ordering = WalshOrdering.parse(ordering)
    i, j = np.indices((n, n))
    if ordering is KACZMARZ:
        w = (i + j == n - 1) | (i + j == n - 2)
    elif ordering is PALEY:
        w = i + j == n - 1
    else:
        w = i == j
    return w.astype(np.int64)


def _bits_msb(v: int, n: int) -> np.ndarray:
    return np.array([(v >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int64)


def wal(s: int, x, ordering=KACZMARZ, width: int | None = None) -> int:
    """Classical Walsh function wal(s; x) for integer s >= 0 and x in [0, 1).

    Natural ordering depends on the bit width, which defaults to
    max(bitlength(s), fractional depth of x).
    """
    ordering = WalshOrdering.parse(ordering)
    s = int(s)
    if s < 0:
        raise ValueError("wal needs s >= 0")
    x = as_dyadic(x)
    if x.is_negative() or x.integer_part() != 0:
        raise ValueError(f"wal needs x in [0, 1), got {float(x)}")
    n = s.bit_length()
    if ordering is NATURAL:
        n = width if width is not None else max(n, x.depth)
        if s >= 1 << n:
            raise ValueError("s does not fit in the requested width")
    if n == 0:
        return 1
    sv = _bits_msb(s, n)
    xv = np.array([x.bit(-1 - j) for j in range(n)], dtype=np.int64)
    e = sv @ omega_matrix(n, ordering) @ xv
    return -1 if e & 1 else 1


def walsh_matrix(M: int, q: int, ordering=KACZMARZ) -> np.ndarray:
    """Direct evaluation W[s, j] = wal(s; j/2**q) for s < M via omega matrices.

    Independent of the fast transform, so it serves as the reference for
    the permutations used there.
    """
    ordering = WalshOrdering.parse(ordering)
    G = 1 << q
    if M > G:
        raise ValueError(f"M={M} exceeds grid resolution 2^{q}; increase q")
    k = np.arange(G)
    # row j holds digit x_{-1-j} of every grid point
    xb = np.array([(k >> (q - 1 - j)) & 1 for j in range(q)], dtype=np.int64)
    out = np.empty((M, G), dtype=np.int8)
    cache = {}
    for s in range(M):
        n = q if ordering is NATURAL else s.bit_length()
        if n == 0:
            out[s] = 1
            continue
        if n not in cache:
            cache[n] = omega_matrix(n, ordering)
        row = _bits_msb(s, n) @ cache[n]
        e = row @ xb[:n]
        out[s] = 1 - 2 * (e & 1)
    return out


def gwal(s, x) -> int:
    """Generalized Walsh function Wal(s, x) on signed dyadic rationals.

    Exponent sum_i s_i (x_{-1-i} + x_{-i}); symmetric in s and x, and
    Wal(-s, x) = Wal(s, -x) = -Wal(s, x).  Zero counts as positive.
    """
    s, x = as_dyadic(s), as_dyadic(x)
    f = max(s.depth, x.depth)
    S, X = s.rescale(f), x.rescale(f)
    e = 0
    u = 0
    while S >> u:
        if (S >> u) & 1:
            # s_i with i = u - f meets x_{-1-i} and x_{-i}
            a, b = 2 * f - 1 - u, 2 * f - u
            if a >= 0:
                e += (X >> a) & 1
            if b >= 0:
                e += (X >> b) & 1
        u += 1
    val = -1 if e & 1 else 1
    if s.is_negative():
        val = -val
    if x.is_negative():
        val = -val
    return val


def gwal_nd(s: Sequence, x: Sequence) -> int:
    """Tensor-product Walsh function: product of per-axis gwal."""
    if len(s) != len(x):
        raise ValueError(f"dimension mismatch: {len(s)} frequencies vs {len(x)} arguments")
    v = 1
    for si, xi in zip(s, x):
        v *= gwal(si, xi)
    return v


# ---------------------------------------------------------------- fast transform


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    return n.bit_length() - 1


def _bitrev(v: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(v)
    for b in range(n):
        out |= ((v >> b) & 1) << (n - 1 - b)
    return out


@lru_cache(maxsize=64)
def ordering_permutation(n: int, ordering=KACZMARZ) -> np.ndarray:
    """perm with X_ordered[s] = X_natural[perm[s]] at width n.

    Paley: bit reversal.  Kaczmarz: bit reversal of the Gray code.
    """
    ordering = WalshOrdering.parse(ordering)
    s = np.arange(1 << n, dtype=np.int64)
    if ordering is NATURAL:
        perm = s
    elif ordering is PALEY:
        perm = _bitrev(s, n)
    else:
        perm = _bitrev(s ^ (s >> 1), n)
    perm.flags.writeable = False
    return perm


def _butterfly(a: np.ndarray) -> np.ndarray:
    """Unnormalized natural-order Hadamard transform along axis 0 (in place)."""
    n = a.shape[0]
    rest = a.shape[1:]
    h = 1
    while h < n:
        v = a.reshape(n // (2 * h), 2, h, *rest)
        x = v[:, 0].copy()
        v[:, 0] += v[:, 1]
        x -= v[:, 1]
        v[:, 1] = x
        h *= 2
    return a


def fwht(x, ordering=KACZMARZ, direction: str = "forward") -> np.ndarray:
    """Discrete Walsh transform along axis 0.

    forward: X_j = (1/N) sum_k x_k wal(j; k/N); inverse carries no factor.
    Extra trailing axes are transformed column by column.
    """
    ordering = WalshOrdering.parse(ordering)
    a = np.array(x, dtype=float, order="C", copy=True)
    if a.ndim == 0:
        raise ValueError("fwht needs at least one axis")
    N = a.shape[0]
    n = _log2_exact(N)
    perm = ordering_permutation(n, ordering)
    if direction == "forward":
        _butterfly(a)
        a /= N
        return a[perm] if ordering is not NATURAL else a
    if direction == "inverse":
        if ordering is not NATURAL:
            b = np.empty_like(a)
            b[perm] = a
            a = b
        return _butterfly(a)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def fwht_nd(x, ordering=KACZMARZ, direction: str = "forward") -> np.ndarray:
    """Separable transform over every axis (normalization 1/prod N_i forward)."""
    a = np.asarray(x, dtype=float)
    for n in a.shape:
        _log2_exact(n)
    for ax in range(a.ndim):
        a = np.moveaxis(fwht(np.moveaxis(a, ax, 0), ordering, direction), 0, ax)
    return np.ascontiguousarray(a)


def walsh_coefficients(signal, M, ordering=KACZMARZ) -> np.ndarray:
    """Measurements <f, Wal(k, .)> for k in the box 0..M_i-1, row-major flat.

    Exact for a grid signal read as a cell-constant function.
    """
    sig = np.asarray(signal, dtype=float)
    Ms = _box(M, sig.ndim)
    X = fwht_nd(sig, ordering, "forward")
    for i, m in enumerate(Ms):
        if m > sig.shape[i]:
            raise ValueError(f"M={m} exceeds grid resolution {sig.shape[i]}; increase q")
    return X[tuple(slice(0, m) for m in Ms)].reshape(-1).copy()


def walsh_synthesis(coeffs, M, shape, ordering=KACZMARZ) -> np.ndarray:
    """Grid signal sum_k c_k Wal(k, .) from a row-major box of coefficients."""
    Ms = _box(M, len(shape))
    full = np.zeros(shape)
    full[tuple(slice(0, m) for m in Ms)] = np.asarray(coeffs, dtype=float).reshape(Ms)
    return fwht_nd(full, ordering, "inverse")


def _box(M, d):
    Ms = tuple(int(m) for m in np.atleast_1d(M))
    if len(Ms) == 1 and d > 1:
        Ms = Ms * d
    if len(Ms) != d:
        raise ValueError("frequency box does not match signal dimension")
    return Ms


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class WalshPolynomial:
    """Phi(z) = sum_{j=A}^{B} alpha_j Wal(j, z) over a multi-index box."""

    lower: tuple
    upper: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        lo = tuple(int(a) for a in np.atleast_1d(self.lower))
        hi = tuple(int(b) for b in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise ValueError("need lower <= upper on every axis")
        c = np.asarray(self.coeffs, dtype=float)
        shape = tuple(b - a + 1 for a, b in zip(lo, hi))
        if c.size != int(np.prod(shape)):
            raise ValueError(f"coefficient tensor must have shape {shape}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "coeffs", c.reshape(shape))

    @property
    def dim(self) -> int:
        return len(self.lower)


def walsh_poly_eval(P: WalshPolynomial, z) -> float:
    """Exact finite sum; negative indices go through the sign rule of gwal."""
    z = [z] if P.dim == 1 and not isinstance(z, (tuple, list)) else list(z)
    if len(z) != P.dim:
        raise ValueError("argument dimension does not match the polynomial")
    out = P.coeffs
    # contract one axis at a time with the per-axis Walsh values
    for a, b, zi in zip(P.lower, P.upper, z):
        zi = as_dyadic(zi)
        v = np.array([gwal(j, zi) for j in range(a, b + 1)], dtype=float)
        out = np.tensordot(v, out, axes=([0], [0]))
    return float(out)
