"""Subspace angles, stable sampling rate, and reconstruction from Walsh samples.

Both the wavelet columns and the Walsh rows are orthonormal in the grid
inner product, so mu(R_N, S_M) = 1 / sigma_min(U).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .gramian import Gramian, assemble
from .walsh import KACZMARZ, WalshSpec, walsh_synthesis
from .wavelet import ScalingBasis, WaveletSpec, scaling_basis

REFUSE_SIGMA = 1e-10
THETA_MAX = 100.0


class BelowSamplingRate(ValueError):
    """U is numerically rank deficient: M is below the stable sampling rate."""

    def __init__(self, sigma_min: float, M, N: int):
        self.sigma_min = sigma_min
        self.mu = np.inf if sigma_min <= 0 else 1.0 / sigma_min
        super().__init__(
            f"below stable sampling rate: sigma_min = {sigma_min:.3e} (mu = {self.mu:.3e}) "
            f"for M = {M}, N = {N}"
        )


class SearchCapExceeded(RuntimeError):
    def __init__(self, msg, trace):
        self.trace = trace
        super().__init__(msg)


def _matrix(U) -> np.ndarray:
    return U.matrix if isinstance(U, Gramian) else np.asarray(U, dtype=float)


# ---------------------------------------------------------------- angles


@dataclass(frozen=True)
class AngleReport:
    M: tuple
    N: int
    sigma_min: float
    mu: float
    theta_target: float | None = None
    method: str = "svd"

    def row(self) -> list:
        """CSV row in the order N, theta, M, sigma_min, mu."""
        M = self.M[0] if len(self.M) == 1 else "x".join(map(str, self.M))
        return [self.N, self.theta_target, M, self.sigma_min, self.mu]


ANGLE_COLUMNS = ("N", "theta", "M", "sigma_min", "mu")


def _sigma_inverse(A: np.ndarray, tol: float = 1e-13, maxiter: int = 300, block: int = 4) -> float:
    """Smallest singular value by block inverse subspace iteration on A^T A."""
    N = A.shape[1]
    G = A.T @ A
    try:
        cf = sla.cho_factor(G, lower=False, check_finite=False)
    except sla.LinAlgError:
        return float(np.linalg.svd(A, compute_uv=False)[-1])
    b = min(block, N)
    X = np.linalg.qr(np.random.default_rng(12345).standard_normal((N, b)))[0]
    lam_old = np.inf
    for _ in range(maxiter):
        X = np.linalg.qr(sla.cho_solve(cf, X, check_finite=False))[0]
        w, V = np.linalg.eigh(X.T @ G @ X)
        X = X @ V
        lam = w[0]
        if abs(lam - lam_old) <= tol * abs(lam):
            break
        lam_old = lam
    # A^T A squares the condition number; once lam nears rounding level the
    # Rayleigh quotient no longer carries 1e-8 relative accuracy in sigma
    if lam <= 1e-6 * np.linalg.norm(G, 2):
        return float(np.linalg.svd(A, compute_uv=False)[-1])
    return float(np.sqrt(max(lam, 0.0)))


def smallest_singular_value(U, method: str = "svd") -> float:
    A = _matrix(U)
    M, N = A.shape
    if N > M or not np.all(np.any(A != 0, axis=0)):
        # more unknowns than rows, or a column with no Walsh content at all
        return 0.0
    if method == "svd":
        return float(sla.svdvals(A, check_finite=False)[-1])
    if method == "inverse":
        return _sigma_inverse(A)
    raise ValueError(f"unknown method {method!r} (svd | inverse)")


def subspace_angle(U, method: str = "svd", theta: float | None = None) -> AngleReport:
    A = _matrix(U)
    M = U.sampling.max_freq if isinstance(U, Gramian) else (A.shape[0],)
    s = smallest_singular_value(A, method)
    mu = np.inf if s <= 0 else max(1.0, 1.0 / s)
    return AngleReport(tuple(M), A.shape[1], s, mu, theta, method)


# ---------------------------------------------------------------- stable sampling rate


@dataclass
class SsrResult:
    N: int
    R: int
    d: int
    theta: float
    Theta: int
    sigma_min: float
    trace: list = field(default_factory=list)  # (M, sigma_min, mu)

    @property
    def ratio(self) -> float:
        """Per-axis M over per-axis N (|M|^{1/d} / 2^R)."""
        return self.Theta / 2**self.R

    @property
    def mu(self) -> float:
        return np.inf if self.sigma_min <= 0 else 1.0 / self.sigma_min

    def monotone(self, rtol: float = 1e-9) -> bool:
        pts = sorted(self.trace)
        s = [t[1] for t in pts]
        return all(b >= a - rtol * max(abs(a), 1e-300) for a, b in zip(s, s[1:]))


def stable_sampling_rate(recon: WaveletSpec, theta: float, search: str = "bisect", *,
                         ordering=KACZMARZ, cap_factor: int = 8, gramian: Gramian | None = None,
                         method: str = "inverse") -> SsrResult:
    """Smallest isotropic per-axis M with mu(R_N, S_M) <= theta.

    Doubling from M = 2^R, then integer bisection (sigma_min is monotone
    in M).  search='linear' scans M = 2^R, 2^R + 1, ... instead.
    """
    if not 1 < theta <= THETA_MAX:
        raise ValueError(f"theta must lie in (1, {THETA_MAX}], got {theta}")
    n = recon.n_axis
    cap = min(cap_factor * n, recon.grid)
    if gramian is None:
        gramian = assemble(WalshSpec(ordering, recon.d, cap), recon)
    cap = min(cap, min(gramian.sampling.max_freq))
    trace = []

    def sigma(M):
        s = smallest_singular_value(gramian.truncate(M), method)
        mu = np.inf if s <= 0 else 1.0 / s
        trace.append((M, s, mu))
        return s

    ok = lambda s: s > 0 and 1.0 / s <= theta
    if search == "linear":
        M = n
        while not ok(sigma(M)):
            M += 1
            if M > cap:
                raise SearchCapExceeded(f"no M <= {cap} reaches mu <= {theta}", trace)
        res = SsrResult(recon.N, recon.R, recon.d, theta, M, trace[-1][1], trace)
    elif search == "bisect":
        lo, hi = n - 1, n
        s_hi = sigma(hi)
        while not ok(s_hi):
            lo, hi = hi, 2 * hi
            if hi > cap:
                raise SearchCapExceeded(f"no M <= {cap} reaches mu <= {theta}; raise cap_factor or q", trace)
            s_hi = sigma(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            s = sigma(mid)
            if ok(s):
                hi, s_hi = mid, s
            else:
                lo = mid
        res = SsrResult(recon.N, recon.R, recon.d, theta, hi, s_hi, trace)
    else:
        raise ValueError(f"unknown search {search!r} (bisect | linear)")
    if not res.monotone(1e-6):
        raise RuntimeError(f"sigma_min not monotone along the search trace: {sorted(trace)}")
    return res


SSR_COLUMNS = ("R", "N", "theta", "Theta", "ratio_M_over_N", "sigma_min_at_Theta")


def ssr_row(r: SsrResult) -> list:
    return [r.R, r.N, r.theta, r.Theta, r.ratio, r.sigma_min]


def theoretical_s_theta(p: int, alpha: float, C_hat: float, theta: float, d: int = 1) -> float:
    """Sufficient oversampling factor from the decay bound (very loose).

    d = 1: (C (2p-2) theta / (theta-1))^{2/(2 alpha - 1)}
    d > 1: C ((2p-2) 2^d theta / (theta-1))^{2/(2 alpha - 1)}
    Clamped below at 1, since M >= N is always needed.
    """
    if alpha <= 0.5:
        raise ValueError(f"alpha = {alpha} <= 1/2 makes the bound vacuous")
    if theta <= 1:
        raise ValueError("theta must exceed 1")
    e = 2.0 / (2.0 * alpha - 1.0)
    if d == 1:
        val = (C_hat * (2 * p - 2) * theta / (theta - 1)) ** e
    else:
        val = C_hat * ((2 * p - 2) * 2**d * theta / (theta - 1)) ** e
    return float(max(1.0, val))


# ---------------------------------------------------------------- reconstruction


@dataclass
class Reconstruction:
    method: str
    signal: np.ndarray | None
    coefficients: np.ndarray | None = None
    residual: float = 0.0
    mu: float = 1.0
    status: str = "ok"
    info: dict = field(default_factory=dict)


def _cgls(A, b, tol=1e-12, maxiter=None):
    """CG on A^T A x = A^T b without forming A^T A."""
    N = A.shape[1]
    maxiter = maxiter or 10 * N
    x = np.zeros(N)
    r = b.copy()
    s = A.T @ r
    p = s.copy()
    g0 = g = s @ s
    it = 0
    while it < maxiter and g > tol**2 * g0:
        q = A @ p
        a = g / (q @ q)
        x += a * p
        r -= a * q
        s = A.T @ r
        g_new = s @ s
        p = s + (g_new / g) * p
        g = g_new
        it += 1
    return x, it


def gs_reconstruct(measurements, U, basis: ScalingBasis | None = None, *, theta: float = 2.0,
                   solver: str = "auto") -> Reconstruction:
    """Generalized sampling: c = argmin ||U c - m||.

    Refuses (BelowSamplingRate) if sigma_min <= 1e-10; flags status
    'unstable' when mu > theta.  solver: 'direct' (orthogonal
    factorization of U), 'cg' (normal equations), or 'auto' (direct
    for N <= 1024).
    """
    A = _matrix(U)
    m = np.asarray(measurements, dtype=float).reshape(-1)
    if m.size != A.shape[0]:
        raise ValueError(f"{m.size} measurements for a Gramian with {A.shape[0]} rows")
    s = smallest_singular_value(A, "svd")
    if s <= REFUSE_SIGMA:
        raise BelowSamplingRate(s, A.shape[0], A.shape[1])
    mu = 1.0 / s
    if solver == "auto":
        solver = "direct" if A.shape[1] <= 1024 else "cg"
    info = {"solver": solver, "sigma_min": s}
    if solver == "direct":
        c = sla.lstsq(A, m, lapack_driver="gelsd", check_finite=False)[0]
    elif solver == "cg":
        c, it = _cgls(A, m)
        info["iterations"] = it
    else:
        raise ValueError(f"unknown solver {solver!r}")
    r = A @ c - m
    normal = np.linalg.norm(A.T @ r) / max(np.linalg.norm(A.T @ m), 1e-300)
    info["normal_residual"] = float(normal)
    sig = basis.synthesize(c) if basis is not None else None
    status = "unstable" if mu > theta else "ok"
    return Reconstruction("gs", sig, c, float(np.linalg.norm(r)), mu, status, info)


def pbdw_reconstruct(measurements, U: Gramian, basis: ScalingBasis, *, theta: float = 2.0,
                     solver: str = "auto") -> Reconstruction:
    """u* = v + eta with v in R_N, eta in S_M, from the saddle system

        [ I   U ] [a]   [m]
        [ U^T 0 ] [c] = [0]

    so measurements of u* reproduce m exactly and ||u* - P_R u*|| = ||a||
    is minimal.  'schur' eliminates a (the normal equations of GS).
    """
    A = _matrix(U)
    m = np.asarray(measurements, dtype=float).reshape(-1)
    M, N = A.shape
    s = smallest_singular_value(A, "svd")
    if s <= REFUSE_SIGMA:
        raise BelowSamplingRate(s, M, N)
    if solver == "auto":
        # the saddle matrix squares nothing but loses accuracy once mu is large
        solver = "saddle" if M + N <= 3000 and 1.0 / s <= theta else "schur"
    if solver == "saddle":
        K = np.block([[np.eye(M), A], [A.T, np.zeros((N, N))]])
        sol = sla.solve(K, np.concatenate([m, np.zeros(N)]), assume_a="sym", check_finite=False)
        a, c = sol[:M], sol[M:]
    elif solver == "schur":
        c = sla.lstsq(A, m, lapack_driver="gelsd", check_finite=False)[0]
        a = m - A @ c
    else:
        raise ValueError(f"unknown solver {solver!r}")
    shape = (basis.spec.grid,) * basis.spec.d
    eta = walsh_synthesis(a, U.sampling.max_freq, shape, U.sampling.ordering)
    u = basis.synthesize(c) + eta
    mu = 1.0 / s
    info = {"solver": solver, "sigma_min": s, "eta_norm": float(np.linalg.norm(a))}
    return Reconstruction("pbdw", u, c, float(np.linalg.norm(A @ c + a - m)), mu,
                          "unstable" if mu > theta else "ok", info)


def truncated_walsh(measurements, q: int, d: int = 1, M=None, ordering=KACZMARZ) -> Reconstruction:
    """P_{S_M} f: zero-padded inverse transform of the measurements."""
    m = np.asarray(measurements, dtype=float).reshape(-1)
    if M is None:
        M = round(m.size ** (1.0 / d))
        if M**d != m.size:
            raise ValueError("give the per-axis box M for non-square measurement counts")
    if m.size > 2 ** (d * q):
        raise ValueError(f"{m.size} measurements exceed the 2^{d * q} grid")
    sig = walsh_synthesis(m, M, (2**q,) * d, ordering)
    return Reconstruction("truncated-walsh", sig, m.copy())


def grid_errors(f, g) -> tuple[float, float]:
    """(grid L2, grid Linf) of f - g on [0,1]^d."""
    e = np.asarray(f, dtype=float) - np.asarray(g, dtype=float)
    return float(np.sqrt(np.mean(e**2))), float(np.abs(e).max())
