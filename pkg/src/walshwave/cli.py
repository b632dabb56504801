"""Command-line experiments: transform | ssr | reconstruct | gramian | decay.

Every run writes CSV payloads plus manifest.json (resolved config, version,
timing) into the output directory.  Exit codes: 0 success, 1 a requested
computation missed its tolerance (strict mode) or the SSR search hit its cap,
2 bad input or configuration.
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .gramian import assemble, decay_profile, export_gramian
from .io import write_csv, write_manifest, write_plot_data
from .signals import builtin_signal, grid_points, load_numbers, load_signal
from .solver import (
    ANGLE_COLUMNS, SSR_COLUMNS, BelowSamplingRate, SearchCapExceeded, gs_reconstruct,
    grid_errors, pbdw_reconstruct, ssr_row, stable_sampling_rate, subspace_angle,
    theoretical_s_theta, truncated_walsh,
)
from .walsh import WalshOrdering, WalshSpec, fwht, fwht_nd, walsh_coefficients
from .wavelet import WaveletSpec, min_level, scaling_basis

RECON_METHODS = ("gs", "pbdw", "truncated-walsh")


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class ExperimentConfig:
    p: int = 2
    R: int = 5
    J0: int | None = None
    d: int = 1
    q: int | None = None
    ordering: str = "kaczmarz"
    M: int | None = None
    theta: float = 2.0
    signal: str = "cos"
    signal_file: str | None = None
    noise: str = "none"
    noise_sigma: float = 0.0
    out: str = "walshwave-out"
    seed: int = 0
    figures: bool = False
    strict: bool = False
    method: str | None = None
    R_min: int | None = None
    R_max: int | None = None
    cap_factor: int = 8
    search: str = "bisect"
    input: str | None = None
    direction: str = "forward"
    piece: int | None = None
    m_max: int = 64
    depth: int = 12


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_int(s):
    return None if str(s).strip().lower() in ("", "none", "auto") else int(s)


# (section, key) -> (field, parser); keys are case-insensitive
CONFIG_KEYS = {
    ("wavelet", "p"): ("p", int),
    ("wavelet", "j0"): ("J0", _opt_int),
    ("wavelet", "r"): ("R", int),
    ("wavelet", "d"): ("d", int),
    ("wavelet", "q"): ("q", _opt_int),
    ("sampling", "ordering"): ("ordering", str),
    ("sampling", "m"): ("M", _opt_int),
    ("sampling", "theta"): ("theta", float),
    ("signal", "builtin"): ("signal", str),
    ("signal", "file"): ("signal_file", str),
    ("noise", "kind"): ("noise", str),
    ("noise", "sigma"): ("noise_sigma", float),
    ("output", "dir"): ("out", str),
    ("output", "seed"): ("seed", int),
    ("output", "figures"): ("figures", _bool),
    ("output", "strict"): ("strict", _bool),
    ("run", "method"): ("method", str),
    ("ssr", "r_min"): ("R_min", int),
    ("ssr", "r_max"): ("R_max", int),
    ("ssr", "cap_factor"): ("cap_factor", int),
    ("ssr", "search"): ("search", str),
    ("transform", "input"): ("input", str),
    ("transform", "direction"): ("direction", str),
    ("decay", "piece"): ("piece", _opt_int),
    ("decay", "m_max"): ("m_max", int),
    ("decay", "depth"): ("depth", int),
}


def read_config(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    out = {}
    for sec in cp.sections():
        for key, raw in cp.items(sec):
            spec = CONFIG_KEYS.get((sec.lower(), key.lower()))
            if spec is None:
                raise ConfigError(f"{path}: unknown key '{key}' in section [{sec}]")
            name, conv = spec
            try:
                out[name] = conv(raw)
            except ValueError as e:
                raise ConfigError(f"{path}: [{sec}] {key}: {e}") from None
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="INI file with [wavelet] [sampling] [signal] [noise] [output] ... sections")
    g.add_argument("--out", help="output directory")
    g.add_argument("--strict", action="store_const", const=True, default=None,
                   help="exit 1 unless every requested computation meets its tolerance")
    g.add_argument("--seed", type=int)
    g.add_argument("--method")
    g.add_argument("--figures", action="store_const", const=True, default=None,
                   help="also render PNG figures next to the plot data")
    s = common.add_argument_group("specs")
    s.add_argument("--p", type=int, help="Daubechies order")
    s.add_argument("--R", type=int, help="top level, N = 2^(dR)")
    s.add_argument("--J0", type=int, help="coarse level")
    s.add_argument("--d", type=int, help="dimension")
    s.add_argument("--q", type=int, help="grid depth (default R+7)")
    s.add_argument("--theta", type=float)
    s.add_argument("--M", type=int, help="per-axis number of Walsh samples")
    s.add_argument("--ordering", help="kaczmarz | paley | natural")

    ap = argparse.ArgumentParser(prog="walshwave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", parents=[common], help="Walsh transform of a vector or 2-d array")
    t.add_argument("--input", help="text file of numbers (one row per line)")
    t.add_argument("--direction", choices=("forward", "inverse"))
    t.add_argument("--signal", help="built-in signal sampled at 2^q points when no --input")

    r = sub.add_parser("ssr", parents=[common], help="stable sampling rate over a range of levels")
    r.add_argument("--R-min", dest="R_min", type=int)
    r.add_argument("--R-max", dest="R_max", type=int)
    r.add_argument("--cap-factor", dest="cap_factor", type=int)
    r.add_argument("--search", choices=("bisect", "linear"))

    c = sub.add_parser("reconstruct", parents=[common], help="GS / PBDW / truncated Walsh reconstruction")
    c.add_argument("--signal", help="cos | step-mix")
    c.add_argument("--signal-file", dest="signal_file", help="file with 2^(dq) grid samples")
    c.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                   help="std of additive gaussian noise on the measurements")

    m = sub.add_parser("gramian", parents=[common], help="dump the cross-Gramian")
    del m

    dcy = sub.add_parser("decay", parents=[common], help="Walsh decay profile of a scaling-function piece")
    dcy.add_argument("--piece", type=int, help="piece index i (default: envelope over all pieces)")
    dcy.add_argument("--m-max", dest="m_max", type=int)
    dcy.add_argument("--depth", type=int)
    return ap


def resolve(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    vals = {}
    if args.config:
        vals.update(read_config(args.config))
    for f in dataclasses.fields(cfg):
        v = getattr(args, f.name, None)
        if v is not None:
            vals[f.name] = v
    if vals.get("noise_sigma") and "noise" not in vals:
        vals["noise"] = "gaussian"
    cfg = dataclasses.replace(cfg, **vals)
    WalshOrdering.parse(cfg.ordering)
    if cfg.noise not in ("none", "gaussian"):
        raise ConfigError(f"noise kind must be none or gaussian, got {cfg.noise!r}")
    if cfg.d not in (1, 2):
        raise ConfigError("the CLI supports d = 1 or 2")
    return cfg


# ---------------------------------------------------------------- commands


def _wspec(cfg, R=None) -> WaveletSpec:
    R = cfg.R if R is None else R
    return WaveletSpec(cfg.p, R, cfg.J0, cfg.d, cfg.q)


def cmd_transform(cfg, out: Path, res: dict) -> bool:
    if cfg.input:
        x = load_numbers(cfg.input)
    else:
        x = builtin_signal(cfg.signal, cfg.q if cfg.q is not None else 8, cfg.d)
    for n in x.shape:
        if n & (n - 1):
            raise ValueError(f"axis length {n} is not a power of two")
    X = fwht_nd(x, cfg.ordering, cfg.direction)
    back = fwht_nd(X, cfg.ordering, "inverse" if cfg.direction == "forward" else "forward")
    small, big = (X, x) if cfg.direction == "forward" else (x, X)
    pars = abs((small**2).sum() - (big**2).sum() / big.size) / max((small**2).sum(), 1e-300)
    rt = np.linalg.norm(back - x) / max(np.linalg.norm(x), 1e-300)
    if X.ndim == 1:
        write_csv(out / "transform.csv", ("index", "value"), enumerate(X))
    else:
        write_csv(out / "transform.csv", ("i", "j", "value"),
                  ((i, j, X[i, j]) for i in range(X.shape[0]) for j in range(X.shape[1])))
    res.update(shape=list(x.shape), parseval_rel_error=pars, roundtrip_rel_error=rt)
    return pars <= 1e-12 and rt <= 1e-12


def cmd_ssr(cfg, out: Path, res: dict) -> bool:
    R_min = cfg.R_min if cfg.R_min is not None else (cfg.J0 if cfg.J0 is not None else min_level(cfg.p))
    R_max = cfg.R_max if cfg.R_max is not None else cfg.R
    method = cfg.method or "inverse"
    rows, trace = [], []
    ok = True
    try:
        for R in range(R_min, R_max + 1):
            r = stable_sampling_rate(_wspec(cfg, R), cfg.theta, cfg.search, ordering=cfg.ordering,
                                     cap_factor=cfg.cap_factor, method=method)
            rows.append(ssr_row(r))
            trace += [(R, M, s, mu) for M, s, mu in r.trace]
    except SearchCapExceeded as e:
        res["error"] = str(e)
        trace += [(R, M, s, mu) for M, s, mu in e.trace]
        ok = False
    write_csv(out / "ssr.csv", SSR_COLUMNS, rows)
    write_csv(out / "ssr_trace.csv", ("R", "M", "sigma_min", "mu"), trace)
    if rows:
        N = np.array([r[1] for r in rows])
        Th = np.array([r[3] for r in rows])
        ratio = float(max(r[4] for r in rows))
        write_plot_data(out / "ssr_plot.dat", {"N": N, "Theta": Th, "ref": ratio * N},
                        f"stable sampling rate, p={cfg.p}, theta={cfg.theta}; ref = {ratio!r} N")
        res.update(max_ratio_M_over_N=ratio, levels=[r[0] for r in rows])
        if cfg.figures:
            from .plotting import plot_ssr

            plot_ssr(N, Th, ratio, out / "ssr.png", f"DB{cfg.p}, theta = {cfg.theta}")
    return ok


def _signal(cfg, q):
    if cfg.signal_file:
        return load_signal(cfg.signal_file, q, cfg.d)
    return builtin_signal(cfg.signal, q, cfg.d)


def _grid_rows(sig):
    x = grid_points(int(np.log2(sig.shape[0])))
    if sig.ndim == 1:
        return ("x", "value"), zip(x, sig)
    return ("x", "y", "value"), ((x[i], x[j], sig[i, j]) for i in range(sig.shape[0]) for j in range(sig.shape[1]))


def cmd_reconstruct(cfg, out: Path, res: dict) -> bool:
    methods = RECON_METHODS if (cfg.method or "all") == "all" else (cfg.method,)
    for m in methods:
        if m not in RECON_METHODS:
            raise ConfigError(f"unknown method {m!r} (gs | pbdw | truncated-walsh | all)")
    r = _wspec(cfg)
    basis = scaling_basis(r)
    f = _signal(cfg, r.q)
    M = cfg.M
    if M is None:
        M = stable_sampling_rate(r, cfg.theta, ordering=cfg.ordering).Theta
    U = assemble(WalshSpec(cfg.ordering, r.d, M), r, basis=basis)
    rep = subspace_angle(U, "svd", cfg.theta)
    meas = walsh_coefficients(f, M, cfg.ordering)
    if cfg.noise == "gaussian" and cfg.noise_sigma > 0:
        meas = meas + np.random.default_rng(cfg.seed).normal(0.0, cfg.noise_sigma, meas.size)
    hdr, rows = _grid_rows(f)
    write_csv(out / "signal.csv", hdr, rows)
    err_rows, recons, ok = [], {}, True
    for m in methods:
        try:
            if m == "gs":
                rec = gs_reconstruct(meas, U, basis, theta=cfg.theta)
            elif m == "pbdw":
                rec = pbdw_reconstruct(meas, U, basis, theta=cfg.theta)
            else:
                rec = truncated_walsh(meas, r.q, r.d, M, cfg.ordering)
                rec.mu = 1.0
        except BelowSamplingRate as e:
            err_rows.append((m, None, None, e.mu, "unstable"))
            res[f"{m}_message"] = str(e)
            ok = False
            continue
        l2, linf = grid_errors(f, rec.signal)
        err_rows.append((m, l2, linf, rec.mu, rec.status))
        ok &= rec.status == "ok"
        recons[m] = rec.signal
        hdr, rows = _grid_rows(rec.signal)
        write_csv(out / f"recon_{m}.csv", hdr, rows)
    write_csv(out / "errors.csv", ("method", "L2_error", "Linf_error", "mu", "status"), err_rows)
    res.update(N=r.N, M=M, sigma_min=rep.sigma_min, mu=rep.mu)
    if r.d == 1:
        cols = {"x": grid_points(r.q), "signal": f}
        cols.update({k.replace("-", "_"): v for k, v in recons.items()})
        write_plot_data(out / "reconstruct_plot.dat", cols, f"N={r.N} M={M} p={r.p}")
    if cfg.figures:
        from .plotting import plot_image, plot_reconstruction

        title = f"DB{r.p}, N = {r.N}, M = {M}"
        if r.d == 1:
            plot_reconstruction(grid_points(r.q), f, recons, out / "reconstruct.png", title)
        else:
            plot_image({"signal": f, **recons}, out / "reconstruct.png")
    return ok


def cmd_gramian(cfg, out: Path, res: dict) -> bool:
    r = _wspec(cfg)
    M = cfg.M if cfg.M is not None else 2 * r.n_axis
    g = assemble(WalshSpec(cfg.ordering, r.d, M), r, cfg.method or "wht")
    export_gramian(g, out / "gramian.csv")
    rep = subspace_angle(g, "svd", cfg.theta)
    write_csv(out / "angle.csv", ANGLE_COLUMNS, [rep.row()])
    res.update(M=g.M, N=g.N, sigma_min=rep.sigma_min, mu=rep.mu, method=g.method)
    return True


def cmd_decay(cfg, out: Path, res: dict) -> bool:
    prof = decay_profile(cfg.p, cfg.piece, cfg.R, cfg.m_max, cfg.depth, cfg.ordering)
    L = prof.L
    rows = ((m, j, m + j / L, prof.samples[m - 1, j]) for m in prof.m for j in range(L))
    write_csv(out / "decay.csv", ("m", "j", "frequency", "abs_transform"), rows)
    fit = prof.C_hat * prof.m ** (-prof.alpha_hat) if np.isfinite(prof.alpha_hat) else np.zeros(prof.m.size)
    write_plot_data(out / "decay_peak.dat", {"m": prof.m, "peak": prof.peak, "fit": fit},
                    f"p={cfg.p} piece={cfg.piece if cfg.piece is not None else 'envelope'} L={L}")
    res.update(alpha_hat=prof.alpha_hat, slope=prof.slope, C_hat=prof.C_hat)
    if prof.alpha_hat > 0.5 and np.isfinite(prof.alpha_hat):
        res["S_theta_bound"] = theoretical_s_theta(cfg.p, prof.alpha_hat, prof.C_hat, cfg.theta, cfg.d)
    if cfg.figures:
        from .plotting import plot_decay

        plot_decay(prof.m, prof.peak, prof.alpha_hat, prof.C_hat, out / "decay.png", f"DB{cfg.p}")
    if cfg.p == 1:
        return bool(np.all(prof.samples == 0))
    alpha_ref = 0.55 if cfg.p == 2 else 1.0
    return prof.slope <= -alpha_ref + 0.1


COMMANDS = {
    "transform": cmd_transform,
    "ssr": cmd_ssr,
    "reconstruct": cmd_reconstruct,
    "gramian": cmd_gramian,
    "decay": cmd_decay,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = resolve(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        res = {}
        t0 = time.perf_counter()
        ok = COMMANDS[args.command](cfg, out, res)
        elapsed = time.perf_counter() - t0
    except (ValueError, OSError) as e:
        print(f"walshwave {args.command}: error: {e}", file=sys.stderr)
        return 2
    write_manifest(out / "manifest.json", {
        "command": args.command,
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "timing_seconds": elapsed,
        "results": res,
        "tolerances_met": bool(ok),
    })
    print(f"walshwave {args.command}: {'ok' if ok else 'tolerance not met'} -> {out}")
    if not ok and (cfg.strict or args.command == "ssr"):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
