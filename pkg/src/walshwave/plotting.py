"""Optional PNG figures (Agg backend) for the CLI's --figures flag."""
from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_ssr(N, Theta, ratio, path, title=""):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    N = np.asarray(N)
    ax.plot(N, Theta, "o-", label="stable sampling rate")
    ax.plot(N, ratio * N, "--", label=f"{ratio:.3f} N")
    ax.set_xlabel("N")
    ax.set_ylabel("M")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_reconstruction(x, f, recons: dict, path, title=""):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, f, "k-", lw=1.5, label="signal")
    for name, sig in recons.items():
        ax.plot(x, sig, lw=1, label=name)
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_image(grids: dict, path):
    plt = _plt()
    fig, axes = plt.subplots(1, len(grids), figsize=(3.2 * len(grids), 3))
    for ax, (name, g) in zip(np.atleast_1d(axes), grids.items()):
        ax.imshow(g.T, origin="lower", extent=(0, 1, 0, 1))
        ax.set_title(name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_decay(m, peak, alpha, C, path, title=""):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    ok = peak > 0
    ax.loglog(m[ok], peak[ok], "o", ms=3, label="max_j |W phi_i(j/L + m)|")
    if np.isfinite(alpha):
        ax.loglog(m, C * m**-alpha, "--", label=f"{C:.3g} m^-{alpha:.2f}")
    ax.set_xlabel("m")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
