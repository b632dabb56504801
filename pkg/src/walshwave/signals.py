"""Built-in test signals on the dyadic grid.

Neither is claimed to be an exact reproduction of a published test function:
"cos" is cos(2 pi x); "step-mix" is a quadratic on [0, 0.4) followed by a
constant, with a jump at 0.4.
"""
from __future__ import annotations

import numpy as np

JUMP = 0.4


def _cos(x):
    return np.cos(2 * np.pi * x)


def _step_mix(x):
    return np.where(x < JUMP, 1.0 + 2.0 * x - 3.0 * x**2, 0.3)


BUILTIN = {"cos": _cos, "step-mix": _step_mix}


def grid_points(q: int) -> np.ndarray:
    return np.arange(2**q) / 2**q


def builtin_signal(name: str, q: int, d: int = 1) -> np.ndarray:
    """Grid signal of a named test function; d > 1 uses the tensor product."""
    try:
        f = BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown built-in signal {name!r} (expected one of {sorted(BUILTIN)})") from None
    v = f(grid_points(q))
    out = v
    for _ in range(d - 1):
        out = np.multiply.outer(out, v)
    return out


def load_signal(path, q: int, d: int = 1) -> np.ndarray:
    """Read 2^{dq} grid samples (whitespace or comma separated, '#' comments)."""
    vals = load_numbers(path)
    want = 2 ** (d * q)
    if vals.size != want:
        raise ValueError(f"{path}: expected {want} samples for q={q}, d={d}, found {vals.size}")
    return vals.reshape((2**q,) * d)


def load_numbers(path) -> np.ndarray:
    """Parse a numeric text file into a 1-d or 2-d array (rows by line)."""
    rows = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([float(t) for t in line.replace(",", " ").split()])
            except ValueError:
                raise ValueError(f"{path}:{ln}: not a list of numbers: {line!r}") from None
    if not rows:
        raise ValueError(f"{path}: no numbers found")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    a = np.array(rows)
    if a.shape[1] == 1 or a.shape[0] == 1:
        a = a.reshape(-1)
    return a
