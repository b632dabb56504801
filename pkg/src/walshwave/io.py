"""CSV and plot-data writers with deterministic float formatting."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(fmt(v) for v in r) + "\n")
    return path


def write_plot_data(path, columns: dict, comment: str = "") -> Path:
    """Whitespace-separated columns with a '#' header, gnuplot style."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[k]) for k in names]
    with open(path, "w", newline="\n") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*data):
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    return path


def write_manifest(path, payload: dict) -> Path:
    path = Path(path)

    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)

    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")
    return path
