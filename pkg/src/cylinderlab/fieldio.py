"""Field serialization as plain CSV.

One row per interior node: the node coordinate followed by the k component
values, printed with enough digits that a save/load round trip is exact.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError, IoError
from .model import Field, SpatialGrid

_FMT = "%.17g"


def save_field(field: Field, path: str):
    """Write a field to CSV with header x,c0,...,c{k-1}."""
    k = field.k
    header = "x," + ",".join(f"c{j}" for j in range(k))
    lines = [header]
    for x, row in zip(field.grid.nodes, field.values):
        lines.append(",".join(_FMT % v for v in (x, *row)))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc


def load_field(path: str) -> Field:
    """Read a field written by save_field, reconstructing its grid."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror}") from exc
    if not lines:
        raise FormatError(f"{path}: empty file")

    header = lines[0].split(",")
    if header[0] != "x" or len(header) < 2:
        raise FormatError(f"{path}: header must be x,c0,...")
    k = len(header) - 1
    if header[1:] != [f"c{j}" for j in range(k)]:
        raise FormatError(f"{path}: header must be x,c0,...,c{k - 1}")
    if len(lines) < 2:
        raise FormatError(f"{path}: no data rows")

    xs = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != k + 1:
            raise FormatError(f"{path}:{lineno}: expected {k + 1} columns, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        xs.append(vals[0])
        rows.append(vals[1:])

    x = np.array(xs)
    n = len(x)
    h = x[0]
    if h <= 0:
        raise FormatError(f"{path}: first node must be positive")
    expected = h * np.arange(1, n + 1)
    if not np.allclose(x, expected, rtol=1e-12, atol=1e-12):
        raise FormatError(f"{path}: nodes are not a uniform interior grid")
    grid = SpatialGrid(h * (n + 1), n)
    return Field(grid, np.array(rows))
