"""Boundary data sources: named presets and ``node-index,value`` CSV files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import GridDomain

PRESETS = ("zero", "const:c", "linear:a,b", "xy", "sine:k", "cone:z0")


class BoundaryDataError(ValueError):
    pass


def _floats(arg: str, name: str) -> list[float]:
    try:
        return [float(t) for t in arg.split(",")]
    except ValueError:
        raise BoundaryDataError(f"bad arguments for {name}: {arg!r}") from None


def preset_function(name: str, dim: int):
    """Return a vectorized ``f(points) -> values`` for a preset string.

    ``linear:a,b`` is 1D only (``a`` at 0, ``b`` at 1). ``xy`` is ``x + y``,
    ``sine:k`` is ``sin(2 pi k x) + y`` (just the sine in 1D), and
    ``cone:z0`` is ``|x - z0|`` with comma-separated ``z0``.
    """
    kind, _, arg = name.partition(":")
    if kind == "zero":
        return lambda p: np.zeros(len(p))
    if kind == "const":
        (c,) = _floats(arg, kind)
        return lambda p: np.full(len(p), c)
    if kind == "linear":
        if dim != 1:
            raise BoundaryDataError("linear:a,b is only defined on 1D domains")
        a, b = _floats(arg, kind)
        return lambda p: a + (b - a) * p[:, 0]
    if kind == "xy":
        if dim != 2:
            raise BoundaryDataError("xy is only defined on 2D domains")
        return lambda p: p[:, 0] + p[:, 1]
    if kind == "sine":
        (k,) = _floats(arg or "1", kind)
        if dim == 1:
            return lambda p: np.sin(2 * np.pi * k * p[:, 0])
        return lambda p: np.sin(2 * np.pi * k * p[:, 0]) + p[:, 1]
    if kind == "cone":
        z0 = np.asarray(_floats(arg, kind))
        if z0.size != dim:
            raise BoundaryDataError(f"cone vertex needs {dim} coordinates")
        return lambda p: np.linalg.norm(p - z0, axis=1)
    raise BoundaryDataError(f"unknown boundary data preset {name!r}")


def boundary_values(domain: GridDomain, func) -> np.ndarray:
    """Evaluate ``func`` on the boundary node coordinates."""
    F = np.asarray(func(domain.boundary_coords), dtype=float)
    if not np.all(np.isfinite(F)):
        raise BoundaryDataError("boundary data must be finite")
    return F


def read_boundary_csv(path, domain: GridDomain) -> np.ndarray:
    """Read ``node-index,value`` rows; ``node-index`` is the flat grid index."""
    pos = {int(b): r for r, b in enumerate(domain.boundary)}
    F = np.full(domain.boundary.size, np.nan)
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                idx, val = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise BoundaryDataError(f"{path}:{lineno}: malformed row") from None
            if idx not in pos:
                raise BoundaryDataError(f"{path}:{lineno}: node {idx} is not a boundary node")
            F[pos[idx]] = val
    if np.isnan(F).any():
        raise BoundaryDataError(f"{path}: {int(np.isnan(F).sum())} boundary nodes have no value")
    return F


def write_boundary_csv(path, domain: GridDomain, F) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("node-index,value\n")
        for idx, val in zip(domain.boundary, F):
            fh.write(f"{int(idx)},{float(val)!r}\n")


def load_boundary(source: str, domain: GridDomain) -> np.ndarray:
    """Resolve a ``--data`` argument: a preset name or ``csv:path``."""
    if source.startswith("csv:"):
        path = Path(source[4:])
        if not path.exists():
            raise BoundaryDataError(f"no such file: {path}")
        return read_boundary_csv(path, domain)
    return boundary_values(domain, preset_function(source, domain.dim))
