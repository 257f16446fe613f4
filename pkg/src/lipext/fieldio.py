"""Field CSV format.

Header ``# lipext-field v1 d=<d> h=<h>`` followed by one row per
non-exterior node: ``i[,j],x[,y],class,value`` with class ``I`` or ``B``.
Floats are written with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import re

import numpy as np

from .grid import BOUNDARY, GridDomain

_HEADER = re.compile(r"#\s*lipext-field\s+v1\s+d=(\d+)\s+h=(\S+)")


def write_field(path, domain: GridDomain, u: np.ndarray) -> None:
    d = domain.dim
    cls_ = domain.node_class.ravel()
    flat = np.ravel(u)
    coords = domain.flat_coords
    with open(path, "w") as fh:
        fh.write(f"# lipext-field v1 d={d} h={domain.h!r}\n")
        for k in np.flatnonzero(domain.active.ravel()):
            idx = np.unravel_index(k, domain.shape)
            parts = [str(int(i)) for i in idx]
            parts += [repr(float(c)) for c in coords[k]]
            parts.append("B" if cls_[k] == BOUNDARY else "I")
            parts.append(repr(float(flat[k])))
            fh.write(",".join(parts) + "\n")


def read_field(path, domain: GridDomain | None = None):
    """Read a field CSV.

    With ``domain`` given, returns an array of the domain's shape (``nan`` on
    exterior nodes). Otherwise returns ``(index, coords, cls, values, h)``.
    """
    with open(path) as fh:
        header = fh.readline()
        m = _HEADER.match(header)
        if not m:
            raise ValueError(f"{path}: missing lipext-field header")
        d, h = int(m.group(1)), float(m.group(2))
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    index = np.array([[int(t) for t in r[:d]] for r in rows], dtype=np.int64).reshape(-1, d)
    coords = np.array([[float(t) for t in r[d:2 * d]] for r in rows]).reshape(-1, d)
    cls_ = np.array([r[2 * d] for r in rows])
    values = np.array([float(r[2 * d + 1]) for r in rows])
    if domain is None:
        return index, coords, cls_, values, h
    if d != domain.dim:
        raise ValueError(f"{path}: dimension {d} does not match domain")
    u = domain.empty_field()
    u[tuple(index.T)] = values
    return u
