"""Discretized domains, scalar fields and epsilon-ball stencils.

A domain lives on a regular grid with uniform spacing ``h``. Every grid node
carries one of three classes (interior, boundary, exterior); exterior nodes
only appear for masked domains (disk, mask files). Scalar fields are plain
``numpy`` arrays with the grid's shape; exterior entries hold ``nan``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXTERIOR = 0
INTERIOR = 1
BOUNDARY = 2


class DomainError(ValueError):
    """Raised for domains that violate construction preconditions."""


class MaskParseError(DomainError):
    """Malformed mask file; carries the offending (line, column)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int = 0
    path: str | None = None

    @classmethod
    def parse(cls, text: str) -> "DomainSpec":
        """Parse ``interval:n``, ``square:n``, ``disk:n`` or ``mask:path``."""
        kind, sep, arg = text.partition(":")
        if not sep or not arg:
            raise DomainError(f"domain must look like kind:arg, got {text!r}")
        if kind == "mask":
            return cls(kind, path=arg)
        if kind not in ("interval", "square", "disk"):
            raise DomainError(f"unknown domain kind {kind!r}")
        try:
            n = int(arg)
        except ValueError:
            raise DomainError(f"node count must be an integer, got {arg!r}") from None
        return cls(kind, n=n)


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Bounded grid domain with node classification.

    ``node_class[idx]`` is one of ``EXTERIOR``, ``INTERIOR``, ``BOUNDARY``.
    Axis 0 of the grid is the first coordinate.
    """

    h: float
    origin: tuple
    node_class: np.ndarray
    name: str = "domain"
    coords: np.ndarray = field(init=False, repr=False)
    interior: np.ndarray = field(init=False, repr=False)
    boundary: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cls_ = np.asarray(self.node_class, dtype=np.int8)
        cls_.setflags(write=False)
        object.__setattr__(self, "node_class", cls_)
        idx = np.indices(cls_.shape, dtype=float)
        origin = np.asarray(self.origin, dtype=float)
        coords = np.stack(
            [origin[a] + self.h * idx[a] for a in range(cls_.ndim)], axis=-1
        )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        flat = cls_.ravel()
        object.__setattr__(self, "interior", np.flatnonzero(flat == INTERIOR))
        object.__setattr__(self, "boundary", np.flatnonzero(flat == BOUNDARY))

    @property
    def dim(self) -> int:
        return self.node_class.ndim

    @property
    def shape(self) -> tuple:
        return self.node_class.shape

    @property
    def active(self) -> np.ndarray:
        """Boolean mask of non-exterior nodes."""
        return self.node_class != EXTERIOR

    @property
    def flat_coords(self) -> np.ndarray:
        return self.coords.reshape(-1, self.dim)

    @property
    def boundary_coords(self) -> np.ndarray:
        return self.flat_coords[self.boundary]

    @property
    def interior_coords(self) -> np.ndarray:
        return self.flat_coords[self.interior]

    @property
    def diameter(self) -> float:
        pts = self.flat_coords[self.active.ravel()]
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def empty_field(self, fill=0.0) -> np.ndarray:
        u = np.full(self.shape, float(fill))
        u[~self.active] = np.nan
        return u

    def field_from_boundary(self, F, fill=0.0) -> np.ndarray:
        """Field equal to ``F`` on boundary nodes and ``fill`` on the interior."""
        u = self.empty_field(fill)
        u.ravel()[self.boundary] = F
        return u

    def multi_index(self, node) -> tuple:
        if np.ndim(node) == 0:
            return tuple(int(i) for i in np.unravel_index(int(node), self.shape))
        return tuple(int(i) for i in node)

    def flat_index(self, node) -> int:
        if np.ndim(node) == 0:
            return int(node)
        return int(np.ravel_multi_index(tuple(node), self.shape))


def _classify_masked(inside: np.ndarray, forced_boundary: np.ndarray | None = None) -> np.ndarray:
    """Boundary = inside nodes with an excluded (or off-grid) neighbor.

    Neighborhood is the full 3**d - 1 ring (8 neighbors in 2D).
    """
    padded = np.pad(inside, 1, constant_values=False)
    touches_outside = np.zeros_like(inside)
    d = inside.ndim
    for off in itertools.product((-1, 0, 1), repeat=d):
        if not any(off):
            continue
        sl = tuple(slice(1 + o, 1 + o + s) for o, s in zip(off, inside.shape))
        touches_outside |= ~padded[sl]
    node_class = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    node_class[inside] = INTERIOR
    bnd = inside & touches_outside
    if forced_boundary is not None:
        bnd |= forced_boundary & inside
    node_class[bnd] = BOUNDARY
    return node_class


def _check_domain(dom: GridDomain) -> GridDomain:
    if dom.boundary.size == 0:
        raise DomainError("domain has no boundary nodes")
    if dom.interior.size == 0:
        raise DomainError("domain has an empty interior")
    # every interior node needs an active axis neighbor
    act = np.pad(dom.active, 1, constant_values=False)
    has_nb = np.zeros(dom.shape, dtype=bool)
    for a in range(dom.dim):
        for s in (-1, 1):
            sl = [slice(1, 1 + n) for n in dom.shape]
            sl[a] = slice(1 + s, 1 + s + dom.shape[a])
            has_nb |= act[tuple(sl)]
    if not np.all(has_nb.ravel()[dom.interior]):
        raise DomainError("interior node without an axis neighbor")
    return dom


def interval(n: int) -> GridDomain:
    """Unit interval with ``n`` nodes; the two endpoints are the boundary."""
    if n < 3:
        raise DomainError("need at least 3 nodes per axis")
    cls_ = np.full(n, INTERIOR, dtype=np.int8)
    cls_[[0, -1]] = BOUNDARY
    return _check_domain(GridDomain(1.0 / (n - 1), (0.0,), cls_, name=f"interval:{n}"))


def square(n: int) -> GridDomain:
    """Unit square with ``n`` x ``n`` nodes; the outermost layer is the boundary."""
    if n < 3:
        raise DomainError("need at least 3 nodes per axis")
    cls_ = np.full((n, n), BOUNDARY, dtype=np.int8)
    cls_[1:-1, 1:-1] = INTERIOR
    return _check_domain(GridDomain(1.0 / (n - 1), (0.0, 0.0), cls_, name=f"square:{n}"))


def disk(n: int) -> GridDomain:
    """Disk of radius 1/2 centred in the unit square, sampled on ``n`` x ``n`` nodes."""
    if n < 3:
        raise DomainError("need at least 3 nodes per axis")
    h = 1.0 / (n - 1)
    idx = np.indices((n, n), dtype=float) * h
    r = np.hypot(idx[0] - 0.5, idx[1] - 0.5)
    inside = r <= 0.5 + 1e-12
    return _check_domain(GridDomain(h, (0.0, 0.0), _classify_masked(inside), name=f"disk:{n}"))


def parse_mask(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse mask text into (inside, forced_boundary) boolean grids.

    ``'.'`` marks a node of the closed domain, ``'#'`` a node forced onto the
    boundary, ``' '`` a node outside. Short lines are right-padded with
    spaces.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MaskParseError("mask is empty")
    width = max(len(ln) for ln in lines)
    inside = np.zeros((len(lines), width), dtype=bool)
    forced = np.zeros_like(inside)
    for i, ln in enumerate(lines):
        for j, ch in enumerate(ln):
            if ch == ".":
                inside[i, j] = True
            elif ch == "#":
                inside[i, j] = forced[i, j] = True
            elif ch != " ":
                raise MaskParseError(f"unexpected character {ch!r}", i + 1, j + 1)
    return inside, forced


def from_mask(text: str, name: str = "mask") -> GridDomain:
    inside, forced = parse_mask(text)
    if min(inside.shape) < 3:
        raise MaskParseError("mask must be at least 3x3")
    h = 1.0 / (max(inside.shape) - 1)
    node_class = _classify_masked(inside, forced)
    if not np.any(node_class == BOUNDARY):
        raise MaskParseError("mask has no boundary nodes")
    return _check_domain(GridDomain(h, (0.0, 0.0), node_class, name=name))


def build_domain(spec: DomainSpec | str) -> GridDomain:
    if isinstance(spec, str):
        spec = DomainSpec.parse(spec)
    if spec.kind == "interval":
        return interval(spec.n)
    if spec.kind == "square":
        return square(spec.n)
    if spec.kind == "disk":
        return disk(spec.n)
    if spec.kind == "mask":
        path = Path(spec.path)
        return from_mask(path.read_text(), name=f"mask:{path.name}")
    raise DomainError(f"unknown domain kind {spec.kind!r}")


def ball_offsets(dim: int, radius_cells: float) -> np.ndarray:
    """Integer offsets ``o != 0`` with Euclidean norm ``<= radius_cells``.

    Rows are in lexicographic order, so the set is closed under negation.
    """
    r = int(np.floor(radius_cells + 1e-9))
    rng = np.arange(-r, r + 1)
    grid = np.stack(np.meshgrid(*([rng] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    norm2 = (grid.astype(float) ** 2).sum(axis=1)
    keep = (norm2 <= radius_cells**2 * (1 + 1e-12)) & (norm2 > 0)
    return grid[keep]


@dataclass(frozen=True, eq=False)
class BallStencil:
    """Punctured ball stencil instantiated at every interior node.

    ``neighbors[r]`` lists flat indices of the clipped neighborhood of
    ``nodes[r]``; clipped slots are padded with the first valid neighbor so
    row-wise min/max see exactly the clipped set. ``valid`` marks real slots
    and ``full`` marks rows with no clipping at all.
    """

    eps: float
    h: float
    offsets: np.ndarray
    nodes: np.ndarray
    neighbors: np.ndarray
    valid: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return self.valid.all(axis=1)

    def row_of(self, node: int) -> int:
        r = np.searchsorted(self.nodes, node)
        if r >= self.nodes.size or self.nodes[r] != node:
            raise ValueError(f"node {node} is not an interior node")
        return int(r)

    def neighborhood(self, node: int) -> np.ndarray:
        r = self.row_of(node)
        return self.neighbors[r][self.valid[r]]


def build_ball_stencil(h: float, eps: float, domain: GridDomain) -> BallStencil:
    if eps < h * (1 - 1e-12):
        raise DomainError(f"eps={eps} is smaller than h={h}: empty stencil")
    if eps > domain.diameter * (1 + 1e-12):
        raise DomainError(f"eps={eps} exceeds the domain diameter")
    offsets = ball_offsets(domain.dim, eps / h)
    nodes = domain.interior
    multi = np.stack(np.unravel_index(nodes, domain.shape), axis=-1)
    K = offsets.shape[0]
    neighbors = np.zeros((nodes.size, K), dtype=np.int64)
    valid = np.zeros((nodes.size, K), dtype=bool)
    shape = np.asarray(domain.shape)
    active = domain.active.ravel()
    for k, off in enumerate(offsets):
        tgt = multi + off
        ok = np.all((tgt >= 0) & (tgt < shape), axis=1)
        flat = np.zeros(nodes.size, dtype=np.int64)
        flat[ok] = np.ravel_multi_index(tuple(tgt[ok].T), domain.shape)
        ok[ok] = active[flat[ok]]
        neighbors[:, k] = flat
        valid[:, k] = ok
    if not np.all(valid.any(axis=1)):
        raise DomainError("an interior node has an empty clipped stencil")
    first = valid.argmax(axis=1)
    pad = neighbors[np.arange(nodes.size), first]
    neighbors = np.where(valid, neighbors, pad[:, None])
    for arr in (offsets, neighbors, valid):
        arr.setflags(write=False)
    return BallStencil(eps, h, offsets, nodes, neighbors, valid)


def ball_extrema(u: np.ndarray, node, stencil: BallStencil) -> tuple[float, float]:
    """Min and max of ``u`` over the clipped punctured ball around ``node``."""
    if np.ndim(node) != 0:
        node = int(np.ravel_multi_index(tuple(node), np.shape(u)))
    vals = np.ravel(u)[stencil.neighborhood(int(node))]
    if vals.size == 0:
        raise ValueError("empty neighborhood")
    return float(vals.min()), float(vals.max())


def ball_extrema_all(u: np.ndarray, stencil: BallStencil) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``ball_extrema`` over every interior node (stencil row order)."""
    vals = np.ravel(u)[stencil.neighbors]
    return vals.min(axis=1), vals.max(axis=1)
