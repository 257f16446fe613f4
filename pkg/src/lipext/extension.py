"""McShane and Whitney extensions of boundary data, and Lipschitz constants.

All evaluations are brute force over boundary nodes with Euclidean
distances; memory is bounded by processing target nodes in chunks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridDomain

_CHUNK = 1 << 22  # max pairwise entries per block


@dataclass(frozen=True)
class ExtensionParams:
    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")


def _lam(p) -> float:
    lam = p.lam if isinstance(p, ExtensionParams) else float(p)
    if not lam >= 0:
        raise ValueError("lambda must be nonnegative")
    return lam


def _pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _chunks(n: int, width: int):
    step = max(1, _CHUNK // max(width, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _pairwise_slope_max(pts: np.ndarray, vals: np.ndarray) -> float:
    best = 0.0
    n = pts.shape[0]
    for sl in _chunks(n, n):
        d = _pairwise_dist(pts[sl], pts)
        dv = np.abs(vals[sl, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d > 0, dv / d, 0.0)
        best = max(best, float(q.max()))
    return best


def lipschitz_constant_boundary(F, domain: GridDomain) -> float:
    """Smallest ``L`` with ``|F(x) - F(y)| <= L |x - y|`` over boundary node pairs."""
    F = np.asarray(F, dtype=float)
    if domain.boundary.size < 2:
        raise ValueError("need at least 2 boundary nodes")
    if F.shape != domain.boundary.shape:
        raise ValueError("boundary data does not match the boundary node set")
    return _pairwise_slope_max(domain.boundary_coords, F)


def lipschitz_constant_field(u: np.ndarray, domain: GridDomain, sample: int | None = None,
                             seed: int = 0) -> float:
    """Discrete Lipschitz constant of ``u`` over non-exterior node pairs.

    Exact and quadratic by default. With ``sample`` set and more than
    ``sample`` pairs, a seeded random subset of ``sample`` pairs is used
    instead, which only gives a lower bound.
    """
    act = np.flatnonzero(domain.active.ravel())
    if act.size < 2:
        raise ValueError("need at least 2 nodes")
    pts = domain.flat_coords[act]
    vals = np.ravel(u)[act]
    n = act.size
    if sample is not None and n * (n - 1) // 2 > sample:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, sample)
        j = rng.integers(0, n, sample)
        keep = i != j
        d = np.linalg.norm(pts[i[keep]] - pts[j[keep]], axis=1)
        return float((np.abs(vals[i[keep]] - vals[j[keep]]) / d).max(initial=0.0))
    return _pairwise_slope_max(pts, vals)


def _extend(domain: GridDomain, F, lam: float, sign: float) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != domain.boundary.shape:
        raise ValueError("boundary data does not match the boundary node set")
    z = domain.boundary_coords
    act = np.flatnonzero(domain.active.ravel())
    pts = domain.flat_coords[act]
    out = domain.empty_field()
    flat = out.reshape(-1)
    for sl in _chunks(act.size, z.shape[0]):
        d = _pairwise_dist(pts[sl], z)
        if sign > 0:
            flat[act[sl]] = (F[None, :] + lam * d).min(axis=1)
        else:
            flat[act[sl]] = (F[None, :] - lam * d).max(axis=1)
    return out


def mcshane_extension(domain: GridDomain, F, p) -> np.ndarray:
    """Largest lam-Lipschitz extension: ``min_z F(z) + lam |x - z|``.

    Boundary nodes keep the raw formula value, which falls below ``F`` when
    ``lam`` is smaller than the boundary Lipschitz constant.
    """
    return _extend(domain, F, _lam(p), +1.0)


def whitney_extension(domain: GridDomain, F, p) -> np.ndarray:
    """Smallest lam-Lipschitz extension: ``max_z F(z) - lam |x - z|``."""
    return _extend(domain, F, _lam(p), -1.0)


def kink_mask(domain: GridDomain, F, lam: float, spread: float, slack: float | None = None) -> np.ndarray:
    """Flag nodes where McShane's infimum is attained by far-apart boundary points.

    A node is a kink if some boundary point within ``slack`` (default
    ``lam * h``) of the minimal cone value lies farther than ``spread`` from
    the minimizer. Returned as a boolean field (exterior nodes False).
    """
    F = np.asarray(F, dtype=float)
    slack = lam * domain.h if slack is None else slack
    z = domain.boundary_coords
    act = np.flatnonzero(domain.active.ravel())
    pts = domain.flat_coords[act]
    out = np.zeros(domain.shape, dtype=bool)
    flat = out.reshape(-1)
    for sl in _chunks(act.size, z.shape[0]):
        cones = F[None, :] + lam * _pairwise_dist(pts[sl], z)
        best = cones.argmin(axis=1)
        near = cones <= cones.min(axis=1, keepdims=True) + slack
        far = _pairwise_dist(z[best], z) > spread
        flat[act[sl]] = np.any(near & far, axis=1)
    return out
