"""Monotone epsilon-ball schemes for Jensen's equations and the infinity Laplacian.

Each scheme is solved as a fixed-point iteration of an explicit update built
from the punctured ball extrema ``m`` (min) and ``M`` (max):

* jensen-min:   ``v = max(m + eps*lam, (M + m)/2)``
* jensen-max:   ``v = min(M - eps*lam, (M + m)/2)``
* inf-harmonic: ``v = (M + m)/2``

Each update is nondecreasing in ``m`` and ``M``. Convergence is certified
with the centered residual, where the ball includes the node itself.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numba as nb
import numpy as np

from .extension import lipschitz_constant_boundary, mcshane_extension, whitney_extension
from .grid import BallStencil, GridDomain, ball_extrema_all, build_ball_stencil

EQUATIONS = ("jensen-min", "jensen-max", "inf-harmonic")
SWEEPS = ("jacobi", "gauss-seidel")
INITS = ("whitney", "mcshane", "midpoint", "zero")
_ALIASES = {"min": "jensen-min", "max": "jensen-max", "inf": "inf-harmonic", "gs": "gauss-seidel"}
_KIND = {"jensen-min": 0, "jensen-max": 1, "inf-harmonic": 2}
_DEFAULT_INIT = {"jensen-min": "whitney", "jensen-max": "mcshane", "inf-harmonic": "midpoint"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    """Solver parameters.

    ``lam=None`` means the boundary Lipschitz constant; ``eps=None`` means
    three grid spacings; ``init=None`` picks the per-equation default
    (whitney for jensen-min, mcshane for jensen-max, midpoint otherwise).
    """

    equation: str = "inf-harmonic"
    lam: float | None = None
    eps: float | None = None
    tol_change: float = 1e-10
    tol_residual: float = 1e-9
    max_iter: int = 10**6
    sweep: str = "gauss-seidel"
    init: str | None = None
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "equation", _ALIASES.get(self.equation, self.equation))
        object.__setattr__(self, "sweep", _ALIASES.get(self.sweep, self.sweep))
        if self.equation not in EQUATIONS:
            raise ConfigError(f"unknown equation {self.equation!r}")
        if self.sweep not in SWEEPS:
            raise ConfigError(f"unknown sweep {self.sweep!r}")
        if self.init is not None and self.init not in INITS:
            raise ConfigError(f"unknown init {self.init!r}")
        if self.lam is not None and not self.lam >= 0:
            raise ConfigError("lambda must be nonnegative")
        if self.eps is not None and not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not (self.tol_change > 0 and self.tol_residual > 0):
            raise ConfigError("tolerances must be positive")
        if self.max_iter < 1 or self.threads < 1:
            raise ConfigError("max_iter and threads must be >= 1")

    def resolved(self, domain: GridDomain, F) -> "SchemeConfig":
        lam = self.lam
        if lam is None:
            lam = lipschitz_constant_boundary(F, domain)
        eps = 3 * domain.h if self.eps is None else self.eps
        if eps < domain.h * (1 - 1e-12):
            raise ConfigError(f"eps={eps} must be at least h={domain.h}")
        init = self.init or _DEFAULT_INIT[self.equation]
        return replace(self, lam=float(lam), eps=float(eps), init=init)


@dataclass
class SolveReport:
    equation: str
    lam: float
    eps: float
    h: float
    iterations: int
    final_change: float
    final_residual: float
    converged: bool
    seconds: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        keys = ("equation", "lambda", "eps", "h", "iterations", "final_change",
                "final_residual", "converged", "seconds")
        return {k: d[k] for k in keys}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_order(m, M):
    if np.any(np.asarray(m) > np.asarray(M)):
        raise ValueError("ball minimum exceeds ball maximum")


def jensen_min_update(m, M, lam, eps):
    _check_order(m, M)
    return np.maximum(m + eps * lam, 0.5 * (M + m))


def jensen_max_update(m, M, lam, eps):
    _check_order(m, M)
    return np.minimum(M - eps * lam, 0.5 * (M + m))


def inf_harmonic_update(m, M):
    _check_order(m, M)
    return 0.5 * (M + m)


def update(equation: str, m, M, lam, eps):
    equation = _ALIASES.get(equation, equation)
    if equation == "jensen-min":
        return jensen_min_update(m, M, lam, eps)
    if equation == "jensen-max":
        return jensen_max_update(m, M, lam, eps)
    return inf_harmonic_update(m, M)


def residual_from_extrema(equation: str, u, m, M, lam, eps):
    """Scheme left-hand side at value ``u`` given ball extrema ``m <= M``.

    Written so that exact fixed points of the updates give exactly zero.
    """
    equation = _ALIASES.get(equation, equation)
    second = (2 * u - (M + m)) / eps**2
    if equation == "jensen-min":
        return np.minimum((u - (m + eps * lam)) / eps, second)
    if equation == "jensen-max":
        return np.maximum((u - (M - eps * lam)) / eps, second)
    if equation == "inf-harmonic":
        return second
    raise ConfigError(f"unknown equation {equation!r}")


def residual_field(u, stencil: BallStencil, equation: str, lam: float, eps: float | None = None,
                   centered: bool = True) -> np.ndarray:
    """Residual at every interior node, in stencil row order."""
    eps = stencil.eps if eps is None else eps
    m, M = ball_extrema_all(u, stencil)
    uc = np.ravel(u)[stencil.nodes]
    if centered:
        m, M = np.minimum(m, uc), np.maximum(M, uc)
    return residual_from_extrema(equation, uc, m, M, lam, eps)


def discrete_residual(u, node, cfg: SchemeConfig, stencil: BallStencil, centered: bool = True) -> float:
    """Residual of ``cfg.equation`` at a single interior node."""
    flat = np.ravel(u)
    if np.ndim(node) != 0:
        node = int(np.ravel_multi_index(tuple(node), np.shape(u)))
    vals = flat[stencil.neighborhood(int(node))]
    if vals.size == 0:
        raise ValueError("empty neighborhood")
    uc = flat[node]
    m, M = vals.min(), vals.max()
    if centered:
        m, M = min(m, uc), max(M, uc)
    lam = 0.0 if cfg.lam is None else cfg.lam
    eps = stencil.eps if cfg.eps is None else cfg.eps
    return float(residual_from_extrema(cfg.equation, uc, m, M, lam, eps))


@nb.njit(nogil=True, cache=True)
def _gs_sweep(u, nodes, nbr, kind, step, reverse):
    n = nodes.shape[0]
    K = nbr.shape[1]
    change = 0.0
    for t in range(n):
        r = n - 1 - t if reverse else t
        lo = np.inf
        hi = -np.inf
        for k in range(K):
            v = u[nbr[r, k]]
            if v < lo:
                lo = v
            if v > hi:
                hi = v
        mid = 0.5 * (hi + lo)
        if kind == 0:
            new = max(lo + step, mid)
        elif kind == 1:
            new = min(hi - step, mid)
        else:
            new = mid
        i = nodes[r]
        d = abs(new - u[i])
        if d > change:
            change = d
        u[i] = new
    return change


def _jacobi_sweep(u, stencil, equation, lam, eps, pool=None, nthreads=1):
    flat = u.reshape(-1)
    nodes = stencil.nodes

    def block(sl):
        vals = flat[stencil.neighbors[sl]]
        return update(equation, vals.min(axis=1), vals.max(axis=1), lam, eps)

    if pool is None:
        new = block(slice(None))
    else:
        bounds = np.linspace(0, nodes.size, nthreads + 1).astype(int)
        parts = pool.map(block, [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])])
        new = np.concatenate(list(parts))
    change = float(np.abs(new - flat[nodes]).max())
    flat[nodes] = new
    return change


def jacobi_operator(u, stencil: BallStencil, equation: str, lam: float, eps: float | None = None):
    """One Jacobi sweep ``T[u]`` as a new array; boundary values are untouched."""
    v = np.array(u, dtype=float, copy=True)
    _jacobi_sweep(v, stencil, equation, lam, stencil.eps if eps is None else eps)
    return v


def initial_field(domain: GridDomain, F, cfg: SchemeConfig) -> np.ndarray:
    if cfg.init == "whitney":
        u = whitney_extension(domain, F, cfg.lam)
    elif cfg.init == "mcshane":
        u = mcshane_extension(domain, F, cfg.lam)
    elif cfg.init == "midpoint":
        u = 0.5 * (whitney_extension(domain, F, cfg.lam) + mcshane_extension(domain, F, cfg.lam))
    else:
        u = domain.empty_field(0.0)
    u.reshape(-1)[domain.boundary] = F
    return u


def solve(domain: GridDomain, F, cfg: SchemeConfig = SchemeConfig(), u0=None):
    """Iterate the scheme to a fixed point with boundary nodes pinned to ``F``.

    Returns ``(u, report)``. Stops once the sup-norm change is at most
    ``tol_change`` and the centered residual is at most ``tol_residual``;
    after ``max_iter`` sweeps the last iterate is returned unconverged.
    """
    F = np.asarray(F, dtype=float)
    cfg = cfg.resolved(domain, F)
    stencil = build_ball_stencil(domain.h, cfg.eps, domain)
    if u0 is None:
        u = initial_field(domain, F, cfg)
    else:
        u = np.array(u0, dtype=float)
        u.reshape(-1)[domain.boundary] = F
    flat = u.reshape(-1)
    kind = _KIND[cfg.equation]
    step = cfg.eps * cfg.lam
    pool = ThreadPoolExecutor(cfg.threads) if cfg.sweep == "jacobi" and cfg.threads > 1 else None
    t0 = time.perf_counter()
    change = residual = np.inf
    converged = False
    it = 0
    try:
        while it < cfg.max_iter:
            if cfg.sweep == "gauss-seidel":
                change = _gs_sweep(flat, stencil.nodes, stencil.neighbors, kind, step, it % 2 == 1)
            else:
                change = _jacobi_sweep(u, stencil, cfg.equation, cfg.lam, cfg.eps, pool, cfg.threads)
            it += 1
            if change <= cfg.tol_change:
                residual = float(np.abs(residual_field(u, stencil, cfg.equation, cfg.lam)).max())
                if residual <= cfg.tol_residual:
                    converged = True
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    if not np.isfinite(residual):
        residual = float(np.abs(residual_field(u, stencil, cfg.equation, cfg.lam)).max())
    report = SolveReport(cfg.equation, cfg.lam, cfg.eps, domain.h, it, float(change),
                         residual, converged, time.perf_counter() - t0)
    return u, report
