"""Solving Jensen's auxiliary equations with the ball schemes.

The jensen-min solve approximates the McShane extension and jensen-max the
Whitney extension; the gap shrinks like eps when the ball keeps a fixed
number of cells.
"""

import numpy as np

from lipext import SchemeConfig, lipschitz_constant_boundary, mcshane_extension, solve, whitney_extension
from lipext.boundary import load_boundary
from lipext.grid import square

print("F = 0, lambda = 1, eps = 6h")
for n in (41, 81, 161):
    d = square(n)
    u, rep = solve(d, np.zeros(d.boundary.size), SchemeConfig("jensen-min", lam=1.0, eps=6 * d.h))
    x, y = d.coords[..., 0], d.coords[..., 1]
    err = np.abs(u - np.minimum.reduce([x, 1 - x, y, 1 - y])).max()
    print(f"  n = {n:3d}  eps = {rep.eps:.4f}  sup error = {err:.5f}  sweeps = {rep.iterations}")

d = square(51)
F = load_boundary("sine:1", d)
lam = lipschitz_constant_boundary(F, d)
print(f"\nsin(2 pi x) + y on square:51, lambda = L_F = {lam:.4f}")
for eq, ext in (("jensen-min", mcshane_extension), ("jensen-max", whitney_extension)):
    u, rep = solve(d, F, SchemeConfig(eq, lam=lam))
    print(f"  {eq}: sup |solve - extension| = {np.abs(u - ext(d, F, lam)).max():.4f} "
          f"(lambda eps = {lam * rep.eps:.4f}), converged = {rep.converged}")
