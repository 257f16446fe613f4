"""Explicit extensions: the distance function and the boundary threshold.

Run with ``python3 demos/distance_and_threshold.py``.
"""

import numpy as np

from lipext import lipschitz_constant_boundary, mcshane_extension, whitney_extension
from lipext.grid import interval, square

# Zero boundary data: the largest 2-Lipschitz extension is 2 * dist(x, boundary)
d = square(101)
u = mcshane_extension(d, np.zeros(d.boundary.size), 2.0)
x, y = d.coords[..., 0], d.coords[..., 1]
print("square:101, F = 0, lambda = 2")
print("  max |u - 2 dist| =", np.abs(u - 2 * np.minimum.reduce([x, 1 - x, y, 1 - y])).max())

# On [0, 1] with F(0) = 0, F(1) = 1 the boundary Lipschitz constant is 1
d = interval(101)
F = np.array([0.0, 1.0])
print("\ninterval:101, F(0) = 0, F(1) = 1, L_F =", lipschitz_constant_boundary(F, d))
for lam in (2.0, 1.0, 0.5):
    up = mcshane_extension(d, F, lam)
    lo = whitney_extension(d, F, lam)
    print(f"  lambda = {lam}: upper(0), upper(1) = {up[0]:.3f}, {up[-1]:.3f}; "
          f"lower(0), lower(1) = {lo[0]:.3f}, {lo[-1]:.3f}")
# below L_F the formulas no longer match F at the endpoints
