"""The infinity-harmonic solve against the extremal extensions.

Any lam-Lipschitz extension lies between Whitney and McShane. The discrete
infinity-harmonic solution is only approximately Lipschitz near corners,
so the comparison is shown with its measured slack.
"""

import numpy as np

from lipext import SchemeConfig, lipschitz_constant_boundary, mcshane_extension, solve, whitney_extension
from lipext.boundary import load_boundary
from lipext.grid import square
from lipext.verify import check_sandwich

for n in (26, 51, 101):
    d = square(n)
    F = load_boundary("sine:1", d)
    lam = lipschitz_constant_boundary(F, d)
    lo, up = whitney_extension(d, F, lam), mcshane_extension(d, F, lam)
    u, rep = solve(d, F, SchemeConfig("inf-harmonic", lam=lam))
    res = check_sandwich(lo, u, up, 0.0)
    worst = max(c.measured for c in res.checks)
    node = max(res.checks, key=lambda c: c.measured).witness_node
    print(f"n = {n:3d}: worst violation {worst:.4f} = {worst / (lam * rep.eps):.3f} lambda eps at {node}")

    mid = 0.5 * (lo + up)
    assert check_sandwich(lo, mid, up, 1e-12).passed  # the midpoint extension is sandwiched exactly
