"""Consistency of the ball schemes on quadratic test functions.

The scheme is compared with the normalized infinity Laplacian; h shrinks
like eps**2 so that the directional error h/eps also vanishes.
"""

from lipext.verify import bundled_polynomials, consistency_study

ladder = (0.2, 0.1, 0.05, 0.025)
for phi in bundled_polynomials():
    for form in ("min", "max", "inf"):
        rep = consistency_study(phi, 1.0, form, ladder)
        order = "exact" if rep.exact else f"{rep.order:.2f}"
        errs = " ".join(f"{e:.2e}" for e in rep.errors)
        print(f"{phi.name:18s} {form:3s}  target {rep.continuous:+.4f}  errors {errs}  order {order}")
