"""
Potentials that do not depend on the energy
===========================================

Seeds built from spherical Bessel functions and Legendre polynomials give
an F that depends on theta alone.  The resulting potential plus k^2 is
the same for every k, which this script checks numerically for p = 0, 1, 2.
"""

import math

from moutard import make_grid, norms
from moutard.catalog import FamilySpec, f_quadrature
from moutard.verify import twofold_pipeline

grid = make_grid(1.0, 3.0, 0.3, math.pi - 0.3, 129, 129)

for p in (0, 1, 2):
    shifted = []
    for k in (1.0, 2.0):
        out = twofold_pipeline(FamilySpec("seeds-bessel", k=k, p=p), grid)
        shifted.append(out["potential"] + k**2)
    gap = norms(shifted[0] - shifted[1], relative_to=shifted[0]).linf
    print(f"p={p}: relative gap between k=1 and k=2 is {gap:.2e}")

# For higher degrees F comes from quadrature of P_p(cos theta)^2.
for theta in (0.4, 1.0, 2.0):
    print(f"F_3({theta}) with C = 2:", f_quadrature(3, theta, 2.0))
