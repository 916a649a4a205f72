"""
One Moutard step and its trivial solution
=========================================

A single seed Y0 = sin(k r cos(theta)) produces a new potential and the
solution 1 / (Y0 r sin(theta)).  Inside a window that avoids the zeros of
Y0 both can be checked on a grid.
"""

import numpy as np

from moutard import InteriorMask, apply_schrodinger, make_grid, norms, sample, single_potential

k = 1.0
grid = make_grid(1.0, 3.0, 0.6, 1.2, 129, 129)
Y0 = sample(lambda r, t: np.sin(k * r * np.cos(t)), grid)

u_new = single_potential(-k**2, Y0)
trivial = sample(lambda r, t: 1.0 / (np.sin(k * r * np.cos(t)) * r * np.sin(t)), grid)

residual = apply_schrodinger(trivial, u_new)
print("relative residual of the trivial solution:",
      f"{norms(residual, InteriorMask(), relative_to=trivial).linf:.2e}")
