"""
What happens when a seed is not a solution
==========================================

The pair one-form is closed only when both seeds solve the same equation.
Feed it r^2 cos(theta) instead and the two integration paths disagree by
an amount that does not shrink under refinement, so integration refuses.
"""

import math

import numpy as np

from moutard import InexactFormError, integrate_both_paths, integrate_one_form, make_grid, pair_one_form, sample

for n in (65, 129, 257):
    grid = make_grid(1.0, 3.0, 0.3, math.pi - 0.3, n, n)
    Y1 = sample(lambda r, t: np.sin(r * np.cos(t)), grid)
    good = sample(lambda r, t: np.cos(r * np.cos(t)), grid)
    bad = sample(lambda r, t: r**2 * np.cos(t), grid)
    print(f"n={n:4d}  defect with a true solution {integrate_both_paths(pair_one_form(Y1, good)).defect:.1e}"
          f"  with r^2 cos(theta) {integrate_both_paths(pair_one_form(Y1, bad)).defect:.2f}")

try:
    integrate_one_form(pair_one_form(Y1, bad))
except InexactFormError as exc:
    print("refused:", exc)
