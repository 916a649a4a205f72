import math

import numpy as np
import pytest

from moutard import make_grid

DEFAULT_DOMAIN = (1.0, 3.0, 0.3, math.pi - 0.3)


def ladder(n, levels=3, domain=DEFAULT_DOMAIN):
    """Grids with n, 2(n-1)+1, ... points per axis on ``domain``."""
    g = make_grid(*domain, n, n)
    out = [g]
    for _ in range(levels - 1):
        out.append(out[-1].refined())
    return out


def fitted_order(grids, errors):
    hs = np.array([g.h_r for g in grids])
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


@pytest.fixture
def grid():
    return make_grid(*DEFAULT_DOMAIN, 65, 65)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
