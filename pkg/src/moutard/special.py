"""Legendre polynomials and half-integer-order Bessel functions.

Only integer degrees are supported.  Half-integer Bessel functions are built
from the elementary spherical Bessel functions j_p, y_p.
"""
from __future__ import annotations

import numpy as np

from .errors import SpecialFunctionDomainError


def _check_degree(p):
    if int(p) != p or p < 0:
        raise SpecialFunctionDomainError(f"degree must be a non-negative integer, got {p!r}")
    return int(p)


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def legendre_p(p: int, x):
    """Legendre polynomial P_p(x) by Bonnet's recurrence."""
    p = _check_degree(p)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-14):
        raise SpecialFunctionDomainError("legendre_p needs |x| <= 1")
    prev, cur = np.ones_like(xa), xa.copy()
    if p == 0:
        return _scalar_or_array(x, prev)
    for n in range(1, p):
        prev, cur = cur, ((2 * n + 1) * xa * cur - n * prev) / (n + 1)
    return _scalar_or_array(x, cur)


def _check_positive(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0.0)):
        raise SpecialFunctionDomainError("argument must be > 0")
    return xa


def _j_upward(p, x):
    j0 = np.sin(x) / x
    if p == 0:
        return j0
    j1 = np.sin(x) / x**2 - np.cos(x) / x
    for n in range(1, p):
        j0, j1 = j1, (2 * n + 1) / x * j1 - j0
    return j1


def _j_downward(p, x):
    # Miller's algorithm, normalised against j0 = sin(x)/x
    start = p + 20 + int(np.max(x))
    nxt = np.zeros_like(x)
    cur = np.full_like(x, 1e-30)
    jp = cur if start == p else None
    for n in range(start, 0, -1):
        prev = (2 * n + 1) / x * cur - nxt
        nxt, cur = cur, prev
        if n - 1 == p:
            jp = cur
        big = np.abs(cur) > 1e250
        if big.any():
            s = np.where(big, 1e-250, 1.0)
            cur, nxt = cur * s, nxt * s
            if jp is not None:
                jp = jp * s
    return jp * (np.sin(x) / x) / cur


def spherical_jn(p: int, x):
    """Spherical Bessel function of the first kind, j_p(x), x > 0."""
    p = _check_degree(p)
    xa = _check_positive(x)
    if p == 0:
        out = np.sin(xa) / xa
    else:
        # upward recurrence loses digits for x < p (and badly near 0)
        up = xa > max(p, 2.0)
        out = np.empty_like(xa)
        if up.any():
            out[up] = _j_upward(p, xa[up])
        if (~up).any():
            out[~up] = _j_downward(p, xa[~up])
    return _scalar_or_array(x, out)


def spherical_yn(p: int, x):
    """Spherical Bessel function of the second kind, y_p(x), x > 0."""
    p = _check_degree(p)
    xa = _check_positive(x)
    y0 = -np.cos(xa) / xa
    if p == 0:
        return _scalar_or_array(x, y0)
    y1 = -np.cos(xa) / xa**2 - np.sin(xa) / xa
    for n in range(1, p):
        y0, y1 = y1, (2 * n + 1) / xa * y1 - y0
    return _scalar_or_array(x, y1)


def bessel_half_j(p: int, x):
    """J_{p+1/2}(x) = sqrt(2x/pi) j_p(x)."""
    xa = _check_positive(x)
    return _scalar_or_array(x, np.sqrt(2.0 * xa / np.pi) * spherical_jn(p, xa))


def bessel_half_y(p: int, x):
    """Y_{p+1/2}(x) = sqrt(2x/pi) y_p(x)."""
    xa = _check_positive(x)
    return _scalar_or_array(x, np.sqrt(2.0 * xa / np.pi) * spherical_yn(p, xa))


def seed_bessel_solution(kind: str, p: int, k: float, r, theta):
    """Separable solution of the free equation (u = -k**2).

    ``kind="first"`` gives J_{p+1/2}(kr) P_p(cos theta) / sqrt(r), ``"second"``
    the same with Y_{p+1/2}.
    """
    if kind not in ("first", "second"):
        raise ValueError(f"kind must be 'first' or 'second', got {kind!r}")
    if not k > 0:
        raise SpecialFunctionDomainError(f"k must be > 0, got {k}")
    r = _check_positive(r)
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0) | (theta >= np.pi)):
        raise SpecialFunctionDomainError("theta must lie in (0, pi)")
    radial = bessel_half_j if kind == "first" else bessel_half_y
    out = radial(p, k * r) * legendre_p(p, np.cos(theta)) / np.sqrt(r)
    if np.ndim(out) == 0:
        return complex(out)
    return np.asarray(out, dtype=complex)
