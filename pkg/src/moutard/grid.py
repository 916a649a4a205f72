"""Annular (r, theta) grids, sampled complex fields and finite differences.

Everything here works on a uniform tensor grid that stays away from the
coordinate singularities r = 0 and sin(theta) = 0.  Derivatives use
fourth-order central stencils; points whose stencil would leave the grid are
kept in the array but flagged invalid, never extrapolated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .errors import (
    DomainBoundsError,
    EmptyMaskError,
    GridMismatchError,
    GridSizeError,
    NonFiniteValueError,
)

STENCIL_HALF_WIDTH = 2
MIN_POINTS = 9
# |denominator| below this fraction of its L-infinity norm is masked out
NEAR_ZERO_RTOL = 1e-8

# central difference weights keyed by (accuracy, derivative order)
_WEIGHTS = {
    (4, 1): np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    (4, 2): np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    (6, 1): np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
    (6, 2): np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0,
}


@dataclass(frozen=True)
class AnnularGrid:
    """Uniform tensor grid on [r_min, r_max] x [theta_min, theta_max]."""

    r_min: float
    r_max: float
    theta_min: float
    theta_max: float
    n_r: int
    n_theta: int

    def __post_init__(self):
        if not (self.r_min > 0.0):
            raise DomainBoundsError(f"r_min must be > 0, got {self.r_min}")
        if not (self.r_max > self.r_min):
            raise DomainBoundsError(f"need r_max > r_min, got [{self.r_min}, {self.r_max}]")
        if not (0.0 < self.theta_min < self.theta_max < np.pi):
            raise DomainBoundsError(
                "need 0 < theta_min < theta_max < pi, got "
                f"[{self.theta_min}, {self.theta_max}]"
            )
        if self.n_r < MIN_POINTS or self.n_theta < MIN_POINTS:
            raise GridSizeError(
                f"need at least {MIN_POINTS} points per axis, got "
                f"n_r={self.n_r}, n_theta={self.n_theta}"
            )

    @property
    def h_r(self) -> float:
        return (self.r_max - self.r_min) / (self.n_r - 1)

    @property
    def h_theta(self) -> float:
        return (self.theta_max - self.theta_min) / (self.n_theta - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.h_r * np.arange(self.n_r)

    @property
    def theta(self) -> np.ndarray:
        return self.theta_min + self.h_theta * np.arange(self.n_theta)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(R, TH)`` arrays of shape ``(n_r, n_theta)``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def point(self, i: int, j: int) -> tuple[float, float]:
        return (self.r_min + i * self.h_r, self.theta_min + j * self.h_theta)

    def refined(self, factor: int = 2) -> "AnnularGrid":
        """Same domain with every spacing divided by ``factor``."""
        return AnnularGrid(
            self.r_min, self.r_max, self.theta_min, self.theta_max,
            factor * (self.n_r - 1) + 1, factor * (self.n_theta - 1) + 1,
        )

    def metadata(self) -> dict:
        return {
            "r_min": self.r_min, "r_max": self.r_max,
            "theta_min": self.theta_min, "theta_max": self.theta_max,
            "n_r": self.n_r, "n_theta": self.n_theta,
        }


def make_grid(r_min, r_max, theta_min, theta_max, n_r, n_theta) -> AnnularGrid:
    return AnnularGrid(float(r_min), float(r_max), float(theta_min), float(theta_max),
                       int(n_r), int(n_theta))


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples on an :class:`AnnularGrid`.

    ``values`` has shape ``(n_r, n_theta)`` (row-major, r outer).  ``valid``
    flags the points carrying meaningful data; invalid points hold 0.
    """

    grid: AnnularGrid
    values: np.ndarray
    valid: np.ndarray = field(default=None)

    # let ndarray * field dispatch to the field's reflected operators
    __array_ufunc__ = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if self.valid is None:
            valid = np.ones(self.grid.shape, dtype=bool)
        else:
            valid = np.array(self.valid, dtype=bool)
            if valid.shape != self.grid.shape:
                raise GridMismatchError("valid mask shape does not match grid")
        vals[~valid] = 0.0
        bad = ~np.isfinite(vals)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            r, th = self.grid.point(i, j)
            raise NonFiniteValueError(
                f"non-finite value at grid point ({i}, {j}) = (r={r:.6g}, theta={th:.6g})"
            )
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "valid", _readonly(valid))

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values, other.valid
        return other, self.valid

    def __add__(self, other):
        v, m = self._coerce(other)
        return ScalarField(self.grid, self.values + v, self.valid & m)

    __radd__ = __add__

    def __sub__(self, other):
        v, m = self._coerce(other)
        return ScalarField(self.grid, self.values - v, self.valid & m)

    def __rsub__(self, other):
        v, m = self._coerce(other)
        return ScalarField(self.grid, v - self.values, self.valid & m)

    def __mul__(self, other):
        v, m = self._coerce(other)
        return ScalarField(self.grid, self.values * v, self.valid & m)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values, self.valid)

    def __truediv__(self, other):
        if isinstance(other, ScalarField):
            return divide(self, other)
        return ScalarField(self.grid, self.values / other, self.valid)

    def __rtruediv__(self, other):
        return divide(constant(self.grid, other), self)

    # -- conveniences -----------------------------------------------------
    @property
    def real(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.real, self.valid)

    @property
    def imag(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.imag, self.valid)

    @property
    def excluded(self) -> int:
        """Number of points flagged invalid."""
        return int((~self.valid).sum())

    def at(self, i: int, j: int) -> complex:
        return complex(self.values[i, j])

    def with_valid(self, valid) -> "ScalarField":
        return ScalarField(self.grid, self.values, self.valid & np.asarray(valid, dtype=bool))


def sample(f: Callable, grid: AnnularGrid, mask_nonfinite: bool = False) -> ScalarField:
    """Evaluate the vectorised function ``f(r, theta)`` at every grid node.

    Non-finite values raise :class:`NonFiniteValueError` naming the first
    offending point, unless ``mask_nonfinite`` is set, in which case those
    points are flagged invalid.
    """
    R, TH = grid.mesh()
    with np.errstate(all="ignore"):
        vals = np.broadcast_to(np.asarray(f(R, TH), dtype=complex), grid.shape).copy()
    if mask_nonfinite:
        return ScalarField(grid, vals, np.isfinite(vals))
    return ScalarField(grid, vals)


def constant(grid: AnnularGrid, value) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, complex(value)))


def coordinates(grid: AnnularGrid) -> tuple[ScalarField, ScalarField]:
    R, TH = grid.mesh()
    return ScalarField(grid, R), ScalarField(grid, TH)


def divide(num: ScalarField, den: ScalarField, rtol: float = NEAR_ZERO_RTOL) -> ScalarField:
    """Pointwise quotient; points where ``|den|`` is near zero are masked out."""
    if num.grid != den.grid:
        raise GridMismatchError("fields live on different grids")
    ok = num.valid & den.valid & ~near_zero(den, rtol)
    with np.errstate(all="ignore"):
        q = np.where(ok, num.values / np.where(ok, den.values, 1.0), 0.0)
    return ScalarField(num.grid, q, ok)


def near_zero(f: ScalarField, rtol: float = NEAR_ZERO_RTOL) -> np.ndarray:
    """Boolean array of valid points where ``|f| < rtol * max|f|``."""
    mag = np.abs(f.values)
    scale = mag[f.valid].max() if f.valid.any() else 0.0
    return f.valid & (mag < rtol * scale)


def _shift_valid(valid: np.ndarray, axis: int, hw: int) -> np.ndarray:
    # a point is valid only if its whole stencil is
    out = np.zeros_like(valid)
    n = valid.shape[axis]
    acc = np.ones(np.take(valid, range(hw, n - hw), axis=axis).shape, dtype=bool)
    for s in range(-hw, hw + 1):
        acc &= np.take(valid, range(hw + s, n - hw + s), axis=axis)
    idx = [slice(None)] * 2
    idx[axis] = slice(hw, n - hw)
    out[tuple(idx)] = acc
    return out


def differentiate(f: ScalarField, axis: str, order: int = 1, accuracy: int = 4) -> ScalarField:
    """Central finite-difference derivative along ``"r"`` or ``"theta"``.

    ``accuracy`` is the stencil order (4 or 6).  The result is valid only
    where every stencil point of ``f`` is valid, so each application erodes
    the valid region by ``accuracy // 2`` cells.
    """
    ax = {"r": 0, "theta": 1, "θ": 1}.get(axis)
    if ax is None:
        raise ValueError(f"axis must be 'r' or 'theta', got {axis!r}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if accuracy not in (4, 6):
        raise ValueError(f"accuracy must be 4 or 6, got {accuracy}")
    w = _WEIGHTS[accuracy, order]
    scale = (f.grid.h_r if ax == 0 else f.grid.h_theta) ** order
    hw = accuracy // 2
    v = f.values
    n = v.shape[ax]
    centre = np.take(v, range(hw, n - hw), axis=ax)
    acc = np.zeros(centre.shape, dtype=complex)
    # the weights sum to zero, so differencing against the centre value
    # changes nothing analytically and makes constants differentiate to 0
    for c, s in zip(w, range(-hw, hw + 1)):
        if c and s:
            acc += c * (np.take(v, range(hw + s, n - hw + s), axis=ax) - centre)
    out = np.zeros_like(v)
    idx = [slice(None)] * 2
    idx[ax] = slice(hw, n - hw)
    out[tuple(idx)] = acc / scale
    return ScalarField(f.grid, out, _shift_valid(f.valid, ax, hw))


def _as_field(u, grid) -> ScalarField:
    if isinstance(u, ScalarField):
        if u.grid != grid:
            raise GridMismatchError("potential and solution live on different grids")
        return u
    return constant(grid, u)


def apply_schrodinger(Y: ScalarField, u: Union[ScalarField, complex]) -> ScalarField:
    """Residual of the axially symmetric Schrodinger operator,

    ``Y_rr + (2/r) Y_r + (Y_thth + cot(theta) Y_th) / r**2 - u Y``.

    ``u`` may be a field or a constant.
    """
    u = _as_field(u, Y.grid)
    R, TH = Y.grid.mesh()
    Yr = differentiate(Y, "r", 1)
    Yrr = differentiate(Y, "r", 2)
    Yt = differentiate(Y, "theta", 1)
    Ytt = differentiate(Y, "theta", 2)
    lap = Yrr.values + 2.0 / R * Yr.values + (Ytt.values + Yt.values / np.tan(TH)) / R**2
    valid = Yr.valid & Yrr.valid & Yt.valid & Ytt.valid & u.valid
    return ScalarField(Y.grid, lap - u.values * Y.values, valid)


@dataclass(frozen=True)
class InteriorMask:
    """Points at least ``margin`` cells from every edge.

    ``exclude`` is an optional boolean array (or callable ``(R, TH) -> bool``)
    removing further points, e.g. near zeros of a denominator.
    """

    margin: int = STENCIL_HALF_WIDTH
    exclude: Optional[Union[np.ndarray, Callable]] = None

    def array(self, grid: AnnularGrid) -> np.ndarray:
        m = self.margin
        if 2 * m >= grid.n_r or 2 * m >= grid.n_theta:
            raise EmptyMaskError(f"margin {m} leaves no interior on a {grid.shape} grid")
        keep = np.zeros(grid.shape, dtype=bool)
        keep[m:grid.n_r - m, m:grid.n_theta - m] = True
        if self.exclude is not None:
            ex = self.exclude(*grid.mesh()) if callable(self.exclude) else self.exclude
            keep &= ~np.asarray(ex, dtype=bool)
        return keep


class Norms(NamedTuple):
    linf: float
    l2: float


def masked_values(f: ScalarField, mask: Optional[InteriorMask] = None) -> np.ndarray:
    mask = mask or InteriorMask()
    sel = f.valid & mask.array(f.grid)
    if not sel.any():
        raise EmptyMaskError("mask selects no valid points")
    return f.values[sel]


def norms(f: ScalarField, mask: Optional[InteriorMask] = None,
          relative_to: Optional[ScalarField] = None) -> Norms:
    """Max-abs and RMS of ``f`` over the valid, masked points.

    With ``relative_to`` both norms are divided by that field's L-infinity
    norm over the same mask.
    """
    mask = mask or InteriorMask()
    sel = f.valid & mask.array(f.grid)
    if relative_to is not None:
        if relative_to.grid != f.grid:
            raise GridMismatchError("reference field lives on a different grid")
        sel &= relative_to.valid
    if not sel.any():
        raise EmptyMaskError("mask selects no valid points")
    a = np.abs(f.values[sel])
    linf, l2 = float(a.max()), float(np.sqrt(np.mean(a**2)))
    if relative_to is not None:
        ref = float(np.abs(relative_to.values[sel]).max())
        linf, l2 = linf / ref, l2 / ref
    return Norms(linf, l2)
