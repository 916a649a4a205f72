"""Generalized Moutard transformation and its twofold superposition.

Single transformation with seed ``Y0`` (both ``Y`` and ``Y0`` solving the
equation with potential ``u``)::

    u~ = u - (d_rr + (1/r) d_r + (1/r^2) d_thth) ln(sin(theta) Y0^2)

and the new solution ``Y~`` comes from the first-order system

    d_th(Y~ Y0 sin) = sin r Y0^2 d_r(Y/Y0)
    d_r(Y~ Y0 sin r) = -sin Y0^2 d_th(Y/Y0).

With ``V = Y~ Y0 sin(theta) r`` this says ``dV = w_r dr + w_th dth`` for a
closed one-form, so ``V`` is obtained by path integration.  The twofold
transformation with seeds ``Y1, Y2`` is likewise driven by a function ``F``
with ``dF = w_r dr + w_th dth``::

    w_th = sin r^2 (Y1 d_r Y2 - Y2 d_r Y1)
    w_r  = -sin (Y1 d_th Y2 - Y2 d_th Y1)
    u~~  = u - 2 (d_rr + (1/r) d_r + (1/r^2) d_thth) ln F

Logarithms are never evaluated: every ``d ln`` term is written as a ratio of
finite-difference derivatives, which also works for complex or
sign-changing fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

import functools

import numpy as np

from .errors import GridMismatchError, InexactFormError, NearZeroError
from .grid import (
    NEAR_ZERO_RTOL,
    InteriorMask,
    ScalarField,
    _as_field,
    coordinates,
    differentiate,
    divide,
    near_zero,
    norms,
)

DEFAULT_EXACTNESS_TOL = 1e-3


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError("fields live on different grids")
    return g


def _check_zeros(f: ScalarField, name: str, on_zero: str, rtol: float):
    bad = near_zero(f, rtol)
    if on_zero == "raise" and bad.any():
        pts = [tuple(map(int, p)) for p in np.argwhere(bad)]
        raise NearZeroError(f"{name} is near zero at {len(pts)} grid point(s), first {pts[0]}", pts)
    if on_zero not in ("mask", "raise"):
        raise ValueError(f"on_zero must be 'mask' or 'raise', got {on_zero!r}")
    if bad.all() or not (f.valid & ~bad).any():
        raise NearZeroError(f"{name} vanishes on every valid point",
                            [tuple(map(int, p)) for p in np.argwhere(bad)])


def _log_derivatives(f: ScalarField, rtol: float):
    """First and second r/theta derivatives of ln f, as ratios."""
    fr = divide(differentiate(f, "r", 1), f, rtol)
    frr = divide(differentiate(f, "r", 2), f, rtol)
    ft = divide(differentiate(f, "theta", 1), f, rtol)
    ftt = divide(differentiate(f, "theta", 2), f, rtol)
    return fr, frr - fr * fr, ftt - ft * ft


# -- single transformation ------------------------------------------------

def single_potential(u: Union[ScalarField, complex], Y0: ScalarField,
                     on_zero: str = "mask", rtol: float = NEAR_ZERO_RTOL) -> ScalarField:
    """Transformed potential for seed ``Y0``.

    The ``sin(theta)`` part of ``ln(sin(theta) Y0^2)`` is differentiated
    analytically; points where ``Y0`` is near zero are masked out (or raise
    :class:`NearZeroError` with ``on_zero="raise"``).
    """
    u = _as_field(u, Y0.grid)
    _check_zeros(Y0, "Y0", on_zero, rtol)
    R, TH = coordinates(Y0.grid)
    lr, lrr, ltt = _log_derivatives(Y0, rtol)
    sin = np.sin(TH.values)
    g_r = 2.0 * lr
    g_rr = 2.0 * lrr
    g_tt = -1.0 / sin**2 + 2.0 * ltt
    return u - (g_rr + g_r / R + g_tt / (R * R))


@dataclass(frozen=True, eq=False)
class OneForm:
    """``omega_r dr + omega_theta dtheta`` sampled on a grid."""

    omega_r: ScalarField
    omega_theta: ScalarField

    def __post_init__(self):
        _same_grid(self.omega_r, self.omega_theta)

    @property
    def grid(self):
        return self.omega_r.grid

    @property
    def valid(self) -> np.ndarray:
        return self.omega_r.valid & self.omega_theta.valid

    def __neg__(self):
        return OneForm(-self.omega_r, -self.omega_theta)

    def __mul__(self, a):
        return OneForm(self.omega_r * a, self.omega_theta * a)

    __rmul__ = __mul__

    def scale(self) -> float:
        """Larger of the two component L-infinity norms over valid points."""
        return max(float(np.abs(c.values[c.valid]).max(initial=0.0))
                   for c in (self.omega_r, self.omega_theta))

    def exactness_defect(self, relative: bool = True) -> float:
        """L-infinity of ``d_theta omega_r - d_r omega_theta``.

        Relative to :meth:`scale` by default.  Zero for an exact form up to
        discretisation error.
        """
        curl = differentiate(self.omega_r, "theta", 1) - differentiate(self.omega_theta, "r", 1)
        d = norms(curl, InteriorMask(margin=0)).linf
        if relative:
            s = self.scale()
            return d / s if s > 0 else d
        return d


def solution_one_form(Y: ScalarField, Y0: ScalarField, accuracy: int = 4) -> OneForm:
    """Closed one-form whose potential is ``V = Y~ Y0 sin(theta) r``.

    ``Y0^2 d(Y/Y0)`` is expanded to ``Y0 dY - Y dY0`` so no division occurs.
    """
    _same_grid(Y, Y0)
    R, TH = coordinates(Y.grid)
    sin = np.sin(TH.values)
    d = lambda f, ax: differentiate(f, ax, 1, accuracy)
    br = Y0 * d(Y, "r") - Y * d(Y0, "r")
    bt = Y0 * d(Y, "theta") - Y * d(Y0, "theta")
    return OneForm(-sin * bt, sin * R * R * br)


# -- path integration -----------------------------------------------------

@dataclass(frozen=True)
class PathIntegrationPlan:
    """How to turn a closed one-form into a function.

    ``anchor`` is a grid index ``(i, j)``; ``None`` picks the centre of the
    region where the form is valid.  The primary path runs along r at the
    anchor's theta, then along theta; the alternate path does theta first.
    ``tolerance`` bounds the relative disagreement of the two paths.

    ``quadrature="quintic"`` (default) has an error that varies smoothly from
    node to node, so the result can be differentiated twice without losing
    order.  ``"simpson"`` is fourth order too, but its odd/even node split
    leaves an alternating error that second differences amplify by
    ``1/h**2``.
    """

    anchor: Optional[Tuple[int, int]] = None
    anchor_value: complex = 0.0
    quadrature: Literal["quintic", "simpson", "trapezoid"] = "quintic"
    tolerance: float = DEFAULT_EXACTNESS_TOL

    def __post_init__(self):
        if self.quadrature not in ("quintic", "simpson", "trapezoid"):
            raise ValueError(f"unknown quadrature {self.quadrature!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


@functools.lru_cache(maxsize=None)
def _interval_weights(first_offset: int) -> np.ndarray:
    """Weights on nodes ``first_offset .. first_offset+5`` (unit spacing)
    integrating their interpolating quintic over [0, 1]."""
    nodes = np.arange(first_offset, first_offset + 6, dtype=float)
    moments = 1.0 / np.arange(1, 7)
    return np.linalg.solve(np.vander(nodes, 6, increasing=True).T, moments)


def _cumsum(a: np.ndarray) -> np.ndarray:
    # extended precision keeps summation round-off from showing up as
    # node-to-node noise when the integral is later differentiated twice
    return np.cumsum(a.astype(np.clongdouble), axis=0).astype(complex)


def _cumulative_forward(g: np.ndarray, h: float, method: str) -> np.ndarray:
    """Integral from ``g[0]`` to every node along axis 0."""
    n = g.shape[0]
    out = np.zeros_like(g)
    if n == 1:
        return out
    if method == "trapezoid" or n == 2:
        out[1:] = _cumsum(0.5 * h * (g[:-1] + g[1:]))
        return out
    if n == 3:
        out[1] = h / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2])
        out[2] = h / 3.0 * (g[0] + 4.0 * g[1] + g[2])
        return out
    if method == "quintic" and n >= 6:
        # interval i integrates the quintic through 6 nodes around it; end
        # intervals shift the window inward.  Local error is O(h^7), so the
        # window shift leaves no visible seam after two differentiations.
        seg = np.empty((n - 1,) + g.shape[1:], dtype=g.dtype)
        w = _interval_weights(-2)
        seg[2:n - 3] = h * sum(w[m] * g[m:n - 5 + m] for m in range(6))
        for i in (0, 1, n - 3, n - 2):
            start = min(max(i - 2, 0), n - 6)
            w = _interval_weights(start - i)
            seg[i] = h * sum(w[m] * g[start + m] for m in range(6))
        out[1:] = _cumsum(seg)
        return out
    # simpson: composite Simpson at even offsets, 3/8 rule closing odd ones
    pairs = h / 3.0 * (g[0:n - 2:2] + 4.0 * g[1:n - 1:2] + g[2::2])
    out[2::2] = _cumsum(pairs)
    out[1] = h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
    m = np.arange(3, n, 2)
    out[m] = out[m - 3] + 3.0 * h / 8.0 * (g[m - 3] + 3.0 * g[m - 2] + 3.0 * g[m - 1] + g[m])
    return out


def _cumulative_from(g: np.ndarray, h: float, a: int, method: str) -> np.ndarray:
    """Integral from node ``a`` to every node along axis 0."""
    if method != "simpson":
        full = _cumulative_forward(g, h, method)
        return full - full[a]
    fwd = _cumulative_forward(g[a:], h, method)
    bwd = _cumulative_forward(g[a::-1], -h, method)
    return np.concatenate([bwd[:0:-1], fwd], axis=0)


def _valid_box(valid: np.ndarray):
    rows = np.flatnonzero(valid.any(axis=1))
    cols = np.flatnonzero(valid.any(axis=0))
    if rows.size == 0:
        raise InexactFormError("one-form has no valid points")
    box = (slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1))
    if not valid[box].all():
        raise NearZeroError("one-form has invalid points inside its valid region; "
                            "path integration needs a full rectangle",
                            [tuple(map(int, p)) for p in np.argwhere(~valid[box])])
    return box


@dataclass(frozen=True, eq=False)
class PathIntegral:
    primary: ScalarField
    alternate: ScalarField
    defect: float          # max |primary - alternate| / max |primary|
    anchor: Tuple[int, int]


def integrate_both_paths(w: OneForm, plan: PathIntegrationPlan = PathIntegrationPlan()) -> PathIntegral:
    """Integrate ``w`` along both axis orderings without raising."""
    grid = w.grid
    box = _valid_box(w.valid)
    i0, j0 = box[0].start, box[1].start
    ni, nj = box[0].stop - i0, box[1].stop - j0
    if plan.anchor is None:
        ia, ja = ni // 2, nj // 2
    else:
        ia, ja = plan.anchor[0] - i0, plan.anchor[1] - j0
        if not (0 <= ia < ni and 0 <= ja < nj):
            raise ValueError(f"anchor {plan.anchor} lies outside the valid region of the form")
    wr = w.omega_r.values[box]
    wt = w.omega_theta.values[box]
    hr, ht, q = grid.h_r, grid.h_theta, plan.quadrature
    c = complex(plan.anchor_value)

    # r first (along theta = theta_anchor), then theta
    along_r = _cumulative_from(wr[:, ja], hr, ia, q)
    v1 = c + along_r[:, None] + _cumulative_from(wt.T, ht, ja, q).T
    # theta first (along r = r_anchor), then r
    along_t = _cumulative_from(wt[ia, :], ht, ja, q)
    v2 = c + along_t[None, :] + _cumulative_from(wr, hr, ia, q)

    scale = np.abs(v1).max()
    defect = float(np.abs(v1 - v2).max() / (scale if scale > 0 else 1.0))
    valid = np.zeros(grid.shape, dtype=bool)
    valid[box] = True
    full1 = np.zeros(grid.shape, dtype=complex)
    full2 = np.zeros(grid.shape, dtype=complex)
    full1[box], full2[box] = v1, v2
    return PathIntegral(ScalarField(grid, full1, valid), ScalarField(grid, full2, valid),
                        defect, (ia + i0, ja + j0))


def integrate_one_form(w: OneForm, plan: PathIntegrationPlan = PathIntegrationPlan()) -> ScalarField:
    """Function ``V`` with ``dV = w`` and ``V(anchor) = anchor_value``.

    Raises :class:`InexactFormError` when the two path orderings disagree by
    more than ``plan.tolerance`` (relative to max |V|).
    """
    res = integrate_both_paths(w, plan)
    if res.defect > plan.tolerance:
        raise InexactFormError(
            f"path-independence defect {res.defect:.3e} exceeds tolerance {plan.tolerance:.1e}; "
            "the generating functions may not solve the equation, or the grid is too coarse",
            res.defect,
        )
    return res.primary


def transform_solution(Y: ScalarField, Y0: ScalarField,
                       plan: PathIntegrationPlan = PathIntegrationPlan(),
                       rtol: float = NEAR_ZERO_RTOL) -> ScalarField:
    """New solution ``Y~ = V / (Y0 sin(theta) r)`` for the potential from
    :func:`single_potential`.

    ``plan.anchor_value`` adds a multiple of the trivial solution
    ``1 / (Y0 sin(theta) r)``.
    """
    V = integrate_one_form(solution_one_form(Y, Y0), plan)
    R, TH = coordinates(Y.grid)
    return divide(V, Y0 * np.sin(TH.values) * R, rtol)


# -- twofold transformation -----------------------------------------------

def pair_one_form(Y1: ScalarField, Y2: ScalarField, accuracy: int = 4) -> OneForm:
    """The closed one-form ``dF`` of the twofold transformation.

    Antisymmetric in the seeds: swapping them negates both components.
    """
    _same_grid(Y1, Y2)
    R, TH = coordinates(Y1.grid)
    sin = np.sin(TH.values)
    d = lambda f, ax: differentiate(f, ax, 1, accuracy)
    wr_bracket = d(Y2, "r") * Y1 - d(Y1, "r") * Y2
    wt_bracket = d(Y2, "theta") * Y1 - d(Y1, "theta") * Y2
    return OneForm(-sin * wt_bracket, sin * R * R * wr_bracket)


def twofold_potential(u: Union[ScalarField, complex], F: ScalarField,
                      on_zero: str = "mask", rtol: float = NEAR_ZERO_RTOL) -> ScalarField:
    """``u - 2 (d_rr + (1/r) d_r + (1/r^2) d_thth) ln F`` via derivative ratios."""
    u = _as_field(u, F.grid)
    _check_zeros(F, "F", on_zero, rtol)
    R, _ = coordinates(F.grid)
    lr, lrr, ltt = _log_derivatives(F, rtol)
    return u - 2.0 * (lrr + lr / R + ltt / (R * R))


def twofold_solutions(Y1: ScalarField, Y2: ScalarField, F: ScalarField,
                      on_zero: str = "mask", rtol: float = NEAR_ZERO_RTOL):
    """The simple solutions ``Y1 / F`` and ``Y2 / F`` of the twofold potential."""
    _same_grid(Y1, Y2, F)
    _check_zeros(F, "F", on_zero, rtol)
    return divide(Y1, F, rtol), divide(Y2, F, rtol)


def fit_scale(F: ScalarField, target: ScalarField, anchor: Tuple[int, int]) -> complex:
    """Least-squares ``lam`` with ``F - F(anchor) ~ lam (target - target(anchor))``.

    ``F`` is only defined up to a constant factor and an additive constant;
    this recovers the factor relating a numerically integrated ``F`` to a
    closed form.
    """
    _same_grid(F, target)
    sel = F.valid & target.valid
    a = (F.values - F.values[anchor])[sel]
    b = (target.values - target.values[anchor])[sel]
    denom = np.vdot(b, b)
    if denom == 0:
        raise ValueError("target is constant on the valid region; scale is undetermined")
    return complex(np.vdot(b, a) / denom)


def match_to(F: ScalarField, target: ScalarField, anchor: Tuple[int, int]) -> ScalarField:
    """Rescale ``F`` and fix its constant so it agrees with ``target`` at ``anchor``."""
    lam = fit_scale(F, target, anchor)
    return (F - F.values[anchor]) / lam + target.values[anchor]
