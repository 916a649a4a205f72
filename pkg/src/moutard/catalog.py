"""Closed-form potentials, solutions, seeds and F functions.

Every family is selected by a :class:`FamilySpec` (identifier plus the
parameters k, C, p).  Evaluators are vectorised over ``(r, theta)`` arrays
and return complex values.

Conventions
-----------
* ``x = cos(theta)`` throughout.
* For the Legendre families the canonical F is the polynomial form
  ``F0 = x + C``, ``F1 = x**3 + C``, ``F2 = (9x^4 - 10x^2 + 5) x + C``.
  The raw antiderivative ``int_0^x P_p(t)^2 dt`` differs from ``F_p - C`` by
  the constant factors 1, 1/3 and 1/20 (see :data:`F_RAW_RATIO`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConstraintError, UnknownFamilyError
from .grid import AnnularGrid, ScalarField, sample
from .special import legendre_p, seed_bessel_solution

FAMILIES = (
    "eq5-single",
    "eq9-planewave",
    "eq10-solution",
    "eq13-Fp",
    "eq14-calogero",
    "eq15-p0",
    "eq16-p1",
    "eq17-p2",
    "eq18-sol0",
    "eq19-sol1",
    "eq20-sol2",
    "seeds-planewave",
    "seeds-bessel",
    "trivial-tilde",
)

# short names accepted wherever a family identifier is expected
ALIASES = {name.split("-")[0]: name for name in FAMILIES if name.startswith("eq")}
ALIASES.update({"planewave": "seeds-planewave", "bessel": "seeds-bessel", "trivial": "trivial-tilde"})

_FIXED_DEGREE = {
    "eq15-p0": 0, "eq18-sol0": 0,
    "eq16-p1": 1, "eq19-sol1": 1,
    "eq17-p2": 2, "eq20-sol2": 2,
}
_PARAMETRIC_DEGREE = ("eq13-Fp", "eq14-calogero", "seeds-bessel")
_PLANEWAVE_F = ("eq9-planewave", "eq10-solution", "seeds-planewave")
_LEGENDRE_F = tuple(_FIXED_DEGREE) + ("eq13-Fp", "eq14-calogero", "seeds-bessel")
_DEFAULT_C = {0: 2.0, 1: 2.0, 2: 25.0}

# (F_p - C) / int_0^x P_p^2 for the canonical polynomial forms
F_RAW_RATIO = {0: 1.0, 1: 3.0, 2: 20.0}


def canonical_family(name: str) -> str:
    if name in FAMILIES:
        return name
    if name in ALIASES:
        return ALIASES[name]
    raise UnknownFamilyError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


def _sup_abs_g(p: int) -> float:
    """max over [-1, 1] of |F_p(x) - C| in the catalog's convention."""
    if p <= 2:
        return {0: 1.0, 1: 1.0, 2: 4.0}[p]
    return 1.0 / (2 * p + 1)


@dataclass(frozen=True)
class FamilySpec:
    """Family identifier plus parameters.

    ``C=None`` picks a nonsingular default; ``p`` is implied by the
    ``eq15``-``eq20`` families and required for ``eq13``, ``eq14`` and
    ``seeds-bessel``.
    """

    family: str
    k: float = 1.0
    C: Optional[float] = None
    p: Optional[int] = None

    def __post_init__(self):
        fam = canonical_family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.k > 0:
            raise ConstraintError(f"{fam}: k must be > 0, got {self.k}")
        p = self.p
        if fam in _FIXED_DEGREE:
            if p is not None and p != _FIXED_DEGREE[fam]:
                raise ConstraintError(f"{fam} has fixed degree p={_FIXED_DEGREE[fam]}, got p={p}")
            p = _FIXED_DEGREE[fam]
        elif fam in _PARAMETRIC_DEGREE:
            if p is None:
                raise ConstraintError(f"{fam} needs a degree p")
            if int(p) != p or p < 0:
                raise ConstraintError(f"{fam}: p must be a non-negative integer, got {p}")
            p = int(p)
        elif p is not None:
            raise ConstraintError(f"{fam} takes no degree p")
        object.__setattr__(self, "p", p)

        C = self.C
        if fam in _PLANEWAVE_F:
            C = 1.0 if C is None else float(C)
            # r sin(theta) > 0 on every admissible grid, so C = 0 is still safe
            if not C >= 0:
                raise ConstraintError(f"{fam}: C must be >= 0 so r^2 sin^2(theta) + C never vanishes, got {C}")
        elif fam in _LEGENDRE_F:
            C = _DEFAULT_C.get(p, 2.0) if C is None else float(C)
            bound = _sup_abs_g(p)
            if not abs(C) > bound:
                raise ConstraintError(
                    f"{fam}: need |C| > {bound:g} so F_{p}(theta) never vanishes on (0, pi), got C={C}"
                )
        elif C is not None:
            C = float(C)
        object.__setattr__(self, "C", C)


@dataclass(frozen=True)
class ClosedForm:
    """Exact evaluator ``(r, theta) -> complex`` with its singular set."""

    name: str
    evaluator: Callable
    singular_set: str = "none"

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.evaluator(r, theta), dtype=complex)
        out = np.broadcast_to(out, np.broadcast(r, theta).shape)
        return complex(out) if out.ndim == 0 else out.copy()

    def sample(self, grid: AnnularGrid, mask_nonfinite: bool = False) -> ScalarField:
        return sample(self, grid, mask_nonfinite)


# -- F functions ----------------------------------------------------------

def _legendre_g(p: int):
    """``(G, G', G'')`` in x with ``F_p = G(x) + C`` for p <= 2."""
    if p == 0:
        return (lambda x: x, lambda x: np.ones_like(x), lambda x: np.zeros_like(x))
    if p == 1:
        return (lambda x: x**3, lambda x: 3 * x**2, lambda x: 6 * x)
    if p == 2:
        return (lambda x: (9 * x**4 - 10 * x**2 + 5) * x,
                lambda x: 45 * x**4 - 30 * x**2 + 5,
                lambda x: 180 * x**3 - 60 * x)
    raise ConstraintError(f"no explicit polynomial F_p for p={p}; use f_quadrature")


def f_quadrature(p: int, theta, C: float = 0.0):
    """``-int sin(theta) P_p(cos theta)^2 dtheta`` with the constant fixed so
    the value at theta = pi/2 is ``C``.

    Substituting ``x = cos(theta)`` turns it into ``int_0^x P_p(t)^2 dt + C``.
    The integrand is a polynomial of degree 2p, so a (p + 1)-node
    Gauss-Legendre rule on [0, x] is exact up to rounding, also in relative
    terms near the equator where the integral itself is tiny.
    """
    legendre_p(p, 0.0)  # validates p
    th = np.asarray(theta, dtype=float)
    if np.any((th <= 0) | (th >= np.pi)):
        raise ValueError("theta must lie in (0, pi)")
    nodes, weights = np.polynomial.legendre.leggauss(p + 1)
    x = np.cos(th)[..., None]
    t = 0.5 * x * (nodes + 1.0)
    out = 0.5 * x[..., 0] * np.sum(weights * legendre_p(p, t) ** 2, axis=-1) + C
    return float(out) if out.ndim == 0 else out


def _quadrature_f(p, C):
    return lambda r, t: f_quadrature(p, np.broadcast_to(t, np.broadcast(r, t).shape), C)


def _legendre_dp(p: int, x):
    """dP_p/dx for |x| < 1."""
    if p == 0:
        return np.zeros_like(x)
    return p * (x * legendre_p(p, x) - legendre_p(p - 1, x)) / (x * x - 1.0)


def _f_theta_derivs(p: int, C: float):
    """``(F, dF/dtheta, d2F/dtheta2)`` as functions of theta."""
    if p <= 2:
        G, G1, G2 = _legendre_g(p)
        F = lambda t: G(np.cos(t)) + C
        F1 = lambda t: -np.sin(t) * G1(np.cos(t))
        F2 = lambda t: np.sin(t) ** 2 * G2(np.cos(t)) - np.cos(t) * G1(np.cos(t))
        return F, F1, F2
    # raw antiderivative: dF/dtheta = -sin P^2 exactly
    F = lambda t: f_quadrature(p, t, C)
    F1 = lambda t: -np.sin(t) * legendre_p(p, np.cos(t)) ** 2
    F2 = lambda t: (-np.cos(t) * legendre_p(p, np.cos(t)) ** 2
                    + 2 * np.sin(t) ** 2 * legendre_p(p, np.cos(t)) * _legendre_dp(p, np.cos(t)))
    return F, F1, F2


def f_closed(spec: FamilySpec) -> ClosedForm:
    """The function F of the twofold transformation for ``spec``'s family."""
    fam, C = spec.family, spec.C
    if fam in _PLANEWAVE_F:
        return ClosedForm(f"F[{fam}]", lambda r, t: r**2 * np.sin(t) ** 2 + C)
    if fam in _LEGENDRE_F:
        if spec.p > 2:
            return ClosedForm(f"F_{spec.p} (quadrature)", _quadrature_f(spec.p, C))
        G = _legendre_g(spec.p)[0]
        return ClosedForm(f"F_{spec.p}", lambda r, t: G(np.cos(t)) + C + 0 * r)
    raise ConstraintError(f"{fam} has no F function")


# -- potentials -----------------------------------------------------------

def _eq5(k):
    return lambda r, t: -k**2 + 2 * k**2 / np.sin(k * r * np.cos(t)) ** 2 + 1 / (r**2 * np.sin(t) ** 2)


def _eq9(k, C):
    def u(r, t):
        s2 = r**2 * np.sin(t) ** 2
        return -k**2 + 4 * (s2 - C) / (s2 + C) ** 2
    return u


def _eq14(k, p, C):
    F, F1, F2 = _f_theta_derivs(p, C)

    def u(r, t):
        f = F(t)
        d2log = F2(t) / f - (F1(t) / f) ** 2
        return -k**2 - 2 * d2log / r**2
    return u


def _eq15(k, C):
    return lambda r, t: -k**2 + 2 * (np.cos(t) * C + 1) / ((np.cos(t) + C) ** 2 * r**2)


def _eq16(k, C):
    def u(r, t):
        x = np.cos(t)
        return -k**2 + 6 * x * ((3 * x**2 - 2) * C + x**3) / ((x**3 + C) ** 2 * r**2)
    return u


def _n_theta(x, C):
    """The numerator polynomial N(theta) of the p = 2 potential."""
    return (45 * x**4 - 54 * x**2 + 13) * x * C + (9 * x**4 + 72 * x**2 - 70) * x**4 + 5


def _eq17(k, C):
    def u(r, t):
        x = np.cos(t)
        F2 = (9 * x**4 - 10 * x**2 + 5) * x + C
        return -k**2 + 10 * _n_theta(x, C) / (F2**2 * r**2)
    return u


_POTENTIAL_OF = {
    "eq5-single": "eq5-single", "trivial-tilde": "eq5-single",
    "eq9-planewave": "eq9-planewave", "eq10-solution": "eq9-planewave",
    "eq13-Fp": "eq14-calogero", "eq14-calogero": "eq14-calogero",
    "eq15-p0": "eq15-p0", "eq18-sol0": "eq15-p0",
    "eq16-p1": "eq16-p1", "eq19-sol1": "eq16-p1",
    "eq17-p2": "eq17-p2", "eq20-sol2": "eq17-p2",
    "seeds-planewave": "free", "seeds-bessel": "free",
}


def potential(spec: FamilySpec) -> ClosedForm:
    """Closed-form potential of ``spec``'s family.

    Solution and seed families return the potential they solve (``-k**2``
    for seeds).
    """
    k, C, p = spec.k, spec.C, spec.p
    kind = _POTENTIAL_OF[spec.family]
    if kind == "free":
        return ClosedForm("u=-k^2", lambda r, t: -k**2 + 0 * r * t)
    if kind == "eq5-single":
        return ClosedForm("eq5", _eq5(k), "sin(k r cos(theta)) = 0, including theta = pi/2")
    if kind == "eq9-planewave":
        return ClosedForm("eq9", _eq9(k, C))
    if kind == "eq14-calogero":
        return ClosedForm(f"eq14[p={p}]", _eq14(k, p, C))
    if kind == "eq15-p0":
        return ClosedForm("eq15", _eq15(k, C))
    if kind == "eq16-p1":
        return ClosedForm("eq16", _eq16(k, C))
    return ClosedForm("eq17", _eq17(k, C))


# -- solutions ------------------------------------------------------------

def _plane(k, r, t):
    return np.exp(1j * k * r * np.cos(t))


def _m_poly(r, t, k):
    """The numerator M(r, theta, k) of the p = 2 solution."""
    x = np.cos(t)
    q = 3 * x**2 - 1
    return 5j * q * (q * r**2 * k**2 + 6j * k * r * x - 6)


def solution(spec: FamilySpec) -> ClosedForm:
    """Closed-form solution paired with ``spec``'s potential."""
    fam, k, C = spec.family, spec.k, spec.C
    if fam in ("eq9-planewave", "eq10-solution"):
        return ClosedForm("eq10", lambda r, t: _plane(k, r, t) / (r**2 * np.sin(t) ** 2 + C))
    if fam in ("eq15-p0", "eq18-sol0"):
        return ClosedForm("eq18", lambda r, t: _plane(k, r, t) * (1 + 1j / (k * r * (np.cos(t) + C))))
    if fam in ("eq16-p1", "eq19-sol1"):
        def y1(r, t):
            x = np.cos(t)
            return _plane(k, r, t) * (1 + 3 * x * (1j * k * r * x - 1) / (k**2 * r**2 * (x**3 + C)))
        return ClosedForm("eq19", y1)
    if fam in ("eq17-p2", "eq20-sol2"):
        def y2(r, t):
            x = np.cos(t)
            F2 = (9 * x**4 - 10 * x**2 + 5) * x + C
            return _plane(k, r, t) * (1 + _m_poly(r, t, k) / (r**3 * k**3 * F2))
        return ClosedForm("eq20", y2)
    if fam in ("eq5-single", "trivial-tilde"):
        return ClosedForm("trivial", lambda r, t: 1 / (np.sin(k * r * np.cos(t)) * np.sin(t) * r),
                          "sin(k r cos(theta)) = 0, including theta = pi/2")
    if fam in ("seeds-planewave", "seeds-bessel"):
        return ClosedForm("plane wave", lambda r, t: _plane(k, r, t))
    raise ConstraintError(f"{fam} has no closed-form solution in the catalog")


def seeds(spec: FamilySpec) -> tuple[ClosedForm, ClosedForm]:
    """Ordered seed pair ``(Y1, Y2)`` solving the free equation (u = -k**2)."""
    k = spec.k
    if spec.family == "seeds-planewave":
        return (ClosedForm("sin(k r cos)", lambda r, t: np.sin(k * r * np.cos(t))),
                ClosedForm("cos(k r cos)", lambda r, t: np.cos(k * r * np.cos(t))))
    if spec.family == "seeds-bessel":
        p = spec.p
        return (ClosedForm(f"J_{p}+1/2", lambda r, t: seed_bessel_solution("first", p, k, r, t)),
                ClosedForm(f"Y_{p}+1/2", lambda r, t: seed_bessel_solution("second", p, k, r, t)))
    raise ConstraintError(f"{spec.family} is not a seed family")


def pair(spec: FamilySpec) -> tuple[ClosedForm, ClosedForm]:
    """``(potential, solution)`` pair that must satisfy the equation."""
    return potential(spec), solution(spec)


def describe() -> list[dict]:
    """One record per family: which closed forms it provides."""
    rows = []
    for fam in FAMILIES:
        rows.append({
            "family": fam,
            "potential": True,
            "solution": fam not in ("eq13-Fp", "eq14-calogero"),
            "F": fam in _PLANEWAVE_F + _LEGENDRE_F,
            "seeds": fam.startswith("seeds-"),
            "needs_p": fam in _PARAMETRIC_DEGREE,
        })
    return rows
