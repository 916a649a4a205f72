import math

import numpy as np
import pytest
import scipy.special as sp

from moutard import (
    InteriorMask,
    SpecialFunctionDomainError,
    apply_schrodinger,
    bessel_half_j,
    bessel_half_y,
    legendre_p,
    norms,
    sample,
    seed_bessel_solution,
    spherical_jn,
    spherical_yn,
)

from conftest import fitted_order, ladder


def test_legendre_examples():
    assert legendre_p(0, 0.3) == 1.0
    assert legendre_p(1, 0.5) == 0.5
    assert legendre_p(2, 0.5) == pytest.approx(-0.125, abs=1e-16)
    assert isinstance(legendre_p(3, 0.1), float)


@pytest.mark.parametrize("p", range(11))
def test_legendre_matches_scipy(p):
    x = np.linspace(-1, 1, 201)
    np.testing.assert_allclose(legendre_p(p, x), sp.eval_legendre(p, x), rtol=0, atol=1e-14)


def test_legendre_bounds_and_endpoint(rng):
    x = rng.uniform(-1, 1, 500)
    for p in range(11):
        assert np.all(np.abs(legendre_p(p, x)) <= 1 + 1e-15)
        assert legendre_p(p, 1.0) == 1.0


def test_legendre_domain():
    with pytest.raises(SpecialFunctionDomainError):
        legendre_p(2, 1.5)
    with pytest.raises(SpecialFunctionDomainError):
        legendre_p(-1, 0.2)
    with pytest.raises(SpecialFunctionDomainError):
        legendre_p(1.5, 0.2)


@pytest.mark.parametrize("p", range(6))
def test_spherical_bessel_matches_scipy(p):
    x = np.concatenate([np.linspace(0.01, 1, 50), np.linspace(1, 60, 400)])
    j, y = spherical_jn(p, x), spherical_yn(p, x)
    jr, yr = sp.spherical_jn(p, x), sp.spherical_yn(p, x)
    # absolute error scaled by the envelope (values cross zero)
    env = np.maximum(np.abs(jr), 1.0 / x) if p == 0 else np.maximum(np.abs(jr), 1e-3)
    assert np.max(np.abs(j - jr) / env) < 1e-12
    assert np.max(np.abs(y - yr) / np.abs(yr).clip(min=1e-3)) < 1e-11


def test_small_argument_uses_stable_branch():
    x = np.array([1e-4, 1e-3, 1e-2])
    for p in (1, 2, 4):
        series = x**p / math.prod(range(1, 2 * p + 2, 2)) * (1 - x**2 / (2 * (2 * p + 3)))
        np.testing.assert_allclose(spherical_jn(p, x), series, rtol=1e-9)


def test_half_integer_examples():
    assert abs(bessel_half_j(0, math.pi)) < 1e-16
    assert bessel_half_j(0, math.pi / 2) == pytest.approx(2 / math.pi, rel=1e-15)
    assert abs(bessel_half_y(0, math.pi / 2)) < 1e-16
    assert bessel_half_y(0, math.pi) == pytest.approx(math.sqrt(2) / math.pi, rel=1e-15)
    x = 1e-3
    assert bessel_half_j(1, x) == pytest.approx(math.sqrt(2 * x / math.pi) * x / 3, rel=1e-6)


@pytest.mark.parametrize("p", range(5))
def test_half_integer_matches_scipy(p):
    x = np.linspace(0.2, 25, 300)
    np.testing.assert_allclose(bessel_half_j(p, x), sp.jv(p + 0.5, x), rtol=1e-11, atol=1e-13)
    np.testing.assert_allclose(bessel_half_y(p, x), sp.yv(p + 0.5, x), rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_wronskian_cross_relation(p):
    x = np.linspace(0.5, 20, 400)
    w = spherical_jn(p, x) * spherical_yn(p - 1, x) - spherical_jn(p - 1, x) * spherical_yn(p, x)
    assert np.max(np.abs(w * x**2 - 1)) < 1e-12


def test_wronskian_of_half_integer_functions(rng):
    # J_nu Y_nu' - J_nu' Y_nu = 2/(pi x), with derivatives from scipy as oracle
    x = rng.uniform(0.5, 20, 50)
    nu = 1.5
    w = bessel_half_j(1, x) * sp.yvp(nu, x) - sp.jvp(nu, x) * bessel_half_y(1, x)
    np.testing.assert_allclose(w, 2 / (np.pi * x), rtol=1e-12)


def test_bessel_domain():
    with pytest.raises(SpecialFunctionDomainError):
        spherical_jn(1, 0.0)
    with pytest.raises(SpecialFunctionDomainError):
        bessel_half_y(0, -1.0)


def test_seed_closed_forms():
    k, r, t = 1.7, 2.3, 0.9
    pref = math.sqrt(2 / (math.pi * k))
    assert seed_bessel_solution("first", 0, k, r, t) == pytest.approx(pref * math.sin(k * r) / r, rel=1e-14)
    assert seed_bessel_solution("second", 0, k, r, t) == pytest.approx(-pref * math.cos(k * r) / r, rel=1e-14)
    with pytest.raises(ValueError):
        seed_bessel_solution("third", 0, k, r, t)
    with pytest.raises(SpecialFunctionDomainError):
        seed_bessel_solution("first", 0, k, r, 0.0)


@pytest.mark.parametrize("kind", ["first", "second"])
@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_seeds_solve_free_equation(kind, p):
    k = 1.3
    grids = ladder(33)
    errs = []
    for g in grids:
        Y = sample(lambda r, t: seed_bessel_solution(kind, p, k, r, t), g)
        errs.append(norms(apply_schrodinger(Y, -k**2), InteriorMask(), relative_to=Y).linf)
    # y_p grows like r^-(p+1) near r_min, so the higher seeds start coarser
    assert errs[-1] < 1e-5
    assert fitted_order(grids, errs) > 3.5
