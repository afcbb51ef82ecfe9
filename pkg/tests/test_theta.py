import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ellcov import (Characteristic, InvalidModulus, ModularParameter, NearSingularity,
                    NonConvergent, TruncationPolicy, rho, rho_prime, theta, theta_constants,
                    theta_dgamma, theta_dmu)
from ellcov.identities import richardson_dmu

HALF = Fraction(1, 2)
CHARS = [(HALF, HALF), (HALF, 0), (0, 0), (0, HALF), (Fraction(1, 3), Fraction(-1, 6))]

coord = st.floats(-0.9, 0.9)
height = st.floats(0.6, 2.5)


def brute_theta(p, q, g, mu, N=50):
    m = np.arange(-N, N + 1) + float(p)
    return complex(np.sum(np.exp(1j * math.pi * mu * m * m + 2j * math.pi * m * (g + float(q)))))


def test_theta1_vanishes_at_origin():
    assert abs(theta((HALF, HALF), 0, 1j)) < 1e-15


def test_theta3_frozen_value():
    # 30-digit lattice sum (mpmath) at gamma = 0.3 + 0.1i, mu = i
    ref = 0.967833994500564209535656875191 - 0.0551056620556642694574965458202j
    assert abs(theta((0, 0), 0.3 + 0.1j, 1j) - ref) < 1e-14


@pytest.mark.parametrize("p,q", CHARS)
@pytest.mark.parametrize("mu", [1j, 0.3 + 0.7j, 2j])
def test_theta_matches_brute_force_sum(p, q, mu):
    for g in (0.3 + 0.1j, -0.45 + 0.6j, 0.1 - 0.2j):
        assert abs(theta((p, q), g, mu) - brute_theta(p, q, g, mu)) < 1e-12


def test_invalid_modulus():
    with pytest.raises(InvalidModulus):
        theta((0, 0), 0.1, -1j)
    with pytest.raises(InvalidModulus):
        ModularParameter(0.5)


def test_characteristic_is_exact():
    c = Characteristic(Fraction(1, 3) - Fraction(1, 2), Fraction(1, 2) - Fraction(2, 3))
    assert c.p == Fraction(-1, 6) and c.q == Fraction(-1, 6)


def test_non_convergent_when_terms_exhausted():
    with pytest.raises(NonConvergent):
        theta((0, 0), 0.1, 0.001j, TruncationPolicy(max_terms=5))


@given(coord, coord, height)
def test_quasi_periodicity_in_one(x, y, t):
    mu, g = 0.2 + t * 1j, complex(x, y)
    for p, q in CHARS:
        t0 = theta((p, q), g, mu)
        t1 = theta((p, q), g + 1, mu)
        assert abs(t1 - cmath.exp(2j * math.pi * float(p)) * t0) <= 1e-12 * max(1, abs(t0))


@given(st.floats(0, 1), st.floats(0, 1), height)
def test_heat_equation(x, y, t):
    # gamma in the fundamental cell, where theta stays of moderate size
    mu = t * 1j
    g = x + y * mu
    for ch in CHARS:
        fd = richardson_dmu(lambda m: theta(ch, g, m), mu)
        assert abs(theta_dgamma(ch, g, mu, 2) - 4j * math.pi * fd) < 1e-7
        assert abs(theta_dmu(ch, g, mu) - fd) < 1e-8


def test_parity_examples():
    assert abs(theta_dgamma((HALF, HALF), 0, 1j, 2)) < 1e-14
    assert abs(theta_dgamma((0, 0), 0, 1j, 1)) < 1e-14
    assert abs(theta_dmu((HALF, HALF), 0, 1j)) < 1e-14


def test_dgamma_first_order_central_difference():
    ch, g, mu, h = (Fraction(1, 4), Fraction(1, 3)), 0.21 - 0.13j, 0.1 + 1.1j, 1e-5
    fd = (theta(ch, g + h, mu) - theta(ch, g - h, mu)) / (2 * h)
    assert abs(theta_dgamma(ch, g, mu, 1) - fd) < 1e-8


@pytest.mark.parametrize("order", [2, 3, 4])
def test_dgamma_higher_orders_five_point(order):
    ch, g, mu, h = (Fraction(1, 4), Fraction(1, 3)), 0.21 - 0.13j, 0.1 + 1.1j, 1e-3
    f = lambda z: theta_dgamma(ch, z, mu, order - 1)
    fd = (-f(g + 2 * h) + 8 * f(g + h) - 8 * f(g - h) + f(g - 2 * h)) / (12 * h)
    assert abs(theta_dgamma(ch, g, mu, order) - fd) < 1e-7 * max(1, abs(fd))


@pytest.mark.parametrize("ch", [(HALF, 0), (0, 0), (0, HALF), (HALF, HALF)])
def test_dmu_half_characteristics(ch):
    fd = richardson_dmu(lambda m: theta(ch, 0.2, m), 2j)
    assert abs(theta_dmu(ch, 0.2, 2j) - fd) < 1e-8


def test_rho_examples():
    assert abs(rho(0.5, 1j)) < 1e-14
    g = 0.17 + 0.31j
    assert abs(rho(g + 1j, 1j) - rho(g, 1j) + 2j * math.pi) < 1e-10
    assert abs(rho(-g, 1j) + rho(g, 1j)) < 1e-12


@given(coord, coord, height)
def test_rho_periodicity(x, y, t):
    mu, g = 0.1 + t * 1j, complex(x, y)
    if min(abs(g - n - k * mu) for n in (-1, 0, 1) for k in (-1, 0, 1)) < 0.05:
        return
    assert abs(rho(g + 1, mu) - rho(g, mu)) < 1e-10
    assert abs(rho(g + mu, mu) - rho(g, mu) + 2j * math.pi) < 1e-10


def test_rho_prime_properties():
    g, mu, h = 0.23 + 0.19j, 1j, 1e-5
    assert abs(rho_prime(-g, mu) - rho_prime(g, mu)) < 1e-10
    assert abs(rho_prime(g + 1, mu) - rho_prime(g, mu)) < 1e-10
    fd = (rho(g + h, mu) - rho(g - h, mu)) / (2 * h)
    assert abs(rho_prime(g, mu) - fd) < 1e-8 * max(1, abs(fd))


def test_rho_guard_near_zero():
    with pytest.raises(NearSingularity):
        rho(1e-14, 1j)
    with pytest.raises(NearSingularity):
        rho(1 + 1j, 1j)


@pytest.mark.parametrize("mu", [1j, 2j, 1 + 3j])
def test_jacobi_identity(mu):
    t2, t3, t4, _ = theta_constants(mu)
    assert abs(t3 ** 4 - t2 ** 4 - t4 ** 4) < 1e-10


def test_theta_constants_self_dual_point():
    t2, _, t4, _ = theta_constants(1j)
    assert abs(t2 - t4) < 1e-14


def test_theta2_second_derivative():
    mu, h = 0.4 + 1.3j, 1e-3
    t2, _, _, t2pp = theta_constants(mu)
    f = lambda z: theta((HALF, 0), z, mu)
    fd = (-f(2 * h) + 16 * f(h) - 30 * t2 + 16 * f(-h) - f(-2 * h)) / (12 * h * h)
    assert abs(t2pp / t2 - fd / t2) < 1e-7


def test_truncation_honesty():
    loose = TruncationPolicy(abs_tol=1e-14, max_terms=4000)
    wide = TruncationPolicy(abs_tol=1e-14, max_terms=8000)
    for ch in CHARS:
        a = theta(ch, 0.3 + 0.4j, 0.2j, loose)
        b = theta(ch, 0.3 + 0.4j, 0.2j, wide)
        assert abs(a - b) <= 1e-14 * max(1, abs(a))
