import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ellcov import (InvalidIndex, NotTraceless, SigmaIndex, SlkCoefficients, coefficients_to_pauli,
                    expand, pauli_to_coefficients, reconstruct, sigma, sigma_algebra, sigma_dual)
from ellcov.sigma import PAULI

S1, S2, S3 = PAULI


def test_pauli_dictionary():
    alg = sigma_algebra(2)
    assert np.allclose(sigma(alg, (1, 0)), S1)
    assert np.allclose(sigma(alg, (0, 1)), S3)
    assert np.allclose(sigma(alg, (1, 1)), 1j * S2)


def test_shift_matrix_k3_is_three_cycle():
    H = sigma(sigma_algebra(3), (1, 0))
    assert np.array_equal(H.real, np.roll(np.eye(3), 1, axis=1))
    assert np.allclose(np.linalg.matrix_power(H, 3), np.eye(3))


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_algebra_relations(K):
    alg = sigma_algebra(K)
    assert np.allclose(alg.epsilon * alg.F @ alg.H, alg.H @ alg.F)
    assert np.allclose(np.linalg.matrix_power(alg.F, K), np.eye(K))
    assert np.allclose(np.linalg.matrix_power(alg.H, K), np.eye(K))


@pytest.mark.parametrize("K", [2, 3, 4])
def test_sigma_power_is_scalar(K):
    # (H^A F^B)^K = eps^{AB K(K-1)/2} by commuting the F's through the H's
    alg = sigma_algebra(K)
    for A, B in alg.indices:
        P = np.linalg.matrix_power(sigma(alg, (A, B)), K)
        phase = cmath.exp(2j * math.pi * A * B * (K - 1) / 2)
        assert np.allclose(P, phase * np.eye(K))


@pytest.mark.parametrize("K", [2, 3])
def test_dual_orthogonality(K):
    alg = sigma_algebra(K)
    for a in alg.indices:
        for b in alg.indices:
            t = np.trace(sigma(alg, a) @ sigma_dual(alg, b))
            assert abs(t - (a == b)) < 1e-14


def test_dual_formula():
    alg = sigma_algebra(3)
    eps = alg.epsilon
    expect = eps ** (-2) / 3 * sigma(alg, (-1, -2))
    assert np.allclose(sigma_dual(alg, (1, 2)), expect)


def test_invalid_index():
    with pytest.raises(InvalidIndex):
        SigmaIndex(0, 0, 2)
    with pytest.raises(InvalidIndex):
        sigma(sigma_algebra(3), (3, 3))


def test_expand_rejects_trace():
    with pytest.raises(NotTraceless):
        expand(sigma_algebra(2), np.eye(2))


def test_expand_zero_and_single_component():
    alg = sigma_algebra(3)
    assert np.all(expand(alg, np.zeros((3, 3))).values == 0)
    c = expand(alg, sigma(alg, (2, 1)))
    assert abs(c[(2, 1)] - 1) < 1e-15
    assert np.sum(np.abs(c.values)) - 1 < 1e-14


def _traceless(K, data):
    M = data[: K * K].reshape(K, K) + 1j * data[K * K:].reshape(K, K)
    return M - np.trace(M) / K * np.eye(K)


@pytest.mark.parametrize("K", [2, 3, 4])
@given(data=st.data())
def test_expand_reconstruct_round_trip(K, data):
    raw = data.draw(arrays(np.float64, 2 * K * K, elements=st.floats(-5, 5)))
    M = _traceless(K, raw)
    alg = sigma_algebra(K)
    assert np.allclose(reconstruct(alg, expand(alg, M)), M, atol=1e-12)
    vals = data.draw(arrays(np.float64, K * K - 1, elements=st.floats(-5, 5)))
    c = SlkCoefficients(K, vals + 0.5j * vals[::-1])
    back = expand(alg, reconstruct(alg, c))
    assert np.allclose(back.values, c.values, atol=1e-12)


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10),
       st.complex_numbers(max_magnitude=10))
def test_pauli_components_round_trip(a, b, c):
    coeffs = pauli_to_coefficients(a, b, c)
    M = a * S1 + b * S2 + c * S3
    assert np.allclose(coeffs.matrix(), M, atol=1e-12)
    back = coefficients_to_pauli(coeffs)
    assert np.allclose(back, (a, b, c), atol=1e-12)


def test_coefficient_arithmetic():
    alg = sigma_algebra(2)
    x = alg.coefficients({(1, 0): 1.0})
    y = alg.coefficients({(0, 1): 2j})
    z = 2 * (x + y) - y
    assert z[(1, 0)] == 2 and z[(0, 1)] == 2j
    assert np.allclose((-z).matrix(), -z.matrix())
