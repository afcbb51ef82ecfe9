"""Elliptic r-matrix coefficients and their contractions with sl(K) matrices.

The r-matrix is never stored as a K^2 x K^2 tensor.  Its coefficients

    w_AB(gamma) = theta_[AB](gamma) theta'_[00](0) / (theta_[AB](0) theta_[00](gamma)),
    theta_[AB] = theta[A/K - 1/2, 1/2 - B/K],

are contracted directly: tr_2(r(gamma) (1 x J)) = sum_AB w_AB(gamma) J^AB sigma_AB.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import NearSingularity
from .sigma import SigmaAlgebra, SlkCoefficients, _values, sigma_algebra, PAULI
from .theta import (DEFAULT_POLICY, TruncationPolicy, as_mu, check_off_lattice,
                    log_derivatives, nearest_lattice_point, theta_derivatives_batch)

TWO_PI_I = 2j * math.pi

# Z is evaluated from its Taylor series at 0 inside this radius around integers.
_Z_TAYLOR_RADIUS = 1e-2
_Z_TAYLOR_TERMS = 12


class RContext:
    """Fixed (K, mu, truncation policy) for every w / Z evaluation.

    Parameters
    ----------
    alg : SigmaAlgebra or int
        The rank-K basis (an integer K is accepted).
    mu : complex
        Period ratio, Im(mu) > 0.
    pol : TruncationPolicy, optional
    """

    def __init__(self, alg, mu, pol: TruncationPolicy = DEFAULT_POLICY):
        if not isinstance(alg, SigmaAlgebra):
            alg = sigma_algebra(int(alg))
        self.alg = alg
        self.K = alg.K
        self.mu = as_mu(mu)
        self.pol = pol
        K = self.K
        chars = [(Fraction(A, K) - Fraction(1, 2), Fraction(1, 2) - Fraction(B, K))
                 for A, B in alg.indices]
        # last column is theta_[00] = theta[-1/2, 1/2]
        chars.append((Fraction(-1, 2), Fraction(1, 2)))
        self.chars = tuple(chars)
        self._ps = np.array([float(p) for p, _ in chars])
        self._qs = np.array([float(q) for _, q in chars])
        n = _Z_TAYLOR_TERMS + 2
        d0 = theta_derivatives_batch(self._ps, self._qs, 0, self.mu, n, pol)
        self._d0 = d0
        self._th0 = d0[0, :-1]
        self._th00p0 = d0[1, -1]
        self._log0 = np.array([log_derivatives(d0[:, i]) for i in range(len(alg.indices))]).T
        self._eps_A = np.array([alg.epsilon ** A for A, _ in alg.indices])
        self._Z0 = self._log0[2] / TWO_PI_I

    def __repr__(self):
        return f"RContext(K={self.K}, mu={self.mu!r})"

    def with_mu(self, mu) -> "RContext":
        return RContext(self.alg, mu, self.pol)

    # -- raw evaluations over all indices, ordered like alg.indices ---------

    def _local(self, gamma, order):
        d = theta_derivatives_batch(self._ps, self._qs, gamma, self.mu, order, self.pol)
        check_off_lattice(gamma, self.mu, self.pol, value=-d[0, -1], what="w_AB")
        return d[:, :-1], d[:, -1]

    def w_all(self, gamma) -> np.ndarray:
        d, d00 = self._local(gamma, 0)
        return d[0] * self._th00p0 / (self._th0 * d00[0])

    def w_and_prime_all(self, gamma) -> tuple[np.ndarray, np.ndarray]:
        d, d00 = self._local(gamma, 1)
        w = d[0] * self._th00p0 / (self._th0 * d00[0])
        return w, w * (d[1] / d[0] - d00[1] / d00[0])

    def w_prime_all(self, gamma) -> np.ndarray:
        return self.w_and_prime_all(gamma)[1]

    def w_dmu_all(self, gamma) -> np.ndarray:
        """mu-derivative of w_AB at fixed gamma, through the heat equation."""
        d, d00 = self._local(gamma, 2)
        w = d[0] * self._th00p0 / (self._th0 * d00[0])
        dlog = (d[2] / d[0] - self._d0[2, :-1] / self._th0
                + self._d0[3, -1] / self._th00p0 - d00[2] / d00[0])
        return w * dlog / (4j * math.pi)

    def Z_all(self, gamma) -> np.ndarray:
        gamma = complex(gamma)
        n, k = nearest_lattice_point(gamma, self.mu)
        delta = gamma - n - k * self.mu
        if k == 0 and abs(delta) < _Z_TAYLOR_RADIUS:
            return self._eps_A ** n * self._Z_taylor(delta)
        d, d00 = self._local(gamma, 1)
        w = d[0] * self._th00p0 / (self._th0 * d00[0])
        return w / TWO_PI_I * (d[1] / d[0] - self._log0[1])

    def _Z_taylor(self, delta: complex) -> np.ndarray:
        if delta == 0:
            return self._Z0.copy()
        N = _Z_TAYLOR_TERMS
        # f(delta)/delta with f = (log theta_AB)'(delta) - (log theta_AB)'(0)
        f_over = np.zeros(len(self._th0), dtype=complex)
        t00 = 0j
        for j in range(N, 0, -1):
            f_over = f_over * delta + self._log0[j + 1] / math.factorial(j)
        for j in range(N, -1, -1):
            t00 = t00 * delta + self._d0[j + 1, -1] / math.factorial(j + 1)
        d = theta_derivatives_batch(self._ps[:-1], self._qs[:-1], delta, self.mu, 0, self.pol)[0]
        return d * self._th00p0 / self._th0 * f_over / t00 / TWO_PI_I

    def Z_prime_all(self, gamma) -> np.ndarray:
        """gamma-derivative of Z_AB (equal to the mu-derivative of w_AB)."""
        gamma = complex(gamma)
        n, k = nearest_lattice_point(gamma, self.mu)
        delta = gamma - n - k * self.mu
        if k == 0 and abs(delta) < _Z_TAYLOR_RADIUS:
            # regular there; a symmetric 4-point stencil on the Taylor branch
            h = 1e-3
            zs = [self._Z_taylor(delta + s * h) for s in (-2, -1, 1, 2)]
            return self._eps_A ** n * (zs[0] - 8 * zs[1] + 8 * zs[2] - zs[3]) / (12 * h)
        d, d00 = self._local(gamma, 2)
        w = d[0] * self._th00p0 / (self._th0 * d00[0])
        L1 = d[1] / d[0]
        L2 = d[2] / d[0] - L1 * L1
        wp = w * (L1 - d00[1] / d00[0])
        return (wp * (L1 - self._log0[1]) + w * L2) / TWO_PI_I

    def Z0(self) -> np.ndarray:
        """Z_AB(0) = (log theta_AB)''(0) / (2 pi i)."""
        return self._Z0.copy()

    # -- single-index accessors ------------------------------------------

    def _pos(self, idx) -> int:
        return self.alg.position(idx)

    def w(self, idx, gamma) -> complex:
        return complex(self.w_all(gamma)[self._pos(idx)])

    def w_prime(self, idx, gamma) -> complex:
        return complex(self.w_prime_all(gamma)[self._pos(idx)])

    def w_dmu(self, idx, gamma) -> complex:
        return complex(self.w_dmu_all(gamma)[self._pos(idx)])

    def Z(self, idx, gamma) -> complex:
        return complex(self.Z_all(gamma)[self._pos(idx)])

    # -- contractions ------------------------------------------------------

    def _contract(self, coeffs: np.ndarray, J) -> np.ndarray:
        vals = _values(J, self.alg)
        return np.einsum("n,nij->ij", coeffs * vals, self.alg.sigma_stack)

    def contract_r(self, gamma, J) -> np.ndarray:
        """tr_2(r(gamma) J_2) = sum_AB w_AB(gamma) J^AB sigma_AB."""
        return self._contract(self.w_all(gamma), J)

    def contract_r_prime(self, gamma, J) -> np.ndarray:
        return self._contract(self.w_prime_all(gamma), J)

    def contract_r_dmu(self, gamma, J) -> np.ndarray:
        return self._contract(self.w_dmu_all(gamma), J)

    def contract_Z(self, gamma, J) -> np.ndarray:
        """sum_AB Z_AB(gamma) J^AB sigma_AB; finite at integer points."""
        return self._contract(self.Z_all(gamma), J)


def w(ctx: RContext, idx, gamma) -> complex:
    return ctx.w(idx, gamma)


def w_prime(ctx: RContext, idx, gamma) -> complex:
    return ctx.w_prime(idx, gamma)


def Z(ctx: RContext, idx, gamma) -> complex:
    return ctx.Z(idx, gamma)


def contract_r(ctx: RContext, gamma, J) -> np.ndarray:
    return ctx.contract_r(gamma, J)


def contract_r_prime(ctx: RContext, gamma, J) -> np.ndarray:
    return ctx.contract_r_prime(gamma, J)


def contract_Z(ctx: RContext, gamma, J) -> np.ndarray:
    return ctx.contract_Z(gamma, J)


def dense_r(ctx: RContext, gamma, coeffs: np.ndarray | None = None) -> np.ndarray:
    """Full K^2 x K^2 tensor sum_AB c_AB sigma_AB (x) sigma^AB (default c = w(gamma))."""
    if coeffs is None:
        coeffs = ctx.w_all(gamma)
    alg = ctx.alg
    return sum(c * np.kron(s, d) for c, s, d in zip(coeffs, alg.sigma_stack, alg.dual_stack))


def partial_trace_2(T: np.ndarray, J: np.ndarray) -> np.ndarray:
    """tr_2(T (1 x J)) for a K^2 x K^2 tensor T."""
    K = J.shape[0]
    prod = T @ np.kron(np.eye(K), J)
    return np.einsum("iaja->ij", prod.reshape(K, K, K, K))


def contract_r_trig(gamma, J) -> np.ndarray:
    """Trigonometric (Im mu -> infinity) limit of :func:`contract_r` for K = 2.

    ``J`` holds the Pauli components (J1, J2, J3); the result is
    (pi / sin(pi g)) (J1 s1 + J2 s2) + pi cot(pi g) J3 s3.
    """
    gamma = complex(gamma)
    s = np.sin(np.pi * gamma)
    if abs(s) < 1e-12:
        raise NearSingularity(f"sin(pi gamma) vanishes at gamma={gamma}")
    J1, J2, J3 = (complex(v) for v in J)
    c = np.cos(np.pi * gamma)
    return (np.pi / s) * (J1 * PAULI[0] + J2 * PAULI[1]) + (np.pi * c / s) * J3 * PAULI[2]
