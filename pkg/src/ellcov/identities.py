"""Residuals of the special-function identities behind the r-matrix calculus.

Each function returns the largest absolute residual over the supplied sample
points, so a caller compares a single float with its tolerance.  Residuals
that rely on a finite difference in mu use a Richardson-extrapolated central
difference and are only expected to hold to about 1e-9.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .rmatrix import RContext, dense_r
from .theta import (Characteristic, as_mu, nearest_lattice_point, rho, rho_prime,
                    theta, theta_constants, theta_dgamma)

TWO_PI_I = 2j * math.pi

# mu step of the Richardson-extrapolated central difference
FD_MU_STEP = 1e-3


def lattice_distance(z: complex, mu: complex) -> float:
    """Distance from ``z`` to the nearest point of the lattice Z + mu Z."""
    n, k = nearest_lattice_point(complex(z), mu)
    best = math.inf
    for dn in (-1, 0, 1):
        for dk in (-1, 0, 1):
            best = min(best, abs(z - (n + dn) - (k + dk) * mu))
    return best


def sample_points(rng: np.random.Generator, mu, count: int, *, min_distance: float = 0.1,
                  combos: Sequence[Sequence[float]] = ((1,),)) -> np.ndarray:
    """Random tuples of cell points whose listed linear combinations avoid the lattice.

    Each row of the result holds ``len(combos[0])`` points; a row is kept when
    every combination ``sum(c_i * p_i)`` in ``combos`` lies at least
    ``min_distance`` from the lattice.
    """
    mu = as_mu(mu)
    width = len(combos[0])
    rows = []
    while len(rows) < count:
        x, y = rng.random((2, width))
        pts = x + y * mu
        if all(lattice_distance(np.dot(c, pts), mu) >= min_distance for c in combos):
            rows.append(pts)
    return np.array(rows)


def _chars(K: int) -> list[Characteristic]:
    chars = [Characteristic(Fraction(1, 2), Fraction(1, 2))]
    chars += [Characteristic(Fraction(A, K) - Fraction(1, 2), Fraction(1, 2) - Fraction(B, K))
              for A in range(K) for B in range(K) if (A, B) != (0, 0)]
    return chars


def richardson_dmu(f, mu: complex, h: float = FD_MU_STEP):
    """d f / d mu by central differences at steps h and h/2, Richardson-combined."""
    d1 = (f(mu + h) - f(mu - h)) / (2 * h)
    d2 = (f(mu + h / 2) - f(mu - h / 2)) / h
    return (4 * d2 - d1) / 3


def heat_residual(K: int, mu, gammas: Iterable[complex]) -> float:
    """|theta'' - 4 pi i d theta / d mu| over the rank-K characteristics, mu-derivative by FD."""
    mu = as_mu(mu)
    worst = 0.0
    for ch in _chars(K):
        for g in gammas:
            dmu = richardson_dmu(lambda m: theta(ch, g, m), mu)
            worst = max(worst, abs(theta_dgamma(ch, g, mu, 2) - 4j * math.pi * dmu))
    return worst


def quasi_periodicity_residual(K: int, mu, gammas: Iterable[complex]) -> float:
    """Relative |theta(g + 1) - exp(2 pi i p) theta(g)|."""
    mu = as_mu(mu)
    worst = 0.0
    for ch in _chars(K):
        phase = np.exp(2j * math.pi * float(ch.p))
        for g in gammas:
            t = theta(ch, g, mu)
            worst = max(worst, abs(theta(ch, g + 1, mu) - phase * t) / max(1.0, abs(t)))
    return worst


def rho_period_residuals(mu, gammas: Iterable[complex]) -> tuple[float, float]:
    """(max |rho(g+1) - rho(g)|, max |rho(g+mu) - rho(g) + 2 pi i|)."""
    mu = as_mu(mu)
    r1 = r2 = 0.0
    for g in gammas:
        r = rho(g, mu)
        r1 = max(r1, abs(rho(g + 1, mu) - r))
        r2 = max(r2, abs(rho(g + mu, mu) - r + TWO_PI_I))
    return r1, r2


def _eps(ctx: RContext) -> tuple[np.ndarray, np.ndarray]:
    alg = ctx.alg
    eA = np.array([alg.eps_pow(A) for A, _ in alg.indices])
    eB = np.array([alg.eps_pow(B) for _, B in alg.indices])
    return eA, eB


def w_twist_residuals(ctx: RContext, gammas: Iterable[complex]) -> tuple[float, float]:
    """w(g + 1) = eps^A w(g) and w(g + mu) = eps^B w(g)."""
    eA, eB = _eps(ctx)
    r1 = r2 = 0.0
    for g in gammas:
        w = ctx.w_all(g)
        r1 = max(r1, np.max(np.abs(ctx.w_all(g + 1) - eA * w)))
        r2 = max(r2, np.max(np.abs(ctx.w_all(g + ctx.mu) - eB * w)))
    return float(r1), float(r2)


def z_twist_residuals(ctx: RContext, gammas: Iterable[complex]) -> tuple[float, float]:
    """Z(g + 1) = eps^A Z(g) and Z(g + mu) = eps^B (Z(g) - w(g))."""
    eA, eB = _eps(ctx)
    r1 = r2 = 0.0
    for g in gammas:
        Z = ctx.Z_all(g)
        r1 = max(r1, np.max(np.abs(ctx.Z_all(g + 1) - eA * Z)))
        r2 = max(r2, np.max(np.abs(ctx.Z_all(g + ctx.mu) - eB * (Z - ctx.w_all(g)))))
    return float(r1), float(r2)


def z_parity_residual(ctx: RContext, gammas: Iterable[complex]) -> float:
    """Z_{-A,-B}(-g) = Z_AB(g)."""
    neg = ctx.alg.negation
    return float(max(np.max(np.abs(ctx.Z_all(-g)[neg] - ctx.Z_all(g))) for g in gammas))


def der_link_residual(ctx: RContext, gammas: Iterable[complex]) -> float:
    """d w / d mu (finite difference) against d Z / d gamma."""
    worst = 0.0
    for g in gammas:
        fd = richardson_dmu(lambda m: ctx.with_mu(m).w_all(g), ctx.mu)
        worst = max(worst, np.max(np.abs(fd - ctx.Z_prime_all(g))))
    return float(worst)


def _swap(K: int) -> np.ndarray:
    P = np.zeros((K * K, K * K))
    for i in range(K):
        for j in range(K):
            P[i * K + j, j * K + i] = 1.0
    return P


def antisymmetry_residual(ctx: RContext, gammas: Iterable[complex]) -> float:
    """Dense r_12(g) + P r_12(-g) P, P the tensor swap."""
    P = _swap(ctx.K)
    return float(max(np.max(np.abs(dense_r(ctx, g) + P @ dense_r(ctx, -g) @ P))
                     for g in gammas))


def bundle_residuals(ctx: RContext, gammas: Iterable[complex]) -> tuple[float, float]:
    """r(g + 1) = (F^-1 x 1) r (F x 1) and r(g + mu) = (H x 1) r (H^-1 x 1)."""
    alg = ctx.alg
    I = np.eye(ctx.K)
    F, Fi = np.kron(alg.F, I), np.kron(np.linalg.inv(alg.F), I)
    H, Hi = np.kron(alg.H, I), np.kron(np.linalg.inv(alg.H), I)
    r1 = r2 = 0.0
    for g in gammas:
        r = dense_r(ctx, g)
        r1 = max(r1, np.max(np.abs(dense_r(ctx, g + 1) - Fi @ r @ F)))
        r2 = max(r2, np.max(np.abs(dense_r(ctx, g + ctx.mu) - H @ r @ Hi)))
    return float(r1), float(r2)


def identity_a1_residual(ctx: RContext, g, zi, zj) -> float:
    """w(zi - zj)(rho(zj - g) - rho(zi - g)) = w(g - zj) w_-(g - zi) - 2 pi i Z(zi - zj)."""
    mu = ctx.mu
    neg = ctx.alg.negation
    lhs = ctx.w_all(zi - zj) * (rho(zj - g, mu) - rho(zi - g, mu))
    rhs = ctx.w_all(g - zj) * ctx.w_all(g - zi)[neg] - TWO_PI_I * ctx.Z_all(zi - zj)
    return float(np.max(np.abs(lhs - rhs)))


def identity_a2_residual(ctx: RContext, g) -> float:
    """2 w(2g) rho(g) = w(g)^2 + 2 pi i Z(2g)."""
    w = ctx.w_all(g)
    lhs = 2 * ctx.w_all(2 * g) * rho(g, ctx.mu)
    return float(np.max(np.abs(lhs - w * w - TWO_PI_I * ctx.Z_all(2 * g))))


def identity_a3_residual(ctx: RContext, g) -> float:
    """w(g) w_-(g) = 2 pi i Z(0) - rho'(g)."""
    w = ctx.w_all(g)
    lhs = w * w[ctx.alg.negation]
    return float(np.max(np.abs(lhs - TWO_PI_I * ctx.Z0() + rho_prime(g, ctx.mu))))


def jacobi_identity_residual(mu) -> float:
    """|theta_3^4 - theta_2^4 - theta_4^4|."""
    t2, t3, t4, _ = theta_constants(mu)
    return abs(t3 ** 4 - t2 ** 4 - t4 ** 4)


def orthogonality_residual(ctx: RContext) -> float:
    """max |tr(sigma_AB sigma^CD) - delta|."""
    alg = ctx.alg
    G = np.einsum("aij,bji->ab", alg.sigma_stack, alg.dual_stack)
    return float(np.max(np.abs(G - np.eye(len(alg.indices)))))


def rho_cot_deviation(mu, depth: float = 0.8, x: float = 0.3) -> tuple[float, float]:
    """|rho(g) - pi cot(pi g)| at g = x + i depth Im(mu), with its leading-order prediction.

    For fixed g the deviation is O(q^2) with q = exp(i pi mu), which drops
    below double-precision round-off long before Im(mu) = 10.  Raising the
    sample point with the cell keeps it measurable: the leading term
    4 pi q^2 sin(2 pi g) then scales as exp(-2 pi (1 - depth) Im mu).
    Returns ``(measured, predicted)``.
    """
    mu = as_mu(mu)
    g = x + 1j * depth * mu.imag
    cot = math.pi * np.cos(math.pi * g) / np.sin(math.pi * g)
    q2 = np.exp(2j * math.pi * mu)
    predicted = abs(4 * math.pi * q2 * np.sin(2 * math.pi * g))
    return abs(rho(g, mu) - cot), float(predicted)
