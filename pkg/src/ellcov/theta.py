"""Jacobi theta functions with rational characteristics.

The series is

    theta[p, q](gamma; mu) = sum_m exp(pi i mu (m + p)^2 + 2 pi i (m + p)(gamma + q))

summed over a window of indices centred on the largest term; the window is
the smallest one whose geometric tail bound drops below the requested
tolerance.  Derivatives in ``gamma`` are taken term by term and the
``mu``-derivative comes from the heat equation.

Arguments are never reduced modulo the period lattice.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import InvalidModulus, NearSingularity, NonConvergent

Rational = Union[Fraction, int, str]

TWO_PI_I = 2j * math.pi

# |theta_1(gamma)| below GUARD * |theta_1'(nearest zero)| counts as a zero.
SINGULARITY_GUARD = 1e-12


@dataclass(frozen=True)
class TruncationPolicy:
    abs_tol: float = 1e-14
    max_terms: int = 4000

    def __post_init__(self):
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class Characteristic:
    """Exact characteristic ``[p, q]``; half-integer and 1/K shifts stay exact."""

    p: Fraction
    q: Fraction

    def __init__(self, p: Rational, q: Rational):
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))

    def __iter__(self):
        yield self.p
        yield self.q


THETA1_CHAR = Characteristic(Fraction(1, 2), Fraction(1, 2))
THETA2_CHAR = Characteristic(Fraction(1, 2), 0)
THETA3_CHAR = Characteristic(0, 0)
THETA4_CHAR = Characteristic(0, Fraction(1, 2))


@dataclass(frozen=True)
class ModularParameter:
    """Period ratio ``mu`` of the lattice {1, mu}; requires Im(mu) > 0."""

    mu: complex

    def __init__(self, mu):
        if isinstance(mu, ModularParameter):
            mu = mu.mu
        mu = complex(mu)
        if not mu.imag > 0:
            raise InvalidModulus(f"Im(mu) must be positive, got mu={mu!r}")
        object.__setattr__(self, "mu", mu)

    @property
    def nome(self) -> complex:
        return cmath.exp(1j * math.pi * self.mu)

    def __complex__(self):
        return self.mu


def as_mu(mu) -> complex:
    """Validate and unwrap a period ratio."""
    if isinstance(mu, ModularParameter):
        return mu.mu
    return ModularParameter(mu).mu


def _as_char(char) -> Characteristic:
    if isinstance(char, Characteristic):
        return char
    p, q = char
    return Characteristic(p, q)


@lru_cache(maxsize=4096)
def _half_width(tau: float, xs: float, order: int, abs_tol: float, max_terms: int) -> int:
    # Terms outside the window satisfy |x - xs| >= M + 1/2 where x = m + p and
    # xs is the real maximiser of the Gaussian envelope.  Bound the tail by a
    # geometric series and compare against abs_tol scaled to the peak size.
    axs = abs(xs)
    log_target = math.log(abs_tol) if abs_tol > 0 else -math.inf
    log_target += max(0.0, math.pi * tau * xs * xs)
    for M in range(0, max_terms + 1):
        d = M + 0.5
        log_ratio = -math.pi * tau * (2 * d + 1)
        if order:
            log_ratio += order * math.log((axs + d + 1) / (axs + d))
        if log_ratio >= 0:
            continue
        log_bound = (math.log(2.0) + math.pi * tau * (xs * xs - d * d)
                     - math.log1p(-math.exp(log_ratio)))
        if order:
            log_bound += order * math.log(2 * math.pi * (axs + d))
        if log_bound < log_target:
            return M
    raise NonConvergent(
        f"theta series needs more than {max_terms} terms (Im mu={tau}, tol={abs_tol})")


def theta_derivatives(char, gamma, mu, order: int = 0,
                      pol: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Return ``[theta, theta', ..., theta^(order)]`` at ``gamma``.

    All derivatives are with respect to ``gamma`` and are obtained by
    differentiating the series term by term.
    """
    ch = _as_char(char)
    mu = as_mu(mu)
    gamma = complex(gamma)
    p = float(ch.p)
    q = float(ch.q)
    tau = mu.imag
    xs = -gamma.imag / tau
    M = _half_width(tau, round(xs, 6), order, pol.abs_tol, pol.max_terms)
    mc = round(xs - p)
    x = np.arange(mc - M, mc + M + 1, dtype=float) + p
    terms = np.exp(1j * math.pi * mu * x * x + TWO_PI_I * x * (gamma + q))
    out = np.empty(order + 1, dtype=complex)
    out[0] = terms.sum()
    factor = TWO_PI_I * x
    for k in range(1, order + 1):
        terms = terms * factor
        out[k] = terms.sum()
    return out


def theta_derivatives_batch(ps, qs, gamma, mu, order: int = 0,
                            pol: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Like :func:`theta_derivatives` for many characteristics at one point.

    ``ps`` and ``qs`` are float arrays of equal length; the result has shape
    ``(order + 1, len(ps))``.
    """
    mu = as_mu(mu)
    gamma = complex(gamma)
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    tau = mu.imag
    xs = -gamma.imag / tau
    M = _half_width(tau, round(xs, 6), order, pol.abs_tol, pol.max_terms)
    # one index window wide enough for every p in (-1, 1)
    m = np.arange(round(xs) - M - 1, round(xs) + M + 2, dtype=float)
    x = m[None, :] + ps[:, None]
    terms = np.exp(1j * math.pi * mu * x * x + TWO_PI_I * x * (gamma + qs[:, None]))
    out = np.empty((order + 1, len(ps)), dtype=complex)
    out[0] = terms.sum(axis=1)
    factor = TWO_PI_I * x
    for k in range(1, order + 1):
        terms = terms * factor
        out[k] = terms.sum(axis=1)
    return out


def theta(char, gamma, mu, pol: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Theta function with characteristic ``char = [p, q]``."""
    return complex(theta_derivatives(char, gamma, mu, 0, pol)[0])


def theta_dgamma(char, gamma, mu, order: int = 1,
                 pol: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """``order``-th derivative in ``gamma`` (1 <= order <= 4)."""
    if not 1 <= order <= 4:
        raise ValueError("order must be between 1 and 4")
    return complex(theta_derivatives(char, gamma, mu, order, pol)[order])


def theta_dmu(char, gamma, mu, pol: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Derivative in ``mu``, via the heat equation theta'' = 4 pi i d(theta)/d(mu)."""
    return theta_dgamma(char, gamma, mu, 2, pol) / (4j * math.pi)


def nearest_lattice_point(gamma, mu) -> tuple[int, int]:
    """Integers ``(n, k)`` with ``n + k mu`` closest to ``gamma`` (in lattice coordinates)."""
    gamma = complex(gamma)
    mu = as_mu(mu)
    k = round(gamma.imag / mu.imag)
    n = round((gamma - k * mu).real)
    return n, k


def check_off_lattice(gamma, mu, pol: TruncationPolicy = DEFAULT_POLICY,
                      value: complex | None = None, what: str = "theta_1") -> None:
    """Raise NearSingularity when ``gamma`` is a numerical zero of theta_1."""
    gamma = complex(gamma)
    n, k = nearest_lattice_point(gamma, mu)
    ell = n + k * as_mu(mu)
    if abs(gamma - ell) > 1e-6:
        return
    slope = abs(theta_derivatives(THETA1_CHAR, ell, mu, 1, pol)[1])
    if value is None:
        value = theta(THETA1_CHAR, gamma, mu, pol)
    if abs(value) < SINGULARITY_GUARD * slope:
        raise NearSingularity(f"{what}: gamma={gamma} is within guard distance of "
                              f"the lattice point {n} + {k} mu")


def rho_derivatives(gamma, mu, order: int = 1,
                    pol: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """``[rho, rho', ..., rho^(order-1)]`` where rho = theta_1'/theta_1."""
    d = theta_derivatives(THETA1_CHAR, gamma, mu, order, pol)
    check_off_lattice(gamma, mu, pol, value=d[0], what="rho")
    return log_derivatives(d)[1:]


def log_derivatives(d: np.ndarray) -> np.ndarray:
    """Derivatives of ``log f`` from derivatives of ``f``.

    ``d[k] = f^(k)``; returns ``[nan, (log f)', (log f)'', ...]`` up to the same
    order.  Uses the recursion f g' ... obtained from f' = f (log f)'.
    """
    n = len(d) - 1
    g = np.empty(n + 1, dtype=complex)
    g[0] = np.nan
    # f^(k+1) = sum_{j=0}^{k} C(k, j) f^(j) L^(k+1-j),  L = log f
    for k in range(n):
        acc = d[k + 1]
        for j in range(1, k + 1):
            acc -= math.comb(k, j) * d[j] * g[k + 1 - j]
        g[k + 1] = acc / d[0]
    return g


def rho(gamma, mu, pol: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Logarithmic derivative of theta_1."""
    return complex(rho_derivatives(gamma, mu, 1, pol)[0])


def rho_prime(gamma, mu, pol: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Derivative of :func:`rho`: theta_1''/theta_1 - (theta_1'/theta_1)^2."""
    return complex(rho_derivatives(gamma, mu, 2, pol)[1])


def theta_constants(mu, pol: TruncationPolicy = DEFAULT_POLICY):
    """Return ``(theta2, theta3, theta4, theta2'')`` at gamma = 0."""
    d2 = theta_derivatives(THETA2_CHAR, 0, mu, 2, pol)
    th3 = theta(THETA3_CHAR, 0, mu, pol)
    th4 = theta(THETA4_CHAR, 0, mu, pol)
    return complex(d2[0]), th3, th4, complex(d2[2])
