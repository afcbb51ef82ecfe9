"""Quadrature of dlambda / omega on the two-sheeted curve omega^2 = prod(lambda - lambda_k).

Square roots are continued along each path by sign tracking on ordered
nodes, so every integral knows which sheet it runs on.  Endpoint square-root
singularities are removed by substitution before Gauss-Legendre is applied.
"""
from __future__ import annotations

import cmath
import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import PathThroughBranchPoint, QuadratureFailure

_GL_NODES = 16


@lru_cache(maxsize=None)
def _gauss_legendre(panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    x = (x + 1) / 2
    w = w / 2
    edges = np.arange(panels) / panels
    nodes = (edges[:, None] + x[None, :] / panels).ravel()
    weights = np.tile(w / panels, panels)
    return nodes, weights


def track_sqrt(sq: np.ndarray) -> np.ndarray:
    """Square roots of ``sq`` made continuous along the array order."""
    r = np.sqrt(np.asarray(sq, dtype=complex))
    if len(r) < 2:
        return r
    flip = np.abs(r[1:] - r[:-1]) > np.abs(r[1:] + r[:-1])
    sign = np.concatenate(([1.0], np.cumprod(np.where(flip, -1.0, 1.0))))
    return r * sign


def adaptive_gl(integrand, tol: float = 1e-14, max_panels: int = 512) -> complex:
    """Integrate a smooth ``integrand(u)`` over [0, 1] by panel doubling.

    ``integrand`` receives the sorted node array (the endpoints 0 and 1 are
    prepended/appended so sign tracking can anchor there) and returns values
    at the interior nodes only.
    """
    prev = None
    panels = 2
    while panels <= max_panels:
        nodes, weights = _gauss_legendre(panels)
        val = complex(np.dot(weights, integrand(nodes)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        panels *= 2
    raise QuadratureFailure(f"no convergence with {max_panels} panels "
                            f"(last change {abs(val - prev):.3e})")


def distance_to_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def guard_radius(bp) -> float:
    bp = list(bp)
    dmin = min(abs(x - y) for i, x in enumerate(bp) for y in bp[i + 1:])
    return 1e-3 * dmin


def poly(bp, lam):
    out = np.ones_like(lam, dtype=complex)
    for b in bp:
        out = out * (lam - b)
    return out


def _segment_sqrt(others, a: complex, b: complex):
    """S(lam) = prod sqrt(lam - o), each factor analytic on a neighbourhood of [a, b].

    The cut of the factor for ``o`` runs from ``o`` directly away from the
    segment, so ``(lam - o) / u`` keeps a positive real part along it and
    the principal root needs no tracking.
    """
    units = []
    for o in others:
        p = a + (b - a) * min(1.0, max(0.0, ((o - a) * (b - a).conjugate()).real / abs(b - a) ** 2))
        u = (p - o) / abs(p - o)
        units.append((o, u, np.sqrt(u)))

    def S(lam):
        out = np.ones_like(lam, dtype=complex)
        for o, u, su in units:
            out = out * su * np.sqrt((lam - o) / u)
        return out
    return S


def half_period_integral(bp, i: int, j: int, tol: float = 1e-15) -> complex:
    """int_{lambda_i}^{lambda_j} dlambda / omega along the straight segment.

    With lambda = m - (d/2) cos(theta) the integrand becomes
    1 / (i S(theta)), S^2 = prod over the other branch points, which is even
    and 2 pi-periodic; the midpoint rule on [0, pi] then converges
    geometrically.  A branch point close to the segment end shrinks the
    strip of analyticity; the integral then falls back to adaptive
    Gauss-Kronrod split at the nearby singular angles.  The branch of S is
    the principal root at the segment midpoint, continued along the segment.
    """
    bp = list(bp)
    a, b = bp[i], bp[j]
    others = [x for k, x in enumerate(bp) if k not in (i, j)]
    g = guard_radius(bp)
    for o in others:
        if distance_to_segment(o, a, b) < g:
            raise PathThroughBranchPoint(f"segment [{a}, {b}] passes within {g:.2e} of {o}")
    m, d = (a + b) / 2, b - a
    S = _segment_sqrt(others, a, b)
    sign = 1.0
    mid_root = np.sqrt(complex(poly(others, np.array([m]))[0]))
    if abs(S(np.array([m]))[0] - mid_root) > abs(S(np.array([m]))[0] + mid_root):
        sign = -1.0

    def f(theta):
        return sign / (1j * S(m - d / 2 * np.cos(theta)))

    prev = None
    N = 32
    while N <= 4096:
        theta = (np.arange(N) + 0.5) * math.pi / N
        val = complex(np.sum(f(theta)) * math.pi / N)
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev = val
        N *= 2
    # angles where the other branch points sit closest to the real theta axis
    breaks = sorted({min(math.pi, max(0.0, cmath.acos(2 * (m - o) / d).real)) for o in others}
                    | {0.0, math.pi})
    total, err = 0j, 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        # the error estimate is checked below, so quad's own warnings are noise
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, e1 = integrate.quad(lambda t: f(np.array([t]))[0].real, lo, hi,
                                    epsabs=0.0, epsrel=2e-14, limit=500)
            im, e2 = integrate.quad(lambda t: f(np.array([t]))[0].imag, lo, hi,
                                    epsabs=0.0, epsrel=2e-14, limit=500)
        total += complex(re, im)
        err += e1 + e2
    if not np.isfinite(total) or err > 1e-10 * abs(total):
        raise QuadratureFailure(f"half-period quadrature did not converge (error {err:.2e})")
    return total


def ray_integral(bp, target: complex, *, through: int | None = None,
                 center: complex | None = None, tol: float = 1e-14) -> tuple[complex, complex]:
    """int dlambda / omega from infinity on sheet 0 along a ray to ``target``.

    The ray lies on the line from ``center`` through ``target`` (beyond the
    target).  Sheet 0 is the branch with omega / lambda^2 -> 1 at infinity.
    If ``through`` is given, ``target`` must equal that branch point and the
    square-root endpoint singularity is removed by substitution.

    Returns ``(integral, omega_at_target)``; omega is 0 at a branch point.
    """
    bp = list(bp)
    if center is None:
        center = sum(bp) / len(bp)
    c = complex(center)
    t1 = 1.0 / (target - c)
    g = guard_radius(bp)
    for k, x in enumerate(bp):
        if through is not None and k == through:
            continue
        # the ray from target away from c
        far = target + (target - c) * 1e6
        if distance_to_segment(x, target, far) < g:
            raise PathThroughBranchPoint(f"ray to {target} passes near branch point {x}")
    shifts = np.array([c - x for x in bp])

    if through is None:
        def integrand(u):
            t = t1 * np.concatenate(([0.0], u, [1.0]))
            S = track_sqrt(np.prod(1 + shifts[:, None] * t[None, :], axis=0))
            if abs(S[0] - 1) > 1:
                S = -S
            integrand.S_end = S[-1]
            return -t1 / S[1:-1]

        val = adaptive_gl(integrand, tol)
        return val, integrand.S_end / t1 ** 2

    rest = np.delete(shifts, through)

    # t = t1 (1 - u^2): u = 1 is infinity, u = 0 is the branch point
    def integrand(u):
        uu = np.concatenate(([0.0], u, [1.0]))
        t = t1 * (1 - uu * uu)
        R = track_sqrt(np.prod(1 + rest[:, None] * t[None, :], axis=0))
        if abs(R[-1] - 1) > 1:
            R = -R
        return 2 * t1 / R[1:-1]

    # int from u=1 to u=0 of (-dt/S) = -int_0^1 2 t1 / R du
    return -adaptive_gl(integrand, tol), 0j


def omega_on_ray(bp, target: complex, center: complex | None = None,
                 samples: int = 4000) -> complex:
    """omega at ``target`` continued from infinity on sheet 0 along the ray."""
    bp = list(bp)
    if center is None:
        center = sum(bp) / len(bp)
    t1 = 1.0 / (target - center)
    t = t1 * np.linspace(0.0, 1.0, samples)
    shifts = np.array([center - x for x in bp])
    S = track_sqrt(np.prod(1 + shifts[:, None] * t[None, :], axis=0))
    if abs(S[0] - 1) > 1:
        S = -S
    return S[-1] / t1 ** 2


def branch_segment_integral(bp, k: int, target: complex, omega_target: complex,
                            tol: float = 1e-14) -> complex:
    """int dlambda / omega from branch point ``k`` straight to ``(target, omega_target)``.

    lambda = lambda_k + (target - lambda_k) u^2 removes the endpoint
    singularity; the branch is fixed by the value of omega at the target.
    """
    bp = list(bp)
    lk = bp[k]
    g = guard_radius(bp)
    for j, x in enumerate(bp):
        if j != k and distance_to_segment(x, lk, target) < g:
            raise PathThroughBranchPoint(f"segment to {target} passes near branch point {x}")
    D = target - lk
    rest = [x for j, x in enumerate(bp) if j != k]

    def integrand(u):
        uu = np.concatenate(([0.0], u, [1.0]))
        W = track_sqrt(D * poly(rest, lk + D * uu * uu))
        if abs(W[-1] - omega_target) > abs(W[-1] + omega_target):
            W = -W
        return 2 * D / W[1:-1]

    return adaptive_gl(integrand, tol)


def polyline_integral(bp, vertices, omega_start: complex,
                      samples_per_edge: int = 400) -> tuple[complex, complex]:
    """int dlambda / omega along a closed or open polyline avoiding branch points.

    Each edge uses composite Gauss-Legendre; omega is continued from
    ``omega_start``.  Returns ``(integral, omega_end)``.
    """
    bp = list(bp)
    g = guard_radius(bp)
    total = 0j
    omega = complex(omega_start)
    for a, b in zip(vertices[:-1], vertices[1:]):
        for x in bp:
            if distance_to_segment(x, a, b) < g:
                raise PathThroughBranchPoint(f"edge [{a}, {b}] passes near {x}")
        panels = max(2, samples_per_edge // _GL_NODES)
        nodes, weights = _gauss_legendre(panels)
        uu = np.concatenate(([0.0], nodes, [1.0]))
        lam = a + (b - a) * uu
        W = track_sqrt(poly(bp, lam))
        if abs(W[0] - omega) > abs(W[0] + omega):
            W = -W
        total += (b - a) * np.dot(weights, 1.0 / W[1:-1])
        omega = W[-1]
    return complex(total), omega
