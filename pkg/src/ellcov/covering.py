"""Elliptic and trigonometric branched coverings and their branch-point flows.

Two-sheet conventions
---------------------
The curve is omega^2 = (lambda - l1)(lambda - l2)(lambda - l3)(lambda - l4).
The a-cycle encircles the segment [l1, l2] and the b-cycle the segment
[l2, l3]; periods are integrals along those straight segments and the
b-orientation is the one giving Im(mu) > 0.  Sheet 0 at infinity is the
branch with omega / lambda^2 -> 1.  The normalized differential is
v = dlambda / (A omega) and nu(P) integrates v from infinity on sheet 0.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import quadrature as quad
from .errors import (DegenerateBranchPoints, DegenerateInput, InvalidModulus, NearSingularity,
                     PathThroughBranchPoint)
from .ode import integrate_path
from .theta import as_mu, rho, rho_derivatives, theta_constants

TWO_PI_I = 2j * math.pi
DEGENERATE_TOL = 1e-9
RESIDUE_SUM_TOL = 1e-9


# -- validation ------------------------------------------------------------

def scale_of(points: Sequence[complex]) -> float:
    pts = [complex(p) for p in points]
    spread = max(abs(x - y) for i, x in enumerate(pts) for y in pts[i + 1:])
    return max(spread, max(abs(p) for p in pts), 1e-300)


def check_distinct(points: Sequence[complex], tol: float = DEGENERATE_TOL) -> None:
    """Raise DegenerateBranchPoints naming the first pair closer than ``tol * scale``."""
    pts = [complex(p) for p in points]
    s = scale_of(pts)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) <= tol * s:
                raise DegenerateBranchPoints(
                    f"branch points {i + 1} and {j + 1} coincide ({pts[i]} and {pts[j]})",
                    pair=(i + 1, j + 1))


def _c(x) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# -- states ------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCoveringState:
    """Branch points, their Abel images, residues and the period ratio.

    ``basepoint_shift`` is h = nu(P_1) for the two-sheet construction, so that
    gamma_m = gamma~_m + h.  ``sheet`` records which sheet over infinity is the
    basepoint of the Abel map.
    """

    lam: tuple[complex, ...]
    gamma: tuple[complex, ...]
    alpha: tuple[complex, ...]
    mu: complex
    basepoint_shift: complex = 0j
    sheet: int = 0

    def __post_init__(self):
        lam = tuple(complex(x) for x in self.lam)
        gamma = tuple(complex(x) for x in self.gamma)
        alpha = tuple(complex(x) for x in self.alpha)
        if not (len(lam) == len(gamma) == len(alpha)) or len(lam) % 2 or len(lam) < 4:
            raise ValueError("lambda, gamma and alpha need the same even length >= 4")
        check_distinct(lam)
        mu = as_mu(self.mu)
        asum = abs(sum(alpha))
        if asum > RESIDUE_SUM_TOL * max(1.0, max(abs(a) for a in alpha)):
            raise ValueError(f"residues do not sum to zero (|sum| = {asum:.3e})")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "basepoint_shift", complex(self.basepoint_shift))

    @property
    def N(self) -> int:
        return len(self.lam) // 2

    def to_dict(self) -> dict:
        return {
            "lambda": [_pair(x) for x in self.lam],
            "gamma": [_pair(x) for x in self.gamma],
            "alpha": [_pair(x) for x in self.alpha],
            "mu": _pair(self.mu),
            "basepoint_shift": _pair(self.basepoint_shift),
            "sheet": self.sheet,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EllipticCoveringState":
        allowed = {"lambda", "gamma", "alpha", "mu", "basepoint_shift", "sheet"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        return cls(lam=tuple(_c(x) for x in d["lambda"]),
                   gamma=tuple(_c(x) for x in d["gamma"]),
                   alpha=tuple(_c(x) for x in d["alpha"]),
                   mu=_c(d["mu"]),
                   basepoint_shift=_c(d.get("basepoint_shift", 0)),
                   sheet=int(d.get("sheet", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "EllipticCoveringState":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class FlowPath:
    """Straight path of branch point ``m`` (0-based) from ``start`` to ``end``."""

    m: int
    start: complex
    end: complex
    max_step: float = 0.1
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "end", complex(self.end))
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")

    @property
    def delta(self) -> complex:
        return self.end - self.start

    def reversed(self) -> "FlowPath":
        return replace(self, start=self.end, end=self.start)


# -- periods and modulus -------------------------------------------------------

def _agm(a: complex, b: complex) -> complex:
    """Complex arithmetic-geometric mean with the right choice of roots."""
    a, b = complex(a), complex(b)
    for _ in range(100):
        a1 = (a + b) / 2
        g = cmath.sqrt(a * b)
        if abs(a1 - g) > abs(a1 + g):
            g = -g
        a, b = a1, g
        if abs(a - b) <= 1e-16 * abs(a):
            return a
    return a


def _agm_args(l1, l2, l3, l4):
    s1 = cmath.sqrt((l3 - l1) * (l4 - l2))
    s2 = cmath.sqrt((l3 - l2) * (l4 - l1))
    s3 = cmath.sqrt((l2 - l1) * (l4 - l3))
    return s1, s2, s3


@lru_cache(maxsize=256)
def _periods(bp: tuple[complex, ...]) -> tuple[complex, complex]:
    A = 2 * quad.half_period_integral(bp, 0, 1)
    B = 2 * quad.half_period_integral(bp, 1, 2)
    if (B / A).imag < 0:
        B = -B
    return A, B


def periods(l1, l2, l3, l4) -> tuple[complex, complex]:
    """(A, B): integrals of dlambda/omega over the a- and b-cycles."""
    bp = tuple(complex(x) for x in (l1, l2, l3, l4))
    check_distinct(bp)
    return _periods(bp)


def a_period(l1, l2, l3, l4, method: str = "quadrature") -> complex:
    """a-cycle period A of dlambda/omega.

    ``method="quadrature"`` integrates around [l1, l2]; ``method="agm"`` uses
    A = -2 pi i / M(s1, s2) with s1^2 = (l3-l1)(l4-l2), s2^2 = (l3-l2)(l4-l1).
    The two agree up to the overall sign of the cycle.
    """
    bp = tuple(complex(x) for x in (l1, l2, l3, l4))
    check_distinct(bp)
    if method == "quadrature":
        return _periods(bp)[0]
    if method == "agm":
        s1, s2, _ = _agm_args(*bp)
        return -2j * math.pi / _agm(s1, s2)
    raise ValueError(f"unknown method {method!r}")


def modulus_from_branch_points(l1, l2, l3, l4, method: str = "quadrature") -> complex:
    """Period ratio mu = B / A with Im(mu) > 0.

    ``method="agm"`` returns i M(s1, s2) / M(s1, s3), the ratio
    i K(k') / K(k) for k^2 = (l2-l1)(l4-l3) / ((l3-l1)(l4-l2)).  It can
    differ from the segment cycles by mu -> mu + 2 for strongly skewed
    configurations, so flows use the quadrature route.
    """
    bp = tuple(complex(x) for x in (l1, l2, l3, l4))
    check_distinct(bp)
    if method == "quadrature":
        A, B = _periods(bp)
        mu = B / A
    elif method == "agm":
        s1, s2, s3 = _agm_args(*bp)
        mu = 1j * _agm(s1, s2) / _agm(s1, s3)
        if mu.imag < 0:
            mu = -mu
    else:
        raise ValueError(f"unknown method {method!r}")
    if not mu.imag > 0:
        raise InvalidModulus(f"degenerate period ratio {mu}")
    return mu


def thomae_alphas(bp, mu) -> tuple[complex, complex, complex, complex]:
    """Residues of the two-sheet covering from the theta constant theta_4(mu)."""
    l1, l2, l3, l4 = bp
    th4 = theta_constants(mu)[2]
    c = 2 * math.pi ** 2 * th4 ** 4
    return ((l3 - l2) / (c * (l1 - l2) * (l1 - l3)),
            -(l1 - l4) / (c * (l2 - l1) * (l2 - l4)),
            (l1 - l4) / (c * (l3 - l1) * (l3 - l4)),
            -(l3 - l2) / (c * (l4 - l2) * (l4 - l3)))


def reference_gammas(mu) -> tuple[complex, complex, complex, complex]:
    """Abel images of P_1..P_4 relative to P_1."""
    mu = complex(mu)
    return 0j, 0.5 + 0j, (1 + mu) / 2, mu / 2


# -- Abel map ------------------------------------------------------------------

def _ray_center(bp, target, through=None):
    """A centre for the ray to ``target`` whose outward ray avoids other branch points."""
    bp = list(bp)
    c0 = sum(bp) / len(bp)
    s = scale_of(bp)
    g = quad.guard_radius(bp)
    candidates = [c0]
    base = cmath.phase(target - c0) if target != c0 else 0.0
    for k in range(1, 24):
        for sgn in (1, -1):
            ang = base + sgn * k * math.pi / 24
            candidates.append(target - s * cmath.exp(1j * ang))
    best, best_clear = None, -1.0
    for c in candidates:
        if abs(target - c) < 1e-12 * s:
            continue
        far = target + (target - c) / abs(target - c) * 1e3 * s
        clear = min((quad.distance_to_segment(x, target, far)
                     for k, x in enumerate(bp) if k != through), default=math.inf)
        if clear > 0.05 * s:
            return c
        if clear > best_clear:
            best, best_clear = c, clear
    if best_clear < g:
        raise PathThroughBranchPoint(f"no clear ray from infinity to {target}")
    return best


def abel_to_branch_point(bp, k: int, A: complex | None = None) -> complex:
    """nu(P_k) by direct quadrature from infinity on sheet 0 (unreduced)."""
    bp = tuple(complex(x) for x in bp)
    if A is None:
        A = _periods(bp)[0]
    c = _ray_center(bp, bp[k], through=k)
    val, _ = quad.ray_integral(bp, bp[k], through=k, center=c)
    return val / A


def omega_sheet(bp, lam: complex, sheet: int = 0) -> complex:
    """omega at ``lam`` on ``sheet``, continued from infinity along a clear ray."""
    bp = tuple(complex(x) for x in bp)
    c = _ray_center(bp, complex(lam))
    w = quad.omega_on_ray(bp, complex(lam), center=c)
    return w if sheet == 0 else -w


def reduce_to_cell(nu: complex, mu: complex) -> complex:
    """Representative x + y mu with 0 <= x, y < 1."""
    mu = complex(mu)
    y = nu.imag / mu.imag
    ky = math.floor(y)
    r = nu - ky * mu
    return r - math.floor(r.real)


def abel_map(source, lam, sheet: int = 0, omega: complex | None = None,
             reduce: bool = True) -> complex:
    """Abel image nu(P) = int_{infinity^(0)}^P dlambda / (A omega).

    Parameters
    ----------
    source : EllipticCoveringState or sequence of four branch points
    lam : complex or ``math.inf``
        Projection of the target point.
    sheet : int
        0 or 1; sheet labels are carried from infinity along a ray.
    omega : complex, optional
        Explicit value of omega at the target (overrides ``sheet``).
    reduce : bool
        Return the representative in the fundamental cell.

    A target close to a branch point P_k is reached through P_k:
    nu(P) = nu(P_k) + int_{P_k}^P v.  Targets on the non-basepoint sheet use
    the involution nu(iota P) = nu(infinity^(1)) - nu(P).
    """
    if isinstance(source, EllipticCoveringState):
        bp = source.lam
    else:
        bp = tuple(complex(x) for x in source)
    if len(bp) != 4:
        raise ValueError("the Abel map is implemented for the two-sheet covering")
    check_distinct(bp)
    A, B = _periods(bp)
    mu = B / A
    nu1 = abel_to_branch_point(bp, 0, A)

    if lam == math.inf or (isinstance(lam, complex) and cmath.isinf(lam)):
        val = 0j if sheet == 0 else 2 * nu1
        return reduce_to_cell(val, mu) if reduce else val

    lam = complex(lam)
    s = scale_of(bp)
    near = min(range(4), key=lambda k: abs(lam - bp[k]))
    dist = abs(lam - bp[near])
    if dist <= 1e-14 * s:
        val = abel_to_branch_point(bp, near, A)
        return reduce_to_cell(val, mu) if reduce else val

    w_target = omega_sheet(bp, lam, 0) if omega is None else complex(omega)
    if omega is None and sheet == 1:
        w_target = -w_target
    w0 = omega_sheet(bp, lam, 0)
    on_zero = abs(w_target - w0) <= abs(w_target + w0)

    if dist < 0.1 * min(abs(x - y) for i, x in enumerate(bp) for y in bp[i + 1:]):
        val = (abel_to_branch_point(bp, near, A)
               + quad.branch_segment_integral(bp, near, lam, w_target) / A)
    else:
        c = _ray_center(bp, lam)
        I, w_end = quad.ray_integral(bp, lam, center=c)
        # the ray was chosen by the same rule as omega_sheet, so w_end ~ w0
        val = I / A
        if not on_zero:
            val = 2 * nu1 - val
    return reduce_to_cell(val, mu) if reduce else val


# -- branch-point flows ----------------------------------------------------------

def nu_lambda(state: EllipticCoveringState, nu) -> complex:
    """d nu / d lambda(P): sum_k alpha_k [rho(nu - gamma_k) + rho(gamma_k)]."""
    nu = complex(nu)
    return sum(a * (rho(nu - g, state.mu) + rho(g, state.mu))
               for a, g in zip(state.alpha, state.gamma))


def nu_lambda_m(state: EllipticCoveringState, nu, m: int) -> complex:
    """d nu / d lambda_m at fixed lambda(P): -alpha_m [rho(nu - gamma_m) + rho(gamma_m)]."""
    g, a = state.gamma[m], state.alpha[m]
    return -a * (rho(complex(nu) - g, state.mu) + rho(g, state.mu))


def flow_rhs(state: EllipticCoveringState, m: int):
    """Derivatives of (gamma, alpha, mu) with respect to lambda_m.

    Returns ``(dgamma, dalpha, dmu)`` with list entries ordered like the state.
    """
    return flow_rhs_raw(state.gamma, state.alpha, state.mu, m)


def flow_rhs_raw(g, a, mu, m: int):
    """:func:`flow_rhs` on bare sequences (no residue-sum validation)."""
    n_pts = len(g)
    if not 0 <= m < n_pts:
        raise IndexError(f"branch point index {m} out of range")
    rho_m = rho(g[m], mu)
    dgamma = [0j] * n_pts
    dalpha = [0j] * n_pts
    for n in range(n_pts):
        if n == m:
            continue
        r0, r1 = rho_derivatives(g[n] - g[m], mu, 2)
        rho_n = rho(g[n], mu)
        dgamma[n] = -a[m] * (r0 + rho_m)
        # rho is odd and rho' even in the argument
        dgamma[m] += a[n] * (-r0 + rho_n)
        dalpha[n] = -2 * a[n] * a[m] * r1
        dalpha[m] += 2 * a[n] * a[m] * r1
    return dgamma, dalpha, TWO_PI_I * a[m]


def _pack(state: EllipticCoveringState) -> np.ndarray:
    return np.array(list(state.gamma) + list(state.alpha) + [state.mu], dtype=complex)


def _unpack(state: EllipticCoveringState, y: np.ndarray, lam) -> EllipticCoveringState:
    n = len(state.gamma)
    alpha = y[n:2 * n]
    return replace(state, lam=tuple(lam), gamma=tuple(y[:n]), alpha=tuple(alpha), mu=complex(y[-1]))


def path_lambdas(state, path: FlowPath, t: float) -> tuple[complex, ...]:
    lam = list(state.lam)
    lam[path.m] = path.start + t * path.delta
    return tuple(lam)


def integrate_flow(state: EllipticCoveringState, path: FlowPath,
                   monitor=None) -> EllipticCoveringState:
    """Integrate the branch-point flows along ``path``.

    ``state.lam[path.m]`` must equal ``path.start``.  ``monitor(t, state)`` is
    called after each accepted step.
    """
    _check_path_start(state, path)
    if path.delta == 0:
        return state
    n = len(state.gamma)

    def rhs(t, y):
        s = _raw_state(state, y, path_lambdas(state, path, t))
        dg, da, dmu = flow_rhs(s, path.m)
        return path.delta * np.array(dg + da + [dmu], dtype=complex)

    cb = None
    if monitor is not None:
        def cb(t, y):
            monitor(t, _raw_state(state, y, path_lambdas(state, path, t)))

    y = integrate_path(rhs, _pack(state), path, callback=cb)
    return _unpack(state, y, path_lambdas(state, path, 1.0))


def _raw_state(state, y, lam):
    # bypasses validation: intermediate stages need not satisfy the residue sum exactly
    s = object.__new__(EllipticCoveringState)
    n = len(state.gamma)
    object.__setattr__(s, "lam", tuple(lam))
    object.__setattr__(s, "gamma", tuple(complex(v) for v in y[:n]))
    object.__setattr__(s, "alpha", tuple(complex(v) for v in y[n:2 * n]))
    mu = complex(y[2 * n])
    if not mu.imag > 0:
        raise NearSingularity(f"period ratio left the upper half plane: {mu}")
    object.__setattr__(s, "mu", mu)
    object.__setattr__(s, "basepoint_shift", state.basepoint_shift)
    object.__setattr__(s, "sheet", state.sheet)
    return s


def _check_path_start(state, path: FlowPath) -> None:
    if not 0 <= path.m < len(state.lam):
        raise IndexError(f"branch point index {path.m} out of range")
    if abs(state.lam[path.m] - path.start) > 1e-12 * scale_of(state.lam):
        raise ValueError(f"path starts at {path.start}, branch point is at {state.lam[path.m]}")


def two_sheet_covering(l1, l2, l3, l4, sheet: int = 0) -> EllipticCoveringState:
    """Covering data for omega^2 = prod (lambda - l_k) from its branch points.

    gamma_m = gamma~_m + h with gamma~ = (0, 1/2, (1 + mu)/2, mu/2) and
    h = nu(P_1); alpha from the theta-constant closed forms.
    """
    bp = tuple(complex(x) for x in (l1, l2, l3, l4))
    check_distinct(bp)
    A, B = _periods(bp)
    mu = B / A
    h = abel_to_branch_point(bp, 0, A)
    if sheet == 1:
        # integrating from the other point at infinity flips the differential
        h = -h
    elif sheet != 0:
        raise ValueError("sheet must be 0 or 1")
    gamma = tuple(g + h for g in reference_gammas(mu))
    return EllipticCoveringState(lam=bp, gamma=gamma, alpha=thomae_alphas(bp, mu),
                                 mu=mu, basepoint_shift=h, sheet=sheet)


# -- trigonometric degeneration -------------------------------------------------

@dataclass(frozen=True)
class TrigCoveringState:
    """Degenerate two-sheet covering: branch points l1, l2 and a double point over lambda_Q.

    ``lambda_Q`` is ``None`` for the point at infinity.
    """

    lam: tuple[complex, ...]
    gamma: tuple[complex, ...]
    alpha0: tuple[complex, ...]
    lambda_Q: complex | None
    kappa1: complex | None = None
    kappa2: complex | None = None

    def to_dict(self) -> dict:
        return {
            "lambda": [_pair(x) for x in self.lam],
            "gamma": [_pair(x) for x in self.gamma],
            "alpha0": [_pair(x) for x in self.alpha0],
            "lambda_Q": None if self.lambda_Q is None else _pair(self.lambda_Q),
            "kappa1": None if self.kappa1 is None else _pair(self.kappa1),
            "kappa2": None if self.kappa2 is None else _pair(self.kappa2),
        }


def build_trig_two_sheet(l1, l2, lambda_Q=None) -> TrigCoveringState:
    """Degenerate covering with cut [l1, l2] and a double point over ``lambda_Q``.

    ``lambda_Q=None`` (or ``math.inf``) puts the double point at infinity.  The
    branch of the logarithm is fixed so that gamma_1 - gamma_2 = +1/2.
    """
    l1, l2 = complex(l1), complex(l2)
    if lambda_Q is not None and cmath.isinf(complex(lambda_Q)):
        lambda_Q = None
    pts = [l1, l2] + ([] if lambda_Q is None else [complex(lambda_Q)])
    try:
        check_distinct(pts)
    except DegenerateBranchPoints as exc:
        raise DegenerateInput(str(exc)) from exc
    zeta = ((3 * l1 + l2) / 4, (l1 + 3 * l2) / 4)
    if lambda_Q is None:
        # kappa_1 ~ lambda_Q runs off to infinity and kappa_2 -> (l1 + l2)/2; the
        # divergent common part of gamma_1, gamma_2 is dropped (only
        # differences enter, together with cot(pi gamma_m) -> i)
        k2 = (l1 + l2) / 2
        gam = _fix_half([-cmath.log(z - k2) / TWO_PI_I for z in zeta])
        a1 = -1 / (2 * math.pi ** 2 * (l1 - l2))
        return TrigCoveringState(lam=(l1, l2), gamma=tuple(gam), alpha0=(a1, -a1),
                                 lambda_Q=None, kappa1=None, kappa2=k2)
    lq = complex(lambda_Q)
    root = cmath.sqrt((lq - l1) * (lq - l2))
    k1 = (lq + (l1 + l2) / 2 + root) / 2
    k2 = (lq + (l1 + l2) / 2 - root) / 2
    gam = [cmath.log((z - k1) / (z - k2)) / TWO_PI_I for z in zeta]
    gam = _fix_half(gam)
    a1 = -((l2 - lq) / (l1 - lq)) / (2 * math.pi ** 2 * (l1 - l2))
    a2 = -((l1 - lq) / (l2 - lq)) / (2 * math.pi ** 2 * (l2 - l1))
    return TrigCoveringState(lam=(l1, l2), gamma=tuple(gam), alpha0=(a1, a2),
                             lambda_Q=lq, kappa1=k1, kappa2=k2)


def _fix_half(gam):
    """Shift gamma_1 by an integer so that gamma_1 - gamma_2 = +1/2 up to rounding."""
    g1, g2 = gam
    d = g1 - g2
    g1 -= round(d.real - 0.5)
    return [g1, g2]


def trig_flow_rhs(state: TrigCoveringState, m: int):
    """Derivatives of (gamma, alpha0) with respect to lambda_m on the cylinder.

    The cylinder limit of the elliptic flows: rho -> pi cot(pi x) and
    rho' -> -pi^2 / sin^2(pi x).  Returns ``(dgamma, dalpha0)``.
    """
    g, a = state.gamma, state.alpha0
    n_pts = len(g)

    def cot(x):
        s = cmath.sin(math.pi * x)
        if abs(s) < 1e-12:
            raise NearSingularity(f"cot evaluated at integer point {x}")
        return math.pi * cmath.cos(math.pi * x) / s

    def csc2(x):
        s = cmath.sin(math.pi * x)
        if abs(s) < 1e-12:
            raise NearSingularity(f"csc evaluated at integer point {x}")
        return math.pi ** 2 / (s * s)

    rho_inf = _trig_rho_constant(state)
    dgamma = [0j] * n_pts
    dalpha = [0j] * n_pts
    for n in range(n_pts):
        if n == m:
            continue
        dgamma[n] = -a[m] * (cot(g[n] - g[m]) + rho_inf(g[m]))
        dgamma[m] += a[n] * (cot(g[m] - g[n]) + rho_inf(g[n]))
        dalpha[n] = 2 * a[n] * a[m] * csc2(g[n] - g[m])
        dalpha[m] -= 2 * a[n] * a[m] * csc2(g[n] - g[m])
    return dgamma, dalpha


def _trig_rho_constant(state: TrigCoveringState):
    """Limit of rho(gamma_k) at the Abel images.

    With a finite double point the images stay at finite height and rho
    tends to pi cot(pi gamma); with the double point at infinity they recede
    to Im gamma -> -infinity where pi cot(pi gamma) -> pi i.
    """
    if state.lambda_Q is None:
        return lambda x: 1j * math.pi

    def f(x):
        s = cmath.sin(math.pi * x)
        if abs(s) < 1e-12:
            raise NearSingularity(f"cot evaluated at integer point {x}")
        return math.pi * cmath.cos(math.pi * x) / s
    return f
