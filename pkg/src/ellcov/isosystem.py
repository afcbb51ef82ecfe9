"""Linear-system matrices U_m, the nonlinear J-system, its compatibility check and tau.

Indices m, n are 0-based throughout.  The J-system gives dJ_m/dlambda_n only
for m != n; there is no diagonal equation here, so J trajectories are
produced by the Schlesinger induction and this module verifies them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .covering import EllipticCoveringState, TrigCoveringState, _c, _pair
from .errors import NearSingularity, ZeroResidue
from .rmatrix import RContext
from .sigma import (SlkCoefficients, coefficients_to_pauli, pauli_to_coefficients,
                    sigma_algebra)
from .theta import rho, rho_derivatives, theta_constants

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class JState:
    """The matrices J_m, stored as sigma-basis coefficients."""

    K: int
    entries: tuple[SlkCoefficients, ...]

    def __post_init__(self):
        entries = tuple(e if isinstance(e, SlkCoefficients) else _as_coeffs(self.K, e)
                        for e in self.entries)
        for e in entries:
            if e.K != self.K:
                raise ValueError(f"entry has K={e.K}, state has K={self.K}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, m) -> SlkCoefficients:
        return self.entries[m]

    def matrices(self) -> list[np.ndarray]:
        return [e.matrix() for e in self.entries]

    @classmethod
    def zeros(cls, K: int, count: int) -> "JState":
        return cls(K, tuple(sigma_algebra(K).zeros() for _ in range(count)))

    def to_dict(self) -> dict:
        out: dict = {"K": self.K, "count": len(self.entries)}
        for m, e in enumerate(self.entries):
            for (A, B), v in e.items():
                out[f"J[{m}].{A}{B}" if self.K <= 10 else f"J[{m}].{A},{B}"] = _pair(v)
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "JState":
        K, count = int(d["K"]), int(d["count"])
        alg = sigma_algebra(K)
        tables: list[dict] = [{} for _ in range(count)]
        for key, v in d.items():
            if key in ("K", "count"):
                continue
            if not key.startswith("J[") or "]." not in key:
                raise ValueError(f"unknown field {key!r}")
            m = int(key[2:key.index("]")])
            ab = key[key.index("].") + 2:]
            A, B = (int(x) for x in ab.split(",")) if "," in ab else (int(ab[0]), int(ab[1]))
            tables[m][(A, B)] = _c(v)
        return cls(K, tuple(alg.coefficients(t) for t in tables))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "JState":
        return cls.from_dict(json.loads(text))


def _as_coeffs(K: int, x) -> SlkCoefficients:
    x = np.asarray(x, dtype=complex)
    if x.shape == (K, K):
        return sigma_algebra(K).expand(x)
    return SlkCoefficients(K, x)


def _ctx(cov, K: int, ctx: RContext | None) -> RContext:
    if ctx is not None and ctx.K == K and ctx.mu == complex(cov.mu):
        return ctx
    return RContext(K, cov.mu)


def u_matrix(cov: EllipticCoveringState, J: JState, m: int, nu,
             ctx: RContext | None = None) -> np.ndarray:
    """U_m(nu) = tr_2(r(nu - gamma_m) J_m), a simple pole at gamma_m with residue J_m."""
    ctx = _ctx(cov, J.K, ctx)
    return ctx.contract_r(complex(nu) - cov.gamma[m], J[m])


def j_flow_rhs(cov: EllipticCoveringState, J: JState, m: int, n: int,
               ctx: RContext | None = None) -> SlkCoefficients:
    """dJ_m/dlambda_n for m != n.

    -alpha_n rho'(g) J_m - alpha_m tr_2(r'(g) J_n) - [J_m, tr_2(r(g) J_n)],
    g = gamma_m - gamma_n.
    """
    return j_flow_rhs_raw(J.K, cov.gamma, cov.alpha, cov.mu, J, m, n, ctx)


def j_flow_rhs_raw(K: int, gamma: Sequence[complex], alpha: Sequence[complex], mu,
                   J, m: int, n: int, ctx: RContext | None = None) -> SlkCoefficients:
    """:func:`j_flow_rhs` on bare (gamma, alpha, mu) data."""
    if m == n:
        raise IndexError("dJ_m/dlambda_m is not part of the J-system")
    if ctx is None or ctx.K != K or ctx.mu != complex(mu):
        ctx = RContext(K, mu)
    g = complex(gamma[m]) - complex(gamma[n])
    rp = rho_derivatives(g, ctx.mu, 2)[1]
    Jm, Jn = J[m], J[n]
    w, wp = ctx.w_and_prime_all(g)
    alg = ctx.alg
    Mm = Jm.matrix()
    R = np.einsum("n,nij->ij", w * Jn.values, alg.sigma_stack)
    out = (-alpha[n] * rp * Jm.values
           - alpha[m] * wp * Jn.values
           - alg.expand(Mm @ R - R @ Mm, rtol=1e-8).values)
    return SlkCoefficients(K, out)


def _pauli(J) -> tuple[complex, complex, complex]:
    if isinstance(J, SlkCoefficients):
        return coefficients_to_pauli(J)
    return tuple(complex(v) for v in J)


def two_sheet_display_j1_lambda2(cov: EllipticCoveringState, J1, J2) -> tuple[complex, ...]:
    """Explicit K = 2 equations for dJ_1/dlambda_2 on the two-sheet covering.

    ``J1`` and ``J2`` are Pauli components (or K = 2 coefficients) of the first
    two matrices; the result is in Pauli components.  Written with theta
    constants only, independently of the r-matrix machinery.
    """
    l1, l2, l3, l4 = cov.lam
    th2, th3, th4, th2pp = theta_constants(cov.mu)
    a, b, c = _pauli(J1)
    d, e, f = _pauli(J2)
    diag = (l1 - l4) / (2 * math.pi ** 2 * (l2 - l1) * (l2 - l4)) / th4 ** 4 * th2pp / th2
    off = (l3 - l2) / (2 * (l1 - l2) * (l1 - l3)) * th3 ** 2 / th4 ** 2
    return (diag * a + TWO_PI_I * c * e * th4 ** 2,
            diag * b - TWO_PI_I * c * d * th3 ** 2,
            diag * c + off * f + TWO_PI_I * (b * d * th3 ** 2 - a * e * th4 ** 2))


# -- compatibility ------------------------------------------------------------

@dataclass(frozen=True)
class CompatibilityResidual:
    max_norm: float
    samples: tuple[tuple[complex, float], ...]
    skipped: tuple[complex, ...] = ()
    term_scale: float = 0.0


def _dU(cov, J: JState, dJ_by_k: Sequence, m: int, n: int, nu: complex,
        ctx: RContext, dgamma_n, dmu_n) -> np.ndarray:
    """Total derivative of U_m(nu(P)) in lambda_n at fixed P."""
    from .covering import nu_lambda_m
    g = nu - cov.gamma[m]
    w, wp = ctx.w_and_prime_all(g)
    wmu = ctx.w_dmu_all(g)
    dnu = nu_lambda_m(cov, nu, n)
    coeff = (wp * (dnu - dgamma_n[m]) + wmu * dmu_n) * J[m].values + w * dJ_by_k[m].values
    return ctx.alg.reconstruct(coeff)


def compatibility_residual(cov: EllipticCoveringState, J: JState,
                           dJ: Mapping[int, Sequence[SlkCoefficients]], pair: tuple[int, int],
                           nu_samples: Sequence[complex],
                           ctx: RContext | None = None) -> CompatibilityResidual:
    """Norm of d_n U_m - d_m U_n + [U_m, U_n] at each sample point nu.

    ``dJ[p][k]`` is dJ_k/dlambda_p for p in ``pair`` and every k.  Derivatives
    are total, at fixed point P of the covering, so nu, gamma and mu all move
    by the branch-point flows.
    """
    from .covering import flow_rhs
    m, n = pair
    ctx = _ctx(cov, J.K, ctx)
    dg_m, _, dmu_m = flow_rhs(cov, m)
    dg_n, _, dmu_n = flow_rhs(cov, n)
    samples, skipped = [], []
    scale = 0.0
    for nu in nu_samples:
        nu = complex(nu)
        try:
            Um = u_matrix(cov, J, m, nu, ctx)
            Un = u_matrix(cov, J, n, nu, ctx)
            dnUm = _dU(cov, J, dJ[n], m, n, nu, ctx, dg_n, dmu_n)
            dmUn = _dU(cov, J, dJ[m], n, m, nu, ctx, dg_m, dmu_m)
        except NearSingularity:
            skipped.append(nu)
            continue
        comm = Um @ Un - Un @ Um
        res = dnUm - dmUn + comm
        scale = max(scale, np.linalg.norm(dnUm), np.linalg.norm(dmUn), np.linalg.norm(comm))
        samples.append((nu, float(np.linalg.norm(res))))
    max_norm = max((s for _, s in samples), default=0.0)
    return CompatibilityResidual(max_norm, tuple(samples), tuple(skipped), scale)


def sample_cell(cov: EllipticCoveringState, count: int, rng: np.random.Generator,
                exclusion: float = 1e-2) -> list[complex]:
    """Uniform points of the fundamental cell at least ``exclusion`` from every gamma_m."""
    mu = complex(cov.mu)
    out: list[complex] = []
    while len(out) < count:
        x, y = rng.random(2)
        nu = x + y * mu
        ok = True
        for g in cov.gamma:
            d = nu - g
            k = round(d.imag / mu.imag)
            d -= k * mu
            d -= round(d.real)
            if abs(d) < exclusion:
                ok = False
                break
        if ok:
            out.append(nu)
    return out


# -- trigonometric J-system ---------------------------------------------------

def trig_j_flow_rhs(trig: TrigCoveringState, J: Sequence, m: int, n: int) -> tuple[complex, ...]:
    """Pauli components of dJ_m/dlambda_n for the cylinder (K = 2) system.

    ``J`` is a sequence of Pauli triples (or K = 2 coefficient tables).
    """
    if m == n:
        raise IndexError("dJ_m/dlambda_m is not part of the J-system")
    g = complex(trig.gamma[m]) - complex(trig.gamma[n])
    s = np.sin(math.pi * g)
    if abs(s) < 1e-12:
        raise NearSingularity(f"gamma_m - gamma_n = {g} is an integer")
    c = np.cos(math.pi * g)
    am, an = trig.alpha0[m], trig.alpha0[n]
    x1, x2, x3 = _pauli(J[m])
    y1, y2, y3 = _pauli(J[n])
    diag = an * math.pi ** 2 / s ** 2
    off = am * math.pi ** 2 / s ** 2
    k = TWO_PI_I / s
    return (diag * x1 + off * c * y1 + k * (x2 * y3 * c - x3 * y2),
            diag * x2 + off * c * y2 + k * (x3 * y1 - x1 * y3 * c),
            diag * x3 + off * y3 + k * (x1 * y2 - x2 * y1))


def trig_display_infinite_q(l1, l2, J1, J2) -> tuple[tuple[complex, ...], tuple[complex, ...]]:
    """Closed-form (dJ_1/dlambda_2, dJ_2/dlambda_1) for the cylinder with lambda_Q at infinity.

    Pauli components in and out.  Uses gamma_1 - gamma_2 = +1/2, so only
    the rational coefficients 1 / (2 (l1 - l2)) and +-2 pi i survive.
    """
    a, b, c = _pauli(J1)
    d, e, f = _pauli(J2)
    h = 1 / (2 * (complex(l1) - complex(l2)))
    dJ1 = (h * a - TWO_PI_I * c * e,
           h * b + TWO_PI_I * c * d,
           h * (c - f) + TWO_PI_I * (a * e - b * d))
    dJ2 = (-h * d + TWO_PI_I * f * b,
           -h * e - TWO_PI_I * f * a,
           h * (c - f) + TWO_PI_I * (a * e - b * d))
    return dJ1, dJ2


# -- tau-function ----------------------------------------------------------------

def tau_rhs(cov: EllipticCoveringState, J: JState, m: int) -> complex:
    """d log(tau) / d lambda_m = tr(J_m^2) / (2 alpha_m)."""
    a = complex(cov.alpha[m])
    if a == 0:
        raise ZeroResidue(f"alpha_{m} vanishes")
    M = J[m].matrix()
    return complex(np.trace(M @ M)) / (2 * a)


def tau_mixed_second(cov: EllipticCoveringState, J: JState, m: int, n: int,
                     ctx: RContext | None = None) -> complex:
    """d^2 log(tau) / d lambda_m d lambda_n = -tr(J_m tr_2(r'(gamma_m - gamma_n) J_n))."""
    if m == n:
        raise IndexError("mixed derivative needs m != n")
    ctx = _ctx(cov, J.K, ctx)
    R = ctx.contract_r_prime(cov.gamma[m] - cov.gamma[n], J[n])
    return -complex(np.trace(J[m].matrix() @ R))


def integrate_log_tau(coupled, path) -> complex:
    """Integral of tau_rhs along ``path`` for J induced from a Schlesinger state.

    Runs the coupled covering/Schlesinger flow with log(tau) appended to the
    state vector, so it shares the flow's adaptive steps.
    """
    from .schlesinger import coupled_flow
    _, log_tau = coupled_flow(coupled, path, with_log_tau=True)
    return log_tau
