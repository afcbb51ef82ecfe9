"""Composite numerical checks on coverings, flows and induced J-systems.

These compose the module operations into the residuals the harness reports:
Thomae and Rauch relations, the a-cycle closure of the Abel map, flow
endpoints against fresh constructions, rectangle closures, and the
finite-difference test of the induced J-matrices against the J-system.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature as quad
from .covering import (EllipticCoveringState, FlowPath, a_period, build_trig_two_sheet,
                       flow_rhs, integrate_flow, modulus_from_branch_points, omega_sheet,
                       scale_of, thomae_alphas, two_sheet_covering)
from .isosystem import (JState, compatibility_residual, j_flow_rhs, sample_cell)
from .schlesinger import (CoupledState, abel_poles, couple, coupled_flow, induced_j,
                          induced_j_derivatives, random_schlesinger_state, trace_square)
from .theta import theta_constants

TWO_PI_I = 2j * math.pi


def _cell_diff(d: complex, mu: complex) -> float:
    k = round(d.imag / mu.imag)
    d -= k * mu
    d -= round(d.real)
    return abs(d)


# -- two-sheet covering ---------------------------------------------------------

def thomae_residual(bp: Sequence[complex]) -> float:
    """|A^2 - 4 pi^2 theta_4^4 / ((l1 - l4)(l3 - l2))| / |A^2|."""
    l1, l2, l3, l4 = bp
    A = a_period(*bp)
    mu = modulus_from_branch_points(*bp)
    th4 = theta_constants(mu)[2]
    return abs(A * A - 4 * math.pi ** 2 * th4 ** 4 / ((l1 - l4) * (l3 - l2))) / abs(A * A)


def alpha1_residual(bp: Sequence[complex]) -> float:
    """Closed-form alpha_1 against 2 / ((l1-l2)(l1-l3)(l1-l4) A^2), relative."""
    l1, l2, l3, l4 = bp
    A = a_period(*bp)
    a1 = thomae_alphas(bp, modulus_from_branch_points(*bp))[0]
    ref = 2 / ((l1 - l2) * (l1 - l3) * (l1 - l4) * A * A)
    return abs(a1 - ref) / abs(ref)


def rauch_residuals(cov: EllipticCoveringState, h: float | None = None) -> list[float]:
    """|FD d mu / d lambda_m - 2 pi i alpha_m| / |alpha_m| for each m (five-point stencil)."""
    bp = list(cov.lam)
    h = 1e-3 * scale_of(bp) if h is None else h
    out = []
    for m in range(len(bp)):
        def mu_at(x, m=m):
            b = list(bp)
            b[m] += x
            return modulus_from_branch_points(*b)
        fd = (-mu_at(2 * h) + 8 * mu_at(h) - 8 * mu_at(-h) + mu_at(-2 * h)) / (12 * h)
        out.append(abs(fd - TWO_PI_I * cov.alpha[m]) / abs(cov.alpha[m]))
    return out


def a_cycle_closure(bp: Sequence[complex], vertices: int = 400) -> tuple[complex, complex]:
    """Continue nu once around the cut [l1, l2] on an ellipse.

    Returns ``(delta_nu, omega_ratio)``: the change of nu (expected 1) and
    omega_end / omega_start (expected 1, the loop closes on the same sheet).
    """
    bp = list(bp)
    m, d = (bp[0] + bp[1]) / 2, bp[1] - bp[0]
    # semi-axes 0.65 |d| and 0.25 |d| along the cut keep the other points outside
    t = np.linspace(0.0, 2 * math.pi, vertices)
    verts = list(m + d * (0.65 * np.cos(t) + 0.25j * np.sin(t)))
    w0 = omega_sheet(bp, verts[0], 0)
    integral, w_end = quad.polyline_integral(bp, verts, w0)
    return integral / a_period(*bp), w_end / w0


def rigidity_deviation(cov: EllipticCoveringState) -> float:
    """max(|gamma_1 - gamma_2 + 1/2|, |gamma_2 - gamma_3 + mu/2|) for the two-sheet state."""
    g = cov.gamma
    return max(abs(g[0] - g[1] + 0.5), abs(g[1] - g[2] + cov.mu / 2))


@dataclass(frozen=True)
class FlowCheck:
    endpoint: float
    rigidity: float
    reversibility: float
    alpha_sum: float


def flow_check(cov: EllipticCoveringState, m: int, length: float | None = None,
               direction: complex = cmath.exp(0.7j)) -> FlowCheck:
    """Integrate lambda_m along a straight segment and compare with a fresh construction.

    ``endpoint`` compares gamma differences, alpha and mu; ``rigidity`` is
    the worst lattice-rigidity deviation seen at any accepted step;
    ``reversibility`` is the distance back to the start after retracing.
    """
    length = 0.1 * scale_of(cov.lam) if length is None else length
    start = cov.lam[m]
    path = FlowPath(m, start, start + length * direction)
    worst = [rigidity_deviation(cov)]

    def monitor(t, state):
        worst.append(rigidity_deviation(state))

    end = integrate_flow(cov, path, monitor=monitor)
    fresh = two_sheet_covering(*end.lam)
    dev = abs(end.mu - fresh.mu)
    dev = max(dev, max(abs(a - b) for a, b in zip(end.alpha, fresh.alpha)))
    for k in range(1, len(end.gamma)):
        dev = max(dev, abs((end.gamma[k] - end.gamma[0]) - (fresh.gamma[k] - fresh.gamma[0])))
    # the absolute images track the basepoint shift too
    dev = max(dev, _cell_diff(end.gamma[0] - fresh.gamma[0], fresh.mu))
    back = integrate_flow(end, path.reversed())
    rev = max(abs(back.mu - cov.mu),
              max(abs(a - b) for a, b in zip(back.gamma, cov.gamma)),
              max(abs(a - b) for a, b in zip(back.alpha, cov.alpha)))
    return FlowCheck(dev, max(worst), rev, abs(sum(end.alpha)))


def state_distance(x: EllipticCoveringState, y: EllipticCoveringState) -> float:
    return max(abs(x.mu - y.mu),
               max(abs(a - b) for a, b in zip(x.gamma, y.gamma)),
               max(abs(a - b) for a, b in zip(x.alpha, y.alpha)))


def rectangle_closure(cov: EllipticCoveringState, m: int, n: int,
                      dm: complex, dn: complex) -> float:
    """Move lambda_m then lambda_n versus lambda_n then lambda_m; distance of the results."""
    def move(state, k, d):
        return integrate_flow(state, FlowPath(k, state.lam[k], state.lam[k] + d))
    x = move(move(cov, m, dm), n, dn)
    y = move(move(cov, n, dn), m, dm)
    return state_distance(x, y)


def rigidity_rates(cov: EllipticCoveringState) -> list[tuple[complex, complex]]:
    """(d(g1 - g2), d(g2 - g3) + pi i alpha_m) for each m; both vanish on the two-sheet state."""
    out = []
    for m in range(len(cov.lam)):
        dg, _, _ = flow_rhs(cov, m)
        out.append((dg[0] - dg[1], dg[1] - dg[2] + 1j * math.pi * cov.alpha[m]))
    return out


def pinched_deviation(l1: complex, l2: complex, lambda_Q: complex, eps: float,
                      direction: complex = cmath.exp(0.9j)) -> tuple[float, float, float]:
    """Elliptic covering with l3, l4 = lambda_Q +- eps against the cylinder state.

    Returns ``(Im mu, gamma deviation, alpha deviation)`` over the first two
    branch points.  The cylinder images come with the opposite orientation,
    so the elliptic gamma_m is compared with -gamma_m modulo 1.
    """
    ell = two_sheet_covering(l1, l2, lambda_Q + eps * direction, lambda_Q - eps * direction)
    trig = build_trig_two_sheet(l1, l2, lambda_Q)
    dg = 0.0
    for k in range(2):
        d = ell.gamma[k] + trig.gamma[k]
        dg = max(dg, abs(d - round(d.real)))
    da = max(abs(ell.alpha[k] - trig.alpha0[k]) for k in range(2))
    return ell.mu.imag, dg, da


# -- Schlesinger-induced J ------------------------------------------------------

def default_q_points(cov: EllipticCoveringState, L: int, rng: np.random.Generator) -> list[complex]:
    """Projections for the Schlesinger poles, spread on a circle around the branch points."""
    center = sum(cov.lam) / len(cov.lam)
    radius = 1.5 * max(abs(x - center) for x in cov.lam)
    phase = rng.random() * 2 * math.pi
    return [center + radius * (1 + 0.2 * rng.random()) * cmath.exp(1j * (phase + 2 * math.pi * j / L))
            for j in range(L)]


def seeded_coupled_state(cov: EllipticCoveringState, K: int, L: int, seed: int,
                         q_points: Sequence[complex] | None = None) -> CoupledState:
    """Coupled state with seeded random residues A_j and poles at nu(Q_j)."""
    rng = np.random.default_rng(seed)
    if q_points is None:
        q_points = default_q_points(cov, L, rng)
    sch = random_schlesinger_state(K, L, cov.mu, seed=int(rng.integers(2 ** 31)))
    return couple(cov, list(q_points), sch.A)


def jsystem_fd_residuals(coupled: CoupledState,
                         h: float | None = None) -> dict[tuple[int, int], float]:
    """Relative |FD dJ_m/dlambda_n - j_flow_rhs| for every pair m != n.

    J is induced along the coupled flow at lambda_n + s h, s = -2..2, and
    differentiated with the five-point stencil.
    """
    cov = coupled.cov
    h = 1e-3 * scale_of(cov.lam) if h is None else h
    J0 = induced_j(coupled)
    out = {}
    for n in range(len(cov.lam)):
        Js = {}
        for s in (-2, -1, 1, 2):
            path = FlowPath(n, cov.lam[n], cov.lam[n] + s * h)
            Js[s] = induced_j(coupled_flow(coupled, path))
        for m in range(len(cov.lam)):
            if m == n:
                continue
            fd = (-Js[2][m].values + 8 * Js[1][m].values
                  - 8 * Js[-1][m].values + Js[-2][m].values) / (12 * h)
            ref = j_flow_rhs(cov, J0, m, n).values
            out[(m, n)] = float(np.max(np.abs(fd - ref)) / np.max(np.abs(ref)))
    return out


def induced_compatibility(coupled: CoupledState, pair: tuple[int, int], samples: int,
                          rng: np.random.Generator):
    """Compatibility residual of the induced J with chain-rule derivatives."""
    J = induced_j(coupled)
    dJ = {p: induced_j_derivatives(coupled, p) for p in pair}
    nus = sample_cell(coupled.cov, samples, rng)
    return compatibility_residual(coupled.cov, J, dJ, pair, nus)


def coupled_path_check(coupled: CoupledState, m: int, length: float | None = None,
                       direction: complex = cmath.exp(0.5j)) -> tuple[float, float]:
    """(max tr A_j^2 drift, Abel-map pole mismatch at the end) along a lambda_m segment."""
    length = 0.1 * scale_of(coupled.cov.lam) if length is None else length
    start = coupled.cov.lam[m]
    path = FlowPath(m, start, start + length * direction)
    drift = [0.0]

    def monitor(t, state):
        drift[0] = max(drift[0], max(abs(trace_square(a) - b)
                                     for a, b in zip(state.sch.A, coupled.sch.trA2)))

    end = coupled_flow(coupled, path, monitor=monitor)
    mismatch = max(_cell_diff(z - w, end.cov.mu) for z, w in zip(abel_poles(end), end.sch.z))
    return drift[0], mismatch


def log_tau_loop(coupled: CoupledState, m: int, n: int, dm: complex, dn: complex) -> tuple[complex, float]:
    """log(tau) around the rectangle lambda_m + dm, lambda_n + dn, back, back.

    Returns ``(loop_integral, state_mismatch)``; both vanish for an exact
    differential on a single-valued flow.
    """
    state = coupled
    total = 0j
    for k, d in ((m, dm), (n, dn), (m, -dm), (n, -dn)):
        start = state.cov.lam[k]
        state, inc = coupled_flow(state, FlowPath(k, start, start + d), with_log_tau=True)
        total += inc
    return total, state_distance(state.cov, coupled.cov)


def tau_mixed_fd(coupled: CoupledState, m: int, n: int, h: float | None = None) -> complex:
    """Central difference in lambda_n of tr(J_m^2)/(2 alpha_m) along the coupled flow."""
    from .isosystem import tau_rhs
    cov = coupled.cov
    h = 1e-3 * scale_of(cov.lam) if h is None else h
    vals = {}
    for s in (-2, -1, 1, 2):
        c = coupled_flow(coupled, FlowPath(n, cov.lam[n], cov.lam[n] + s * h))
        vals[s] = tau_rhs(c.cov, induced_j(c), m)
    return (-vals[2] + 8 * vals[1] - 8 * vals[-1] + vals[-2]) / (12 * h)


def random_pauli_jstate(rng: np.random.Generator, count: int) -> JState:
    from .sigma import pauli_to_coefficients
    return JState(2, tuple(pauli_to_coefficients(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
                           for _ in range(count)))
