"""Elliptic Schlesinger system and the J-matrices it induces on a covering.

A(gamma) = sum_j tr_2(r(gamma - z_j) A_j) on the torus C / {1, mu}.  The poles
z_j and the period mu are the deformation variables; tr A_j^2 are integrals.
Coupling to a covering sets z_j = nu(Q_j) for points Q_j with fixed
projections, so z_j and mu move with the branch points.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import covering as cv
from .covering import EllipticCoveringState, FlowPath, _c, _pair
from .errors import NearSingularity
from .isosystem import JState
from .ode import integrate_path
from .rmatrix import RContext
from .sigma import SlkCoefficients, sigma_algebra
from .theta import as_mu, rho, rho_derivatives

TWO_PI_I = 2j * math.pi


def _distinct_mod_lattice(z: Sequence[complex], mu: complex, tol: float = 1e-9) -> None:
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            d = z[i] - z[j]
            k = round(d.imag / mu.imag)
            d -= k * mu
            d -= round(d.real)
            if abs(d) < tol:
                raise NearSingularity(f"poles z_{i} and z_{j} coincide modulo the lattice")


@dataclass(frozen=True)
class SchlesingerState:
    """Poles ``z`` with sl(K) residues ``A`` on the torus of period ratio ``mu``."""

    K: int
    z: tuple[complex, ...]
    A: tuple[SlkCoefficients, ...]
    mu: complex
    trA2: tuple[complex, ...] = field(default=(), compare=False)

    def __post_init__(self):
        z = tuple(complex(x) for x in self.z)
        A = tuple(a if isinstance(a, SlkCoefficients) else SlkCoefficients(self.K, a)
                  for a in self.A)
        if len(z) != len(A):
            raise ValueError("need one residue per pole")
        mu = as_mu(self.mu)
        _distinct_mod_lattice(z, mu)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "mu", mu)
        if not self.trA2:
            object.__setattr__(self, "trA2", tuple(trace_square(a) for a in A))

    @property
    def L(self) -> int:
        return len(self.z)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "mu": _pair(self.mu),
            "z": [_pair(x) for x in self.z],
            "A": [{f"{a}{b}": _pair(v) for (a, b), v in Aj.items()} for Aj in self.A],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SchlesingerState":
        extra = set(d) - {"K", "mu", "z", "A", "seed"}
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        K = int(d["K"])
        alg = sigma_algebra(K)
        A = [alg.coefficients({(int(k[0]), int(k[1])): _c(v) for k, v in t.items()})
             for t in d["A"]]
        return cls(K, tuple(_c(x) for x in d["z"]), tuple(A), _c(d["mu"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SchlesingerState":
        return cls.from_dict(json.loads(text))


def trace_square(a: SlkCoefficients) -> complex:
    M = a.matrix()
    return complex(np.trace(M @ M))


def random_schlesinger_state(K: int, L: int, mu, seed: int, scale: float = 0.3,
                             min_separation: float = 0.15) -> SchlesingerState:
    """Seeded random poles in the fundamental cell with random traceless residues."""
    rng = np.random.default_rng(seed)
    mu = as_mu(mu)
    alg = sigma_algebra(K)
    z: list[complex] = []
    while len(z) < L:
        x, y = rng.random(2)
        cand = complex(x + y * mu)
        if all(_cell_distance(cand - w, mu) > min_separation for w in z):
            z.append(cand)
    A = []
    for _ in range(L):
        v = rng.normal(size=(2, K * K - 1))
        A.append(SlkCoefficients(K, scale * (v[0] + 1j * v[1]) / math.sqrt(K * K - 1)))
    return SchlesingerState(K, tuple(z), tuple(A), mu)


def _cell_distance(d: complex, mu: complex) -> float:
    k = round(d.imag / mu.imag)
    d -= k * mu
    best = math.inf
    for dk in (-1, 0, 1):
        e = d - dk * mu
        e -= round(e.real)
        best = min(best, abs(e))
    return best


def _ctx(K: int, mu, ctx: RContext | None) -> RContext:
    if ctx is not None and ctx.K == K and ctx.mu == complex(mu):
        return ctx
    return RContext(K, mu)


def a_field(sch: SchlesingerState, gamma, ctx: RContext | None = None) -> np.ndarray:
    """A(gamma) = sum_j tr_2(r(gamma - z_j) A_j)."""
    ctx = _ctx(sch.K, sch.mu, ctx)
    gamma = complex(gamma)
    return sum(ctx.contract_r(gamma - z, a) for z, a in zip(sch.z, sch.A))


@dataclass(frozen=True)
class SchlesingerDerivatives:
    """``dz[i][j]`` = dA_i/dz_j and ``dmu[i]`` = dA_i/dmu, as K x K matrices."""

    dz: tuple[tuple[np.ndarray, ...], ...]
    dmu: tuple[np.ndarray, ...]


def schlesinger_rhs(sch: SchlesingerState, ctx: RContext | None = None) -> SchlesingerDerivatives:
    """Right-hand sides of the Schlesinger system in every z_j and in mu."""
    ctx = _ctx(sch.K, sch.mu, ctx)
    L = sch.L
    mats = [a.matrix() for a in sch.A]
    dz = [[None] * L for _ in range(L)]
    dmu = []
    for i in range(L):
        diag = np.zeros_like(mats[i])
        zsum = np.zeros_like(mats[i])
        for j in range(L):
            Zc = ctx.contract_Z(sch.z[i] - sch.z[j], sch.A[j])
            zsum -= mats[i] @ Zc - Zc @ mats[i]
            if j == i:
                continue
            R = ctx.contract_r(sch.z[i] - sch.z[j], sch.A[j])
            c = mats[i] @ R - R @ mats[i]
            dz[i][j] = c
            diag -= c
        dz[i][i] = diag
        dmu.append(zsum)
    return SchlesingerDerivatives(tuple(tuple(r) for r in dz), tuple(dmu))


def hamiltonians(sch: SchlesingerState, ctx: RContext | None = None):
    """``(H, H_mu)``: H_i = (1/4 pi i) contour integral of tr A^2 around z_i, and H_mu.

    H_i = sum_{j != i} tr(A_i tr_2(r(z_i - z_j) A_j)),
    H_mu = (1/2) sum_{i, j} tr(A_i sum_AB Z_AB(z_i - z_j) A_j^AB sigma_AB).
    """
    ctx = _ctx(sch.K, sch.mu, ctx)
    mats = [a.matrix() for a in sch.A]
    H = []
    Hmu = 0j
    for i in range(sch.L):
        h = 0j
        for j in range(sch.L):
            Zc = ctx.contract_Z(sch.z[i] - sch.z[j], sch.A[j])
            Hmu += 0.5 * np.trace(mats[i] @ Zc)
            if j != i:
                h += np.trace(mats[i] @ ctx.contract_r(sch.z[i] - sch.z[j], sch.A[j]))
        H.append(complex(h))
    return H, complex(Hmu)


# -- integration in (z, mu) --------------------------------------------------------

@dataclass(frozen=True)
class SchlesingerPath:
    """Straight path in one Schlesinger time: ``variable`` is "z" (with ``index``) or "mu"."""

    variable: str
    start: complex
    end: complex
    index: int = 0
    max_step: float = 0.1
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.variable not in ("z", "mu"):
            raise ValueError("variable must be 'z' or 'mu'")
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "end", complex(self.end))

    @property
    def delta(self) -> complex:
        return self.end - self.start

    def reversed(self) -> "SchlesingerPath":
        return replace(self, start=self.end, end=self.start)


@dataclass(frozen=True)
class SchlesingerRun:
    state: SchlesingerState
    trA2_drift: tuple[float, ...]
    hamiltonian_drift: float
    steps: int


def _pack_A(A: Sequence[SlkCoefficients]) -> np.ndarray:
    return np.concatenate([a.values for a in A]) if A else np.zeros(0, dtype=complex)


def _unpack_A(K: int, y: np.ndarray, L: int) -> tuple[SlkCoefficients, ...]:
    n = K * K - 1
    return tuple(SlkCoefficients(K, y[j * n:(j + 1) * n]) for j in range(L))


def _raw_sch(K, z, A, mu, trA2=()) -> SchlesingerState:
    s = object.__new__(SchlesingerState)
    object.__setattr__(s, "K", K)
    object.__setattr__(s, "z", tuple(complex(x) for x in z))
    object.__setattr__(s, "A", tuple(A))
    mu = complex(mu)
    if not mu.imag > 0:
        raise NearSingularity(f"period ratio left the upper half plane: {mu}")
    object.__setattr__(s, "mu", mu)
    object.__setattr__(s, "trA2", tuple(trA2))
    return s


def integrate_schlesinger(sch: SchlesingerState, path: SchlesingerPath) -> SchlesingerRun:
    """Integrate the Schlesinger system along a straight path in z_index or mu."""
    K, L = sch.K, sch.L
    cur = sch.z[path.index] if path.variable == "z" else sch.mu
    if abs(cur - path.start) > 1e-12 * max(1.0, abs(cur)):
        raise ValueError(f"path starts at {path.start}, current value is {cur}")
    if path.delta == 0:
        return SchlesingerRun(sch, (0.0,) * L, 0.0, 0)
    alg = sigma_algebra(K)

    def state_at(t, y):
        z, mu = list(sch.z), sch.mu
        if path.variable == "z":
            z[path.index] = path.start + t * path.delta
        else:
            mu = path.start + t * path.delta
        return _raw_sch(K, z, _unpack_A(K, y, L), mu, sch.trA2)

    def rhs(t, y):
        s = state_at(t, y)
        d = schlesinger_rhs(s)
        if path.variable == "z":
            mats = [d.dz[i][path.index] for i in range(L)]
        else:
            mats = list(d.dmu)
        return path.delta * np.concatenate([alg.expand(M, rtol=1e-8).values for M in mats])

    H0 = hamiltonians(sch)
    tr_drift = [0.0] * L
    h_drift = [0.0]
    steps = [0]

    def monitor(t, y):
        s = state_at(t, y)
        steps[0] += 1
        for j, a in enumerate(s.A):
            tr_drift[j] = max(tr_drift[j], abs(trace_square(a) - sch.trA2[j]))
        H, Hmu = hamiltonians(s)
        h_drift[0] = max(h_drift[0], max(abs(a - b) for a, b in zip(H + [Hmu], H0[0] + [H0[1]])))

    y = integrate_path(rhs, _pack_A(sch.A), path, callback=monitor)
    end = state_at(1.0, y)
    final = SchlesingerState(K, end.z, end.A, end.mu, sch.trA2)
    return SchlesingerRun(final, tuple(tr_drift), h_drift[0], steps[0])


# -- coupling to a covering -----------------------------------------------------

@dataclass(frozen=True)
class CoupledState:
    """A covering and a Schlesinger state with z_j = nu(Q_j).

    ``Q`` holds ``(lambda, omega)`` for each point: its fixed projection and
    the value of omega selecting the sheet.
    """

    cov: EllipticCoveringState
    sch: SchlesingerState
    Q: tuple[tuple[complex, complex], ...] = ()

    def __post_init__(self):
        if abs(complex(self.sch.mu) - complex(self.cov.mu)) > 1e-9 * abs(self.cov.mu):
            raise ValueError("Schlesinger and covering periods differ")


def couple(cov: EllipticCoveringState, Q_lambdas: Sequence[complex], A: Sequence,
           sheets: Sequence[int] | None = None) -> CoupledState:
    """Place poles at the Abel images of points with projections ``Q_lambdas``."""
    K = A[0].K if isinstance(A[0], SlkCoefficients) else int(round(math.sqrt(len(A[0]) + 1)))
    sheets = sheets or [0] * len(Q_lambdas)
    Q, z = [], []
    for lam, sh in zip(Q_lambdas, sheets):
        lam = complex(lam)
        w = cv.omega_sheet(cov.lam, lam, sh)
        Q.append((lam, w))
        z.append(cv.abel_map(cov.lam, lam, omega=w))
    sch = SchlesingerState(K, tuple(z), tuple(A), cov.mu)
    return CoupledState(cov, sch, tuple(Q))


def induced_j(coupled: CoupledState, ctx: RContext | None = None) -> JState:
    """J_m = -alpha_m sum_j tr_2(r(gamma_m - z_j) A_j)."""
    cov, sch = coupled.cov, coupled.sch
    ctx = _ctx(sch.K, cov.mu, ctx)
    alg = ctx.alg
    out = []
    for g, a in zip(cov.gamma, cov.alpha):
        vals = np.zeros(len(alg.indices), dtype=complex)
        for z, Aj in zip(sch.z, sch.A):
            vals += ctx.w_all(g - z) * Aj.values
        out.append(SlkCoefficients(sch.K, -a * vals))
    return JState(sch.K, tuple(out))


def coupled_rhs(coupled: CoupledState, m: int, ctx: RContext | None = None):
    """Derivatives in lambda_m: ``(dgamma, dalpha, dmu, dz, dA)`` (dA as coefficients)."""
    cov, sch = coupled.cov, coupled.sch
    ctx = _ctx(sch.K, cov.mu, ctx)
    dg, da, dmu = cv.flow_rhs(cov, m)
    dz = [cv.nu_lambda_m(cov, z, m) for z in sch.z]
    d = schlesinger_rhs(sch, ctx)
    alg = ctx.alg
    dA = []
    for i in range(sch.L):
        M = d.dmu[i] * dmu
        for j in range(sch.L):
            M = M + d.dz[i][j] * dz[j]
        dA.append(alg.expand(M, rtol=1e-8))
    return dg, da, dmu, dz, dA


def induced_j_derivatives(coupled: CoupledState, m: int,
                          ctx: RContext | None = None) -> list[SlkCoefficients]:
    """dJ_k/dlambda_m for every k, by the chain rule through gamma, alpha, mu, z and A."""
    cov, sch = coupled.cov, coupled.sch
    ctx = _ctx(sch.K, cov.mu, ctx)
    dg, da, dmu, dz, dA = coupled_rhs(coupled, m, ctx)
    out = []
    for k, (g, a) in enumerate(zip(cov.gamma, cov.alpha)):
        S = np.zeros(len(ctx.alg.indices), dtype=complex)
        dS = np.zeros_like(S)
        for j, (z, Aj) in enumerate(zip(sch.z, sch.A)):
            w, wp = ctx.w_and_prime_all(g - z)
            wmu = ctx.w_dmu_all(g - z)
            S += w * Aj.values
            dS += (wp * (dg[k] - dz[j]) + wmu * dmu) * Aj.values + w * dA[j].values
        out.append(SlkCoefficients(sch.K, -da[k] * S - a * dS))
    return out


def _pack_coupled(c: CoupledState) -> np.ndarray:
    cov, sch = c.cov, c.sch
    return np.concatenate([np.array(list(cov.gamma) + list(cov.alpha) + [cov.mu]),
                           np.array(sch.z, dtype=complex), _pack_A(sch.A)])


def _unpack_coupled(c: CoupledState, y: np.ndarray, lam) -> CoupledState:
    cov, sch = c.cov, c.sch
    n, L, K = len(cov.gamma), sch.L, sch.K
    cov2 = cv._raw_state(cov, y[:2 * n + 1], lam)
    z = y[2 * n + 1:2 * n + 1 + L]
    A = _unpack_A(K, y[2 * n + 1 + L:], L)
    sch2 = _raw_sch(K, z, A, cov2.mu, sch.trA2)
    out = object.__new__(CoupledState)
    object.__setattr__(out, "cov", cov2)
    object.__setattr__(out, "sch", sch2)
    object.__setattr__(out, "Q", c.Q)
    return out


def coupled_flow(coupled: CoupledState, path: FlowPath, with_log_tau: bool = False,
                 monitor=None):
    """Integrate covering and Schlesinger flows together along a branch-point path.

    Returns the end state, or ``(state, log_tau_increment)`` when
    ``with_log_tau`` is set, the increment being the path integral of
    tr(J_m^2) / (2 alpha_m) d lambda_m with J induced along the way.
    """
    cv._check_path_start(coupled.cov, path)
    if path.delta == 0:
        return (coupled, 0j) if with_log_tau else coupled
    K = coupled.sch.K
    alg = sigma_algebra(K)

    def rhs(t, y):
        c = _unpack_coupled(coupled, y[:-1], cv.path_lambdas(coupled.cov, path, t))
        ctx = RContext(K, c.cov.mu)
        dg, da, dmu, dz, dA = coupled_rhs(c, path.m, ctx)
        parts = [np.array(dg + da + [dmu], dtype=complex), np.array(dz, dtype=complex),
                 np.concatenate([a.values for a in dA]) if dA else np.zeros(0)]
        if with_log_tau:
            from .isosystem import tau_rhs
            J = induced_j(c, ctx)
            parts.append(np.array([tau_rhs(c.cov, J, path.m)]))
        else:
            parts.append(np.zeros(1, dtype=complex))
        return path.delta * np.concatenate(parts)

    cb = None
    if monitor is not None:
        def cb(t, y):
            monitor(t, _unpack_coupled(coupled, y[:-1], cv.path_lambdas(coupled.cov, path, t)))

    y0 = np.concatenate([_pack_coupled(coupled), [0j]])
    y = integrate_path(rhs, y0, path, callback=cb)
    end = _unpack_coupled(coupled, y[:-1], cv.path_lambdas(coupled.cov, path, 1.0))
    cov_end = EllipticCoveringState(lam=end.cov.lam, gamma=end.cov.gamma, alpha=end.cov.alpha,
                                    mu=end.cov.mu, basepoint_shift=coupled.cov.basepoint_shift,
                                    sheet=coupled.cov.sheet)
    sch_end = SchlesingerState(K, end.sch.z, end.sch.A, cov_end.mu, coupled.sch.trA2)
    result = CoupledState(cov_end, sch_end, _continue_omegas(coupled, path))
    return (result, complex(y[-1])) if with_log_tau else result


def _continue_omegas(coupled: CoupledState, path: FlowPath, samples: int = 512):
    """Carry omega(Q_j) continuously along the branch-point path."""
    from .quadrature import track_sqrt
    t = np.linspace(0.0, 1.0, samples)
    out = []
    for lam, w in coupled.Q:
        sq = np.ones(samples, dtype=complex)
        for k, x in enumerate(coupled.cov.lam):
            xk = path.start + t * path.delta if k == path.m else x
            sq = sq * (lam - xk)
        W = track_sqrt(sq)
        if abs(W[0] - w) > abs(W[0] + w):
            W = -W
        out.append((lam, complex(W[-1])))
    return tuple(out)


def abel_poles(coupled: CoupledState) -> list[complex]:
    """z_j recomputed as nu(Q_j) on the current covering, reduced to the cell."""
    return [cv.abel_map(coupled.cov.lam, lam, omega=w) for lam, w in coupled.Q]


def tau_relation_residual(coupled: CoupledState, m: int, ctx: RContext | None = None) -> complex:
    """tr(J_m^2)/(2 alpha_m) minus the Schlesinger-side expression for d log(tau)/d lambda_m.

    The Schlesinger side is sum_i H_i dz_i/dlambda_m + H_mu dmu/dlambda_m
    + sum_j (tr A_j^2 / 2) (-alpha_m rho'(z_j - gamma_m)).
    """
    from .isosystem import tau_rhs
    cov, sch = coupled.cov, coupled.sch
    ctx = _ctx(sch.K, cov.mu, ctx)
    J = induced_j(coupled, ctx)
    lhs = tau_rhs(cov, J, m)
    H, Hmu = hamiltonians(sch, ctx)
    rhs = Hmu * TWO_PI_I * cov.alpha[m]
    for z, h, a in zip(sch.z, H, sch.A):
        t = trace_square(a)
        rhs += h * cv.nu_lambda_m(cov, z, m)
        rp = rho_derivatives(z - cov.gamma[m], cov.mu, 2)[1]
        rhs += t / 2 * (-cov.alpha[m] * rp)
    return complex(lhs - rhs)
