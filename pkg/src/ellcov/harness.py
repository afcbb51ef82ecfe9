"""Batch scenarios over the library, with machine-readable reports.

A scenario is described by a JSON document (:class:`ScenarioConfig`).
:func:`run_scenario` executes it, turning every numerical failure into a
failed check, and :func:`emit_report` serialises the result as CSV or JSON.
All randomness comes from one generator seeded by ``config.seed``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Iterable

import numpy as np

from . import identities as ids
from .covering import (build_trig_two_sheet, check_distinct, flow_rhs_raw, scale_of,
                       trig_flow_rhs, two_sheet_covering)
from .errors import ConfigError, DegenerateBranchPoints, EllcovError
from .isosystem import (JState, j_flow_rhs_raw, tau_mixed_second, trig_display_infinite_q,
                        trig_j_flow_rhs)
from .rmatrix import RContext
from .schlesinger import induced_j, tau_relation_residual
from .sigma import coefficients_to_pauli, pauli_to_coefficients
from . import verify

THREADS_ENV = "ELLCOV_THREADS"

DEFAULT_BRANCH_POINTS = ((0.1, 0.2), (1.3, -0.1), (2.2, 0.9), (0.4, 1.7))

SCENARIOS = {
    "identity-suite": "theta, rho, w, Z and r-matrix identities at one (K, mu)",
    "two-sheet-flow": "two-sheet covering: Thomae, Rauch, Abel map and branch-point flows",
    "schlesinger-induced": "J induced by Schlesinger data: finite differences and compatibility",
    "trig-limit": "cylinder limit along a ladder of periods mu",
    "tau-relation": "tau-function derivatives against the Schlesinger Hamiltonians",
}


def _complex(v, name: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{name}: expected a number or [re, im] pair, got {v!r}")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario run.  Complex numbers are given as ``[re, im]`` pairs.

    Fields left out of the JSON take the defaults below and are echoed in
    the report so a run can be reproduced from the report alone.
    """

    scenario: str
    K: int = 2
    L: int = 2
    mu: complex = 1j
    mu_ladder: tuple[complex, ...] = (5j, 10j, 20j)
    seed: int = 7
    branch_points: tuple[complex, ...] = tuple(complex(*p) for p in DEFAULT_BRANCH_POINTS)
    q_points: tuple[complex, ...] | None = None
    samples: int = 100
    nu_samples: int = 20
    path_index: int = 3
    path_length: float = 0.1
    fd_step: float = 1e-3
    tolerances: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"known: {', '.join(SCENARIOS)}")
        if self.K < 2:
            raise ConfigError("K must be at least 2")
        if self.L < 1:
            raise ConfigError("L must be at least 1")
        if complex(self.mu).imag <= 0 or any(complex(m).imag <= 0 for m in self.mu_ladder):
            raise ConfigError("periods mu need a positive imaginary part")
        if len(self.branch_points) != 4:
            raise ConfigError("two-sheet scenarios take exactly four branch points")
        try:
            check_distinct(self.branch_points)
        except DegenerateBranchPoints as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        if self.q_points is not None and len(self.q_points) != self.L:
            raise ConfigError(f"q_points has {len(self.q_points)} entries, L = {self.L}")
        if not 0 <= self.path_index < 4:
            raise ConfigError("path_index must be 0, 1, 2 or 3")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or v < 0:
                raise ConfigError(f"tolerance {k!r} must be a non-negative number")

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        if "scenario" not in d:
            raise ConfigError("config needs a 'scenario' field")
        kw = dict(d)
        try:
            for name in ("K", "L", "seed", "samples", "nu_samples", "path_index"):
                if name in kw:
                    if isinstance(kw[name], bool) or not isinstance(kw[name], int):
                        raise ConfigError(f"{name} must be an integer")
            for name in ("path_length", "fd_step"):
                if name in kw:
                    kw[name] = float(kw[name])
            if "mu" in kw:
                kw["mu"] = _complex(kw["mu"], "mu")
            if "mu_ladder" in kw:
                kw["mu_ladder"] = tuple(_complex(v, "mu_ladder") for v in kw["mu_ladder"])
            if "branch_points" in kw:
                kw["branch_points"] = tuple(_complex(v, "branch_points") for v in kw["branch_points"])
            if kw.get("q_points") is not None:
                kw["q_points"] = tuple(_complex(v, "q_points") for v in kw["q_points"])
            if "tolerances" in kw and not isinstance(kw["tolerances"], dict):
                raise ConfigError("tolerances must be an object mapping check names to numbers")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["mu"] = _pair(self.mu)
        d["mu_ladder"] = [_pair(m) for m in self.mu_ladder]
        d["branch_points"] = [_pair(b) for b in self.branch_points]
        d["q_points"] = None if self.q_points is None else [_pair(q) for q in self.q_points]
        d["tolerances"] = dict(sorted(self.tolerances.items()))
        return d


@dataclass(frozen=True)
class CheckRecord:
    name: str
    value: complex
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        v = complex(self.value)
        return {"name": self.name, "value": _pair(v), "abs_value": abs(v),
                "tolerance": self.tolerance, "pass": self.passed, "note": self.note}


@dataclass(frozen=True)
class Report:
    config: dict[str, Any]
    checks: tuple[CheckRecord, ...]
    seed: int
    environment: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, include_environment: bool = True) -> dict[str, Any]:
        d = {"scenario": self.config, "seed": self.seed, "passed": self.passed,
             "checks": [c.to_dict() for c in self.checks]}
        if include_environment:
            d["environment"] = self.environment
        return d

    def to_json(self, include_environment: bool = True) -> str:
        return json.dumps(self.to_dict(include_environment), indent=2, sort_keys=True,
                          allow_nan=True)


def environment_stamp() -> dict[str, Any]:
    import scipy
    return {"python": sys.version.split()[0], "numpy": np.__version__, "scipy": scipy.__version__,
            "platform": platform.platform(), "threads": thread_count(),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


class _Checks:
    """Collects check records; evaluations that raise become failed checks."""

    def __init__(self, tolerances: dict[str, float]):
        self.tolerances = tolerances
        self.records: list[CheckRecord] = []

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def add(self, name: str, value: complex, tolerance: float, note: str = "") -> None:
        tol = self.tol(name, tolerance)
        v = complex(value)
        ok = bool(np.isfinite(abs(v)) and abs(v) < tol)
        self.records.append(CheckRecord(name, v, tol, ok, note))

    def fail(self, name: str, tolerance: float, exc: BaseException) -> None:
        self.records.append(CheckRecord(name, complex(math.nan, math.nan),
                                        self.tol(name, tolerance), False,
                                        f"{type(exc).__name__}: {exc}"))

    def run(self, names: Iterable[tuple[str, float]], fn: Callable[[], Iterable[complex]]) -> None:
        """Evaluate ``fn`` once and record one check per (name, tolerance)."""
        names = list(names)
        try:
            values = list(fn())
        except (EllcovError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            for name, tol in names:
                self.fail(name, tol, exc)
            return
        for (name, tol), v in zip(names, values):
            self.add(name, v, tol)


def _pmap(fn, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- scenarios --------------------------------------------------------------------

def _identity_suite(cfg: ScenarioConfig, rng: np.random.Generator, ck: _Checks) -> None:
    K, mu = cfg.K, complex(cfg.mu)
    ctx = RContext(K, mu)
    gs = ids.sample_points(rng, mu, max(3, cfg.samples // 20))[:, 0]
    ck.run([("theta_quasi_periodicity", 1e-12)], lambda: [ids.quasi_periodicity_residual(K, mu, gs)])
    ck.run([("heat_equation", 1e-7)], lambda: [ids.heat_residual(K, mu, gs)])
    ck.run([("rho_period_1", 1e-10), ("rho_period_mu", 1e-10)],
           lambda: ids.rho_period_residuals(mu, gs))
    ck.run([("w_twist_1", 1e-10), ("w_twist_mu", 1e-10)], lambda: ids.w_twist_residuals(ctx, gs))
    ck.run([("Z_twist_1", 1e-10), ("Z_twist_mu", 1e-10)], lambda: ids.z_twist_residuals(ctx, gs))
    ck.run([("Z_parity", 1e-10)], lambda: [ids.z_parity_residual(ctx, gs)])
    ck.run([("der_link", 1e-7)], lambda: [ids.der_link_residual(ctx, gs)])
    ck.run([("r_antisymmetry", 1e-10)], lambda: [ids.antisymmetry_residual(ctx, gs)])
    ck.run([("bundle_1", 1e-10), ("bundle_mu", 1e-10)], lambda: ids.bundle_residuals(ctx, gs))
    ck.run([("sigma_orthogonality", 1e-12)], lambda: [ids.orthogonality_residual(ctx)])
    ck.run([("jacobi_identity", 1e-10)], lambda: [ids.jacobi_identity_residual(mu)])
    triples = ids.sample_points(rng, mu, cfg.samples, combos=A1_COMBOS)
    singles = ids.sample_points(rng, mu, cfg.samples, combos=((1,), (2,)))[:, 0]
    ck.run([("identity_A1", 1e-9)],
           lambda: [max(_pmap(lambda r: ids.identity_a1_residual(ctx, *r), triples))])
    ck.run([("identity_A2", 1e-9)],
           lambda: [max(_pmap(lambda g: ids.identity_a2_residual(ctx, g), singles))])
    ck.run([("identity_A3", 1e-9)],
           lambda: [max(_pmap(lambda g: ids.identity_a3_residual(ctx, g), singles))])


# (gamma, z_i, z_j): every argument of w, Z and rho in the A1 identity
A1_COMBOS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, -1), (1, -1, 0), (1, 0, -1))


def _two_sheet_flow(cfg: ScenarioConfig, rng: np.random.Generator, ck: _Checks) -> None:
    bp = list(cfg.branch_points)
    try:
        cov = two_sheet_covering(*bp)
    except (EllcovError, ArithmeticError) as exc:
        ck.fail("two_sheet_construction", 0.0, exc)
        return
    ck.run([("thomae", 1e-8)], lambda: [verify.thomae_residual(bp)])
    ck.run([("alpha_sum", 1e-10)], lambda: [sum(cov.alpha)])
    ck.run([("alpha1_closed_form", 1e-9)], lambda: [verify.alpha1_residual(bp)])
    ck.run([(f"rauch_{m}", 1e-5) for m in range(4)], lambda: verify.rauch_residuals(cov))

    def closure():
        dnu, wr = verify.a_cycle_closure(bp)
        return [dnu - 1, wr - 1]
    ck.run([("a_cycle_closure", 1e-6), ("a_cycle_sheet_return", 1e-6)], closure)

    def rates():
        out = verify.rigidity_rates(cov)
        return [max(abs(a) for a, _ in out), max(abs(b) for _, b in out)]
    ck.run([("rigidity_rate_12", 1e-9), ("rigidity_rate_23", 1e-9)], rates)

    length = cfg.path_length * scale_of(bp)

    def flow():
        fc = verify.flow_check(cov, cfg.path_index, length)
        return [fc.endpoint, fc.rigidity, fc.reversibility, fc.alpha_sum]
    ck.run([("flow_endpoint", 1e-6), ("flow_rigidity", 1e-6), ("flow_reversibility", 1e-8),
            ("flow_alpha_sum", 1e-8)], flow)
    n = (cfg.path_index + 3) % 4
    d = 0.5 * length
    ck.run([("flow_rectangle", 1e-6)],
           lambda: [verify.rectangle_closure(cov, cfg.path_index, n, d, 1j * d)])


def _coupled(cfg: ScenarioConfig, K: int | None = None):
    cov = two_sheet_covering(*cfg.branch_points)
    return verify.seeded_coupled_state(cov, K or cfg.K, cfg.L, cfg.seed, cfg.q_points)


def _schlesinger_induced(cfg: ScenarioConfig, rng: np.random.Generator, ck: _Checks) -> None:
    try:
        c = _coupled(cfg)
    except (EllcovError, ArithmeticError, ValueError) as exc:
        ck.fail("coupled_construction", 0.0, exc)
        return
    h = cfg.fd_step * scale_of(c.cov.lam)
    pairs = [(m, n) for m in range(4) for n in range(4) if m != n]

    def fd():
        res = verify.jsystem_fd_residuals(c, h)
        return [res[p] for p in pairs]
    ck.run([(f"jflow_fd_{m}{n}", 1e-4) for m, n in pairs], fd)

    def compat():
        out = []
        for m in range(4):
            for n in range(m + 1, 4):
                out.append(verify.induced_compatibility(c, (m, n), cfg.nu_samples, rng).max_norm)
        return [max(out)]
    ck.run([("compatibility", 1e-6)], compat)

    def path():
        drift, mismatch = verify.coupled_path_check(c, cfg.path_index,
                                                    cfg.path_length * scale_of(c.cov.lam))
        return [drift, mismatch]
    ck.run([("trA2_drift", 1e-8), ("abel_pole_consistency", 1e-6)], path)


def _trig_limit(cfg: ScenarioConfig, rng: np.random.Generator, ck: _Checks) -> None:
    ladder = sorted(cfg.mu_ladder, key=lambda m: complex(m).imag)
    devs = []
    for mu in ladder:
        tag = f"{complex(mu).imag:g}i"
        try:
            meas, pred = ids.rho_cot_deviation(mu)
        except (EllcovError, ArithmeticError) as exc:
            ck.fail(f"rho_cot_deviation_{tag}", 1.0, exc)
            devs.append(None)
            continue
        devs.append((meas, pred))
        ck.add(f"rho_cot_deviation_{tag}", meas, 1.0)
    for (lo, hi), a, b in zip(zip(ladder, ladder[1:]), devs, devs[1:]):
        name = f"decay_{complex(lo).imag:g}i_{complex(hi).imag:g}i"
        if a is None or b is None:
            ck.fail(name, 1.0, ArithmeticError("missing rung"))
            continue
        ratio, predicted = b[0] / a[0], b[1] / a[1]
        # log2 of measured over predicted ratio: |value| < 1 means within a factor 2
        ck.add(name, math.log2(ratio / predicted), 1.0,
               note=f"measured ratio {ratio:.3e}, predicted {predicted:.3e}")
    measured = [d[0] for d in devs if d is not None]
    if len(measured) >= 2:
        # below 1 exactly when every rung shrinks the deviation
        ck.add("deviation_shrink_max_ratio",
               max(b / a for a, b in zip(measured, measured[1:])), 1.0)

    # cylinder systems against the elliptic ones on matched data
    top = complex(ladder[-1])
    gam = tuple(complex(x, y) for x, y in rng.uniform(-0.3, 0.3, size=(3, 2)) + [[0, 0], [0.5, 0], [0.25, 0]])
    al = tuple(complex(x, y) for x, y in rng.normal(scale=0.3, size=(3, 2)))
    from .covering import TrigCoveringState
    trig = TrigCoveringState(lam=(0j, 1 + 0j, 2 + 0j), gamma=gam, alpha0=al, lambda_Q=5 + 0j)
    jp = [tuple(rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(3)]
    J = JState(2, tuple(pauli_to_coefficients(*p) for p in jp))

    def jsys():
        worst = 0.0
        for m in range(3):
            for n in range(3):
                if m != n:
                    e = coefficients_to_pauli(j_flow_rhs_raw(2, gam, al, top, J, m, n))
                    t = trig_j_flow_rhs(trig, jp, m, n)
                    worst = max(worst, max(abs(x - y) for x, y in zip(e, t)))
        return [worst]
    ck.run([("trig_jsystem_vs_elliptic", 1e-9)], jsys)

    def flows():
        worst = 0.0
        for m in range(3):
            dg, da, _ = flow_rhs_raw(gam, al, top, m)
            tg, ta = trig_flow_rhs(trig, m)
            worst = max(worst, max(abs(x - y) for x, y in zip(dg + da, tg + ta)))
        return [worst]
    ck.run([("trig_flow_vs_elliptic", 1e-9)], flows)

    def infinite_q():
        l1, l2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2)) + 1.5
        t = build_trig_two_sheet(l1, l2, None)
        j2 = jp[:2]
        d1, d2 = trig_display_infinite_q(l1, l2, *j2)
        a = trig_j_flow_rhs(t, j2, 0, 1)
        b = trig_j_flow_rhs(t, j2, 1, 0)
        return [max(abs(x - y) for x, y in zip(a + b, d1 + d2)), t.gamma[0] - t.gamma[1] - 0.5]
    ck.run([("trig_infinite_q_display", 1e-12), ("trig_half_period", 1e-12)], infinite_q)

    def pinched():
        # lambda_3, lambda_4 -> lambda_Q pushes Im(mu) to about 5.3
        _, dg, da = verify.pinched_deviation(0.1 + 0.2j, 1.3 - 0.1j, 2.2 + 0.9j, 1e-6)
        return [dg, da]
    ck.run([("trig_gamma_vs_pinched_elliptic", 1e-6), ("trig_alpha_vs_pinched_elliptic", 1e-6)], pinched)


def _tau_relation(cfg: ScenarioConfig, rng: np.random.Generator, ck: _Checks) -> None:
    try:
        c = _coupled(cfg)
    except (EllcovError, ArithmeticError, ValueError) as exc:
        ck.fail("coupled_construction", 0.0, exc)
        return
    ck.run([(f"tau_relation_{m}", 1e-7) for m in range(4)],
           lambda: [tau_relation_residual(c, m) for m in range(4)])

    def sym():
        J = induced_j(c)
        return [max(abs(tau_mixed_second(c.cov, J, m, n) - tau_mixed_second(c.cov, J, n, m))
                    for m in range(4) for n in range(m + 1, 4))]
    ck.run([("tau_mixed_symmetry", 1e-10)], sym)
    m, n = cfg.path_index, (cfg.path_index + 3) % 4
    h = cfg.fd_step * scale_of(c.cov.lam)

    def mixed_fd():
        J = induced_j(c)
        ref = tau_mixed_second(c.cov, J, m, n)
        return [abs(verify.tau_mixed_fd(c, m, n, h) - ref) / max(1.0, abs(ref))]
    ck.run([("tau_mixed_fd", 1e-5)], mixed_fd)
    d = 0.5 * cfg.path_length * scale_of(c.cov.lam)

    def loop():
        total, mismatch = verify.log_tau_loop(c, m, n, d, 1j * d)
        return [total, mismatch]
    ck.run([("log_tau_loop", 1e-6), ("log_tau_loop_state", 1e-6)], loop)


_RUNNERS = {
    "identity-suite": _identity_suite,
    "two-sheet-flow": _two_sheet_flow,
    "schlesinger-induced": _schlesinger_induced,
    "trig-limit": _trig_limit,
    "tau-relation": _tau_relation,
}


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Run one scenario; numerical errors become failed checks."""
    if not isinstance(cfg, ScenarioConfig):
        raise ConfigError("run_scenario needs a ScenarioConfig")
    rng = np.random.default_rng(cfg.seed)
    ck = _Checks(cfg.tolerances)
    t0 = time.perf_counter()
    _RUNNERS[cfg.scenario](cfg, rng, ck)
    env = environment_stamp()
    env["runtime_seconds"] = round(time.perf_counter() - t0, 3)
    return Report(cfg.to_dict(), tuple(ck.records), cfg.seed, env)


CSV_COLUMNS = ("check_name", "value_re", "value_im", "abs_value", "tolerance", "pass")


def emit_report(report: Report, fmt: str = "json") -> bytes:
    """Serialise a report as CSV (one row per check) or JSON."""
    if fmt == "json":
        return (report.to_json() + "\n").encode("utf-8")
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in report.checks:
        v = complex(c.value)
        writer.writerow([c.name, repr(v.real), repr(v.imag), repr(abs(v)), repr(c.tolerance),
                         "true" if c.passed else "false"])
    return buf.getvalue().encode("utf-8")


def write_report(report: Report, path: str, fmt: str = "json") -> None:
    with open(path, "wb") as fh:
        fh.write(emit_report(report, fmt))
