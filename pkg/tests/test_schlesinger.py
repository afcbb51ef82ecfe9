import math

import numpy as np
import pytest

from ellcov import (FlowPath, NearSingularity, SchlesingerPath, SchlesingerState, a_field,
                    coupled_flow, hamiltonians, induced_j, integrate_schlesinger,
                    random_schlesinger_state, schlesinger_rhs, sigma_algebra,
                    tau_relation_residual, tau_rhs)
from ellcov import verify
from ellcov.rmatrix import RContext
from ellcov.schlesinger import CoupledState, trace_square

MU = 0.2 + 1.1j
FD = 1e-3


@pytest.fixture(scope="module", params=[2, 3])
def sch(request):
    return random_schlesinger_state(request.param, 3, MU, seed=5)


def five_point(f, h=FD):
    return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)


# -- state ------------------------------------------------------------------------

def test_coinciding_poles_rejected():
    A = random_schlesinger_state(2, 2, MU, seed=1).A
    with pytest.raises(NearSingularity):
        SchlesingerState(2, (0.3 + 0.2j, 1.3 + 0.2j + MU), A, MU)


def test_json_round_trip(sch):
    again = SchlesingerState.from_json(sch.to_json())
    assert again.z == sch.z and again.mu == sch.mu
    for a, b in zip(sch.A, again.A):
        assert np.array_equal(a.values, b.values)


def test_seeded_state_is_reproducible():
    a = random_schlesinger_state(3, 2, MU, seed=9)
    b = random_schlesinger_state(3, 2, MU, seed=9)
    assert a.z == b.z
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.A, b.A))


# -- the field A(gamma) --------------------------------------------------------------

def test_a_field_residues(sch):
    for z, Aj in zip(sch.z, sch.A):
        d = 1e-6
        assert np.max(np.abs(d * a_field(sch, z + d) - Aj.matrix())) < 1e-4


def test_a_field_twists(sch):
    alg = sigma_algebra(sch.K)
    F, H = alg.F, alg.H
    g = 0.41 + 0.07j
    A = a_field(sch, g)
    assert np.allclose(a_field(sch, g + 1), np.linalg.inv(F) @ A @ F, atol=1e-12)
    assert np.allclose(a_field(sch, g + MU), H @ A @ np.linalg.inv(H), atol=1e-12)


# -- Schlesinger equations -----------------------------------------------------------

def test_single_pole_does_not_move_in_z():
    s = random_schlesinger_state(2, 1, MU, seed=2)
    d = schlesinger_rhs(s)
    assert np.max(np.abs(d.dz[0][0])) == 0


def test_rhs_translation_invariance(sch):
    d = schlesinger_rhs(sch)
    for i in range(sch.L):
        assert np.max(np.abs(sum(d.dz[i][j] for j in range(sch.L)))) < 1e-14


def test_rhs_preserves_casimirs(sch):
    d = schlesinger_rhs(sch)
    for i, a in enumerate(sch.A):
        M = a.matrix()
        for j in range(sch.L):
            assert abs(np.trace(M @ d.dz[i][j])) < 1e-13
        assert abs(np.trace(M @ d.dmu[i])) < 1e-13


@pytest.mark.parametrize("variable,index", [("z", 1), ("mu", 0)])
def test_integration_drift_and_reversibility(sch, variable, index):
    start = sch.z[index] if variable == "z" else sch.mu
    path = SchlesingerPath(variable, start, start + 0.05 * np.exp(0.6j), index=index)
    run = integrate_schlesinger(sch, path)
    assert max(run.trA2_drift) < 1e-12
    back = integrate_schlesinger(run.state, path.reversed()).state
    assert max(np.max(np.abs(a.values - b.values)) for a, b in zip(back.A, sch.A)) < 1e-11


def test_zero_length_integration(sch):
    run = integrate_schlesinger(sch, SchlesingerPath("mu", MU, MU))
    assert run.state is sch and run.steps == 0


def test_path_start_checked(sch):
    with pytest.raises(ValueError, match="starts"):
        integrate_schlesinger(sch, SchlesingerPath("z", sch.z[0] + 0.1, sch.z[0] + 0.2))


# -- Hamiltonians ------------------------------------------------------------------------

def test_pole_hamiltonians_are_contour_integrals(sch):
    H, _ = hamiltonians(sch)
    ctx = RContext(sch.K, sch.mu)
    t = 0.05 * np.exp(2j * math.pi * np.arange(128) / 128)
    for z, h in zip(sch.z, H):
        # (1 / 4 pi i) times the circle integral, d gamma = i t d theta
        vals = [np.trace(a_field(sch, z + x, ctx) @ a_field(sch, z + x, ctx)) * x for x in t]
        assert abs(np.mean(vals) / 2 - h) < 1e-14


def test_period_hamiltonian_is_a_cycle_integral(sch):
    _, Hmu = hamiltonians(sch)
    ctx = RContext(sch.K, sch.mu)
    # a horizontal line below every pole; the integrand is 1-periodic
    y0 = min(z.imag / sch.mu.imag for z in sch.z) - 0.05
    xs = np.arange(256) / 256
    vals = [np.trace(a_field(sch, x + y0 * sch.mu, ctx) @ a_field(sch, x + y0 * sch.mu, ctx))
            for x in xs]
    assert abs(np.mean(vals) / (4j * math.pi) - Hmu) < 1e-14


def test_hamiltonians_of_zero_residues():
    alg = sigma_algebra(2)
    s = SchlesingerState(2, (0.1 + 0.1j, 0.6 + 0.5j), (alg.zeros(), alg.zeros()), MU)
    H, Hmu = hamiltonians(s)
    assert H == [0, 0] and Hmu == 0


def test_hamiltonian_form_is_closed():
    # mixed derivatives of the Hamiltonians along the flows are symmetric
    s = random_schlesinger_state(2, 3, MU, seed=5)

    def along(variable, idx):
        start = s.z[idx] if variable == "z" else s.mu

        def f(k):
            run = integrate_schlesinger(s, SchlesingerPath(variable, start, start + k * FD, index=idx))
            H, Hmu = hamiltonians(run.state)
            return np.array(H + [Hmu])
        return five_point(f)

    d = [along("z", j) for j in range(3)] + [along("mu", 0)]
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(d[j][i] - d[i][j]) < 1e-9 * max(1.0, abs(d[j][i]))


# -- coupling to the covering --------------------------------------------------------------

def test_coupled_periods_must_match(coupled2):
    other = random_schlesinger_state(2, 2, MU, seed=3)
    with pytest.raises(ValueError, match="periods"):
        CoupledState(coupled2.cov, other, coupled2.Q)


@pytest.mark.parametrize("name", ["coupled2", "coupled3"])
def test_induced_j_is_field_at_images(request, name):
    c = request.getfixturevalue(name)
    J = induced_j(c)
    for m, (g, a) in enumerate(zip(c.cov.gamma, c.cov.alpha)):
        assert np.allclose(J[m].matrix(), -a * a_field(c.sch, g), atol=1e-14)


@pytest.mark.parametrize("name", ["coupled2", "coupled3"])
def test_induced_j_is_compatible(request, name, rng):
    c = request.getfixturevalue(name)
    for pair in [(0, 1), (1, 3)]:
        res = verify.induced_compatibility(c, pair, 10, rng)
        assert res.max_norm < 1e-13 * res.term_scale


def test_coupled_zero_path(coupled2):
    lam = coupled2.cov.lam[0]
    assert coupled_flow(coupled2, FlowPath(0, lam, lam)) is coupled2
    assert coupled_flow(coupled2, FlowPath(0, lam, lam), with_log_tau=True) == (coupled2, 0j)


@pytest.mark.parametrize("m", [0, 3])
def test_coupled_path_keeps_poles_on_abel_images(coupled2, m):
    drift, mismatch = verify.coupled_path_check(coupled2, m)
    assert drift < 1e-12
    assert mismatch < 1e-10


@pytest.mark.parametrize("name", ["coupled2", "coupled3"])
def test_tau_relation(request, name):
    c = request.getfixturevalue(name)
    J = induced_j(c)
    for m in range(4):
        scale = max(1.0, abs(tau_rhs(c.cov, J, m)))
        assert abs(tau_relation_residual(c, m)) < 1e-12 * scale


def test_casimirs_recorded(coupled2):
    assert all(abs(trace_square(a) - t) == 0 for a, t in zip(coupled2.sch.A, coupled2.sch.trA2))
