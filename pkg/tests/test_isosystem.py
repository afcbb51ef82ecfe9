import numpy as np
import pytest
from hypothesis import given, strategies as st

from ellcov import (FlowPath, JState, NearSingularity, SlkCoefficients, ZeroResidue,
                    build_trig_two_sheet, compatibility_residual, j_flow_rhs, sigma_algebra,
                    tau_mixed_second, tau_rhs, trig_display_infinite_q, trig_j_flow_rhs, u_matrix)
from ellcov import verify
from ellcov.covering import EllipticCoveringState, TrigCoveringState
from ellcov.isosystem import (integrate_log_tau, j_flow_rhs_raw, sample_cell,
                              two_sheet_display_j1_lambda2)
from ellcov.sigma import coefficients_to_pauli, pauli_to_coefficients
from ellcov.theta import rho_prime

PAIRS = [(0, 1), (1, 3), (2, 3)]


def random_jstate(rng, K, count=4):
    n = K * K - 1
    return JState(K, tuple(SlkCoefficients(K, rng.normal(size=n) + 1j * rng.normal(size=n))
                           for _ in range(count)))


def jsystem_derivatives(cov, J, m, n):
    """dJ tables for the pair (m, n) filled from the J-system; diagonal entries unused."""
    zero = sigma_algebra(J.K).zeros()
    dJ = {m: [zero] * len(J), n: [zero] * len(J)}
    dJ[n][m] = j_flow_rhs(cov, J, m, n)
    dJ[m][n] = j_flow_rhs(cov, J, n, m)
    return dJ


# -- U matrices --------------------------------------------------------------------

@pytest.mark.parametrize("K", [2, 3])
def test_u_matrix_residue(cov, rng, K):
    J = random_jstate(rng, K)
    for m in range(4):
        for d in (1e-5, 1e-6):
            U = u_matrix(cov, J, m, cov.gamma[m] + d)
            # the regular part contributes O(d)
            assert np.max(np.abs(d * U - J[m].matrix())) < 50 * d


@pytest.mark.parametrize("K", [2, 3])
def test_u_matrix_twists(cov, rng, K):
    J = random_jstate(rng, K)
    alg = sigma_algebra(K)
    F, H = alg.F, alg.H
    for nu in sample_cell(cov, 5, rng, exclusion=0.1):
        U = u_matrix(cov, J, 1, nu)
        assert np.allclose(u_matrix(cov, J, 1, nu + 1), np.linalg.inv(F) @ U @ F, atol=1e-12)
        assert np.allclose(u_matrix(cov, J, 1, nu + cov.mu), H @ U @ np.linalg.inv(H), atol=1e-12)


# -- J-system ------------------------------------------------------------------------

def test_jsystem_with_vanishing_partner(cov, rng):
    J = random_jstate(rng, 3)
    entries = list(J.entries)
    entries[2] = sigma_algebra(3).zeros()
    J = JState(3, tuple(entries))
    for m in (0, 1, 3):
        rp = rho_prime(cov.gamma[m] - cov.gamma[2], cov.mu)
        out = j_flow_rhs(cov, J, m, 2)
        assert np.allclose(out.values, -cov.alpha[2] * rp * J[m].values, atol=1e-14)


def test_jsystem_index_check(cov, rng):
    J = random_jstate(rng, 2)
    with pytest.raises(IndexError):
        j_flow_rhs(cov, J, 1, 1)


@pytest.mark.parametrize("K", [2, 3])
def test_jsystem_output_is_traceless(cov, rng, K):
    J = random_jstate(rng, K)
    for m, n in PAIRS:
        M = j_flow_rhs(cov, J, m, n).matrix()
        assert abs(np.trace(M)) < 1e-13


def test_two_sheet_display(cov, rng):
    for _ in range(5):
        J = verify.random_pauli_jstate(rng, 4)
        ref = coefficients_to_pauli(j_flow_rhs(cov, J, 0, 1))
        disp = two_sheet_display_j1_lambda2(cov, coefficients_to_pauli(J[0]),
                                            coefficients_to_pauli(J[1]))
        assert max(abs(a - b) for a, b in zip(ref, disp)) < 1e-12


def test_raw_and_state_forms_agree(cov, rng):
    J = random_jstate(rng, 2)
    a = j_flow_rhs(cov, J, 3, 0).values
    b = j_flow_rhs_raw(2, cov.gamma, cov.alpha, cov.mu, J, 3, 0).values
    assert np.array_equal(a, b)


# -- zero curvature ---------------------------------------------------------------------

@pytest.mark.parametrize("K", [2, 3])
@pytest.mark.parametrize("pair", PAIRS)
def test_jsystem_gives_zero_curvature(cov, rng, K, pair):
    J = random_jstate(rng, K)
    res = compatibility_residual(cov, J, jsystem_derivatives(cov, J, *pair), pair,
                                 sample_cell(cov, 10, rng))
    assert not res.skipped
    assert res.max_norm < 1e-13 * res.term_scale


@pytest.mark.parametrize("pair", PAIRS)
def test_perturbed_derivative_breaks_zero_curvature(cov, rng, pair):
    J = random_jstate(rng, 2)
    dJ = jsystem_derivatives(cov, J, *pair)
    m, n = pair
    dJ[n][m] = SlkCoefficients(2, dJ[n][m].values + 0.1 * rng.normal(size=3))
    res = compatibility_residual(cov, J, dJ, pair, sample_cell(cov, 10, rng))
    assert res.max_norm > 1e-2


def test_zero_state_is_compatible(cov, rng):
    J = JState.zeros(2, 4)
    res = compatibility_residual(cov, J, {0: list(J.entries), 2: list(J.entries)}, (0, 2),
                                 sample_cell(cov, 5, rng))
    assert res.max_norm == 0


def test_sample_cell_respects_exclusion(cov, rng):
    pts = sample_cell(cov, 200, rng, exclusion=0.2)
    for nu in pts:
        for g in cov.gamma:
            d = nu - g
            d -= round(d.imag / cov.mu.imag) * cov.mu
            assert abs(d - round(d.real)) >= 0.2


# -- cylinder J-system ---------------------------------------------------------------

def test_trig_jsystem_is_cylinder_limit(rng):
    gam = (0.1 + 0.05j, 0.55 - 0.1j, 0.3 + 0.2j)
    al = tuple(complex(*v) for v in rng.normal(scale=0.3, size=(3, 2)))
    trig = TrigCoveringState(lam=(0j, 1 + 0j, 2 + 0j), gamma=gam, alpha0=al, lambda_Q=5 + 0j)
    jp = [tuple(rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(3)]
    J = JState(2, tuple(pauli_to_coefficients(*p) for p in jp))
    for m in range(3):
        for n in range(3):
            if m != n:
                ell = coefficients_to_pauli(j_flow_rhs_raw(2, gam, al, 20j, J, m, n))
                assert max(abs(a - b) for a, b in zip(ell, trig_j_flow_rhs(trig, jp, m, n))) < 1e-11


@given(st.tuples(*[st.floats(-2, 2)] * 4), st.lists(st.floats(-1, 1), min_size=12, max_size=12))
def test_trig_display_at_infinite_double_point(pts, comps):
    l1, l2 = complex(pts[0], pts[1]), complex(pts[2], pts[3]) + 2.5
    c = [complex(x, y) for x, y in zip(comps[::2], comps[1::2])]
    J1, J2 = tuple(c[:3]), tuple(c[3:])
    t = build_trig_two_sheet(l1, l2, None)
    d1, d2 = trig_display_infinite_q(l1, l2, J1, J2)
    scale = max(1.0, 1 / abs(l1 - l2))
    assert max(abs(a - b) for a, b in zip(trig_j_flow_rhs(t, [J1, J2], 0, 1), d1)) < 1e-12 * scale
    assert max(abs(a - b) for a, b in zip(trig_j_flow_rhs(t, [J1, J2], 1, 0), d2)) < 1e-12 * scale


def test_trig_display_is_large_double_point_limit(rng):
    l1, l2 = 0.1 + 0.2j, 1.3 - 0.1j
    J = [tuple(rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(2)]
    disp = trig_display_infinite_q(l1, l2, *J)[0]
    gaps = []
    for r in (1e3, 1e4):
        t = build_trig_two_sheet(l1, l2, r * np.exp(0.4j))
        gaps.append(max(abs(a - b) for a, b in zip(trig_j_flow_rhs(t, J, 0, 1), disp)))
    assert gaps[1] / gaps[0] == pytest.approx(0.1, rel=0.05)


def test_trig_jsystem_rejects_integer_separation():
    trig = TrigCoveringState(lam=(0j, 1 + 0j), gamma=(0.3, 1.3), alpha0=(1, -1), lambda_Q=None)
    with pytest.raises(NearSingularity):
        trig_j_flow_rhs(trig, [(1, 0, 0), (0, 1, 0)], 0, 1)


# -- tau --------------------------------------------------------------------------------

def test_tau_rhs_example(cov):
    # J_0 = diag(1, -1) has tr J^2 = 2
    J = JState(2, (pauli_to_coefficients(0, 0, 1),) + tuple(sigma_algebra(2).zeros() for _ in range(3)))
    assert abs(tau_rhs(cov, J, 0) - 1 / cov.alpha[0]) < 1e-12
    assert tau_rhs(cov, J, 1) == 0


def test_tau_rhs_zero_residue(cov):
    state = EllipticCoveringState(cov.lam, cov.gamma, (0, 1, -1, 0), cov.mu)
    with pytest.raises(ZeroResidue):
        tau_rhs(state, JState.zeros(2, 4), 0)


@pytest.mark.parametrize("K", [2, 3])
def test_tau_mixed_second_is_symmetric(cov, rng, K):
    J = random_jstate(rng, K)
    for m, n in PAIRS:
        a, b = tau_mixed_second(cov, J, m, n), tau_mixed_second(cov, J, n, m)
        assert abs(a - b) < 1e-13 * max(1.0, abs(a))
    with pytest.raises(IndexError):
        tau_mixed_second(cov, J, 2, 2)


def test_log_tau_zero_path(coupled2):
    lam = coupled2.cov.lam[1]
    assert integrate_log_tau(coupled2, FlowPath(1, lam, lam)) == 0


# -- serialization ------------------------------------------------------------------------

@pytest.mark.parametrize("K", [2, 3])
def test_jstate_json_round_trip(rng, K):
    J = random_jstate(rng, K)
    again = JState.from_json(J.to_json())
    for a, b in zip(J.entries, again.entries):
        assert np.array_equal(a.values, b.values)


def test_jstate_keys_and_unknown_field(rng):
    J = random_jstate(rng, 2, count=2)
    d = J.to_dict()
    assert "J[0].01" in d and "J[1].11" in d
    d["bogus"] = [0, 0]
    with pytest.raises(ValueError, match="bogus"):
        JState.from_dict(d)


def test_jstate_accepts_matrices():
    J = JState(2, (np.diag([1.0, -1.0]),))
    assert abs(np.trace(J[0].matrix() @ J[0].matrix()) - 2) < 1e-15
