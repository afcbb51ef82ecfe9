"""Integrable systems on elliptic branched coverings.

Theta functions with characteristics, the elliptic r-matrix in the rank-K
sigma basis, two-sheet elliptic coverings and their branch-point flows, the
J-system with its tau-function, the elliptic Schlesinger system and the
cylinder (trigonometric) degeneration.
"""
from .errors import (ConfigError, DegenerateBranchPoints, DegenerateInput, EllcovError,
                     InvalidIndex, InvalidModulus, NearSingularity, NonConvergent, NotTraceless,
                     PathThroughBranchPoint, QuadratureFailure, SingularityOnPath,
                     StepSizeUnderflow, ZeroResidue)
from .theta import (Characteristic, ModularParameter, TruncationPolicy, rho, rho_prime, theta,
                    theta_constants, theta_dgamma, theta_dmu)
from .sigma import (SigmaAlgebra, SigmaIndex, SlkCoefficients, coefficients_to_pauli, expand,
                    pauli_to_coefficients, reconstruct, sigma, sigma_algebra, sigma_dual)
from .rmatrix import (RContext, Z, contract_r, contract_r_prime, contract_r_trig, contract_Z,
                      dense_r, w, w_prime)
from .covering import (EllipticCoveringState, FlowPath, TrigCoveringState, a_period, abel_map,
                       build_trig_two_sheet, flow_rhs, integrate_flow, modulus_from_branch_points,
                       nu_lambda, nu_lambda_m, trig_flow_rhs, two_sheet_covering)
from .isosystem import (CompatibilityResidual, JState, compatibility_residual, integrate_log_tau,
                        j_flow_rhs, tau_mixed_second, tau_rhs, trig_display_infinite_q,
                        trig_j_flow_rhs, two_sheet_display_j1_lambda2, u_matrix)
from .schlesinger import (CoupledState, SchlesingerPath, SchlesingerState, a_field, couple,
                          coupled_flow, hamiltonians, induced_j, integrate_schlesinger,
                          random_schlesinger_state, schlesinger_rhs, tau_relation_residual)
from .harness import Report, ScenarioConfig, emit_report, run_scenario

__version__ = "0.1.0"
