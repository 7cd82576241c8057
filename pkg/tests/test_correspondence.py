import numpy as np
import pytest

from qinduce.correspondence import (
    CorrespondenceError,
    build_V_phi,
    chain_rule_residual,
    cocycle_condition,
    column_norm_bound,
    kappa_flow_residual,
    psi_M_invariance_residual,
    pull_down,
    pull_down_invariance,
    reconstruct_eta,
    relative_modular_commutation,
)
from qinduce.weights import Weight

from conftest import built_preset


def _bundle(name="s3_mod_c3_omega"):
    return built_preset(name).bundle


# ---------------------------------------------------------------------------
# pull-down
# ---------------------------------------------------------------------------

def test_pull_down_counting_measure():
    b = _bundle()
    eta = Weight(b.Q.sub, b.Q.sub.unit())      # counting measure on cosets
    et = pull_down(b, eta)
    vals = [et.value(b.M_qg.algebra.basis_element(i)) for i in range(6)]
    assert np.allclose(vals, [1 / 3] * 6)


def test_pull_down_trivial_action_is_identity():
    b = _bundle("s3_trivial_d1")               # Q = M
    rng = np.random.default_rng(1)
    h = b.Q.sub.random_positive(rng)
    eta = Weight(b.Q.sub, h)
    et = pull_down(b, eta)
    assert (et.density - b.m_of_q(h)).norm() < 1e-10


def test_pull_down_additive(rng):
    b = _bundle()
    h1 = b.Q.sub.random_positive(rng)
    h2 = b.Q.sub.random_positive(rng)
    w = pull_down(b, Weight(b.Q.sub, h1 + h2))
    w1 = pull_down(b, Weight(b.Q.sub, h1))
    w2 = pull_down(b, Weight(b.Q.sub, h2))
    assert (w.density - w1.density - w2.density).norm() < 1e-11


def test_pull_down_invariance_certificate(rng):
    b = _bundle()
    eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    et = pull_down(b, eta)
    assert pull_down_invariance(b, et, rng) < 1e-9


def test_psi_M_invariance(catalog_names):
    for name in catalog_names:
        assert psi_M_invariance_residual(built_preset(name).bundle) < 1e-10, name


# ---------------------------------------------------------------------------
# V_phi
# ---------------------------------------------------------------------------

def test_V_phi_trivial_action_is_identity():
    b = _bundle("s3_trivial_d1")               # N = C
    V, certs = build_V_phi(b, b.M_qg.psi)
    assert np.linalg.norm(V - np.eye(V.shape[0])) < 1e-10


def test_V_phi_psi_M(catalog_names):
    for name in ("s3_mod_c3_omega", "qs3_mod_z2_graded"):
        b = built_preset(name).bundle
        V, certs = build_V_phi(b, b.M_qg.psi)
        assert certs["unitary"] < 1e-9, name
        assert certs["intertwines_alpha"] < 1e-9, name
        assert certs["comultiplicativity"] < 1e-9, name


def test_V_phi_pulled_down(rng):
    b = _bundle()
    eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    et = pull_down(b, eta)
    V, certs = build_V_phi(b, et)
    assert certs["unitary"] < 1e-9
    assert certs["comultiplicativity"] < 1e-9


def test_V_phi_rejects_non_invariant_weight(rng):
    b = _bundle()
    bad = Weight(b.M_qg.algebra,
                 b.M_qg.algebra.from_coeffs([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(CorrespondenceError):
        build_V_phi(b, bad)


# ---------------------------------------------------------------------------
# relative modular commutation and the kappa flow
# ---------------------------------------------------------------------------

def test_relative_modular_commutation_identity_pair():
    b = _bundle("s3_trivial_d1")
    theta_t = pull_down(b, b.theta)
    rep = relative_modular_commutation(b, theta_t, theta_t)
    assert rep["commutation"] < 1e-10


def test_relative_modular_commutation_generating_case():
    b = _bundle()
    theta_t = pull_down(b, b.theta)
    rep = relative_modular_commutation(b, theta_t, b.M_qg.psi,
                                       b.N_qg.delta_element, None)
    assert rep["commutation"] < 1e-9
    assert rep["gamma_P_commute"] < 1e-12


def test_kappa_corollary():
    b = _bundle()
    for t in (0.5, 1.0):
        assert kappa_flow_residual(b, t) < 1e-9


# ---------------------------------------------------------------------------
# cocycle condition
# ---------------------------------------------------------------------------

def test_cocycle_condition_pulled_down_pass(rng):
    b = _bundle()
    grid = [0.3, 1.0, float(np.sqrt(2.0))]
    for _ in range(10):
        eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
        cc = cocycle_condition(b, pull_down(b, eta), grid)
        assert cc["passed"]
        assert cc["max_residual"] < 1e-8


def test_cocycle_condition_psi_M_trivially_passes():
    b = _bundle()
    cc = cocycle_condition(b, b.M_qg.psi, [0.3, 1.0])
    assert cc["passed"]


def test_cocycle_condition_counterexample_fails():
    # density non-constant on a coset of S3/C3
    b = _bundle()
    bad = Weight(b.M_qg.algebra,
                 b.M_qg.algebra.from_coeffs([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]))
    cc = cocycle_condition(b, bad, [0.3, 1.0])
    assert not cc["passed"]
    assert cc["max_residual"] > 1e-2


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def test_reconstruct_theta_itself():
    b = _bundle()
    theta_t = pull_down(b, b.theta)
    eta, rep = reconstruct_eta(b, theta_t)
    assert (eta.density - b.theta.density).norm() < 1e-9
    assert rep["roundtrip_error"] < 1e-9


def test_reconstruct_random_roundtrip(rng):
    b = _bundle()
    for _ in range(10):
        eta0 = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
        phi = pull_down(b, eta0)
        eta, rep = reconstruct_eta(b, phi)
        assert (eta.density - eta0.density).norm() < 1e-8
        assert rep["roundtrip_error"] < 1e-8
        assert rep["c_t_in_Q"] < 1e-8
        assert rep["group_law"] < 1e-8


def test_reconstruct_scaled_theta():
    b = _bundle()
    eta, rep = reconstruct_eta(b, pull_down(b, b.theta.scaled(2.0)))
    assert (eta.density - 2.0 * b.theta.density).norm() < 1e-9


def test_reconstruct_noncommutative_Q(rng):
    # trivial action on C[S3]: Q = C[S3] has a genuine 2x2 block
    from qinduce.specfile import parse_spec
    from qinduce.suites import build_from_spec

    built = build_from_spec(parse_spec({
        "alpha": {"preset_action": "trivial", "group": "S3",
                  "algebra": "group_algebra"},
        "U": {"preset_rep": "trivial", "K_dim": 1},
    }))
    b = built.bundle
    eta0 = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    phi = pull_down(b, eta0)
    eta, rep = reconstruct_eta(b, phi)
    assert (eta.density - eta0.density).norm() < 1e-8


def test_reconstruct_rejects_non_pulled_down():
    b = _bundle()
    bad = Weight(b.M_qg.algebra,
                 b.M_qg.algebra.from_coeffs([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(CorrespondenceError):
        reconstruct_eta(b, bad)


def test_chain_rule(rng):
    b = _bundle()
    eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    phi = pull_down(b, eta)
    for t in (0.3, 0.7, 1.0):
        assert chain_rule_residual(b, phi, t) < 1e-10


def test_column_norm_bound(rng):
    b = _bundle()
    eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    phi = pull_down(b, eta)
    lhs, rhs = column_norm_bound(b, phi, rng)
    assert lhs <= rhs + 1e-10
