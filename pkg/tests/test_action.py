import numpy as np
import pytest

from qinduce.action import (
    ActionError,
    analytic_slice_identity,
    analytic_slice_identity_lifted,
    bimodule_residual,
    build_action_bundle,
    classical_upsilon_star,
    integrability_check,
)
from qinduce.algebra import LegLayout, MultiMatrixAlgebra
from qinduce.catalog import (
    classical_corep,
    make_full_action,
    make_quotient_action,
    make_subgroup_action,
    make_trivial_action,
    rep_preset,
)

from conftest import built_preset


# ---------------------------------------------------------------------------
# fixed-point algebras
# ---------------------------------------------------------------------------

def test_fixed_points_of_comultiplication_are_scalars():
    built = built_preset("s3_full_std2")
    assert built.bundle.Q.sub.lin_dim == 1


def test_fixed_points_subgroup_action_cosets():
    built = built_preset("s3_mod_c3_omega")
    assert built.bundle.Q.sub.lin_dim == 2        # two cosets
    assert list(built.bundle.Q.sub.block_dims) == [1, 1]


def test_fixed_points_trivial_action_everything():
    built = built_preset("s3_trivial_d1")
    assert built.bundle.Q.sub.lin_dim == built.bundle.M_qg.algebra.lin_dim


def test_fixed_points_quotient_action_kernel():
    built = built_preset("qs3_mod_z2_graded")
    assert built.bundle.Q.sub.lin_dim == 3        # C[A3]


def test_compatibility_residuals_catalog(catalog_names):
    for name in catalog_names:
        b = built_preset(name).bundle
        assert b.certificates["right_action"] < 1e-10, name
        assert b.certificates["equivariance"] < 1e-10, name


def test_delta_M_maps_Q_into_M_tensor_Q(catalog_names):
    for name in catalog_names:
        b = built_preset(name).bundle
        assert b.certificates["delta_M_Q_in_M_Q"] < 1e-9, name


# ---------------------------------------------------------------------------
# the implementation Upsilon
# ---------------------------------------------------------------------------

def test_impl_certificates_catalog(catalog_names):
    for name in catalog_names:
        c = built_preset(name).bundle.certificates
        assert c["upsilon_impl1"] < 1e-9, name
        assert c["upsilon_impl2"] < 1e-9, name
        assert c["upsilon_unitary"] < 1e-9, name
        assert c["upsilon_in_M_x_B"] < 1e-9, name


def test_trivial_action_upsilon_w_type():
    # N = C: impl1 reads (i x pi_theta) Delta_M(x) = Ups*(1 x pi_theta(x)) Ups
    built = built_preset("s3_trivial_d1")
    b = built.bundle
    assert b.certificates["upsilon_impl1"] < 1e-9
    # the implementation is a corepresentation of (M, Delta_M) like W
    assert b.certificates["upsilon_impl2"] < 1e-9


def test_classical_translation_form_s3_c3():
    M_qg, N_qg, alpha, info = make_subgroup_action("S3", "C3")
    bundle = build_action_bundle(M_qg, N_qg, alpha,
                                 classical={"group": info["group"],
                                            "subgroup": info["subgroup"]})
    Ustar = classical_upsilon_star(M_qg, info["group"], info["subgroup"],
                                   bundle.Q, bundle.Q_coeff, bundle.gns_theta)
    # permutation unitary: entries 0/1
    assert np.allclose(np.abs(Ustar) ** 2, np.abs(Ustar))
    assert np.linalg.norm(Ustar @ Ustar.conj().T - np.eye(12)) < 1e-12
    # satisfies both implementation equations
    from qinduce.action import _upsilon_certificates

    beta_mats = [bundle.beta_matrix(bundle.Q.sub.basis_element(i))
                 for i in range(2)]
    certs = _upsilon_certificates(M_qg, bundle.Q, bundle.Q_coeff,
                                  bundle.gns_theta, beta_mats, Ustar.conj().T)
    assert certs["impl1"] < 1e-10
    assert certs["impl2"] < 1e-10
    # the crossed-product route agreed with the closed form (same candidate
    # chosen, or both verified); the bundle records any discrepancy
    assert "upsilon_candidate" in bundle.certificates


def test_weighted_theta_implementation():
    M_qg, N_qg, alpha, info = make_subgroup_action("S3", "C3")
    bundle = build_action_bundle(M_qg, N_qg, alpha, theta_density=[2.0, 1.0],
                                 classical={"group": info["group"],
                                            "subgroup": info["subgroup"]})
    assert bundle.certificates["upsilon_impl1"] < 1e-9
    assert bundle.certificates["upsilon_impl2"] < 1e-9


def test_weighted_theta_rn_factor_picture():
    # in the weighted-function picture the translation carries the factor
    # (theta(g.xH)/theta(xH))^{1/2}; conjugating by the GNS coordinate change
    # D_theta^{1/2} recovers the plain translation used in Lambda coordinates
    M_qg, N_qg, alpha, info = make_subgroup_action("S3", "C3")
    bundle = build_action_bundle(M_qg, N_qg, alpha, theta_density=[2.0, 1.0])
    G, sub = info["group"], info["subgroup"]
    cosets = G.left_cosets(sub)
    theta = np.array([2.0, 1.0])
    coset_index = {g: ci for ci, c in enumerate(cosets) for g in c}
    n, nc = G.order, len(cosets)
    weighted = np.zeros((n * nc, n * nc))
    for g in range(n):
        P = np.zeros((n, n))
        P[g, g] = 1.0
        L = np.zeros((nc, nc))
        for xi in range(nc):
            xj = coset_index[G.mult(g, cosets[xi][0])]
            L[xi, xj] = np.sqrt(theta[xj] / theta[xi])
        weighted += np.kron(P, L)
    Dhalf = np.kron(np.eye(n), np.diag(np.sqrt(theta)))
    plain = Dhalf @ weighted @ np.linalg.inv(Dhalf)
    direct = classical_upsilon_star(M_qg, G, sub, bundle.Q, bundle.Q_coeff,
                                    bundle.gns_theta)
    assert np.linalg.norm(plain - direct) < 1e-12


def test_upsilon_nonuniqueness_is_flagged_or_resolved(catalog_names):
    # the construction either returns a unique candidate or raises; all
    # catalog bundles resolve uniquely
    for name in catalog_names:
        c = built_preset(name).bundle.certificates
        assert isinstance(c["upsilon_candidate"], str)


# ---------------------------------------------------------------------------
# T_alpha and integrability
# ---------------------------------------------------------------------------

def test_T_alpha_coset_averaging():
    b = built_preset("s3_mod_c3_omega").bundle
    G = built_preset("s3_mod_c3_omega").info["group"]
    sub = built_preset("s3_mod_c3_omega").info["subgroup"]
    for g in range(G.order):
        y = b.T_alpha(b.M_qg.algebra.basis_element(g))
        coset = [G.mult(g, h) for h in sub]
        expected = np.zeros(G.order, dtype=complex)
        for x in coset:
            expected[x] = 1.0 / len(sub)
        assert np.linalg.norm(y.coeffs - expected) < 1e-12


def test_T_alpha_unit_and_fixed_points(rng):
    b = built_preset("s3_mod_c3_omega").bundle
    one = b.M_qg.algebra.unit()
    assert (b.T_alpha(one) - one).norm() < 1e-12
    q = b.m_of_q(b.Q.sub.random_element(rng))
    assert (b.T_alpha(q) - q).norm() < 1e-11


def test_T_alpha_bimodule_and_positive(rng):
    b = built_preset("qs3_mod_z2_graded").bundle
    assert bimodule_residual(b, rng) < 1e-10
    x = b.M_qg.algebra.random_element(rng)
    assert np.min(b.T_alpha(x.adjoint() * x).eigvals()) > -1e-10


def test_integrability_catalog(catalog_names):
    for name in catalog_names:
        rep = integrability_check(built_preset(name).bundle)
        assert rep["integrable"], name
        assert rep["rank_T_alpha"] == rep["dim_Q"], name
        assert rep["certificate_T_alpha_1"] < 1e-10, name


# ---------------------------------------------------------------------------
# analytic machinery
# ---------------------------------------------------------------------------

def test_sigma_star_trivial_and_conjugation(rng):
    b = built_preset("s3_mod_c2_sign").bundle
    afs = b.analytic
    assert afs.is_trivial()
    om = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    # sigma*_{i/2}(omega-bar) = conjugate of sigma*_{-i/2}(omega)
    lhs = afs.sigma_star(afs.conj_functional(om), 0.5j)
    rhs = afs.conj_functional(afs.sigma_star(om, -0.5j))
    assert np.linalg.norm(lhs - rhs) < 1e-12


def test_slice_identity_trivial_corep():
    # U = 1, K = C: both sides reduce to omega(1) Lambda_N(a)-type expressions
    built = built_preset("s3_trivial_d1")
    N_qg = built.bundle.N_qg
    lay_NK = built.lay_NK
    om = np.array([0.7 - 0.2j])
    a = N_qg.algebra.from_coeffs([1.3 + 0.1j])
    assert analytic_slice_identity(N_qg, built.U, lay_NK, 1, om, a) < 1e-12


def test_slice_identity_classical_sign():
    M_qg, N_qg, alpha, info = make_subgroup_action("S3", "C2")
    mats = rep_preset(info["group"], "sign", info["subgroup"])
    U, d = classical_corep(N_qg, mats)
    lay_NK = LegLayout.of(N_qg.algebra, MultiMatrixAlgebra([d]))
    rng = np.random.default_rng(5)
    om = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    a = N_qg.algebra.random_element(rng)
    assert analytic_slice_identity(N_qg, U, lay_NK, d, om, a) < 1e-10


def test_slice_identity_haar_functional():
    built = built_preset("s3_mod_c2_sign")
    N_qg = built.bundle.N_qg
    res = analytic_slice_identity(N_qg, built.U, built.lay_NK, built.K_dim,
                                  N_qg.haar.functional(), N_qg.algebra.unit())
    assert res < 1e-10


def test_slice_identity_lifted(rng):
    built = built_preset("s3_mod_c2_sign")
    b = built.bundle
    om = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    X = b.layout.algebra.random_element(rng)
    res = analytic_slice_identity_lifted(b, built.U, built.lay_NK,
                                         built.K_dim, om, X)
    assert res < 1e-10


def test_slice_norm_inequality(rng):
    # ||(i x Lambda_N)(alpha((omega x i) Delta_M(x)))|| <=
    #   ||omega|| ||(i x Lambda_N)(alpha(x))|| with the dual norm of omega
    from qinduce.suites import _functional_norm
    from qinduce.weights import gns, ksgns

    built = built_preset("s3_mod_c3_omega")
    b = built.bundle
    g_N = gns(b.N_qg.haar)
    rep_M = b.M_qg.gns.rep
    lay2 = b.M_qg.layout2
    for _ in range(5):
        x = b.M_qg.algebra.random_element(rng)
        om = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        dual_norm = _functional_norm(b.M_qg, om)
        sl, _ = lay2.slice(b.M_qg.comult(x), 1, om)
        lhs = np.linalg.norm(ksgns(b.apply_alpha(sl), b.layout, 2, g_N, [rep_M]), 2)
        rhs = dual_norm * np.linalg.norm(
            ksgns(b.apply_alpha(x), b.layout, 2, g_N, [rep_M]), 2)
        assert lhs <= rhs + 1e-10


def test_invalid_action_rejected():
    # alpha = flip of a valid action violates the compatibility equations
    M_qg, N_qg, alpha, _ = make_subgroup_action("S3", "C3")
    bad = alpha.copy()
    bad[:, [0, 1]] = bad[:, [1, 0]]
    with pytest.raises(ActionError):
        build_action_bundle(M_qg, N_qg, bad)
