import numpy as np
import pytest

from qinduce.algebra import (
    LegLayout,
    MultiMatrixAlgebra,
    identity_representation,
    inner,
    matrix_function,
)
from qinduce.weights import (
    AntilinearMap,
    Weight,
    canonical_gns_intertwiner,
    cocycle_via_relative_modular,
    connes_cocycle,
    gns,
    ksgns,
    ksgns_norm_check,
    modular_data,
    ovw_slice,
    relative_modular,
    tensor_weight,
    verify_modular,
)

M2 = MultiMatrixAlgebra([2])
C2 = MultiMatrixAlgebra([1, 1])


# ---------------------------------------------------------------------------
# GNS
# ---------------------------------------------------------------------------

def test_gns_state_normalization():
    phi = Weight(C2, C2.from_coeffs([0.5, 0.5]))
    g = gns(phi)
    v = g.cyclic
    assert abs(inner(v, v) - 1.0) < 1e-14


def test_gns_tracial_matrix_unit():
    phi = Weight(M2, M2.unit())
    g = gns(phi)
    v = g.gns_vector(M2.matrix_unit(0, 0, 1))
    assert abs(inner(v, v) - 1.0) < 1e-14      # Tr(e21 e12) = Tr(e22) = 1


def test_gns_weighted_matrix_unit():
    # frozen hand value: Tr(h e21 e12) = h_22 = 2
    phi = Weight(M2, M2.element([np.diag([1.0, 2.0])]))
    g = gns(phi)
    v = g.gns_vector(M2.matrix_unit(0, 0, 1))
    assert abs(inner(v, v) - 2.0) < 1e-13


def test_gns_module_property(rng):
    phi = Weight(M2, M2.random_positive(rng))
    g = gns(phi)
    x = M2.random_element(rng)
    y = M2.random_element(rng)
    assert np.linalg.norm(g.gns_vector(x * y) - g.rep.apply(x) @ g.gns_vector(y)) < 1e-12


def test_gns_rejects_unfaithful():
    phi = Weight(C2, C2.from_coeffs([1.0, 0.0]))
    with pytest.raises(Exception):
        gns(phi)


# ---------------------------------------------------------------------------
# modular data
# ---------------------------------------------------------------------------

def test_tracial_modular_trivial():
    phi = Weight(M2, 3.0 * M2.unit())
    md = modular_data(gns(phi))
    assert np.linalg.norm(md.nabla - np.eye(4)) < 1e-13
    assert np.linalg.norm(md.sigma(0.7) - np.eye(4)) < 1e-13


def test_modular_flow_weighted_by_hand():
    # h = diag(1,2): sigma_t(e12) = 2^{-it} e12
    phi = Weight(M2, M2.element([np.diag([1.0, 2.0])]))
    md = modular_data(gns(phi))
    t = 0.37
    s = md.sigma_apply(M2.matrix_unit(0, 0, 1), t)
    assert (s - (2.0 ** (-1j * t)) * M2.matrix_unit(0, 0, 1)).norm() < 1e-13


def test_modular_defining_identities(rng):
    phi = Weight(M2, M2.random_positive(rng))
    md = modular_data(gns(phi))
    res = verify_modular(md, rng, n_samples=20)
    assert res["J_nabla_half"] < 1e-10
    assert res["flow"] < 1e-10
    assert res["J_squared"] < 1e-12
    assert res["commutant"] < 1e-10


def test_relative_modular(rng):
    phi1 = Weight(M2, M2.random_positive(rng))
    phi2 = Weight(M2, M2.random_positive(rng))
    g1, g2 = gns(phi1), gns(phi2)
    rel = relative_modular(g2, g1)
    x = M2.random_element(rng)
    assert np.linalg.norm(rel.T(g1.gns_vector(x)) - g2.gns_vector(x.adjoint())) < 1e-11
    assert np.min(np.linalg.eigvalsh(rel.nabla)) > 0
    # nabla_{phi,phi} = nabla_phi and T = J nabla^{1/2}
    rel_self = relative_modular(g1, g1)
    md = modular_data(g1)
    assert np.linalg.norm(rel_self.nabla - md.nabla) < 1e-11
    half = md.nabla_power(0.5)
    Tmat = rel_self.J.mat @ np.conj(half)
    assert np.linalg.norm(Tmat - rel_self.T.mat) < 1e-10


# ---------------------------------------------------------------------------
# Connes cocycles
# ---------------------------------------------------------------------------

def test_cocycle_equal_weights(rng):
    phi = Weight(M2, M2.random_positive(rng))
    for t in (0.3, 1.0, -2.0):
        assert (connes_cocycle(phi, phi, t) - M2.unit()).norm() < 1e-13


def test_cocycle_commuting_diagonal():
    phi = Weight(M2, M2.element([np.diag([1.0, 2.0])]))
    psi = Weight(M2, M2.unit())
    t = 0.9
    u = connes_cocycle(phi, psi, t)
    assert np.linalg.norm(u.blocks[0] - np.diag([1.0, 2.0 ** (1j * t)])) < 1e-13


def test_cocycle_identity_via_matrix_exponentials(rng):
    # (D phi : D psi)_{s+t} = (D phi : D psi)_s sigma_s^psi((D phi : D psi)_t)
    h1 = M2.random_positive(rng)
    h2 = M2.random_positive(rng)
    phi, psi = Weight(M2, h1), Weight(M2, h2)
    s, t = 0.3, 0.7

    def power_it(mat, tt):
        w, U = np.linalg.eigh(mat)
        return U @ np.diag(np.exp(1j * tt * np.log(w))) @ U.conj().T

    # independent oracle computed directly from matrix exponentials
    A, B = h1.blocks[0], h2.blocks[0]
    u = lambda tt: power_it(A, tt) @ power_it(B, -tt)
    sigma_s = power_it(B, s) @ u(t) @ power_it(B, -s)
    oracle = u(s) @ sigma_s
    lhs = connes_cocycle(phi, psi, s + t)
    assert np.linalg.norm(lhs.blocks[0] - oracle) < 1e-10


def test_cocycle_unitary_random(rng):
    for _ in range(10):
        phi = Weight(M2, M2.random_positive(rng))
        psi = Weight(M2, M2.random_positive(rng))
        t = float(rng.uniform(-2, 2))
        u = connes_cocycle(phi, psi, t)
        assert (u * u.adjoint() - M2.unit()).norm() < 1e-11


def test_cocycle_against_relative_modular_transport(rng):
    phi = Weight(M2, M2.random_positive(rng))
    psi = Weight(M2, M2.random_positive(rng))
    for t in (0.3, 1.0):
        direct = connes_cocycle(phi, psi, t)
        transported = cocycle_via_relative_modular(phi, psi, t)
        assert (direct - transported).norm() < 1e-10


def test_cocycle_against_balanced_weight_oracle(rng):
    # independent 2x2 balanced-weight construction:
    # on M (x) Mat_2 with density diag(h_phi, h_psi), the modular flow of the
    # balanced weight applied to the (1,2) corner matrix unit produces
    # (D phi : D psi)_t in the corner.
    h1 = M2.random_positive(rng).blocks[0]
    h2 = M2.random_positive(rng).blocks[0]
    H = np.block([[h1, np.zeros((2, 2))], [np.zeros((2, 2)), h2]])
    E12 = np.zeros((4, 4))
    E12[0, 2] = 1.0
    E12[1, 3] = 1.0     # 1_M (x) e_{12}

    def power_it(mat, tt):
        w, U = np.linalg.eigh(mat)
        return U @ np.diag(np.exp(1j * tt * np.log(w))) @ U.conj().T

    for t in (0.3, 1.0):
        flow = power_it(H, t) @ E12 @ power_it(H, -t)
        corner = flow[0:2, 2:4]
        u = connes_cocycle(Weight(M2, M2.element([h1])),
                           Weight(M2, M2.element([h2])), t)
        assert np.linalg.norm(corner - u.blocks[0]) < 1e-10


def test_cocycle_chain_rule(rng):
    phi = Weight(M2, M2.random_positive(rng))
    psi = Weight(M2, M2.random_positive(rng))
    chi = Weight(M2, M2.random_positive(rng))
    for t in (0.3, 1.1):
        lhs = connes_cocycle(phi, psi, t) * connes_cocycle(psi, chi, t)
        assert (lhs - connes_cocycle(phi, chi, t)).norm() < 1e-11


# ---------------------------------------------------------------------------
# operator-valued weight slices
# ---------------------------------------------------------------------------

def test_ovw_slice_elementary(rng):
    lay = LegLayout.of(M2, C2)
    phi = Weight(M2, M2.random_positive(rng))
    a = M2.random_element(rng)
    b = C2.random_element(rng)
    red, _ = ovw_slice(lay.tensor(a, b), lay, phi, leg=1)
    assert (red - phi.value(a) * b).norm() < 1e-12


def test_ovw_slice_zero(rng):
    lay = LegLayout.of(M2, C2)
    phi = Weight(M2, M2.random_positive(rng))
    red, _ = ovw_slice(lay.algebra.zero(), lay, phi, leg=1)
    assert red.norm() < 1e-14


def test_ovw_slice_positivity(rng):
    lay = LegLayout.of(M2, C2)
    phi = Weight(M2, M2.random_positive(rng))
    X = lay.algebra.random_element(rng)
    red, _ = ovw_slice(X.adjoint() * X, lay, phi, leg=1)
    assert np.min(red.eigvals()) > -1e-12


def test_ovw_duality_bruteforce(rng):
    # omega((phi x i)(X)) = phi((i x omega)(X)) with both sides by direct
    # contraction loops
    lay = LegLayout.of(M2, C2)
    phi = Weight(M2, M2.random_positive(rng))
    X = lay.algebra.random_element(rng)
    omega = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    left_el, _ = ovw_slice(X, lay, phi, leg=1)
    lhs = omega @ left_el.coeffs
    right_el, _ = lay.slice(X, 2, omega)
    rhs = phi.value(right_el)
    # brute force: expand over the product basis by loops
    brute = 0.0 + 0j
    lex = lay.to_lex(X.coeffs)
    for p in range(4):
        for q in range(2):
            brute += lex[p, q] * phi.value(M2.basis_element(p)) * omega[q]
    assert abs(lhs - rhs) < 1e-11
    assert abs(lhs - brute) < 1e-11


# ---------------------------------------------------------------------------
# KSGNS
# ---------------------------------------------------------------------------

def test_ksgns_elementary(rng):
    lay = LegLayout.of(C2, M2)
    phi = Weight(C2, C2.from_coeffs([0.5, 0.5]))
    g = gns(phi)
    rep = identity_representation(2)
    a = C2.random_element(rng)
    b = M2.random_element(rng)
    K = ksgns(lay.tensor(a, b), lay, 1, g, [rep])
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    assert np.linalg.norm(K @ v - np.kron(g.gns_vector(a), rep.apply(b) @ v)) < 1e-12


def test_ksgns_zero(rng):
    lay = LegLayout.of(C2, M2)
    g = gns(Weight(C2, C2.from_coeffs([0.5, 0.5])))
    K = ksgns(lay.algebra.zero(), lay, 1, g, [identity_representation(2)])
    assert np.linalg.norm(K) < 1e-14


def test_ksgns_column_expansion_bruteforce(rng):
    # Result-style expansion against a brute-force sum over the basis,
    # random X of (C + C) (x) Mat_2
    lay = LegLayout.of(C2, M2)
    phi = Weight(C2, C2.from_coeffs([0.3, 0.7]))
    g = gns(phi)
    rep = identity_representation(2)
    X = lay.algebra.random_element(rng)
    K = ksgns(X, lay, 1, g, [rep])
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    brute = np.zeros(4, dtype=complex)
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        f = rep.vector_functional(v, e)
        sl, _ = lay.slice(X, 2, f)
        brute += np.kron(g.gns_vector(sl), e)
    assert np.linalg.norm(K @ v - brute) < 1e-11


def test_ksgns_product_law(rng):
    lay = LegLayout.of(C2, M2)
    phi = Weight(C2, C2.from_coeffs([0.5, 0.5]))
    g = gns(phi)
    rep = identity_representation(2)
    X = lay.algebra.random_element(rng)
    Y = lay.algebra.random_element(rng)
    KX = ksgns(X, lay, 1, g, [rep])
    KY = ksgns(Y, lay, 1, g, [rep])
    sl, _ = ovw_slice(Y.adjoint() * X, lay, phi, leg=1)
    assert np.linalg.norm(KY.conj().T @ KX - rep.apply(sl)) < 1e-11


def test_ksgns_norm_bound(rng):
    lay = LegLayout.of(M2, M2)
    phi = Weight(M2, M2.random_positive(rng))
    g = gns(phi)
    rep = identity_representation(2)
    for _ in range(5):
        X = lay.algebra.random_element(rng)
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        lhs, rhs = ksgns_norm_check(X, lay, g, rep, v, w)
        assert lhs <= rhs + 1e-10


# ---------------------------------------------------------------------------
# tensor weights and the canonical intertwiner
# ---------------------------------------------------------------------------

def test_tensor_weight_gns(rng):
    phi = Weight(M2, M2.random_positive(rng))
    psi = Weight(C2, C2.random_positive(rng))
    tw, lay = tensor_weight(phi, psi)
    gt = gns(tw)
    g1, g2 = gns(phi), gns(psi)
    x = M2.random_element(rng)
    y = C2.random_element(rng)
    lhs = gt.gns_vector(lay.tensor(x, y))
    rhs = lay.from_lex(np.multiply.outer(g1.gns_vector(x), g2.gns_vector(y)))
    assert np.linalg.norm(lhs - rhs) < 1e-11


def test_intertwiner_equal_weights(rng):
    th = Weight(M2, M2.random_positive(rng))
    u, certs = canonical_gns_intertwiner(th, th)
    assert np.linalg.norm(u - np.eye(4)) < 1e-11
    assert certs["unitary"] < 1e-11


def test_intertwiner_scaled_weight(rng):
    th = Weight(M2, M2.random_positive(rng))
    u, certs = canonical_gns_intertwiner(th, th.scaled(2.0))
    assert np.linalg.norm(u - np.eye(4)) < 1e-11
    assert certs["preserves_cone"] < 1e-10


def test_intertwiner_random_weights(rng):
    th = Weight(M2, M2.random_positive(rng))
    et = Weight(M2, M2.random_positive(rng))
    u, certs = canonical_gns_intertwiner(th, et)
    g_t, g_e = gns(th), gns(et)
    worst = 0.0
    for i in range(4):
        x = M2.basis_element(i)
        worst = max(worst, np.linalg.norm(
            u @ g_t.rep.apply(x) @ u.conj().T - g_e.rep.apply(x)))
    assert worst < 1e-10
    assert certs["intertwines_J"] < 1e-10
    assert certs["preserves_cone"] < 1e-9


def test_intertwiner_polar_route_oracle(rng):
    # the polar part of Lambda_eta . Lambda_theta^{-1} always intertwines the
    # GNS representations; for commuting densities it coincides with the
    # canonical (cone-preserving) intertwiner
    h_t = np.diag([1.0, 3.0])
    h_e = np.diag([2.0, 0.5])
    th = Weight(M2, M2.element([h_t]))
    et = Weight(M2, M2.element([h_e]))
    g_t, g_e = gns(th), gns(et)
    A = g_e.Lambda @ g_t.Lambda_inv
    uu, ss, vv = np.linalg.svd(A)
    u_polar = uu @ vv
    worst = 0.0
    for i in range(4):
        x = M2.basis_element(i)
        worst = max(worst, np.linalg.norm(
            u_polar @ g_t.rep.apply(x) @ np.conj(u_polar).T - g_e.rep.apply(x)))
    assert worst < 1e-10
    u_canonical, _ = canonical_gns_intertwiner(th, et)
    assert np.linalg.norm(u_polar - u_canonical) < 1e-10


def test_antilinear_composition_rules(rng):
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    L = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    Ta, Tb = AntilinearMap(A), AntilinearMap(B)
    assert np.allclose(Ta.compose_antilinear(Tb) @ v, Ta(Tb(v)))
    assert np.allclose(Ta.compose_linear(L)(v), Ta(L @ v))
    assert np.allclose(Ta.linear_compose(L)(v), L @ Ta(v))
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    # adjoint: <T v, w> = <T* w, v>
    assert abs(inner(Ta(v), w) - inner(Ta.adjoint()(w), v)) < 1e-11
