"""Certificate suites for the `verify` command and the named catalog.

Each suite returns a list of checks (name, value, threshold, passed); a suite
passes when every check does.  The catalog maps preset names to spec-file
dictionaries covering classical subgroup inductions, both boundary cases,
a cocommutative quotient induction and the Kac-Paljutkin fixture.
"""

from __future__ import annotations

import numpy as np

from .algebra import LegLayout, MultiMatrixAlgebra, identity_representation
from .action import (
    ActionBundle,
    analytic_slice_identity,
    analytic_slice_identity_lifted,
    bimodule_residual,
    integrability_check,
)
from .catalog import (
    classical_corep,
    classical_induction_oracle,
    corep_character,
    group_preset,
    make_kac_paljutkin,
    rep_preset,
    subgroup_preset,
)
from .correspondence import (
    chain_rule_residual,
    cocycle_condition,
    column_norm_bound,
    kappa_flow_residual,
    psi_M_invariance_residual,
    pull_down,
    pull_down_invariance,
    build_V_phi,
    reconstruct_eta,
    relative_modular_commutation,
)
from .induction import (
    build_lambda_rho,
    carrier_space,
    dense_family,
    p_membership_residual,
    solve_P,
    unitarity_certificate,
    weight_change_equivalence,
)
from .quantum_group import dual_quantum_group, invariance_residuals
from .specfile import BuiltSpec, SpecFile, _alternative_density, build_from_spec, parse_spec
from .weights import (
    Weight,
    connes_cocycle,
    gns,
    ksgns,
    modular_data,
    relative_modular,
    tensor_weight,
    verify_modular,
)


CATALOG: dict[str, dict] = {
    "s3_mod_c3_omega": {
        "alpha": {"preset_action": "subgroup", "group": "S3", "subgroup": "C3"},
        "U": {"preset_rep": "omega"},
    },
    "s3_mod_c2_sign": {
        "alpha": {"preset_action": "subgroup", "group": "S3", "subgroup": "C2"},
        "U": {"preset_rep": "sign"},
    },
    "z4_mod_z2_omega": {
        "alpha": {"preset_action": "subgroup", "group": "Z4", "subgroup": "Z2"},
        "U": {"preset_rep": "omega"},
    },
    "d4_mod_c4_omega": {
        "alpha": {"preset_action": "subgroup", "group": "D4", "subgroup": "C4"},
        "U": {"preset_rep": "omega"},
    },
    "s3_full_std2": {
        "alpha": {"preset_action": "full", "group": "S3"},
        "U": {"preset_rep": "std2"},
    },
    "z4_full_omega": {
        "alpha": {"preset_action": "full", "group": "Z4"},
        "U": {"preset_rep": "omega"},
    },
    "s3_trivial_d1": {
        "alpha": {"preset_action": "trivial", "group": "S3"},
        "U": {"preset_rep": "trivial", "K_dim": 1},
    },
    "z4_trivial_d2": {
        "alpha": {"preset_action": "trivial", "group": "Z4"},
        "U": {"preset_rep": "trivial", "K_dim": 2},
    },
    "qs3_mod_z2_graded": {
        "alpha": {"preset_action": "quotient", "group": "S3", "quotient": "Z2"},
        "U": {"preset_rep": "grading", "grading": [0, 1]},
    },
    "qz4_mod_z2_graded": {
        "alpha": {"preset_action": "quotient", "group": "Z4", "quotient": "Z2"},
        "U": {"preset_rep": "grading", "grading": [0, 1]},
    },
}

# quantum-group-only fixtures (no action attached)
QG_FIXTURES = ["kac_paljutkin"]


def catalog_spec(name: str) -> SpecFile:
    if name not in CATALOG:
        raise KeyError(f"unknown catalog preset {name!r}; see `catalog list`")
    return parse_spec(dict(CATALOG[name]))


class Check:
    __slots__ = ("name", "value", "threshold", "passed")

    def __init__(self, name, value, threshold):
        self.name = name
        self.value = value
        self.threshold = threshold
        self.passed = bool(value <= threshold)

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        if isinstance(self.value, int):
            return f"[{flag}] {self.name}: {self.value} (<= {self.threshold})"
        return f"[{flag}] {self.name}: {self.value:.3e} (<= {self.threshold:.1e})"


def _corep_of(built: BuiltSpec):
    ps = solve_P(built.bundle, built.U, built.lay_NK, built.K_dim)
    carrier = carrier_space(built.bundle, ps)
    return build_lambda_rho(built.bundle, built.U, built.lay_NK, built.K_dim,
                            carrier=carrier)


def suite_weights(built: BuiltSpec) -> list:
    """GNS, modular, relative modular, Connes cocycle and KSGNS identities on
    the algebras of the bundle."""
    checks = []
    rng = np.random.default_rng(101)
    M_qg = built.bundle.M_qg
    A = M_qg.algebra
    g = M_qg.gns
    md = modular_data(g)
    res = verify_modular(md, rng, n_samples=20)
    checks.append(Check("J_nabla_half_defining_identity", res["J_nabla_half"], 1e-10))
    checks.append(Check("modular_flow_transport", res["flow"], 1e-10))
    checks.append(Check("J_squared", res["J_squared"], 1e-10))
    checks.append(Check("commutant_embedding", res["commutant"], 1e-10))
    # relative modular coherence
    phi2 = Weight(A, A.random_positive(rng))
    rel = relative_modular(gns(phi2), g)
    x = A.random_element(rng)
    tres = float(np.linalg.norm(rel.T(g.gns_vector(x))
                                - gns(phi2).gns_vector(x.adjoint())))
    checks.append(Check("relative_modular_T", tres, 1e-10))
    rel_self = relative_modular(g, g)
    checks.append(Check("relative_modular_self",
                        float(np.linalg.norm(rel_self.nabla - md.nabla)), 1e-10))
    # cocycle chain rule
    phi3 = Weight(A, A.random_positive(rng))
    s_, t_ = 0.3, 0.7
    lhs = connes_cocycle(phi2, phi3, s_ + t_)
    md3 = modular_data(gns(phi3))
    rhs = connes_cocycle(phi2, phi3, s_) * md3.sigma_apply(
        connes_cocycle(phi2, phi3, t_), s_)
    checks.append(Check("connes_cocycle_identity", (lhs - rhs).norm(), 1e-10))
    for k in range(10):
        u = connes_cocycle(phi2, phi3, 0.1 + 0.2 * k)
        checks.append(Check(f"cocycle_unitary_{k}",
                            (u * u.adjoint() - A.unit()).norm(), 1e-10))
    # KSGNS column expansion against a direct slice evaluation
    N_qg = built.bundle.N_qg
    lay = built.bundle.layout
    X = lay.algebra.random_element(rng)
    rep_N = N_qg.gns.rep
    K = ksgns(X, lay, 1, M_qg.gns, [rep_N])
    v = rng.standard_normal(rep_N.dim) + 1j * rng.standard_normal(rep_N.dim)
    direct = np.zeros(M_qg.gns.dim * rep_N.dim, dtype=complex)
    for i in range(rep_N.dim):
        e = np.zeros(rep_N.dim)
        e[i] = 1.0
        f = rep_N.vector_functional(v, e)
        sl, _ = lay.slice(X, 2, f)
        direct += np.kron(M_qg.gns.gns_vector(sl), e)
    checks.append(Check("ksgns_column_expansion",
                        float(np.linalg.norm(K @ v - direct))
                        / max(1.0, float(np.linalg.norm(direct))), 1e-10))
    # tensor weight GNS on elementary tensors
    tw, twlay = tensor_weight(M_qg.haar, N_qg.haar)
    gt = gns(tw)
    x1 = A.random_element(rng)
    x2 = N_qg.algebra.random_element(rng)
    lhs_v = gt.gns_vector(twlay.tensor(x1, x2))
    rhs_v = twlay.from_lex(np.multiply.outer(M_qg.gns.gns_vector(x1),
                                             gns(N_qg.haar).gns_vector(x2)))
    checks.append(Check("tensor_weight_gns",
                        float(np.linalg.norm(lhs_v - rhs_v))
                        / max(1.0, float(np.linalg.norm(rhs_v))), 1e-10))
    return checks


def suite_qgroup(built: BuiltSpec) -> list:
    checks = []
    for tag, qg in (("M", built.bundle.M_qg), ("N", built.bundle.N_qg)):
        li, ri = invariance_residuals(qg.algebra, qg.delta, qg.haar, qg.psi)
        checks.append(Check(f"{tag}_left_invariance", li, 1e-10))
        checks.append(Check(f"{tag}_right_invariance", ri, 1e-10))
        checks.append(Check(f"{tag}_haar_tracial",
                            qg.certificates["haar_tracial"], 1e-10))
        checks.append(Check(f"{tag}_antipode_involutive",
                            float(np.linalg.norm(qg.S @ qg.S
                                                 - np.eye(qg.algebra.lin_dim))), 1e-10))
        checks.append(Check(f"{tag}_pentagon", qg.certificates["pentagon"], 1e-10))
        checks.append(Check(f"{tag}_W_implements_delta",
                            qg.certificates["W_implements_delta"], 1e-10))
        checks.append(Check(f"{tag}_V_comult", qg.certificates["V_comult"], 1e-10))
        checks.append(Check(f"{tag}_delta_grouplike",
                            qg.certificates["delta_grouplike"], 1e-10))
        # finite Kac degeneracies
        checks.append(Check(f"{tag}_modular_element_is_1",
                            (qg.delta_element - qg.algebra.unit()).norm(), 1e-10))
        checks.append(Check(f"{tag}_nu_is_1", abs(qg.nu - 1.0), 1e-10))
        checks.append(Check(f"{tag}_tau_trivial",
                            float(np.linalg.norm(qg.tau(0.7)
                                                 - np.eye(qg.algebra.lin_dim))), 1e-10))
        checks.append(Check(f"{tag}_P_is_1",
                            float(np.linalg.norm(qg.P - np.eye(qg.gns.dim))), 1e-10))
        # antipode domain identity on random pairs
        rng = np.random.default_rng(103)
        lay2 = qg.layout2
        f = qg.haar.functional()
        worst = 0.0
        for _ in range(30):
            a = qg.algebra.random_element(rng)
            b = qg.algebra.random_element(rng)
            da_star = qg.comult(a.adjoint())
            db = qg.comult(b)
            y, _ = lay2.slice(da_star * lay2.tensor(qg.algebra.unit(), b), 2, f)
            z, _ = lay2.slice(lay2.tensor(qg.algebra.unit(), a.adjoint()) * db, 2, f)
            worst = max(worst, (qg.antipode(y) - z).norm()
                        / max(1.0, a.norm() * b.norm()))
        checks.append(Check(f"{tag}_antipode_domain_identity", worst, 1e-10))
    dualM = built.bundle.dual
    checks.append(Check("dual_dimension_match",
                        abs(dualM.algebra.lin_dim - built.bundle.M_qg.algebra.lin_dim), 0))
    return checks


def suite_action(built: BuiltSpec) -> list:
    checks = []
    b = built.bundle
    certs = b.certificates
    checks.append(Check("eq_compatibility_right_action", certs["right_action"], 1e-10))
    checks.append(Check("eq_compatibility_equivariance", certs["equivariance"], 1e-10))
    checks.append(Check("delta_M_Q_in_M_x_Q", certs["delta_M_Q_in_M_Q"], 1e-9))
    checks.append(Check("impl1", certs["upsilon_impl1"], 1e-9))
    checks.append(Check("impl2", certs["upsilon_impl2"], 1e-9))
    checks.append(Check("upsilon_unitary", certs["upsilon_unitary"], 1e-9))
    rep = integrability_check(b)
    checks.append(Check("integrable", 0.0 if rep["integrable"] else 1.0, 0.0))
    checks.append(Check("T_alpha_range_deficit",
                        rep["dim_Q"] - rep["rank_T_alpha"], 0))
    checks.append(Check("T_alpha_unit_certificate",
                        rep["certificate_T_alpha_1"], 1e-10))
    rng = np.random.default_rng(107)
    checks.append(Check("T_alpha_bimodule", bimodule_residual(b, rng), 1e-10))
    # positivity of T_alpha
    x = b.M_qg.algebra.random_element(rng)
    pos = b.T_alpha(x.adjoint() * x)
    checks.append(Check("T_alpha_positive",
                        max(0.0, -float(np.min(pos.eigvals()))), 1e-10))
    # Lemma: (omega x i) Delta_M contracts the alpha-GNS norm
    worst = 0.0
    lay2 = b.M_qg.layout2
    lay = b.layout
    g_N = gns(b.N_qg.haar)
    rep_M = b.M_qg.gns.rep
    from .weights import ksgns as _ksgns
    for _ in range(5):
        x = b.M_qg.algebra.random_element(rng)
        om = rng.standard_normal(b.M_qg.algebra.lin_dim) \
            + 1j * rng.standard_normal(b.M_qg.algebra.lin_dim)
        om = om / np.linalg.norm(om)
        # ||omega|| as a functional on the represented algebra
        dual_norm = _functional_norm(b.M_qg, om)
        dx = b.M_qg.comult(x)
        sl, _ = lay2.slice(dx, 1, om)
        lhs = float(np.linalg.norm(_ksgns(b.apply_alpha(sl), lay, 2, g_N, [rep_M]), 2))
        rhs = dual_norm * float(np.linalg.norm(
            _ksgns(b.apply_alpha(x), lay, 2, g_N, [rep_M]), 2))
        worst = max(worst, max(0.0, lhs - rhs) / max(1.0, rhs))
    checks.append(Check("slice_norm_contraction", worst, 1e-10))
    # analytic machinery: sigma* trivial, and the two slice identities
    checks.append(Check("sigma_star_trivial",
                        0.0 if b.analytic.is_trivial() else 1.0, 0.0))
    omega = rng.standard_normal(b.N_qg.algebra.lin_dim) \
        + 1j * rng.standard_normal(b.N_qg.algebra.lin_dim)
    a = b.N_qg.algebra.random_element(rng)
    checks.append(Check("analytic_slice_identity",
                        analytic_slice_identity(b.N_qg, built.U, built.lay_NK,
                                                built.K_dim, omega, a)
                        / max(1.0, a.norm()), 1e-9))
    X = b.layout.algebra.random_element(rng)
    checks.append(Check("analytic_slice_identity_lifted",
                        analytic_slice_identity_lifted(b, built.U, built.lay_NK,
                                                       built.K_dim, omega, X)
                        / max(1.0, X.norm()), 1e-9))
    return checks


def suite_induction(built: BuiltSpec) -> list:
    checks = []
    corep = _corep_of(built)
    r = corep.residuals
    checks.append(Check("U_corep_identity_precheck", 0.0, 1e-9))
    checks.append(Check("P_defining_equation", corep.pspace.defining_residual, 1e-9))
    checks.append(Check("P_left_module_closure",
                        corep.pspace.closure["left_module"], 1e-9))
    checks.append(Check("P_right_module_closure",
                        corep.pspace.closure["right_module"], 1e-9))
    checks.append(Check("gram_products_in_Q", corep.carrier.lemma42_residual, 1e-9))
    checks.append(Check("lambda_consistency", r["lambda_consistency"], 1e-9))
    checks.append(Check("lambda_isometry", r["isometry"], 1e-9))
    checks.append(Check("lambda_commutes_M_prime", r["commutes_with_M_prime"], 1e-9))
    checks.append(Check("lambda_in_M_x_B", r["lambda_in_M_x_B"], 1e-9))
    checks.append(Check("corep_identity", r["corep_identity"], 1e-9))
    rng = np.random.default_rng(109)
    checks.append(Check("averaged_elements_in_P",
                        p_membership_residual(built.bundle, built.U, built.lay_NK,
                                              corep.carrier, rng), 1e-9))
    unit = unitarity_certificate(corep)
    checks.append(Check("rho_unitary", max(unit["rho_coisometry"],
                                           unit["rho_isometry"]), 1e-9))
    checks.append(Check("K0_deficit", unit["K0_deficit"], 0))
    checks.append(Check("lambda_into_K0", unit["lambda_into_K0"], 1e-9))
    checks.append(Check("module_action_into_K0", unit["module_action_into_K0"], 1e-9))
    checks.append(Check("lambda_K0_surjective",
                        0.0 if unit["lambda_K0_surjective"] else 1.0, 0.0))
    dens = dense_family(built.bundle, built.U, built.lay_NK, corep.carrier)
    checks.append(Check("dense_span_deficit", dens["dense_span_deficit"], 0))
    checks.append(Check("intermediate_span_deficit",
                        dens["intermediate_span_deficit"], 0))
    wc = weight_change_equivalence(corep, _alternative_density(built.bundle,
                                                               built.spec.seed))
    checks.append(Check("weight_change_unitary", wc["curlyU_unitary"], 1e-9))
    checks.append(Check("weight_change_equivalence", wc["equivalence"], 1e-8))
    return checks


def suite_correspondence(built: BuiltSpec) -> list:
    checks = []
    b = built.bundle
    rng = np.random.default_rng(113)
    checks.append(Check("psi_M_invariance", psi_M_invariance_residual(b), 1e-10))
    theta_t = pull_down(b, b.theta)
    checks.append(Check("pull_down_invariance",
                        pull_down_invariance(b, theta_t, rng), 1e-9))
    # additivity
    h1 = b.Q.sub.random_positive(rng)
    h2 = b.Q.sub.random_positive(rng)
    w1 = pull_down(b, Weight(b.Q.sub, h1))
    w2 = pull_down(b, Weight(b.Q.sub, h2))
    w12 = pull_down(b, Weight(b.Q.sub, h1 + h2))
    checks.append(Check("pull_down_additive",
                        (w12.density - w1.density - w2.density).norm(), 1e-10))
    V, vcerts = build_V_phi(b, b.M_qg.psi)
    checks.append(Check("V_psi_unitary", vcerts["unitary"], 1e-8))
    checks.append(Check("V_psi_intertwines", vcerts["intertwines_alpha"], 1e-8))
    checks.append(Check("V_psi_comult", vcerts["comultiplicativity"], 1e-8))
    V2, vcerts2 = build_V_phi(b, theta_t)
    checks.append(Check("V_theta~_unitary", vcerts2["unitary"], 1e-8))
    checks.append(Check("V_theta~_comult", vcerts2["comultiplicativity"], 1e-8))
    rc = relative_modular_commutation(b, theta_t, b.M_qg.psi,
                                      b.N_qg.delta_element, None)
    checks.append(Check("relative_modular_commutation", rc["commutation"], 1e-8))
    for t in (0.5, 1.0):
        checks.append(Check(f"kappa_flow_t_{t}", kappa_flow_residual(b, t), 1e-9))
    # cocycle condition: 10 random pulled-down weights pass
    grid = [0.3, 1.0, float(np.sqrt(2.0))]
    worst = 0.0
    for _ in range(10):
        eta = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
        cc = cocycle_condition(b, pull_down(b, eta), grid)
        worst = max(worst, cc["max_residual"])
    checks.append(Check("cocycle_condition_pulled_down", worst, 1e-8))
    # a counterexample must FAIL (skip when Q = M: every weight pulls down)
    if b.Q.sub.lin_dim < b.M_qg.algebra.lin_dim:
        bad = _non_invariant_density(b, rng)
        cc_bad = cocycle_condition(b, bad, [0.3, 1.0])
        checks.append(Check("cocycle_counterexample_fails",
                            0.0 if not cc_bad["passed"] else 1.0, 0.0))
    eta0 = Weight(b.Q.sub, b.Q.sub.random_positive(rng))
    phi0 = pull_down(b, eta0)
    eta_back, rep = reconstruct_eta(b, phi0)
    checks.append(Check("reconstruction_roundtrip", rep["roundtrip_error"], 1e-8))
    checks.append(Check("reconstruction_density_error",
                        (eta_back.density - eta0.density).norm(), 1e-8))
    checks.append(Check("chain_rule", chain_rule_residual(b, phi0, 0.7), 1e-10))
    lhs, rhs = column_norm_bound(b, phi0, rng)
    checks.append(Check("column_norm_bound", max(0.0, lhs - rhs), 1e-10))
    return checks


def _functional_norm(qg, om: np.ndarray) -> float:
    """Dual norm of a functional on the represented algebra."""
    rep = qg.gns.rep
    F = np.tensordot(om, rep.tensor, axes=(0, 0))
    # norm of omega = trace norm of its representing matrix on H
    return float(np.sum(np.linalg.svd(F, compute_uv=False)))


def _non_invariant_density(b: ActionBundle, rng: np.random.Generator) -> Weight:
    """A faithful weight on M that is not a pull-down (generic positive
    density plus a deterministic perturbation off Q)."""
    MA = b.M_qg.algebra
    for _ in range(8):
        h = MA.random_positive(rng)
        w = Weight(MA, h)
        cc = cocycle_condition(b, w, [0.3])
        if not cc["passed"]:
            return w
    raise RuntimeError("failed to build a non-pulled-down counterexample")


SUITES = {
    "weights": suite_weights,
    "qgroup": suite_qgroup,
    "action": suite_action,
    "induction": suite_induction,
    "correspondence": suite_correspondence,
}


def run_suite(built: BuiltSpec, suite: str) -> list:
    if suite == "all":
        out = []
        for name in SUITES:
            out.extend(run_suite(built, name))
        return out
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from "
                       f"{sorted(SUITES)} or 'all'")
    return SUITES[suite](built)


def run_qg_fixture_suite(name: str) -> list:
    """Quantum-group-only certificates for fixtures without an action."""
    if name == "kac_paljutkin":
        qg = make_kac_paljutkin()
    else:
        raise KeyError(f"unknown fixture {name!r}")
    checks = []
    li, ri = invariance_residuals(qg.algebra, qg.delta, qg.haar, qg.psi)
    checks.append(Check(f"{name}_left_invariance", li, 1e-10))
    checks.append(Check(f"{name}_right_invariance", ri, 1e-10))
    checks.append(Check(f"{name}_haar_tracial", qg.certificates["haar_tracial"], 1e-10))
    checks.append(Check(f"{name}_pentagon", qg.certificates["pentagon"], 1e-10))
    checks.append(Check(f"{name}_S_squared", qg.certificates["kac_s_squared"], 1e-10))
    checks.append(Check(f"{name}_noncocommutative",
                        1.0 if getattr(qg, "cocommutativity_defect", 0.0) < 0.1 else 0.0,
                        0.0))
    dual = dual_quantum_group(qg)
    checks.append(Check(f"{name}_dual_dim",
                        abs(dual.algebra.lin_dim - qg.algebra.lin_dim), 0))
    return checks


def oracle_reconciliation(name: str) -> list:
    """Pipeline character against the Frobenius oracle for a classical preset."""
    spec = catalog_spec(name)
    built = build_from_spec(spec)
    if built.kind not in ("subgroup", "full"):
        return []
    corep = _corep_of(built)
    G = built.info["group"]
    sub = built.info.get("subgroup", list(range(G.order)))
    label = spec.raw["U"]["preset_rep"]
    mats = rep_preset(G, label, sub)
    oracle = classical_induction_oracle(G, sub, mats)
    chi = corep_character(corep.rho_abstract, corep.lay_MK)
    checks = [
        Check(f"{name}_character_matches_oracle",
              float(np.linalg.norm(chi.coeffs - oracle)), 1e-8),
        Check(f"{name}_dimension_count",
              abs(corep.dim_carrier
                  - (G.order // len(sub)) * mats[0].shape[0]), 0),
    ]
    return checks
