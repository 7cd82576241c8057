import numpy as np
import pytest

from qinduce.algebra import AlgebraError
from qinduce.catalog import (
    FiniteGroupData,
    classical_induction_oracle,
    corep_character,
    group_preset,
    make_function_algebra,
    make_group_algebra,
    make_quotient_action,
    make_subgroup_action,
    rep_preset,
    subgroup_preset,
)

from conftest import corep_of_preset


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

def test_group_presets_validate():
    for name in ("Z2", "Z3", "Z4", "S3", "D4", "Q8"):
        G = group_preset(name)
        assert G.order in (2, 3, 4, 6, 8)
        # Latin square + associativity + inverses checked in the constructor


def test_invalid_cayley_table_rejected():
    with pytest.raises(AlgebraError):
        FiniteGroupData("bad", ["a", "b"], np.array([[0, 0], [1, 1]]))
    # Latin square that is not associative
    t = np.array([[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3],
                  [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]])
    with pytest.raises(AlgebraError):
        FiniteGroupData("bad5", list("abcde"), t)


def test_subgroup_presets():
    G = group_preset("S3")
    assert len(subgroup_preset(G, "C3")) == 3
    assert len(subgroup_preset(G, "C2")) == 2
    assert subgroup_preset(G, "e") == [G.identity]
    assert len(subgroup_preset(G, "G")) == 6
    with pytest.raises(AlgebraError):
        subgroup_preset(G, "C5")


def test_subgroup_must_be_closed():
    G = group_preset("S3")
    with pytest.raises(AlgebraError):
        G.subgroup_indices(["e", "r"])          # not closed: r^2 missing


# ---------------------------------------------------------------------------
# quantum group constructors
# ---------------------------------------------------------------------------

def test_function_algebra_z2_comultiplication():
    qg = make_function_algebra("Z2")
    lay = qg.layout2
    de = qg.algebra.basis_element(0)
    dg = qg.algebra.basis_element(1)
    expect = lay.tensor(de, de) + lay.tensor(dg, dg)
    assert (qg.comult(de) - expect).norm() < 1e-12


def test_group_algebra_blocks():
    assert list(make_group_algebra("Z3").algebra.block_dims) == [1, 1, 1]
    assert sorted(make_group_algebra("S3").algebra.block_dims) == [1, 1, 2]
    # oracle: S3 has irreps of dimensions 1, 1, 2 (sum of squares = 6)
    assert sum(d * d for d in make_group_algebra("S3").algebra.block_dims) == 6


def test_group_algebra_comultiplication_grouplike():
    qg = make_group_algebra("S3")
    lay = qg.layout2
    for lam in qg.lambda_elements:
        assert (qg.comult(lam) - lay.tensor(lam, lam)).norm() < 1e-10


def test_quotient_action_kernels():
    _, _, _, info = make_quotient_action("S3", "Z2")
    assert sorted(info["pi"]) == [0, 0, 0, 1, 1, 1]
    M_qg, N_qg, alpha, info2 = make_quotient_action("S3", "S3")
    assert info2["pi"] == list(range(6))
    with pytest.raises(AlgebraError):
        make_quotient_action("S3", "Z4")


def test_subgroup_action_rejects_non_subgroup():
    with pytest.raises(AlgebraError):
        make_subgroup_action("S3", "e,r")


# ---------------------------------------------------------------------------
# the classical induction oracle
# ---------------------------------------------------------------------------

def test_oracle_s3_c3_omega_hand_value():
    G = group_preset("S3")
    sub = subgroup_preset(G, "C3")
    mats = rep_preset(G, "omega", sub)
    chi = classical_induction_oracle(G, sub, mats)
    # Frobenius by hand: the induced 2-dim irrep of S3
    assert np.linalg.norm(chi - np.array([2, -1, -1, 0, 0, 0])) < 1e-12


def test_oracle_s3_c2_sign():
    G = group_preset("S3")
    sub = subgroup_preset(G, "C2")
    mats = rep_preset(G, "sign", sub)
    chi = classical_induction_oracle(G, sub, mats)
    assert abs(chi[G.identity] - 3.0) < 1e-12        # dim = [G:H] * 1 = 3
    # the induced character of the sign of C2 = chi_sign + chi_2dim
    assert np.linalg.norm(chi - np.array([3, 0, 0, -1, -1, -1])) < 1e-12


def test_oracle_induction_from_whole_group_is_identity():
    G = group_preset("S3")
    sub = list(range(6))
    mats = rep_preset(G, "std2", sub)
    chi = classical_induction_oracle(G, sub, mats)
    direct = np.array([np.trace(m) for m in mats])
    assert np.linalg.norm(chi - direct) < 1e-12


def test_oracle_rejects_non_representation():
    G = group_preset("S3")
    sub = subgroup_preset(G, "C3")
    mats = [np.eye(1), np.array([[2.0]]), np.array([[0.5]])]
    with pytest.raises(AlgebraError):
        classical_induction_oracle(G, sub, mats)


def test_frobenius_reciprocity_dimension():
    # dim Ind = [G:H] dim u for all catalog classical presets
    for g_name, sub_name, rep in (("S3", "C3", "omega"), ("S3", "C2", "sign"),
                                  ("Z4", "Z2", "omega"), ("D4", "C4", "omega"),
                                  ("Q8", "C4", "omega")):
        G = group_preset(g_name)
        sub = subgroup_preset(G, sub_name)
        mats = rep_preset(G, rep, sub)
        chi = classical_induction_oracle(G, sub, mats)
        assert abs(chi[G.identity]
                   - (G.order // len(sub)) * mats[0].shape[0]) < 1e-12


# ---------------------------------------------------------------------------
# characters of coreps
# ---------------------------------------------------------------------------

def test_character_of_trivial_corep():
    built, corep = corep_of_preset("z4_trivial_d2")
    # rho is not 1 x 1_d here; instead check the defining example directly
    from qinduce.algebra import LegLayout, MultiMatrixAlgebra
    from qinduce.catalog import trivial_corep

    N_qg = built.bundle.N_qg
    U, d = trivial_corep(N_qg, 3)
    lay = LegLayout.of(N_qg.algebra, MultiMatrixAlgebra([3]))
    chi = corep_character(U, lay)
    assert (chi - 3.0 * N_qg.algebra.unit()).norm() < 1e-12


def test_character_full_case_matches_U():
    built, corep = corep_of_preset("s3_full_std2")
    chi = corep_character(corep.rho_abstract, corep.lay_MK)
    mats = rep_preset(built.info["group"], "std2")
    expected = np.array([np.trace(m) for m in mats])
    assert np.linalg.norm(chi.coeffs - expected) < 1e-8


def test_oracle_reconciliation_all_classical_presets():
    from qinduce.suites import oracle_reconciliation

    for name in ("s3_mod_c3_omega", "s3_mod_c2_sign", "z4_mod_z2_omega",
                 "d4_mod_c4_omega", "s3_full_std2", "z4_full_omega"):
        checks = oracle_reconciliation(name)
        assert checks, name
        for c in checks:
            assert c.passed, f"{name}: {c.row()}"


def test_representation_presets_are_unitary_reps():
    G = group_preset("Q8")
    mats = rep_preset(G, "2d")
    for i, m in enumerate(mats):
        assert np.linalg.norm(m @ m.conj().T - np.eye(2)) < 1e-12
    G = group_preset("D4")
    sub = subgroup_preset(G, "C4")
    mats = rep_preset(G, "omega", sub)
    assert len(mats) == 4
