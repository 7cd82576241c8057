"""Weights, GNS constructions, modular and relative-modular data, Connes
cocycles, operator-valued weight slices and the KSGNS map.

Every weight is a faithful positive functional phi(x) = Tr(h x) given by an
invertible positive density h against the un-normalized block trace.  The
concrete GNS model is the Hilbert-Schmidt picture: H_phi = the algebra itself
with Lambda(x) = coeffs(x h^{1/2}) and pi = left multiplication, which is
automatically a standard form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraError,
    Array,
    LegLayout,
    MultiMatrixAlgebra,
    Representation,
    inner,
    left_regular_representation,
    matrix_function,
    scaled_tol,
)


# ---------------------------------------------------------------------------
# Antilinear maps
# ---------------------------------------------------------------------------

class AntilinearMap:
    """An antilinear map v -> mat @ conj(v).

    Composition rules: (antilinear . linear)(v) = A conj(L) conj(v);
    (linear . antilinear)(v) = L A conj(v); antilinear . antilinear is linear
    with matrix A1 conj(A2).  The adjoint of v -> A conj(v) is v -> A^T conj(v).
    """

    def __init__(self, mat: Array):
        self.mat = np.asarray(mat, dtype=complex)

    def __call__(self, v: Array) -> Array:
        return self.mat @ np.conj(v)

    def compose_linear(self, L: Array) -> "AntilinearMap":
        """self . L (apply the linear map first)."""
        return AntilinearMap(self.mat @ np.conj(L))

    def linear_compose(self, L: Array) -> "AntilinearMap":
        """L . self."""
        return AntilinearMap(L @ self.mat)

    def compose_antilinear(self, other: "AntilinearMap") -> Array:
        """self . other, a linear map."""
        return self.mat @ np.conj(other.mat)

    def adjoint(self) -> "AntilinearMap":
        return AntilinearMap(self.mat.T)

    def is_antiunitary(self, tol: float | None = None) -> bool:
        d = self.mat.shape[0]
        return bool(np.linalg.norm(self.mat @ self.mat.conj().T - np.eye(d))
                    <= scaled_tol(self.mat, tol=tol))

    def conjugate_operator(self, L: Array) -> Array:
        """self . L . self^{-1} for antiunitary self (a linear map)."""
        return self.mat @ np.conj(L) @ np.conj(self.mat).T


def polar_antilinear(T: AntilinearMap) -> tuple[AntilinearMap, Array]:
    """Polar decomposition T = J nabla^{1/2} with J antiunitary and
    nabla = T*T positive; returns (J, nabla)."""
    A = T.mat
    nabla = A.T @ np.conj(A)
    w, U = np.linalg.eigh((nabla + nabla.conj().T) / 2)
    if np.min(w) <= 0:
        raise AlgebraError("polar decomposition needs an injective map")
    inv_sqrt = U @ np.diag(1.0 / np.sqrt(w)) @ U.conj().T
    J = AntilinearMap(A @ np.conj(inv_sqrt))
    return J, nabla


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

@dataclass
class Weight:
    """phi(x) = Tr(h x) for a positive invertible density h."""

    algebra: MultiMatrixAlgebra
    density: AlgebraElement

    def __post_init__(self):
        if self.density.parent != self.algebra:
            raise AlgebraError("density lives in the wrong algebra")

    def value(self, x: AlgebraElement) -> complex:
        return (self.density * x).trace()

    def functional(self) -> Array:
        """Covector on canonical coefficients."""
        A = self.algebra
        return np.array([self.value(A.basis_element(i)) for i in range(A.lin_dim)])

    def is_faithful(self, tol: float | None = None) -> bool:
        ev = self.density.eigvals()
        herm = self.density.is_hermitian()
        return herm and bool(np.min(ev) > scaled_tol(self.density.block_diag(), tol=tol))

    def scaled(self, c: float) -> "Weight":
        return Weight(self.algebra, c * self.density)

    @staticmethod
    def from_functional(algebra: MultiMatrixAlgebra, f: Array) -> "Weight":
        """Recover the density from phi-values on the canonical basis:
        Tr(h e^(k)_{ij}) = h^(k)[j, i]."""
        h = algebra.zero()
        for idx, (k, i, j) in enumerate(algebra.basis_triples()):
            h.blocks[k][j, i] = f[idx]
        return Weight(algebra, h)

    @staticmethod
    def trace(algebra: MultiMatrixAlgebra) -> "Weight":
        return Weight(algebra, algebra.unit())


def tensor_weight(phi: "Weight", psi: "Weight") -> tuple["Weight", LegLayout]:
    """The tensor product weight, with density h_phi (x) h_psi."""
    layout = LegLayout.of(phi.algebra, psi.algebra)
    return Weight(layout.algebra, layout.tensor(phi.density, psi.density)), layout


# ---------------------------------------------------------------------------
# GNS and modular data
# ---------------------------------------------------------------------------

@dataclass
class GNSData:
    """Concrete GNS triple (H, pi, Lambda) in the Hilbert-Schmidt picture."""

    weight: Weight
    dim: int
    Lambda: Array          # coeffs -> H
    Lambda_inv: Array
    rep: Representation    # pi = left multiplication

    def gns_vector(self, x: AlgebraElement) -> Array:
        return self.Lambda @ x.coeffs

    def element_of(self, v: Array) -> AlgebraElement:
        return self.weight.algebra.from_coeffs(self.Lambda_inv @ v)

    @property
    def cyclic(self) -> Array:
        return self.gns_vector(self.weight.algebra.unit())


def gns(phi: Weight) -> GNSData:
    """GNS construction; requires a faithful weight."""
    if not phi.is_faithful():
        raise AlgebraError("density not positive invertible: weight is not faithful")
    A = phi.algebra
    hsqrt = matrix_function(phi.density, "sqrt")
    Lam = A.rmult_matrix(hsqrt)
    return GNSData(phi, A.lin_dim, Lam, np.linalg.inv(Lam), left_regular_representation(A))


@dataclass
class ModularData:
    """Tomita-Takesaki data of a weight in its GNS representation."""

    gns: GNSData
    nabla: Array
    J: AntilinearMap

    def nabla_power(self, z: complex) -> Array:
        phi = self.gns.weight
        A = phi.algebra
        hz = matrix_function(phi.density, "power_it", t=-1j * z)       # h^{z}
        hmz = matrix_function(phi.density, "power_it", t=1j * z)       # h^{-z}
        return A.lmult_matrix(hz) @ A.rmult_matrix(hmz)

    def sigma(self, z: complex):
        """The modular automorphism sigma_z as a map on the algebra:
        x -> h^{iz} x h^{-iz} (entire in finite dimension)."""
        phi = self.gns.weight
        A = phi.algebra
        hiz = matrix_function(phi.density, "power_it", t=z)
        hmiz = matrix_function(phi.density, "power_it", t=-z)
        return A.lmult_matrix(hiz) @ A.rmult_matrix(hmiz)

    def sigma_apply(self, x: AlgebraElement, z: complex) -> AlgebraElement:
        return self.gns.weight.algebra.from_coeffs(self.sigma(z) @ x.coeffs)

    def T_J(self, x: AlgebraElement) -> Array:
        """x -> J pi(x)* J, landing in the commutant of pi."""
        L = self.gns.rep.apply(x.adjoint())
        return self.J.conjugate_operator(L)


def modular_data(g: GNSData) -> ModularData:
    phi = g.weight
    A = phi.algebra
    h = phi.density
    hinv = matrix_function(h, "inv")
    nabla = A.lmult_matrix(h) @ A.rmult_matrix(hinv)
    # H-coordinates coincide with vec coordinates and J vec(y) = vec(y*)
    J = AntilinearMap(A.adjoint_matrix())
    return ModularData(g, nabla, J)


def verify_modular(md: ModularData, rng: np.random.Generator, n_samples: int = 10,
                   tol: float | None = None) -> dict:
    """Residuals of the defining modular identities."""
    g = md.gns
    A = g.weight.algebra
    half = md.nabla_power(0.5)
    res_sjl = 0.0
    res_flow = 0.0
    for _ in range(n_samples):
        x = A.random_element(rng)
        lhs = md.J(half @ g.gns_vector(x))
        rhs = g.gns_vector(x.adjoint())
        res_sjl = max(res_sjl, float(np.linalg.norm(lhs - rhs)) / max(1.0, x.norm()))
        t = 0.7
        lhs2 = _mat_power(md.nabla, 1j * t) @ g.gns_vector(x)
        rhs2 = g.gns_vector(md.sigma_apply(x, t))
        res_flow = max(res_flow, float(np.linalg.norm(lhs2 - rhs2)) / max(1.0, x.norm()))
    jj = md.J.compose_antilinear(md.J)
    res_j2 = float(np.linalg.norm(jj - np.eye(g.dim)))
    # J pi(M) J inside the commutant
    res_comm = 0.0
    for i in range(A.lin_dim):
        xi = A.basis_element(i)
        TJx = md.T_J(xi)
        for j in range(A.lin_dim):
            yj = g.rep.apply(A.basis_element(j))
            res_comm = max(res_comm, float(np.linalg.norm(TJx @ yj - yj @ TJx)))
    return {"J_nabla_half": res_sjl, "flow": res_flow, "J_squared": res_j2,
            "commutant": res_comm}


def _mat_power(P: Array, z: complex) -> Array:
    w, U = np.linalg.eigh((P + P.conj().T) / 2)
    if np.min(w) <= 0:
        raise AlgebraError("matrix power of a non-positive operator")
    return U @ np.diag(np.exp(z * np.log(w))) @ U.conj().T


@dataclass
class RelativeModularData:
    """Closed map T Lambda_1(x) = Lambda_2(x*) with polar data T = J nabla^{1/2}."""

    T: AntilinearMap
    J: AntilinearMap
    nabla: Array


def relative_modular(g2: GNSData, g1: GNSData) -> RelativeModularData:
    """Relative modular data of the pair (phi_2, phi_1) on a common algebra."""
    if g1.weight.algebra != g2.weight.algebra:
        raise AlgebraError("weights live on different algebras")
    A = g1.weight.algebra
    adj = A.adjoint_matrix()
    # T: H_1 -> H_2, Lambda_1(x) |-> Lambda_2(x*)
    Tmat = g2.Lambda @ adj @ np.conj(g1.Lambda_inv)
    T = AntilinearMap(Tmat)
    J, nabla = polar_antilinear(T)
    return RelativeModularData(T, J, nabla)


# ---------------------------------------------------------------------------
# Connes cocycles
# ---------------------------------------------------------------------------

def connes_cocycle(phi: Weight, psi: Weight, t: float) -> AlgebraElement:
    """(D phi : D psi)_t = h_phi^{it} h_psi^{-it}."""
    if phi.algebra != psi.algebra:
        raise AlgebraError("cocycle needs weights on the same algebra")
    if not (phi.is_faithful() and psi.is_faithful()):
        raise AlgebraError("cocycle needs faithful weights")
    u = matrix_function(phi.density, "power_it", t=t)
    v = matrix_function(psi.density, "power_it", t=-t)
    return u * v


def cocycle_via_relative_modular(phi: Weight, psi: Weight, t: float) -> AlgebraElement:
    """Transport nabla_{phi,psi}^{it} nabla_psi^{-it} through the GNS picture;
    agrees with the direct density formula in finite dimension."""
    g_psi = gns(psi)
    g_phi = gns(phi)
    rel = relative_modular(g_phi, g_psi)
    md_psi = modular_data(g_psi)
    U = _mat_power(rel.nabla, 1j * t) @ _mat_power(md_psi.nabla, -1j * t)
    # U = pi(u) for the cocycle u, so U Lambda_psi(1) = Lambda_psi(u)
    return g_psi.element_of(U @ g_psi.cyclic)


# ---------------------------------------------------------------------------
# Operator-valued weight slices and the KSGNS map
# ---------------------------------------------------------------------------

def ovw_slice(X: AlgebraElement, layout: LegLayout, phi: Weight, leg: int = 1):
    """(phi (x) iota)(X) or (iota (x) phi)(X) on a two-or-more-leg layout."""
    if layout.factors[leg - 1] != phi.algebra:
        raise AlgebraError("weight does not match the sliced leg")
    return layout.slice(X, leg, phi.functional())


def ksgns(X: AlgebraElement, layout: LegLayout, weight_leg: int, g: GNSData,
          reps: list) -> Array:
    """The KSGNS map (iota ... Lambda_phi ... iota)(X) as a concrete linear map
    from the tensor product of the non-weight carriers into the full tensor
    product with H_phi inserted at the weight leg.

    `reps` has one Representation per non-weight leg (in layout order).
    Uses the column expansion: for phi in leg 1,
    (Lambda_phi (x) iota)(X) v = sum_i Lambda_phi((iota (x) omega_{v,e_i})(X)) (x) e_i.
    """
    n = layout.n_legs
    i = weight_leg - 1
    if layout.factors[i] != g.weight.algebra:
        raise AlgebraError("weight does not match the designated leg")
    if len(reps) != n - 1:
        raise AlgebraError("one representation per non-weight leg required")
    other_dims = [r.dim for r in reps]
    d_rest = int(np.prod(other_dims)) if other_dims else 1
    # move the weight leg to the front
    perm = [i] + [j for j in range(n) if j != i]
    Xp, playout = layout.permute(X, perm)
    # contract the non-weight legs against rep tensors, then apply Lambda
    t = playout.to_lex(Xp.coeffs)            # axes: weight, rest...
    for r in reps:
        t = np.tensordot(t, r.tensor, axes=(1, 0))   # -> (weight, ..., out, in)
    # axes now: weight, out_1, in_1, ..., out_k, in_k
    k = len(reps)
    axes = [0] + [2 * j + 1 for j in range(k)] + [2 * j + 2 for j in range(k)]
    t = np.transpose(t, axes).reshape(layout.factors[i].lin_dim, d_rest, d_rest)
    # columns: for basis vector e_c of the rest space, slice (iota x omega_{e_c, e_r})
    # gives coefficient tensor t[:, r, c]; apply Lambda and place at output row r
    cols = np.einsum("pl,lrc->prc", g.Lambda, t)      # (H_phi, rest_out, rest_in)
    out = cols.reshape(g.dim * d_rest, d_rest)
    # rows are ordered (H_phi, rest); permute H_phi into the weight slot
    out_dims = [g.dim] + other_dims
    from .algebra import hs_permutation
    inv = np.argsort(perm)
    P = hs_permutation(out_dims, list(inv)) if n > 1 else np.eye(g.dim)
    return P @ out


def ksgns_norm_check(X: AlgebraElement, layout: LegLayout, g: GNSData,
                     rep: Representation, omega_v: Array, omega_w: Array) -> tuple[float, float]:
    """(||Lambda((iota x omega)(X))||, ||omega|| * ||(Lambda x iota)(X)||)."""
    f = rep.vector_functional(omega_v, omega_w)
    sliced, _ = layout.slice(X, 2, f)
    lhs = float(np.linalg.norm(g.Lambda @ sliced.coeffs))
    K = ksgns(X, layout, 1, g, [rep])
    norm_omega = float(np.linalg.norm(omega_v) * np.linalg.norm(omega_w))
    rhs = norm_omega * float(np.linalg.norm(K, 2))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Canonical GNS intertwiner
# ---------------------------------------------------------------------------

def canonical_gns_intertwiner(theta: Weight, eta: Weight,
                              tol: float | None = None) -> tuple[Array, dict]:
    """The canonical unitary u : H_theta -> H_eta between the GNS standard
    forms of two faithful weights on the same algebra.

    Constructed via u Lambda_theta(x) = Lambda_eta(x (D theta : D eta)_{-i/2});
    the analytic continuation of the Connes cocycle.  In the Hilbert-Schmidt
    standard form this intertwines pi, J and maps the natural positive cone
    onto itself; all three properties are certified numerically.
    """
    if theta.algebra != eta.algebra:
        raise AlgebraError("weights on different algebras")
    A = theta.algebra
    g_t = gns(theta)
    g_e = gns(eta)
    # (D theta : D eta)_{-i/2} = h_theta^{1/2} h_eta^{-1/2}
    c = matrix_function(theta.density, "sqrt") * matrix_function(eta.density, "inv_sqrt")
    u = g_e.Lambda @ A.rmult_matrix(c) @ g_t.Lambda_inv

    certs = {}
    certs["unitary"] = float(np.linalg.norm(u @ u.conj().T - np.eye(A.lin_dim)))
    res_pi = 0.0
    for i in range(A.lin_dim):
        x = A.basis_element(i)
        res_pi = max(res_pi, float(np.linalg.norm(
            u @ g_t.rep.apply(x) @ u.conj().T - g_e.rep.apply(x))))
    certs["intertwines_pi"] = res_pi
    J_t = modular_data(g_t).J
    J_e = modular_data(g_e).J
    certs["intertwines_J"] = float(np.linalg.norm(u @ J_t.mat - J_e.mat @ np.conj(u)))
    # cone: u maps vec(p), p >= 0, to the eta-cone {vec(q), q >= 0}
    rng = np.random.default_rng(11)
    res_cone = 0.0
    for _ in range(6):
        p = A.random_positive(rng)
        img = u @ p.coeffs
        q = A.from_coeffs(img)
        ev = np.min(q.eigvals())
        herm = (q - q.adjoint()).norm()
        res_cone = max(res_cone, max(0.0, -float(ev)), herm)
    certs["preserves_cone"] = res_cone
    worst = max(certs.values())
    if worst > scaled_tol(u, tol=tol) * 1e3:
        raise AlgebraError(f"canonical intertwiner failed certification: {certs}")
    return u, certs
