"""Example constructors and the classical induction oracle.

Finite groups with hand-written Cayley tables, the function algebra C(G) and
group algebra C[G] quantum groups, subgroup/quotient/trivial/full action
presets, unitary representations, the Frobenius character oracle, and the
Kac-Paljutkin 8-dimensional quantum group obtained by a cocycle twist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraError,
    Array,
    LegLayout,
    MultiMatrixAlgebra,
    generated_subalgebra,
    scaled_tol,
)
from .quantum_group import QuantumGroup, build_quantum_group


# ---------------------------------------------------------------------------
# Finite groups
# ---------------------------------------------------------------------------

@dataclass
class FiniteGroupData:
    """A finite group as a Cayley table on element indices."""

    name: str
    labels: list
    table: Array                    # table[i, j] = index of g_i g_j
    identity: int = 0

    @property
    def order(self) -> int:
        return len(self.labels)

    def __post_init__(self):
        n = self.order
        t = np.asarray(self.table, dtype=int)
        if t.shape != (n, n):
            raise AlgebraError("Cayley table has wrong shape")
        for i in range(n):
            if sorted(t[i, :]) != list(range(n)) or sorted(t[:, i]) != list(range(n)):
                raise AlgebraError("Cayley table is not a Latin square")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if t[t[i, j], k] != t[i, t[j, k]]:
                        raise AlgebraError("Cayley table is not associative")
        e = [i for i in range(n) if all(t[i, j] == j and t[j, i] == j for j in range(n))]
        if len(e) != 1:
            raise AlgebraError("group has no unique identity")
        self.identity = e[0]
        self.table = t
        self._inv = np.zeros(n, dtype=int)
        for i in range(n):
            inv = [j for j in range(n) if t[i, j] == self.identity]
            if len(inv) != 1:
                raise AlgebraError(f"element {self.labels[i]} has no unique inverse")
            self._inv[i] = inv[0]

    def mult(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self._inv[i])

    def index(self, label) -> int:
        return self.labels.index(label)

    def subgroup_indices(self, members) -> list:
        idx = sorted(self.index(m) if not isinstance(m, int) else m for m in members)
        s = set(idx)
        if self.identity not in s:
            raise AlgebraError("subgroup must contain the identity")
        for i in idx:
            if self.inv(i) not in s:
                raise AlgebraError("subgroup not closed under inverse")
            for j in idx:
                if self.mult(i, j) not in s:
                    raise AlgebraError("subgroup not closed under product")
        return idx

    def left_cosets(self, sub_idx) -> list:
        seen = set()
        cosets = []
        for g in range(self.order):
            if g in seen:
                continue
            coset = sorted(self.mult(g, h) for h in sub_idx)
            seen.update(coset)
            cosets.append(coset)
        return cosets

    def conjugacy_classes(self) -> list:
        seen = set()
        classes = []
        for g in range(self.order):
            if g in seen:
                continue
            cls = sorted({self.mult(self.mult(x, g), self.inv(x)) for x in range(self.order)})
            seen.update(cls)
            classes.append(cls)
        return classes


def _cyclic(n: int) -> FiniteGroupData:
    labels = [f"g{k}" for k in range(n)]
    table = np.array([[(i + j) % n for j in range(n)] for i in range(n)])
    return FiniteGroupData(f"Z{n}", labels, table)


def _symmetric3() -> FiniteGroupData:
    # permutations of {0,1,2} as tuples; order: e, r, r^2, then transpositions
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (2, 1, 0), (0, 2, 1)]
    labels = ["e", "r", "r2", "t01", "t02", "t12"]
    n = 6

    def compose(p, q):
        # (p . q)(x) = p(q(x))
        return tuple(p[q[k]] for k in range(3))

    table = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            table[i, j] = perms.index(compose(perms[i], perms[j]))
    return FiniteGroupData("S3", labels, table)


def _dihedral4() -> FiniteGroupData:
    # D4 = <r, s | r^4 = s^2 = e, s r s = r^-1>; elements r^k and s r^k
    labels = [f"r{k}" for k in range(4)] + [f"sr{k}" for k in range(4)]

    def mult(i, j):
        fi, ki = divmod(i, 4)
        fj, kj = divmod(j, 4)
        # (s^fi r^ki)(s^fj r^kj) = s^(fi+fj) r^(kj + (-1)^fj ki)
        f = (fi + fj) % 2
        k = (kj + (ki if fj == 0 else -ki)) % 4
        return f * 4 + k

    table = np.array([[mult(i, j) for j in range(8)] for i in range(8)])
    return FiniteGroupData("D4", labels, table)


def _quaternion8() -> FiniteGroupData:
    labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    # encode as pairs (sign, axis); multiplication of quaternion units
    unit_mult = {
        ("1", "1"): "1", ("1", "i"): "i", ("1", "j"): "j", ("1", "k"): "k",
        ("i", "1"): "i", ("j", "1"): "j", ("k", "1"): "k",
        ("i", "i"): "-1", ("j", "j"): "-1", ("k", "k"): "-1",
        ("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j",
        ("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j",
    }

    def parse(l):
        return (-1 if l.startswith("-") else 1, l.lstrip("-"))

    def mult(i, j):
        si, ui = parse(labels[i])
        sj, uj = parse(labels[j])
        prod = unit_mult[(ui, uj)]
        sp, up = parse(prod)
        s = si * sj * sp
        return labels.index(up if s == 1 else "-" + up)

    table = np.array([[mult(i, j) for j in range(8)] for i in range(8)])
    return FiniteGroupData("Q8", labels, table)


@lru_cache(maxsize=None)
def group_preset(name: str) -> FiniteGroupData:
    name = name.strip()
    if name.upper().startswith("Z"):
        return _cyclic(int(name[1:]))
    if name.upper() == "S3":
        return _symmetric3()
    if name.upper() == "D4":
        return _dihedral4()
    if name.upper() == "Q8":
        return _quaternion8()
    raise AlgebraError(f"unknown group preset {name!r}")


def subgroup_preset(G: FiniteGroupData, spec: str) -> list:
    """Named subgroups: 'e', 'G', 'C2', 'C3', 'C4', 'Z2', ... or an explicit
    comma-separated label list."""
    spec = spec.strip()
    if spec in ("e", "{e}", "trivial"):
        return [G.identity]
    if spec in ("G", "full", G.name):
        return list(range(G.order))
    if "," in spec:
        return G.subgroup_indices([s.strip() for s in spec.split(",")])
    key = spec.upper()
    if G.name == "S3":
        if key in ("C3", "A3", "Z3"):
            return G.subgroup_indices(["e", "r", "r2"])
        if key in ("C2", "Z2"):
            return G.subgroup_indices(["e", "t01"])
    if G.name == "D4":
        if key in ("C4", "Z4"):
            return G.subgroup_indices(["r0", "r1", "r2", "r3"])
        if key in ("C2", "Z2"):
            return G.subgroup_indices(["r0", "r2"])
    if G.name.startswith("Z"):
        n = G.order
        if key.startswith(("C", "Z")):
            m = int(key[1:])
            if n % m != 0:
                raise AlgebraError(f"Z{m} is not a subgroup of {G.name}")
            step = n // m
            return [(step * k) % n for k in range(m)]
    if G.name == "Q8":
        if key in ("C4", "Z4"):
            return G.subgroup_indices(["1", "-1", "i", "-i"])
        if key in ("C2", "Z2"):
            return G.subgroup_indices(["1", "-1"])
    raise AlgebraError(f"unknown subgroup spec {spec!r} for {G.name}")


# ---------------------------------------------------------------------------
# Unitary representations of the presets
# ---------------------------------------------------------------------------

def rep_preset(G: FiniteGroupData, label: str, sub_idx: list | None = None):
    """A unitary representation of the subgroup (default: whole group) as a
    list of matrices indexed by the subgroup's positional order."""
    members = sub_idx if sub_idx is not None else list(range(G.order))
    n = len(members)
    label = label.strip().lower()
    if label in ("trivial", "1"):
        return [np.eye(1) for _ in members]
    if label == "regular":
        mats = []
        for g in members:
            m = np.zeros((n, n))
            for col, h in enumerate(members):
                m[members.index(G.mult(g, h)), col] = 1.0
            mats.append(m)
        return mats
    if label == "sign":
        if G.name == "S3" and set(members) == set(range(6)):
            return [np.array([[1.0 if g < 3 else -1.0]]) for g in members]
        if G.name == "S3" and len(members) == 2:
            return [np.array([[1.0]]) if g == G.identity else np.array([[-1.0]])
                    for g in members]
        if len(members) == 2:
            return [np.array([[1.0]]) if g == G.identity else np.array([[-1.0]])
                    for g in members]
    if label.startswith("omega"):
        # characters of a cyclic subgroup generated by its first non-identity
        power = int(label[5:]) if len(label) > 5 else 1
        order = len(members)
        gen = _cyclic_generator(G, members)
        mats = []
        for g in members:
            k = _cyclic_log(G, gen, g, order)
            mats.append(np.array([[np.exp(2j * np.pi * power * k / order)]]))
        return mats
    if label == "std2" and G.name == "S3" and set(members) == set(range(6)):
        w = np.exp(2j * np.pi / 3)
        gen_images = {G.index("r"): np.diag([w, np.conj(w)]),
                      G.index("t01"): np.array([[0.0, 1.0], [1.0, 0.0]])}
        out = _rep_from_generators(G, members, gen_images)
        _verify_rep(G, members, out)
        return out
    if label == "2d" and G.name == "Q8":
        qi = np.array([[1j, 0], [0, -1j]])
        qj = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
        qk = qi @ qj
        mats = {"1": np.eye(2, dtype=complex), "-1": -np.eye(2, dtype=complex),
                "i": qi, "-i": -qi, "j": qj, "-j": -qj, "k": qk, "-k": -qk}
        out = [mats[G.labels[g]] for g in members]
        _verify_rep(G, members, out)
        return out
    raise AlgebraError(f"unknown representation preset {label!r}")


def _rep_from_generators(G: FiniteGroupData, members, gen_images: dict):
    """Extend generator images to the whole subgroup by word closure."""
    d = next(iter(gen_images.values())).shape[0]
    images = {G.identity: np.eye(d, dtype=complex)}
    images.update({g: np.asarray(m, dtype=complex) for g, m in gen_images.items()})
    changed = True
    while changed:
        changed = False
        known = list(images.items())
        for g, mg in known:
            for h, mh in gen_images.items():
                gh = G.mult(g, h)
                if gh not in images:
                    images[gh] = mg @ mh
                    changed = True
    missing = [g for g in members if g not in images]
    if missing:
        raise AlgebraError("generators do not generate the subgroup")
    return [images[g] for g in members]


def _cyclic_generator(G: FiniteGroupData, members) -> int:
    order = len(members)
    for g in members:
        k, x, seen = 1, g, {g}
        while x != G.identity:
            x = G.mult(x, g)
            k += 1
            if k > order:
                break
        if k == order:
            return g
    raise AlgebraError("subgroup is not cyclic")


def _cyclic_log(G: FiniteGroupData, gen: int, g: int, order: int) -> int:
    x = G.identity
    for k in range(order):
        if x == g:
            return k
        x = G.mult(x, gen)
    raise AlgebraError("element not in the cyclic subgroup")


def _verify_rep(G: FiniteGroupData, members, mats, tol: float | None = None):
    pos = {g: i for i, g in enumerate(members)}
    for a in members:
        for b in members:
            prod = G.mult(a, b)
            if prod not in pos:
                raise AlgebraError("representation domain is not a subgroup")
            res = np.linalg.norm(mats[pos[a]] @ mats[pos[b]] - mats[pos[prod]])
            if res > scaled_tol(mats[pos[a]], tol=tol):
                raise AlgebraError("matrices do not form a representation")
    for a in members:
        d = mats[pos[a]].shape[0]
        if np.linalg.norm(mats[pos[a]] @ mats[pos[a]].conj().T - np.eye(d)) > 1e-9:
            raise AlgebraError("representation is not unitary")


# ---------------------------------------------------------------------------
# Function algebra and group algebra quantum groups
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def make_function_algebra(group_name: str) -> QuantumGroup:
    """C(G): diagonal blocks, Delta(delta_g) = sum_{ab=g} delta_a x delta_b."""
    G = group_preset(group_name)
    n = G.order
    A = MultiMatrixAlgebra([1] * n)
    lay2 = LegLayout.of(A, A)
    delta = np.zeros((lay2.algebra.lin_dim, n), dtype=complex)
    for g in range(n):
        acc = lay2.algebra.zero()
        for a in range(n):
            for b in range(n):
                if G.mult(a, b) == g:
                    acc = acc + lay2.tensor(A.basis_element(a), A.basis_element(b))
        delta[:, g] = acc.coeffs
    qg = build_quantum_group(A, delta, name=f"C({G.name})")
    qg.group = G
    return qg


@lru_cache(maxsize=None)
def _group_algebra_realization(group_name: str):
    """Multi-matrix realization of C[G] via the regular representation.

    Returns (embedding, lambda_elements) with lambda_elements[g] the abstract
    element of the recovered block algebra corresponding to lambda_g."""
    G = group_preset(group_name)
    n = G.order
    regs = []
    for g in range(n):
        m = np.zeros((n, n))
        for h in range(n):
            m[G.mult(g, h), h] = 1.0
        regs.append(m)
    emb = generated_subalgebra(regs, n, rng=np.random.default_rng(41))
    lam = []
    for g in range(n):
        el, resid = emb.from_concrete(regs[g])
        if resid > 1e-9:
            raise AlgebraError("regular representation escaped its own span")
        lam.append(el)
    return G, emb, lam


@lru_cache(maxsize=None)
def make_group_algebra(group_name: str) -> QuantumGroup:
    """C[G] as a multi-matrix algebra with Delta(lambda_g) = lambda_g x lambda_g."""
    G, emb, lam = _group_algebra_realization(group_name)
    A = emb.sub
    n = G.order
    lay2 = LegLayout.of(A, A)
    # express the canonical basis through the lambda_g and push through Delta
    L = np.stack([l.coeffs for l in lam], axis=1)      # lin_dim x n (square)
    L_inv = np.linalg.inv(L)
    delta = np.zeros((lay2.algebra.lin_dim, A.lin_dim), dtype=complex)
    lam_pairs = [lay2.tensor(l, l).coeffs for l in lam]
    for idx in range(A.lin_dim):
        c = L_inv @ np.eye(A.lin_dim)[idx]
        delta[:, idx] = sum(c[g] * lam_pairs[g] for g in range(n))
    qg = build_quantum_group(A, delta, name=f"C[{G.name}]")
    qg.group = G
    qg.lambda_elements = lam
    qg.group_algebra_embedding = emb
    return qg


# ---------------------------------------------------------------------------
# Kac-Paljutkin preset
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def make_kac_paljutkin() -> QuantumGroup:
    """The 8-dimensional Kac-Paljutkin quantum group.

    Realized from the presentation with unitary generators x, y, z where x, y
    are self-adjoint group-likes generating a Klein group, z x z^-1 = y,
    z^2 = (1 + x + y - xy)/2, and
    Delta(z) = (1x1 + 1xX + Yx1 - YxX)/2 (z x z).
    The concrete block model is C^4 + M_2 with x = (1,1,-1,-1; diag(1,-1)),
    y = (1,1,-1,-1; diag(-1,1)), z = (1,-1,i,-i; swap).  The result is
    verified to be a quantum group that is neither commutative nor
    cocommutative; by the dimension-8 uniqueness theorem this pins it down up
    to isomorphism.
    """
    A = MultiMatrixAlgebra([1, 1, 1, 1, 2])
    lay2 = LegLayout.of(A, A)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    x = A.element([[[1.0]], [[1.0]], [[-1.0]], [[-1.0]], np.diag([1.0, -1.0])])
    y = A.element([[[1.0]], [[1.0]], [[-1.0]], [[-1.0]], np.diag([-1.0, 1.0])])
    z = A.element([[[1.0]], [[-1.0]], [[1j]], [[-1j]], swap])
    one = A.unit()
    # sanity of the defining relations in the block model
    for res in [(x * x - one).norm(), (y * y - one).norm(),
                (z * x - y * z).norm(), (z * y - x * z).norm(),
                (z * z - 0.5 * (one + x + y - x * y)).norm()]:
        if res > 1e-12:
            raise AlgebraError("Kac-Paljutkin block model violates its relations")
    basis_words = []
    for c in (0, 1):
        for b in (0, 1):
            for a in (0, 1):
                w = one
                for _ in range(a):
                    w = w * x
                for _ in range(b):
                    w = w * y
                for _ in range(c):
                    w = w * z
                basis_words.append(w)
    Wmat = np.stack([w.coeffs for w in basis_words], axis=1)
    if np.linalg.matrix_rank(Wmat) != 8:
        raise AlgebraError("Kac-Paljutkin word basis is degenerate")
    dx = lay2.tensor(x, x)
    dy = lay2.tensor(y, y)
    P = 0.5 * (lay2.tensor(one, one) + lay2.tensor(one, x)
               + lay2.tensor(y, one) - lay2.tensor(y, x))
    dz = P * lay2.tensor(z, z)
    d_words = []
    for c in (0, 1):
        for b in (0, 1):
            for a in (0, 1):
                w = lay2.tensor(one, one)
                for _ in range(a):
                    w = w * dx
                for _ in range(b):
                    w = w * dy
                for _ in range(c):
                    w = w * dz
                d_words.append(w)
    Dw = np.stack([w.coeffs for w in d_words], axis=1)
    delta = Dw @ np.linalg.inv(Wmat)
    qg = build_quantum_group(A, delta, name="KacPaljutkin8")
    # must be neither commutative nor cocommutative
    flip_mat = np.zeros_like(delta)
    for idx in range(A.lin_dim):
        dxi = lay2.algebra.from_coeffs(delta[:, idx])
        fl, _ = lay2.flip(dxi)
        flip_mat[:, idx] = fl.coeffs
    cocomm = float(np.linalg.norm(flip_mat - delta))
    if cocomm < 1e-6:
        raise AlgebraError("Kac-Paljutkin construction came out cocommutative")
    if all(n == 1 for n in A.block_dims):
        raise AlgebraError("Kac-Paljutkin construction came out commutative")
    qg.cocommutativity_defect = cocomm
    return qg


# ---------------------------------------------------------------------------
# Action presets
# ---------------------------------------------------------------------------

def make_subgroup_action(group_name: str, sub_spec: str):
    """alpha(f)(x, h) = f(xh) on M = C(G), N = C(H)."""
    M_qg = make_function_algebra(group_name)
    G = M_qg.group
    sub = subgroup_preset(G, sub_spec)
    m = len(sub)
    if m == G.order:
        N_qg = make_function_algebra(group_name)
    else:
        N_qg = _function_algebra_of_subgroup(group_name, tuple(sub))
    MA, NA = M_qg.algebra, N_qg.algebra
    lay = LegLayout.of(MA, NA)
    alpha = np.zeros((lay.algebra.lin_dim, MA.lin_dim), dtype=complex)
    for g in range(G.order):
        acc = lay.algebra.zero()
        for xi in range(G.order):
            for hi, h in enumerate(sub):
                if G.mult(xi, h) == g:
                    acc = acc + lay.tensor(MA.basis_element(xi), NA.basis_element(hi))
        alpha[:, g] = acc.coeffs
    return M_qg, N_qg, alpha, {"group": G, "subgroup": sub}


@lru_cache(maxsize=None)
def _function_algebra_of_subgroup(group_name: str, sub_tuple: tuple) -> QuantumGroup:
    G = group_preset(group_name)
    sub = list(sub_tuple)
    labels = [G.labels[h] for h in sub]
    pos = {h: i for i, h in enumerate(sub)}
    table = np.array([[pos[G.mult(a, b)] for b in sub] for a in sub])
    H = FiniteGroupData(f"{G.name}_sub{len(sub)}", labels, table)
    n = H.order
    A = MultiMatrixAlgebra([1] * n)
    lay2 = LegLayout.of(A, A)
    delta = np.zeros((lay2.algebra.lin_dim, n), dtype=complex)
    for g in range(n):
        acc = lay2.algebra.zero()
        for a in range(n):
            for b in range(n):
                if H.mult(a, b) == g:
                    acc = acc + lay2.tensor(A.basis_element(a), A.basis_element(b))
        delta[:, g] = acc.coeffs
    qg = build_quantum_group(A, delta, name=f"C({G.name}|{','.join(labels)})")
    qg.group = H
    return qg


def make_trivial_action(group_name: str, algebra_kind: str = "function"):
    """N = C (trivial subgroup), alpha(x) = x (x) 1."""
    M_qg = make_function_algebra(group_name) if algebra_kind == "function" \
        else make_group_algebra(group_name)
    NA = MultiMatrixAlgebra([1])
    lay2 = LegLayout.of(NA, NA)
    delta_triv = np.zeros((1, 1), dtype=complex)
    delta_triv[0, 0] = 1.0
    N_qg = build_quantum_group(NA, delta_triv, name="C(e)")
    lay = LegLayout.of(M_qg.algebra, NA)
    alpha = np.zeros((lay.algebra.lin_dim, M_qg.algebra.lin_dim), dtype=complex)
    for i in range(M_qg.algebra.lin_dim):
        alpha[:, i] = lay.tensor(M_qg.algebra.basis_element(i), NA.unit()).coeffs
    return M_qg, N_qg, alpha, {"group": getattr(M_qg, "group", None)}


def make_full_action(group_name: str, algebra_kind: str = "function"):
    """H = G: alpha = Delta_M."""
    M_qg = make_function_algebra(group_name) if algebra_kind == "function" \
        else make_group_algebra(group_name)
    return M_qg, M_qg, qg_delta_copy(M_qg), {"group": getattr(M_qg, "group", None)}


def qg_delta_copy(qg: QuantumGroup) -> Array:
    return qg.delta.copy()


def make_quotient_action(group_name: str, quotient_name: str, hom: str = "auto"):
    """alpha(lambda_g) = lambda_g (x) lambda_{pi(g)} on M = C[G], N = C[H].

    pi must be a surjective homomorphism; 'auto' picks the sign map S3 -> Z2,
    the parity map Z4 -> Z2 or the identity map.
    """
    M_qg = make_group_algebra(group_name)
    G = M_qg.group
    if quotient_name == group_name and hom == "auto":
        N_qg = make_group_algebra(group_name)
        pi = list(range(G.order))
        H = G
    else:
        N_qg = make_group_algebra(quotient_name)
        H = N_qg.group
        pi = _quotient_hom(G, H, hom)
    # verify multiplicativity and surjectivity
    for a in range(G.order):
        for b in range(G.order):
            if pi[G.mult(a, b)] != H.mult(pi[a], pi[b]):
                raise AlgebraError("quotient map is not a homomorphism")
    if set(pi) != set(range(H.order)):
        raise AlgebraError("quotient map is not surjective")
    MA, NA = M_qg.algebra, N_qg.algebra
    lamG = M_qg.lambda_elements
    lamH = N_qg.lambda_elements
    lay = LegLayout.of(MA, NA)
    LG = np.stack([l.coeffs for l in lamG], axis=1)
    LG_inv = np.linalg.inv(LG)
    alpha = np.zeros((lay.algebra.lin_dim, MA.lin_dim), dtype=complex)
    for idx in range(MA.lin_dim):
        c = LG_inv @ np.eye(MA.lin_dim)[idx]
        alpha[:, idx] = sum(c[g] * lay.tensor(lamG[g], lamH[pi[g]]).coeffs
                            for g in range(G.order))
    return M_qg, N_qg, alpha, {"group": G, "quotient": H, "pi": pi}


def _quotient_hom(G: FiniteGroupData, H: FiniteGroupData, hom: str) -> list:
    if hom != "auto":
        return [int(x) for x in hom.split(",")]
    if G.name == "S3" and H.order == 2:
        return [0 if g < 3 else 1 for g in range(6)]   # sign
    if G.name.startswith("Z") and H.name.startswith("Z"):
        n, m = G.order, H.order
        if n % m == 0:
            return [g % m for g in range(n)]
    if H.order == 1:
        return [0] * G.order
    raise AlgebraError(f"no automatic quotient map {G.name} -> {H.name}")


# ---------------------------------------------------------------------------
# Corepresentations of the presets
# ---------------------------------------------------------------------------

def classical_corep(N_qg: QuantumGroup, mats) -> tuple[AlgebraElement, int]:
    """U = sum_h delta_h (x) u(h) in C(H) (x) B(K) for a unitary rep u."""
    NA = N_qg.algebra
    d = mats[0].shape[0]
    BK = MultiMatrixAlgebra([d])
    lay = LegLayout.of(NA, BK)
    U = lay.algebra.zero()
    for h in range(NA.lin_dim):
        U = U + lay.tensor(NA.basis_element(h), BK.element([mats[h]]))
    return U, d


def cocommutative_corep(N_qg: QuantumGroup, grading: list) -> tuple[AlgebraElement, int]:
    """U = sum_h lambda_h (x) p_h for orthogonal projections p_h summing to 1.

    grading[k] = index of the group element attached to basis vector k of K."""
    H = N_qg.group
    d = len(grading)
    BK = MultiMatrixAlgebra([d])
    lay = LegLayout.of(N_qg.algebra, BK)
    U = lay.algebra.zero()
    for h in range(H.order):
        p = np.diag([1.0 if grading[k] == h else 0.0 for k in range(d)])
        if np.linalg.norm(p) == 0:
            continue
        U = U + lay.tensor(N_qg.lambda_elements[h], BK.element([p]))
    return U, d


def trivial_corep(N_qg: QuantumGroup, d: int) -> tuple[AlgebraElement, int]:
    BK = MultiMatrixAlgebra([d])
    lay = LegLayout.of(N_qg.algebra, BK)
    return lay.tensor(N_qg.algebra.unit(), BK.unit()), d


# ---------------------------------------------------------------------------
# Classical induction oracle and characters
# ---------------------------------------------------------------------------

def classical_induction_oracle(G: FiniteGroupData, sub_idx, mats) -> Array:
    """Induced character by the Frobenius formula:
    chi(g) = (1/|H|) sum_{x in G, x^-1 g x in H} chi_u(x^-1 g x)."""
    pos = {h: i for i, h in enumerate(sub_idx)}
    _verify_rep(G, list(sub_idx), mats)
    chi_u = {h: np.trace(mats[pos[h]]) for h in sub_idx}
    out = np.zeros(G.order, dtype=complex)
    for g in range(G.order):
        total = 0.0 + 0j
        for x in range(G.order):
            y = G.mult(G.mult(G.inv(x), g), x)
            if y in pos:
                total += chi_u[y]
        out[g] = total / len(sub_idx)
    return out


def corep_character(rho_abstract: AlgebraElement, layout: LegLayout) -> AlgebraElement:
    """chi_rho = (iota (x) Tr)(rho) for rho in M (x) B(K)."""
    tr = layout.factors[1].trace_vector()
    chi, _ = layout.slice(rho_abstract, 2, tr)
    return chi
