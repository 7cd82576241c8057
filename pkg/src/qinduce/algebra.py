"""Finite-dimensional *-algebra substrate.

Multi-matrix algebras (finite direct sums of full matrix blocks), their
elements, tensor-product leg layouts, slice maps, representations, block
structure recovery and matrix functions.  All scalars are complex doubles;
inner products are linear in the FIRST argument throughout.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray

_DEFAULT_TOL = 1e-9


def default_tol() -> float:
    """Base tolerance; override with the QINDUCE_TOL environment variable."""
    env = os.environ.get("QINDUCE_TOL")
    return float(env) if env else _DEFAULT_TOL


def scaled_tol(*mats, tol: float | None = None) -> float:
    """Tolerance scaled by the largest operator norm appearing in an expression."""
    t = default_tol() if tol is None else tol
    scale = 1.0
    for m in mats:
        if m is None:
            continue
        a = np.asarray(m)
        if a.size == 0:
            continue
        if a.ndim <= 1:
            scale = max(scale, float(np.linalg.norm(a)))
        else:
            scale = max(scale, float(np.linalg.norm(a, 2)))
    return t * scale


def inner(u: Array, v: Array) -> complex:
    """Inner product <u, v>, linear in the first argument."""
    return complex(np.vdot(v, u))


class AlgebraError(ValueError):
    """Structural failure: invalid input data or a broken algebraic invariant."""


class NumericalBreakdown(RuntimeError):
    """An iteration or decomposition failed to behave as finite-dim theory demands."""


# ---------------------------------------------------------------------------
# Multi-matrix algebras and their elements
# ---------------------------------------------------------------------------

class MultiMatrixAlgebra:
    """A finite direct sum of full matrix blocks with the canonical
    matrix-unit basis e^(k)_{ij}, ordered lexicographically by (k, i, j)."""

    def __init__(self, block_dims):
        dims = tuple(int(n) for n in block_dims)
        if not dims or any(n <= 0 for n in dims):
            raise AlgebraError(f"invalid block dimensions {block_dims!r}")
        self.block_dims = dims
        self.lin_dim = int(sum(n * n for n in dims))
        self.total_dim = int(sum(dims))  # carrier dim of the defining rep
        self._offsets = np.cumsum([0] + [n * n for n in dims])

    def __repr__(self):
        return f"MultiMatrixAlgebra({list(self.block_dims)})"

    def __eq__(self, other):
        return isinstance(other, MultiMatrixAlgebra) and self.block_dims == other.block_dims

    def __hash__(self):
        return hash(self.block_dims)

    # -- element constructors -------------------------------------------------

    def element(self, blocks) -> "AlgebraElement":
        blks = [np.array(b, dtype=complex).reshape(n, n)
                for b, n in zip(blocks, self.block_dims)]
        if len(blks) != len(self.block_dims):
            raise AlgebraError("block count mismatch")
        return AlgebraElement(self, blks)

    def from_coeffs(self, coeffs) -> "AlgebraElement":
        c = np.asarray(coeffs, dtype=complex).ravel()
        if c.size != self.lin_dim:
            raise AlgebraError(f"coefficient vector of length {c.size}, expected {self.lin_dim}")
        blocks = [c[self._offsets[k]:self._offsets[k + 1]].reshape(n, n)
                  for k, n in enumerate(self.block_dims)]
        return AlgebraElement(self, blocks)

    def zero(self) -> "AlgebraElement":
        return self.element([np.zeros((n, n)) for n in self.block_dims])

    def unit(self) -> "AlgebraElement":
        return self.element([np.eye(n) for n in self.block_dims])

    def basis_element(self, idx: int) -> "AlgebraElement":
        c = np.zeros(self.lin_dim, dtype=complex)
        c[idx] = 1.0
        return self.from_coeffs(c)

    def basis(self):
        return [self.basis_element(i) for i in range(self.lin_dim)]

    def basis_triples(self):
        """Canonical ordering: (block, row, col) lexicographic."""
        out = []
        for k, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    out.append((k, i, j))
        return out

    def matrix_unit(self, k: int, i: int, j: int) -> "AlgebraElement":
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[k][i, j] = 1.0
        return AlgebraElement(self, blocks)

    def random_element(self, rng: np.random.Generator, hermitian: bool = False) -> "AlgebraElement":
        blocks = []
        for n in self.block_dims:
            b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            if hermitian:
                b = (b + b.conj().T) / 2
            blocks.append(b)
        return self.element(blocks)

    def random_positive(self, rng: np.random.Generator, invertible: bool = True) -> "AlgebraElement":
        x = self.random_element(rng)
        p = x.adjoint() * x
        if invertible:
            p = p + 0.1 * self.unit()
        return p

    # -- multiplication operators on coefficient vectors ----------------------

    def lmult_matrix(self, x: "AlgebraElement") -> Array:
        """Matrix of y -> x y on canonical coefficients (row-major vec per block)."""
        mats = [np.kron(b, np.eye(n)) for b, n in zip(x.blocks, self.block_dims)]
        return _block_diag(mats)

    def rmult_matrix(self, x: "AlgebraElement") -> Array:
        """Matrix of y -> y x on canonical coefficients."""
        mats = [np.kron(np.eye(n), b.T) for b, n in zip(x.blocks, self.block_dims)]
        return _block_diag(mats)

    def adjoint_matrix(self) -> Array:
        """Real matrix A with coeffs(x*) = A conj(coeffs(x))."""
        A = np.zeros((self.lin_dim, self.lin_dim))
        for idx, (k, i, j) in enumerate(self.basis_triples()):
            jidx = self.basis_index(k, j, i)
            A[jidx, idx] = 1.0
        return A

    def basis_index(self, k: int, i: int, j: int) -> int:
        n = self.block_dims[k]
        return int(self._offsets[k] + i * n + j)

    def trace_vector(self) -> Array:
        """Covector of the un-normalized block trace."""
        t = np.zeros(self.lin_dim, dtype=complex)
        for idx, (k, i, j) in enumerate(self.basis_triples()):
            if i == j:
                t[idx] = 1.0
        return t

    def multiplication_closes(self, tol: float | None = None) -> bool:
        """Product of two basis elements is a basis element or zero."""
        for (k, i, j) in self.basis_triples():
            for (l, p, q) in self.basis_triples():
                prod = self.matrix_unit(k, i, j) * self.matrix_unit(l, p, q)
                c = prod.coeffs
                nz = np.flatnonzero(np.abs(c) > scaled_tol(tol=tol))
                if len(nz) > 1 or (len(nz) == 1 and abs(c[nz[0]] - 1.0) > scaled_tol(tol=tol)):
                    return False
        return True


class AlgebraElement:
    """Element of a MultiMatrixAlgebra, stored as per-block dense matrices."""

    __slots__ = ("parent", "blocks")

    def __init__(self, parent: MultiMatrixAlgebra, blocks):
        self.parent = parent
        self.blocks = [np.asarray(b, dtype=complex) for b in blocks]

    @property
    def coeffs(self) -> Array:
        return np.concatenate([b.ravel() for b in self.blocks])

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.parent, [-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement(self.parent, [a @ b for a, b in zip(self.blocks, other.blocks)])
        return AlgebraElement(self.parent, [complex(other) * a for a in self.blocks])

    def __rmul__(self, scalar):
        return AlgebraElement(self.parent, [complex(scalar) * a for a in self.blocks])

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.parent, [b.conj().T for b in self.blocks])

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def norm(self) -> float:
        """Operator norm of the block realization."""
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def trace(self) -> complex:
        return complex(sum(np.trace(b) for b in self.blocks))

    def block_diag(self) -> Array:
        return _block_diag(self.blocks)

    def is_hermitian(self, tol: float | None = None) -> bool:
        return (self - self.adjoint()).norm() <= scaled_tol(self.block_diag(), tol=tol)

    def eigvals(self) -> Array:
        return np.concatenate([np.linalg.eigvalsh((b + b.conj().T) / 2) for b in self.blocks])

    def _check(self, other):
        if other.parent != self.parent:
            raise AlgebraError("algebra mismatch")

    def __repr__(self):
        return f"AlgebraElement({self.parent!r})"


def _block_diag(mats) -> Array:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return out


def block_diag_embedding(A: MultiMatrixAlgebra) -> Array:
    """Matrix of the defining representation on coefficient vectors:
    coeffs -> vec of the total_dim x total_dim block-diagonal matrix."""
    D = A.total_dim
    E = np.zeros((D * D, A.lin_dim), dtype=complex)
    starts = np.cumsum([0] + list(A.block_dims))
    for idx, (k, i, j) in enumerate(A.basis_triples()):
        r, c = starts[k] + i, starts[k] + j
        E[r * D + c, idx] = 1.0
    return E


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

@dataclass
class Representation:
    """A *-representation given by its values on the canonical basis."""

    algebra: MultiMatrixAlgebra
    dim: int
    tensor: Array  # shape (lin_dim, dim, dim)

    def apply(self, x: AlgebraElement) -> Array:
        return np.tensordot(x.coeffs, self.tensor, axes=(0, 0))

    def apply_coeffs(self, coeffs: Array) -> Array:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.tensor, axes=(0, 0))

    def basis_matrices(self):
        return [self.tensor[i] for i in range(self.algebra.lin_dim)]

    def vector_functional(self, v: Array, w: Array) -> Array:
        """Covector of omega_{v,w}(x) = <rep(x) v, w> on canonical coefficients."""
        return np.einsum("j,pjk,k->p", np.conj(w), self.tensor, v)

    def is_star_hom(self, rng: np.random.Generator | None = None, tol: float | None = None) -> bool:
        rng = rng or np.random.default_rng(0)
        for _ in range(4):
            x = self.algebra.random_element(rng)
            y = self.algebra.random_element(rng)
            lhs = self.apply(x * y) - self.apply(x) @ self.apply(y)
            adj = self.apply(x.adjoint()) - self.apply(x).conj().T
            if np.linalg.norm(lhs) > scaled_tol(self.apply(x), self.apply(y), tol=tol):
                return False
            if np.linalg.norm(adj) > scaled_tol(self.apply(x), tol=tol):
                return False
        return True


def defining_representation(A: MultiMatrixAlgebra) -> Representation:
    """Block-diagonal realization on C^total_dim."""
    D = A.total_dim
    T = np.zeros((A.lin_dim, D, D), dtype=complex)
    starts = np.cumsum([0] + list(A.block_dims))
    for idx, (k, i, j) in enumerate(A.basis_triples()):
        T[idx, starts[k] + i, starts[k] + j] = 1.0
    return Representation(A, D, T)


def left_regular_representation(A: MultiMatrixAlgebra) -> Representation:
    """Left multiplication on the Hilbert-Schmidt space (dim = lin_dim)."""
    T = np.zeros((A.lin_dim, A.lin_dim, A.lin_dim), dtype=complex)
    for idx in range(A.lin_dim):
        T[idx] = A.lmult_matrix(A.basis_element(idx))
    return Representation(A, A.lin_dim, T)


def full_matrix_algebra(d: int) -> MultiMatrixAlgebra:
    """B(C^d) as a single-block algebra."""
    return MultiMatrixAlgebra([d])


def identity_representation(d: int) -> Representation:
    """B(C^d) acting as itself."""
    return defining_representation(full_matrix_algebra(d))


# ---------------------------------------------------------------------------
# Leg layouts (tensor products of algebras)
# ---------------------------------------------------------------------------

class LegLayout:
    """An ordered tensor product of multi-matrix algebras.

    Provides the canonical product algebra, conversions between canonical
    coefficients and the lexicographic tensor of factor coefficients, leg
    embeddings, permutations, slices, and concrete representations."""

    _cache: dict = {}

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.n_legs = len(self.factors)
        block_dims = []
        for combo in itertools.product(*[range(len(f.block_dims)) for f in self.factors]):
            block_dims.append(int(np.prod([f.block_dims[k] for f, k in zip(self.factors, combo)])))
        self.algebra = MultiMatrixAlgebra(block_dims) if self.factors else MultiMatrixAlgebra([1])
        self.factor_dims = tuple(f.lin_dim for f in self.factors)
        self._lex_of_index = self._build_index_map()
        self._index_of_lex = np.empty_like(self._lex_of_index)
        self._index_of_lex[self._lex_of_index] = np.arange(self.algebra.lin_dim)

    @staticmethod
    def of(*factors) -> "LegLayout":
        key = tuple(f.block_dims for f in factors)
        if key not in LegLayout._cache:
            LegLayout._cache[key] = LegLayout(factors)
        return LegLayout._cache[key]

    def _build_index_map(self) -> Array:
        """lex_of_index[p] = flat index of the factor-basis tuple of product
        basis element p, in mixed radix over factor lin_dims."""
        strides = np.ones(self.n_legs, dtype=np.int64)
        for i in range(self.n_legs - 2, -1, -1):
            strides[i] = strides[i + 1] * self.factor_dims[i + 1]
        lex = np.zeros(self.algebra.lin_dim, dtype=np.int64)
        pos = 0
        for combo in itertools.product(*[range(len(f.block_dims)) for f in self.factors]):
            ns = [f.block_dims[k] for f, k in zip(self.factors, combo)]
            rows = list(itertools.product(*[range(n) for n in ns]))
            for ii in rows:
                for jj in rows:
                    t = 0
                    for leg in range(self.n_legs):
                        b = self.factors[leg].basis_index(combo[leg], ii[leg], jj[leg])
                        t += b * strides[leg]
                    lex[pos] = t
                    pos += 1
        return lex

    # -- conversions -----------------------------------------------------------

    def to_lex(self, coeffs: Array) -> Array:
        """Canonical coefficients -> tensor with one axis per leg."""
        flat = np.zeros(int(np.prod(self.factor_dims)), dtype=complex)
        flat[self._lex_of_index] = np.asarray(coeffs, dtype=complex)
        return flat.reshape(self.factor_dims)

    def from_lex(self, tensor: Array) -> Array:
        return np.asarray(tensor, dtype=complex).ravel()[self._lex_of_index]

    # -- constructions ---------------------------------------------------------

    def tensor(self, *elements) -> AlgebraElement:
        if len(elements) != self.n_legs:
            raise AlgebraError("one element per leg required")
        t = np.array([1.0 + 0j])
        for el, f in zip(elements, self.factors):
            if el.parent != f:
                raise AlgebraError("element/leg algebra mismatch")
            t = np.multiply.outer(t, el.coeffs)
        return self.algebra.from_coeffs(self.from_lex(t[0]))

    def embed_map(self, source: "LegLayout", positions) -> Array:
        """Matrix of the unital *-embedding placing source legs at `positions`
        (1-based, strictly increasing), identity elsewhere."""
        positions = tuple(int(p) for p in positions)
        if len(positions) != source.n_legs:
            raise AlgebraError("positions/arity mismatch")
        if any(p < 1 or p > self.n_legs for p in positions) or list(positions) != sorted(set(positions)):
            raise AlgebraError(f"invalid positions {positions}")
        for p, f in zip(positions, source.factors):
            if self.factors[p - 1] != f:
                raise AlgebraError(f"target leg {p} does not match source factor")
        out = np.zeros((self.algebra.lin_dim, source.algebra.lin_dim), dtype=complex)
        others = [i for i in range(self.n_legs) if (i + 1) not in positions]
        unit_t = np.array([1.0 + 0j])
        for i in others:
            unit_t = np.multiply.outer(unit_t, self.factors[i].unit().coeffs)
        for s in range(source.algebra.lin_dim):
            src_lex = source.to_lex(_unit_vec(source.algebra.lin_dim, s))
            full = np.multiply.outer(src_lex, unit_t[0] if others else np.array(1.0 + 0j))
            # axes: source legs first, then the others; permute into place
            order = [positions[i] - 1 for i in range(source.n_legs)] + others
            inv = np.argsort(order)
            full = np.transpose(full.reshape([source.factor_dims[i] for i in range(source.n_legs)]
                                             + [self.factor_dims[i] for i in others]), inv)
            out[:, s] = self.from_lex(full)
        return out

    def embed(self, x: AlgebraElement, source: "LegLayout", positions) -> AlgebraElement:
        m = self.embed_map(source, positions)
        return self.algebra.from_coeffs(m @ x.coeffs)

    def permute(self, x: AlgebraElement, perm) -> tuple[AlgebraElement, "LegLayout"]:
        """Reorder legs: new leg i is old leg perm[i] (0-based)."""
        perm = list(perm)
        new_layout = LegLayout.of(*[self.factors[p] for p in perm])
        t = self.to_lex(x.coeffs)
        return new_layout.algebra.from_coeffs(new_layout.from_lex(np.transpose(t, perm))), new_layout

    def slice(self, x: AlgebraElement, leg: int, functional: Array) -> tuple[AlgebraElement, "LegLayout"]:
        """Apply a functional (covector on the leg's canonical basis) to one leg
        (1-based); returns the reduced element and layout."""
        i = leg - 1
        t = self.to_lex(x.coeffs)
        red = np.tensordot(t, np.asarray(functional, dtype=complex), axes=(i, 0))
        rest = [f for j, f in enumerate(self.factors) if j != i]
        if not rest:
            scalar_alg = MultiMatrixAlgebra([1])
            return scalar_alg.from_coeffs(np.array([red])), LegLayout.of(scalar_alg)
        new_layout = LegLayout.of(*rest)
        return new_layout.algebra.from_coeffs(new_layout.from_lex(red)), new_layout

    def flip(self, x: AlgebraElement) -> tuple[AlgebraElement, "LegLayout"]:
        """The flip *-isomorphism A (x) B -> B (x) A (two-leg layouts)."""
        if self.n_legs != 2:
            raise AlgebraError("flip is defined for two-leg layouts")
        return self.permute(x, [1, 0])

    # -- concrete representations ---------------------------------------------

    def represent(self, x: AlgebraElement, reps) -> Array:
        """Concrete operator on the tensor product of the reps' carriers."""
        if len(reps) != self.n_legs:
            raise AlgebraError("one representation per leg required")
        t = self.to_lex(x.coeffs)
        # contract leg by leg: after processing leg i the axes are
        # (remaining basis axes..., out_1, in_1, ..., out_i, in_i)
        for rep in reps:
            t = np.tensordot(t, rep.tensor, axes=(0, 0))
        dims = [r.dim for r in reps]
        n = self.n_legs
        axes_out = [2 * i for i in range(n)]
        axes_in = [2 * i + 1 for i in range(n)]
        t = np.transpose(t, axes_out + axes_in)
        d = int(np.prod(dims))
        return t.reshape(d, d)

    def represented_functional(self, leg: int, rep: Representation, v: Array, w: Array) -> Array:
        return rep.vector_functional(v, w)


def _unit_vec(n: int, i: int) -> Array:
    v = np.zeros(n, dtype=complex)
    v[i] = 1.0
    return v


def tensor_algebra(A: MultiMatrixAlgebra, B: MultiMatrixAlgebra):
    """Tensor product algebra with the bilinear embedding (a, b) -> a (x) b."""
    layout = LegLayout.of(A, B)

    def embed(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        return layout.tensor(a, b)

    return layout.algebra, embed, layout


# ---------------------------------------------------------------------------
# Concrete tensor-operator helpers
# ---------------------------------------------------------------------------

def op_embed(X: Array, dims, legs) -> Array:
    """Embed operator X acting on the given legs (1-based) of a Hilbert tensor
    product with factor dimensions `dims`, identity on the other legs."""
    legs = [l - 1 for l in legs]
    n = len(dims)
    others = [i for i in range(n) if i not in legs]
    d_legs = int(np.prod([dims[i] for i in legs]))
    X = np.asarray(X, dtype=complex).reshape([dims[i] for i in legs] * 2)
    full = np.multiply.outer(X, np.eye(int(np.prod([dims[i] for i in others])) if others else 1,
                                       dtype=complex).reshape([dims[i] for i in others] * 2))
    # axes: out_legs, in_legs, out_others, in_others -> interleave into canonical order
    k = len(legs)
    m = len(others)
    order_out = [None] * n
    order_in = [None] * n
    for pos, i in enumerate(legs):
        order_out[i] = pos
        order_in[i] = k + pos
    for pos, i in enumerate(others):
        order_out[i] = 2 * k + pos
        order_in[i] = 2 * k + m + pos
    full = np.transpose(full, [order_out[i] for i in range(n)] + [order_in[i] for i in range(n)])
    D = int(np.prod(dims))
    return full.reshape(D, D)


def hs_permutation(dims, perm) -> Array:
    """Unitary P with P(v_1 (x) ... (x) v_n) = v_{perm[0]} (x) ... (x) v_{perm[n-1]}."""
    D = int(np.prod(dims))
    P = np.zeros((D, D))
    idx = np.arange(D).reshape(dims)
    src = np.transpose(idx, perm).ravel()
    P[np.arange(D), src] = 1.0
    return P


def op_slice(X: Array, dims, leg: int, F: Array) -> Array:
    """(iota (x) f (x) iota)(X) for f(A) = Tr(F A) applied on one concrete leg."""
    n = len(dims)
    i = leg - 1
    t = np.asarray(X, dtype=complex).reshape(list(dims) * 2)
    t = np.tensordot(t, np.asarray(F, dtype=complex), axes=([n + i, i], [0, 1]))
    rest = [d for j, d in enumerate(dims) if j != i]
    d = int(np.prod(rest)) if rest else 1
    # tensordot leaves axes ordered (out_rest..., in_rest...)
    return t.reshape(d, d)


def vector_functional_matrix(v: Array, w: Array) -> Array:
    """F with Tr(F A) = <A v, w> = omega_{v,w}(A)."""
    return np.outer(v, np.conj(w))


def expand_leg(X: Array, dims, leg: int, basis_mats) -> tuple[list[Array], float]:
    """Expand a concrete operator over a matrix basis on one leg:
    X = sum_mu C_mu (x at position leg) B_mu.  Returns ([C_mu], residual)."""
    n = len(dims)
    i = leg - 1
    B = np.stack([np.asarray(b, dtype=complex) for b in basis_mats])
    nb = B.shape[0]
    G = np.einsum("aij,bij->ab", B.conj(), B)
    t = np.asarray(X, dtype=complex).reshape(list(dims) * 2)
    # raw_mu = contraction of X against conj(B_mu) on the chosen leg
    raw = np.tensordot(t, B.conj(), axes=([i, n + i], [1, 2]))  # (..., nb)
    raw = np.moveaxis(raw, -1, 0)
    coeffs = np.tensordot(np.linalg.pinv(G), raw, axes=(1, 0))
    rest = [d for j, d in enumerate(dims) if j != i]
    dr = int(np.prod(rest)) if rest else 1
    Cs = [coeffs[mu].reshape(dr, dr) for mu in range(nb)]
    # residual of the reconstruction
    rec = np.zeros_like(np.asarray(X, dtype=complex))
    for mu in range(nb):
        rec = rec + _place_product(Cs[mu], B[mu], dims, i)
    resid = float(np.linalg.norm(rec - X) / max(1.0, np.linalg.norm(X)))
    return Cs, resid


def _place_product(C: Array, B: Array, dims, i: int) -> Array:
    n = len(dims)
    rest = [d for j, d in enumerate(dims) if j != i]
    t = np.multiply.outer(C.reshape(rest + rest) if rest else np.array(C).reshape(()),
                          B)
    # axes of t: out_rest, in_rest, out_i, in_i
    m = len(rest)
    order_out, order_in = [None] * n, [None] * n
    pos = 0
    for j in range(n):
        if j == i:
            order_out[j] = 2 * m
            order_in[j] = 2 * m + 1
        else:
            order_out[j] = pos
            order_in[j] = m + pos
            pos += 1
    t = np.transpose(t, [order_out[j] for j in range(n)] + [order_in[j] for j in range(n)])
    D = int(np.prod(dims))
    return t.reshape(D, D)


# ---------------------------------------------------------------------------
# Linear maps between algebras
# ---------------------------------------------------------------------------

@dataclass
class LinearAlgebraMap:
    """A linear map between multi-matrix algebras in canonical bases."""

    source: MultiMatrixAlgebra
    target: MultiMatrixAlgebra
    matrix: Array
    is_star_hom: bool = False
    is_unital: bool = False

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.parent != self.source:
            raise AlgebraError("source algebra mismatch")
        return self.target.from_coeffs(self.matrix @ x.coeffs)

    def compose(self, other: "LinearAlgebraMap") -> "LinearAlgebraMap":
        if other.target != self.source:
            raise AlgebraError("composition mismatch")
        return LinearAlgebraMap(other.source, self.target, self.matrix @ other.matrix)

    def verify_star_hom(self, rng: np.random.Generator | None = None,
                        tol: float | None = None) -> float:
        """Largest multiplicativity/adjoint residual over all basis pairs."""
        src = self.source
        worst = 0.0
        images = [self(src.basis_element(i)) for i in range(src.lin_dim)]
        for i in range(src.lin_dim):
            for j in range(src.lin_dim):
                prod = self(src.basis_element(i) * src.basis_element(j))
                worst = max(worst, (prod - images[i] * images[j]).norm())
        adjm = self.target.adjoint_matrix() @ np.conj(self.matrix) @ src.adjoint_matrix()
        worst = max(worst, float(np.linalg.norm(adjm - self.matrix)))
        self.is_star_hom = worst <= scaled_tol(self.matrix, tol=tol)
        unit_res = (self(src.unit()) - self.target.unit()).norm()
        self.is_unital = unit_res <= scaled_tol(self.matrix, tol=tol)
        return worst


# ---------------------------------------------------------------------------
# Matrix functions
# ---------------------------------------------------------------------------

def matrix_function(h: AlgebraElement, kind: str, t: float | complex | None = None) -> AlgebraElement:
    """Blockwise functional calculus for positive invertible elements.

    kind: 'power_it' (h^{it}), 'power' (h^t, real t), 'sqrt', 'inv_sqrt',
    'inv', 'log', 'exp'.  'exp' accepts any hermitian element."""
    out = []
    for b in h.blocks:
        if np.linalg.norm(b - b.conj().T) > scaled_tol(b):
            raise AlgebraError("matrix_function requires a hermitian element")
        w, U = np.linalg.eigh((b + b.conj().T) / 2)
        if kind != "exp" and np.min(w) <= scaled_tol(b):
            raise AlgebraError(f"non-positive spectrum (min eigenvalue {np.min(w):.3e})")
        if kind == "power_it":
            f = np.exp(1j * complex(t) * np.log(w))
        elif kind == "power":
            f = np.power(w, float(t))
        elif kind == "sqrt":
            f = np.sqrt(w)
        elif kind == "inv_sqrt":
            f = 1.0 / np.sqrt(w)
        elif kind == "inv":
            f = 1.0 / w
        elif kind == "log":
            f = np.log(w)
        elif kind == "exp":
            f = np.exp(w)
        else:
            raise AlgebraError(f"unknown matrix function {kind!r}")
        out.append(U @ np.diag(f) @ U.conj().T)
    return AlgebraElement(h.parent, out)


def principal_log_unitary(U: Array) -> Array:
    """Principal logarithm of a unitary matrix (eigenphases in (-pi, pi])."""
    w, V = np.linalg.eig(U)
    if np.max(np.abs(np.abs(w) - 1.0)) > 1e-6:
        raise NumericalBreakdown("principal_log_unitary: input is not unitary")
    # unitary matrices are normal; orthonormalize the eigenbasis for stability
    V, _ = np.linalg.qr(V)
    # refine eigenvalues against the orthonormal basis
    w = np.diag(V.conj().T @ U @ V)
    return V @ np.diag(np.log(w / np.abs(w))) @ V.conj().T


# ---------------------------------------------------------------------------
# Generated subalgebras and block-structure recovery
# ---------------------------------------------------------------------------

@dataclass
class SubalgebraEmbedding:
    """A unital *-subalgebra of B(C^D) with recovered multi-matrix structure.

    `units[idx]` is the concrete matrix of the canonical basis element idx of
    `sub`; `coeff_matrix` maps sub coefficients to vec'd concrete matrices."""

    sub: MultiMatrixAlgebra
    ambient_dim: int
    units: list = field(default_factory=list)
    coeff_matrix: Array | None = None
    _pinv: Array | None = None

    def to_concrete(self, x: AlgebraElement) -> Array:
        return np.tensordot(x.coeffs, np.stack(self.units), axes=(0, 0))

    def from_concrete(self, mat: Array, tol: float | None = None) -> tuple[AlgebraElement, float]:
        v = np.asarray(mat, dtype=complex).ravel()
        if self._pinv is None:
            self._pinv = np.linalg.pinv(self.coeff_matrix)
        c = self._pinv @ v
        resid = float(np.linalg.norm(self.coeff_matrix @ c - v))
        return self.sub.from_coeffs(c), resid

    def representation(self) -> Representation:
        return Representation(self.sub, self.ambient_dim, np.stack(self.units))


def _orthonormalize(vectors: Array, tol: float) -> Array:
    """Rows of `vectors` -> orthonormal rows spanning the same space."""
    if vectors.size == 0:
        return vectors
    u, s, vh = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return vh[:rank]


def span_closure(gens: list, dim: int, tol: float | None = None,
                 max_iter: int | None = None) -> Array:
    """Orthonormal basis (as vec'd rows) of the unital *-algebra generated by
    the given concrete matrices, via word closure under left multiplication."""
    t = default_tol() if tol is None else tol
    gset = [np.asarray(g, dtype=complex) for g in gens]
    gset = gset + [g.conj().T for g in gset]
    rows = [np.eye(dim, dtype=complex).ravel()] + [g.ravel() for g in gset]
    basis = _orthonormalize(np.stack(rows), t)
    limit = max_iter if max_iter is not None else dim * dim + 1
    for _ in range(limit):
        mats = basis.reshape(-1, dim, dim)
        new_rows = [basis]
        for g in gset:
            new_rows.append(np.einsum("ij,ajk->aik", g, mats).reshape(-1, dim * dim))
        stacked = np.concatenate(new_rows, axis=0)
        nb = _orthonormalize(stacked, t)
        if nb.shape[0] == basis.shape[0]:
            return nb
        basis = nb
    raise NumericalBreakdown("subalgebra closure did not stabilize")


def _cluster_eigvals(w: Array, tol: float) -> list:
    """Group the sorted eigenvalues into clusters at resolution tol."""
    clusters = []
    current = [0]
    for i in range(1, len(w)):
        if abs(w[i] - w[i - 1]) <= tol:
            current.append(i)
        else:
            clusters.append(current)
            current = [i]
    clusters.append(current)
    return clusters


def recover_structure(span_rows: Array, dim: int, rng: np.random.Generator | None = None,
                      tol: float | None = None) -> SubalgebraEmbedding:
    """Recover the multi-matrix block structure of a concrete unital
    *-subalgebra given an orthonormal spanning set (vec'd rows).

    Uses spectral projections of the center to split into factors, then builds
    a concrete system of matrix units per factor."""
    t = default_tol() if tol is None else tol
    rng = rng or np.random.default_rng(7)
    m = span_rows.shape[0]
    mats = span_rows.reshape(m, dim, dim)

    # center: elements commuting with the whole span
    comm_rows = []
    for a in mats:
        comm_rows.append(np.einsum("ij,bjk->bik", a, mats).reshape(m, -1)
                         - np.einsum("bij,jk->bik", mats, a).reshape(m, -1))
    C = np.concatenate(comm_rows, axis=1)  # (m, m*dim^2); center = left null space
    u, s, vh = np.linalg.svd(C, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    ker = [u[:, i].conj() for i in range(m) if (i >= len(s) or s[i] <= t * max(1.0, smax))]
    center_mats = [np.tensordot(k, mats, axes=(0, 0)) for k in ker]

    # generic hermitian central element; its eigenvalue clusters give the
    # minimal central projections (deterministic under the seeded rng)
    z = np.zeros((dim, dim), dtype=complex)
    for c in center_mats:
        z = z + rng.standard_normal() * (c + c.conj().T) / 2
        z = z + rng.standard_normal() * 1j * (c - c.conj().T) / 2
    w, U = np.linalg.eigh(z)
    clusters = _cluster_eigvals(w, max(1e3 * t, t * max(1.0, np.max(np.abs(w)))))
    projections = []
    for cl in clusters:
        P = U[:, cl] @ U[:, cl].conj().T
        projections.append(P)

    blocks = []
    for P in projections:
        sub_rows = _orthonormalize(np.einsum("ij,ajk,kl->ail", P, mats, P).reshape(m, -1), t)
        nsq = sub_rows.shape[0]
        n = int(round(np.sqrt(nsq)))
        if n * n != nsq:
            raise NumericalBreakdown(f"factor dimension {nsq} is not a perfect square")
        blocks.append((n, P, sub_rows.reshape(nsq, dim, dim)))

    # deterministic block order: by size, then by first support index
    def support_key(P):
        d = np.real(np.diag(P))
        nz = np.flatnonzero(d > 0.5 / dim)
        return int(nz[0]) if len(nz) else 0

    blocks.sort(key=lambda b: (b[0], support_key(b[1])))

    units: list[Array] = []
    for n, P, factor_mats in blocks:
        units.extend(_matrix_units_of_factor(factor_mats, P, n, dim, rng, t))

    sub = MultiMatrixAlgebra([b[0] for b in blocks])
    E = np.stack([u.ravel() for u in units], axis=1)
    emb = SubalgebraEmbedding(sub, dim, units, E)
    _verify_matrix_units(emb, t)
    return emb


def _matrix_units_of_factor(factor_mats: Array, P: Array, n: int, dim: int,
                            rng: np.random.Generator, t: float):
    """Concrete matrix units e_{ij} of a factor isomorphic to Mat_n.

    diag[i] are the minimal diagonal projections (eigenprojections of a generic
    hermitian element of the factor); e_{1i} are normalized partial isometries
    diag[0] -> diag[i], and e_{ij} = e_{1i}^* e_{1j}."""
    if n == 1:
        return [P]
    for _ in range(16):
        coeff = rng.standard_normal(factor_mats.shape[0])
        a = np.tensordot(coeff, factor_mats, axes=(0, 0))
        a = (a + a.conj().T) / 2
        w, U = np.linalg.eigh(a)
        active = [i for i in range(len(w)) if np.linalg.norm(P @ U[:, i]) > 0.5]
        if not active:
            continue
        wa = np.array([w[i] for i in active])
        order = np.argsort(wa)
        clusters = _cluster_eigvals(wa[order], max(1e3 * t, t * max(1.0, np.max(np.abs(w)))))
        if len(clusters) != n:
            continue
        diag = []
        for cl in clusters:
            cols = [active[order[k]] for k in cl]
            diag.append(U[:, cols] @ U[:, cols].conj().T)
        x = np.tensordot(rng.standard_normal(factor_mats.shape[0]), factor_mats, axes=(0, 0))
        e_1 = [diag[0]]
        good = True
        for i in range(1, n):
            v = diag[0] @ x @ diag[i]
            # e_{ii} minimal in the factor => v^* v is a multiple of diag[i]
            lam = np.real(np.trace(v.conj().T @ v)) / np.real(np.trace(diag[i]))
            if lam < 1e-12:
                good = False
                break
            e_1.append(v / np.sqrt(lam))
        if not good:
            continue
        out = []
        for i in range(n):
            for j in range(n):
                out.append(e_1[i].conj().T @ e_1[j])
        return out
    raise NumericalBreakdown("failed to construct matrix units of a factor")


def _verify_matrix_units(emb: SubalgebraEmbedding, t: float):
    sub = emb.sub
    triples = sub.basis_triples()
    for a, (k, i, j) in enumerate(triples):
        adj = emb.units[a].conj().T
        expect = emb.units[sub.basis_index(k, j, i)]
        if np.linalg.norm(adj - expect) > 1e3 * t * max(1.0, np.linalg.norm(expect)):
            raise NumericalBreakdown("matrix-unit adjoint relation failed")
    for k, n in enumerate(sub.block_dims):
        for i in range(n):
            for j in range(n):
                for p in range(n):
                    prod = emb.units[sub.basis_index(k, i, j)] @ emb.units[sub.basis_index(k, j, p)]
                    expect = emb.units[sub.basis_index(k, i, p)]
                    if np.linalg.norm(prod - expect) > 1e3 * t * max(1.0, np.linalg.norm(expect)):
                        raise NumericalBreakdown("matrix-unit product relation failed")


def generated_subalgebra(gens, ambient_dim: int, rng: np.random.Generator | None = None,
                         tol: float | None = None) -> SubalgebraEmbedding:
    """Smallest unital *-subalgebra of B(C^D) containing the given matrices,
    with recovered block structure.  Adjoints are adjoined automatically."""
    rows = span_closure(gens, ambient_dim, tol=tol)
    return recover_structure(rows, ambient_dim, rng=rng, tol=tol)


def generated_subalgebra_of(algebra: MultiMatrixAlgebra, gens,
                            rng: np.random.Generator | None = None,
                            tol: float | None = None):
    """generated_subalgebra for abstract elements: works in the defining
    representation and returns (embedding, coeff map sub -> ambient coeffs)."""
    rep = defining_representation(algebra)
    emb = generated_subalgebra([rep.apply(g) for g in gens], algebra.total_dim, rng=rng, tol=tol)
    # pull concrete units back to ambient coefficients
    E = block_diag_embedding(algebra)
    pinv = np.linalg.pinv(E)
    cols = []
    for u in emb.units:
        c = pinv @ u.ravel()
        resid = np.linalg.norm(E @ c - u.ravel())
        if resid > 1e3 * scaled_tol(u, tol=tol):
            raise NumericalBreakdown("generated subalgebra leaves the ambient algebra")
        cols.append(c)
    coeff_map = np.stack(cols, axis=1)  # ambient_lin_dim x sub_lin_dim
    return emb, coeff_map
