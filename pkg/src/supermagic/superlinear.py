"""Superspaces, Koszul signs, homogeneous linear maps and constrained map spaces.

Basis ordering convention, fixed globally: even basis elements first, then
odd ones.  Every structure-constant table in the package uses it.  Koszul
signs are applied at constraint/bracket generation time and never stored;
the single source of truth for (-1)^{p(u)p(v)} is :func:`koszul_sign`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ff import (
    DimensionMismatch,
    Echelon,
    ModulusMismatch,
    NoSolution,
    as_gf,
    check_odd_prime,
    kernel_mod,
    matmul_mod,
    solve_mod,
)


def koszul_sign(p1: int, p2: int) -> int:
    """(-1)^{p1·p2} as a plain ±1 integer."""
    return -1 if (p1 & 1) and (p2 & 1) else 1


def sign_matrix(par1: np.ndarray, par2: np.ndarray) -> np.ndarray:
    """Outer table of (-1)^{p(u)p(v)} for two parity vectors."""
    return 1 - 2 * np.outer(par1 & 1, par2 & 1)


@dataclass(frozen=True)
class SuperSpace:
    """A finite homogeneous basis: labels plus parities over GF(p)."""

    labels: tuple
    parities: np.ndarray
    modulus: int

    def __post_init__(self):
        check_odd_prime(self.modulus)
        par = np.asarray(self.parities, dtype=np.int8)
        par.setflags(write=False)
        object.__setattr__(self, "parities", par)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != par.shape[0]:
            raise DimensionMismatch("labels and parities differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be unique")
        # Atomic spaces keep the even-first convention; composite algebra
        # bases (magic square blocks, tensor factors) may interleave, and
        # every solver here masks by parity rather than relying on blocks.

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def dim0(self) -> int:
        return int(np.sum(self.parities == 0))

    @property
    def dim1(self) -> int:
        return int(np.sum(self.parities == 1))

    @property
    def superdim(self) -> tuple:
        return (self.dim0, self.dim1)

    def same_field(self, other: "SuperSpace"):
        if self.modulus != other.modulus:
            raise ModulusMismatch(f"GF({self.modulus}) vs GF({other.modulus})")


def superspace(even_labels, odd_labels, p: int) -> SuperSpace:
    labels = tuple(even_labels) + tuple(odd_labels)
    par = [0] * len(tuple(even_labels)) + [1] * len(tuple(odd_labels))
    return SuperSpace(labels, np.array(par, dtype=np.int8), p)


def tensor(u: SuperSpace, w: SuperSpace) -> SuperSpace:
    """Tensor product basis in lexicographic (i, j) order.

    Pair (i, j) sits at position i·dim(w)+j, has parity p(u_i)+p(w_j) mod 2
    and label "u_i⊗w_j".
    """
    u.same_field(w)
    labels = tuple(f"{u.labels[i]}⊗{w.labels[j]}" for i in range(u.dim) for j in range(w.dim))
    par = (u.parities[:, None] ^ w.parities[None, :]).reshape(-1).astype(np.int8)
    return SuperSpace(labels, par, u.modulus)


@dataclass(frozen=True)
class HomogeneousMap:
    """A parity-homogeneous linear map between superspaces.

    The matrix acts on coordinate columns: (d·x)_r = sum_c matrix[r,c] x_c.
    An even map preserves parity blocks, an odd map swaps them.
    """

    source: SuperSpace
    target: SuperSpace
    parity: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_gf(self.matrix, self.source.modulus)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        self.source.same_field(self.target)
        if m.shape != (self.target.dim, self.source.dim):
            raise DimensionMismatch(f"matrix shape {m.shape} for {self.target.dim}x{self.source.dim}")
        bad = violates_parity(m, self.target.parities, self.source.parities, self.parity)
        if bad:
            raise ValueError(f"matrix entry {bad} breaks parity-{self.parity} block structure")

    @property
    def p(self) -> int:
        return self.source.modulus

    def __call__(self, vec: np.ndarray) -> np.ndarray:
        return matmul_mod(self.matrix, np.asarray(vec).reshape(-1, 1), self.p).reshape(-1)

    def compose(self, other: "HomogeneousMap") -> "HomogeneousMap":
        """self ∘ other; parities add mod 2."""
        if other.target is not self.source and other.target.labels != self.source.labels:
            raise DimensionMismatch("composition domain mismatch")
        return HomogeneousMap(
            other.source,
            self.target,
            (self.parity + other.parity) & 1,
            matmul_mod(self.matrix, other.matrix, self.p),
        )

    def bracket(self, other: "HomogeneousMap") -> "HomogeneousMap":
        """Supercommutator self∘other − (−1)^{p·p'} other∘self (endomorphisms)."""
        s = koszul_sign(self.parity, other.parity)
        a = matmul_mod(self.matrix, other.matrix, self.p)
        b = matmul_mod(other.matrix, self.matrix, self.p)
        return HomogeneousMap(self.source, self.target, (self.parity + other.parity) & 1, (a - s * b) % self.p)

    def supertrace(self) -> int:
        d = np.diag(self.matrix)
        signs = 1 - 2 * (self.source.parities.astype(np.int64) & 1)
        return int(np.sum(d * signs) % self.p)


def violates_parity(m, tpar, spar, parity):
    bad_mask = ((tpar[:, None] ^ spar[None, :]) & 1) != (parity & 1)
    nz = np.argwhere((m != 0) & bad_mask)
    return tuple(nz[0]) if nz.size else None


def allowed_entries(source: SuperSpace, target: SuperSpace, parity: int):
    """(rows, cols) index arrays of the matrix entries a parity-homogeneous
    map may populate, in row-major order over the full matrix."""
    tpar = target.parities[:, None] & 1
    spar = source.parities[None, :] & 1
    mask = (tpar ^ spar) == (parity & 1)
    rows, cols = np.nonzero(mask)
    return rows, cols


def pack_map(m: np.ndarray, rows, cols) -> np.ndarray:
    return np.asarray(m)[rows, cols]


def unpack_map(vec: np.ndarray, rows, cols, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=np.int64)
    out[rows, cols] = np.asarray(vec, dtype=np.int64)
    return out


def maps_from_kernel(kern: np.ndarray, source: SuperSpace, target: SuperSpace, parity: int):
    rows, cols = allowed_entries(source, target, parity)
    shape = (target.dim, source.dim)
    return [
        HomogeneousMap(source, target, parity, unpack_map(kern[:, j], rows, cols, shape))
        for j in range(kern.shape[1])
    ]


def constrained_map_space(source: SuperSpace, target: SuperSpace, parity: int, constraints):
    """Basis of parity-homogeneous maps satisfying linear entry constraints.

    Each constraint is ``(terms, rhs)`` where ``terms`` is a sequence of
    ``((row, col), coeff)`` over full-matrix positions.  Homogeneous
    constraints (rhs all 0) give a linear space; otherwise the affine
    solution set is returned as (particular map, basis of the homogeneous
    part) with the particular part folded into the first element.

    Raises NoSolution when the affine system is inconsistent.
    """
    source.same_field(target)
    p = source.modulus
    rows, cols = allowed_entries(source, target, parity)
    nunk = rows.size
    lookup = {(int(r), int(c)): k for k, (r, c) in enumerate(zip(rows, cols))}
    amat = np.zeros((len(constraints), nunk), dtype=np.int64)
    rhs = np.zeros(len(constraints), dtype=np.int64)
    for i, (terms, b) in enumerate(constraints):
        rhs[i] = int(b) % p
        for (r, c), coeff in terms:
            k = lookup.get((int(r), int(c)))
            if k is None:
                continue  # entry forced to 0 by parity; coefficient drops out
            amat[i, k] = (amat[i, k] + int(coeff)) % p
    if rhs.any():
        part = solve_mod(amat, rhs, p)
        if part is None:
            raise NoSolution("inconsistent affine constraints on map entries")
    else:
        part = None
    kern = kernel_mod(amat, p) if len(constraints) else np.eye(nunk, dtype=np.int64)
    basis = maps_from_kernel(kern, source, target, parity)
    if part is not None:
        shape = (target.dim, source.dim)
        particular = HomogeneousMap(source, target, parity, unpack_map(part, rows, cols, shape))
        return particular, basis
    return basis


def echelon_operator_basis(mats, parities, p: int, shape):
    """Echelonized span of a family of operator matrices, split by parity.

    Returns (basis_mats, basis_parities, {parity: Echelon}); each parity
    class is echelonized over its flattened entries, so expressing a new
    operator in the basis is an Echelon.coords index read.
    """
    out_mats, out_par, echs = [], [], {}
    n = shape[0] * shape[1]
    for want in (0, 1):
        group = [np.asarray(m, dtype=np.int64).reshape(-1) for m, q in zip(mats, parities) if (q & 1) == want]
        ech = Echelon(n, p)
        if group:
            ech.add(np.stack(group))
        for r in ech.int_rows():
            out_mats.append(r.reshape(shape))
            out_par.append(want)
        echs[want] = ech
    return out_mats, out_par, echs
