"""Exact arithmetic and dense linear algebra over GF(p) for odd primes p.

Heavy code paths operate on plain numpy integer arrays reduced mod p.
``FieldScalar`` and ``FieldMatrix`` are thin typed wrappers for the public
surface; everything else in the package calls the raw-array functions.

The modulus is runtime data: the same code runs GF(3), GF(5) and GF(7)
(the last one for negative characteristic tests).  Elimination is
deterministic (leftmost pivot column, rows scanned top-down), so reduced
forms, kernels and downstream JSON files are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ModulusMismatch(ValueError):
    """Operands live over different prime fields."""


class DimensionMismatch(ValueError):
    """Operand shapes are incompatible."""


class NoSolution(ValueError):
    """An affine linear system is inconsistent."""


def is_odd_prime(p: int) -> bool:
    p = int(p)
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_odd_prime(p: int) -> int:
    p = int(p)
    if not is_odd_prime(p):
        raise ValueError(f"modulus must be an odd prime, got {p}")
    return p


def inv_mod(a: int, p: int) -> int:
    """Inverse of a nonzero residue (Fermat)."""
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError(f"0 is not invertible mod {p}")
    return pow(a, p - 2, p)


def half(p: int) -> int:
    """The scalar 1/2 mod p (exists since p is odd)."""
    return inv_mod(2, p)


def as_gf(a, p: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % p


# ---------------------------------------------------------------------------
# scalar and matrix wrappers


@dataclass(frozen=True)
class FieldScalar:
    """A residue in [0, p) over GF(p), p an odd prime."""

    value: int
    modulus: int

    def __post_init__(self):
        check_odd_prime(self.modulus)
        object.__setattr__(self, "value", int(self.value) % self.modulus)

    def _match(self, other: "FieldScalar") -> "FieldScalar":
        if not isinstance(other, FieldScalar):
            other = FieldScalar(other, self.modulus)
        if other.modulus != self.modulus:
            raise ModulusMismatch(f"GF({self.modulus}) vs GF({other.modulus})")
        return other

    def __add__(self, other):
        other = self._match(other)
        return FieldScalar(self.value + other.value, self.modulus)

    def __sub__(self, other):
        other = self._match(other)
        return FieldScalar(self.value - other.value, self.modulus)

    def __mul__(self, other):
        other = self._match(other)
        return FieldScalar(self.value * other.value, self.modulus)

    def __neg__(self):
        return FieldScalar(-self.value, self.modulus)

    def inverse(self) -> "FieldScalar":
        return FieldScalar(inv_mod(self.value, self.modulus), self.modulus)

    def __truediv__(self, other):
        other = self._match(other)
        return self * other.inverse()

    def __bool__(self):
        return self.value != 0


@dataclass(frozen=True)
class FieldMatrix:
    """Dense matrix over GF(p); entries stored as a read-only int64 array."""

    array: np.ndarray
    modulus: int

    def __post_init__(self):
        check_odd_prime(self.modulus)
        a = np.asarray(self.array, dtype=np.int64) % self.modulus
        if a.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d array, got ndim={a.ndim}")
        a.setflags(write=False)
        object.__setattr__(self, "array", a)

    @classmethod
    def identity(cls, n: int, p: int) -> "FieldMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FieldMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    def _match(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.modulus != other.modulus:
            raise ModulusMismatch(f"GF({self.modulus}) vs GF({other.modulus})")
        return other

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._match(other)
        return FieldMatrix(self.array + other.array, self.modulus)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._match(other)
        return FieldMatrix(self.array - other.array, self.modulus)

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._match(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.array.shape} @ {other.array.shape}")
        return FieldMatrix(matmul_mod(self.array, other.array, self.modulus), self.modulus)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and self.modulus == other.modulus
            and self.array.shape == other.array.shape
            and bool(np.array_equal(self.array, other.array))
        )


# ---------------------------------------------------------------------------
# raw-array elimination

_LEAF = 48  # rows handled by the plain Gaussian loop


def _gauss_leaf(b: np.ndarray, p: int):
    """Plain RREF of a small float64 block. Returns (rows, pivot_cols)."""
    m, n = b.shape
    piv_cols = []
    r = 0
    c = 0
    while r < m and c < n:
        col = b[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            c += 1
            continue
        i = r + int(nz[0])
        if i != r:
            b[[r, i]] = b[[i, r]]
        inv = inv_mod(int(b[r, c]), p)
        b[r] = (b[r] * inv) % p
        coeff = b[:, c].copy()
        coeff[r] = 0
        mask = coeff != 0
        if mask.any():
            b[mask] = (b[mask] - np.outer(coeff[mask], b[r])) % p
        piv_cols.append(c)
        r += 1
        c += 1
    return b[: len(piv_cols)], np.array(piv_cols, dtype=np.int64)


def _reduce_against(b: np.ndarray, rows: np.ndarray, piv: np.ndarray, p: int) -> np.ndarray:
    """One-pass reduction of b against an RREF block (rows, piv)."""
    if rows.shape[0] == 0 or b.shape[0] == 0:
        return b % p
    coeff = b[:, piv]
    if not coeff.any():
        return b % p
    return (b - coeff @ rows) % p


def _echelon_block(b: np.ndarray, p: int):
    """Blocked recursive RREF of a float64 matrix. Returns (rows, piv_cols)."""
    if b.shape[0] <= _LEAF:
        return _gauss_leaf(b, p)
    h = b.shape[0] // 2
    top, piv_t = _echelon_block(b[:h], p)
    bot = _reduce_against(b[h:], top, piv_t, p)
    bot, piv_b = _echelon_block(bot, p)
    top = _reduce_against(top, bot, piv_b, p)
    rows = np.concatenate([top, bot], axis=0)
    piv = np.concatenate([piv_t, piv_b])
    order = np.argsort(piv, kind="stable")
    return rows[order], piv[order]


class Echelon:
    """Incremental reduced row-echelon accumulator over GF(p).

    Rows are added in batches and the accumulated row space is kept in
    RREF at all times, pivots sorted by column.  Entries are stored as
    exact small integers in float64 so the elimination inner loops run
    through BLAS; every intermediate value stays far below 2**53.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = check_odd_prime(p)
        self.rows = np.zeros((0, ncols), dtype=np.float64)
        self.piv = np.zeros(0, dtype=np.int64)

    @property
    def rank(self) -> int:
        return self.rows.shape[0]

    def reduce(self, batch) -> np.ndarray:
        """Reduce rows against the accumulated RREF without adding them."""
        b = np.asarray(batch, dtype=np.float64)
        if b.ndim == 1:
            b = b[None, :]
        b = b % self.p
        return _reduce_against(b, self.rows, self.piv, self.p)

    def add(self, batch) -> int:
        """Add rows; returns the new rank."""
        b = self.reduce(batch)
        b = b[b.any(axis=1)]
        if b.shape[0] == 0:
            return self.rank
        new_rows, new_piv = _echelon_block(b, self.p)
        if new_rows.shape[0] == 0:
            return self.rank
        self.rows = _reduce_against(self.rows, new_rows, new_piv, self.p)
        self.rows = np.concatenate([self.rows, new_rows], axis=0)
        self.piv = np.concatenate([self.piv, new_piv])
        order = np.argsort(self.piv, kind="stable")
        self.rows = self.rows[order]
        self.piv = self.piv[order]
        return self.rank

    def contains(self, vecs) -> bool:
        return not self.reduce(vecs).any()

    def coords(self, vec) -> np.ndarray:
        """Coordinates of vec in the RREF row basis (vec must lie in the span)."""
        v = np.asarray(vec, dtype=np.float64) % self.p
        if self.reduce(v).any():
            raise NoSolution("vector not in the accumulated row space")
        if v.ndim == 1:
            return v[self.piv].astype(np.int64)
        return v[:, self.piv].astype(np.int64)

    def free_columns(self) -> np.ndarray:
        mask = np.ones(self.ncols, dtype=bool)
        mask[self.piv] = False
        return np.nonzero(mask)[0]

    def kernel(self) -> np.ndarray:
        """Basis of the right kernel of the row space, shape (ncols, nullity).

        Column j has a 1 at the j-th free column; ordering follows free
        column index.
        """
        free = self.free_columns()
        k = np.zeros((self.ncols, free.size), dtype=np.int64)
        if free.size:
            k[free, np.arange(free.size)] = 1
            if self.rank:
                k[self.piv] = (-self.rows[:, free]) % self.p
        return k

    def int_rows(self) -> np.ndarray:
        return self.rows.astype(np.int64)


def rref_mod(a: np.ndarray, p: int):
    """(rank, rref, pivot_cols) of an integer matrix over GF(p)."""
    a = as_gf(a, p)
    ech = Echelon(a.shape[1], p)
    ech.add(a)
    r = ech.int_rows()
    out = np.zeros_like(a)
    out[: r.shape[0]] = r
    return ech.rank, out, tuple(int(c) for c in ech.piv)


def rank_mod(a: np.ndarray, p: int) -> int:
    return rref_mod(a, p)[0]


def kernel_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of {x : a·x = 0}, shape (cols, nullity)."""
    a = as_gf(a, p)
    ech = Echelon(a.shape[1], p)
    ech.add(a)
    return ech.kernel()


def solve_mod(a: np.ndarray, b: np.ndarray, p: int):
    """One solution of a·x = b with free variables 0, or None if inconsistent."""
    a = as_gf(a, p)
    b = as_gf(b, p).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"{a.shape} vs rhs of length {b.shape[0]}")
    n = a.shape[1]
    aug = np.concatenate([a, b[:, None]], axis=1)
    rank_aug, r, piv = rref_mod(aug, p)
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n]
    return x


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Exact a @ b mod p through float64 BLAS."""
    prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    return prod.astype(np.int64) % p


# spec-surface wrappers ------------------------------------------------------


def rref(m: FieldMatrix):
    rank, r, piv = rref_mod(m.array, m.modulus)
    return rank, FieldMatrix(r, m.modulus), piv


def kernel(m: FieldMatrix) -> FieldMatrix:
    return FieldMatrix(kernel_mod(m.array, m.modulus), m.modulus)


def solve(a: FieldMatrix, b) -> np.ndarray | None:
    b = np.asarray(b, dtype=np.int64)
    return solve_mod(a.array, b, a.modulus)
