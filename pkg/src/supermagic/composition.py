"""Split Hurwitz and symmetric composition superalgebras over GF(p).

Concrete constructions: the split unital composition algebras of dimension
1, 2, 4, 8 (the 8-dimensional one in the Zorn vector-matrix basis), the
superalgebras B(1,2) and B(4,2), the standard involution, the para-Hurwitz
twist x•y = x̄ȳ, and the exhaustive composition/symmetry checkers.

B(1,2) and B(4,2) are constructible over any odd prime; the composition
property is itself a checkable statement and holds exactly in
characteristic 3, so the characteristic-3 phenomenon is a testable theorem
rather than a construction guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ff import half, inv_mod, matmul_mod
from .structconst import CheckResult, SuperAlgebra, superalgebra
from .superlinear import HomogeneousMap, SuperSpace, koszul_sign, superspace


class NotUnital(ValueError):
    """Operation needs a unital algebra."""


class NotEven(ValueError):
    """Operation needs a purely even algebra."""


class NotSymmetricComposition(ValueError):
    """Operation needs a symmetric composition superalgebra."""


@dataclass(frozen=True)
class QuadraticSuperform:
    """A quadratic superform (q0, b); q0 is recovered from b since char != 2."""

    b: np.ndarray
    modulus: int

    def q0(self, x: np.ndarray) -> int:
        """q0(x) = b(x,x)/2 on even vectors."""
        xf = np.asarray(x, dtype=np.int64) % self.modulus
        v = int(xf @ self.b @ xf) % self.modulus
        return (v * half(self.modulus)) % self.modulus

    def eval_b(self, x, y) -> int:
        xf = np.asarray(x, dtype=np.int64) % self.modulus
        yf = np.asarray(y, dtype=np.int64) % self.modulus
        return int(xf @ self.b @ yf) % self.modulus


@dataclass
class CompositionSuperalgebra:
    """A superalgebra with a regular quadratic superform."""

    algebra: SuperAlgebra
    norm: QuadraticSuperform
    unit: np.ndarray | None = None
    symmetric: bool = False
    name: str = ""

    @property
    def space(self) -> SuperSpace:
        return self.algebra.space

    @property
    def p(self) -> int:
        return self.algebra.p

    @property
    def dim(self) -> int:
        return self.algebra.dim

    def mul(self, x, y) -> np.ndarray:
        xf = np.asarray(x, dtype=np.float64)
        yf = np.asarray(y, dtype=np.float64)
        out = np.einsum("i,j,ijk->k", xf, yf, self.algebra._float_table())
        return out.astype(np.int64) % self.p


def _make(space, table, b, unit, p, name, symmetric=False) -> CompositionSuperalgebra:
    alg = superalgebra(space, np.asarray(table, dtype=np.int64) % p, form=np.asarray(b, dtype=np.int64) % p)
    unit = None if unit is None else np.asarray(unit, dtype=np.int64) % p
    return CompositionSuperalgebra(alg, QuadraticSuperform(alg.form, p), unit, symmetric, name)


def split_hurwitz(r: int, p: int) -> CompositionSuperalgebra:
    """The split unital composition algebra of dimension r in {1, 2, 4, 8}.

    r=1: the field.  r=2: k×k in the basis {1, w}, w^2 = 1, q = x^2 - y^2.
    r=4: 2x2 matrices in the basis {1, h, e, f}, norm the determinant.
    r=8: the split Cayley algebra in the Zorn basis {e1,e2,u1..u3,v1..v3}.
    """
    if r == 1:
        S = superspace(["1"], [], p)
        table = np.zeros((1, 1, 1), dtype=np.int64)
        table[0, 0, 0] = 1
        b = [[2]]
        return _make(S, table, b, [1], p, "C1")
    if r == 2:
        S = superspace(["1", "w"], [], p)
        table = np.zeros((2, 2, 2), dtype=np.int64)
        table[0, 0, 0] = 1
        table[0, 1, 1] = 1
        table[1, 0, 1] = 1
        table[1, 1, 0] = 1
        b = [[2, 0], [0, -2]]
        return _make(S, table, b, [1, 0], p, "C2")
    if r == 4:
        return _mat2_algebra(p)
    if r == 8:
        return _zorn_algebra(p)
    raise ValueError(f"split Hurwitz dimension must be 1, 2, 4 or 8, got {r}")


_MAT2_BASIS = {
    "1": np.array([[1, 0], [0, 1]]),
    "h": np.array([[1, 0], [0, -1]]),
    "e": np.array([[0, 1], [0, 0]]),
    "f": np.array([[0, 0], [1, 0]]),
}


def _mat2_coords(m: np.ndarray, p: int) -> np.ndarray:
    """Coordinates of a 2x2 matrix in the {1,h,e,f} basis."""
    a, b = int(m[0, 0]), int(m[0, 1])
    c, d = int(m[1, 0]), int(m[1, 1])
    h2 = half(p)
    return np.array([(a + d) * h2, (a - d) * h2, b, c], dtype=np.int64) % p


def _mat2_algebra(p: int) -> CompositionSuperalgebra:
    S = superspace(["1", "h", "e", "f"], [], p)
    names = list(_MAT2_BASIS)
    mats = [_MAT2_BASIS[n] % p for n in names]
    table = np.zeros((4, 4, 4), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            table[i, j] = _mat2_coords(matmul_mod(mats[i], mats[j], p), p)
    b = np.zeros((4, 4), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            det = lambda m: (int(m[0, 0]) * int(m[1, 1]) - int(m[0, 1]) * int(m[1, 0])) % p
            b[i, j] = (det((mats[i] + mats[j]) % p) - det(mats[i]) - det(mats[j])) % p
    return _make(S, table, b, [1, 0, 0, 0], p, "C4")


def _zorn_algebra(p: int) -> CompositionSuperalgebra:
    """Split Cayley algebra on {e1, e2, u1, u2, u3, v1, v2, v3}.

    e1·ui = ui = ui·e2, e2·vi = vi = vi·e1, ui·vj = -δij e1, vi·uj = -δij e2,
    ui·uj = ε_ijk vk, vi·vj = ε_ijk uk; b(e1,e2) = 1, b(ui,vj) = δij.
    The table is exported bit-exactly in docs/cayley-table.md.
    """
    labels = ["e1", "e2", "u1", "u2", "u3", "v1", "v2", "v3"]
    S = superspace(labels, [], p)
    idx = {n: i for i, n in enumerate(labels)}
    table = np.zeros((8, 8, 8), dtype=np.int64)

    def put(a, b_, c, coeff=1):
        table[idx[a], idx[b_], idx[c]] += coeff

    put("e1", "e1", "e1")
    put("e2", "e2", "e2")
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (2, 1, 0): -1, (0, 2, 1): -1}
    for i in range(3):
        u, v = f"u{i+1}", f"v{i+1}"
        put("e1", u, u)
        put(u, "e2", u)
        put("e2", v, v)
        put(v, "e1", v)
        put(u, v, "e1", -1)
        put(v, u, "e2", -1)
    for (i, j, k), sgn in eps.items():
        put(f"u{i+1}", f"u{j+1}", f"v{k+1}", sgn)
        put(f"v{i+1}", f"v{j+1}", f"u{k+1}", sgn)
    b = np.zeros((8, 8), dtype=np.int64)
    b[idx["e1"], idx["e2"]] = b[idx["e2"], idx["e1"]] = 1
    for i in range(3):
        b[idx[f"u{i+1}"], idx[f"v{i+1}"]] = 1
        b[idx[f"v{i+1}"], idx[f"u{i+1}"]] = 1
    unit = np.zeros(8, dtype=np.int64)
    unit[idx["e1"]] = unit[idx["e2"]] = 1
    return _make(S, table, b, unit, p, "C8")


def b12(p: int) -> CompositionSuperalgebra:
    """The 1|2-dimensional Hurwitz superalgebra: k1 ⊕ V, uv = <u|v>1."""
    S = superspace(["1"], ["a", "b"], p)
    table = np.zeros((3, 3, 3), dtype=np.int64)
    for x in range(3):
        table[0, x, x] += 1
        if x:
            table[x, 0, x] += 1
    table[1, 2, 0] = 1  # ab = <a|b>1
    table[2, 1, 0] = -1
    b = np.zeros((3, 3), dtype=np.int64)
    b[0, 0] = 2
    b[1, 2] = 1
    b[2, 1] = -1
    return _make(S, table, b, [1, 0, 0], p, "B12")


def b42(p: int) -> CompositionSuperalgebra:
    """The 4|2-dimensional Hurwitz superalgebra End(V) ⊕ V.

    Products: composition on End(V); v·f = f(v); f·v = f̄(v) with f̄ the
    symplectic involution; u·v the rank-one map w -> <w|u>v.  Norm: det on
    the even part, <·|·> on the odd part.
    """
    labels_even = ["1", "h", "e", "f"]
    S = superspace(labels_even, ["a", "b"], p)
    mats = [_MAT2_BASIS[n] % p for n in labels_even]
    table = np.zeros((6, 6, 6), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            table[i, j, :4] = _mat2_coords(matmul_mod(mats[i], mats[j], p), p)
    for i in range(4):
        m = mats[i]
        tr = (int(m[0, 0]) + int(m[1, 1])) % p
        mbar = (tr * np.eye(2, dtype=np.int64) - m) % p
        for j, v in ((4, [1, 0]), (5, [0, 1])):
            # v·f = f(v), f·v = f̄(v); odd vectors are columns over (a, b)
            fv = matmul_mod(m, np.array(v).reshape(2, 1), p).reshape(-1)
            table[j, i, 4:] = fv
            fbv = matmul_mod(mbar, np.array(v).reshape(2, 1), p).reshape(-1)
            table[i, j, 4:] = fbv
    # u·v = <·|u>v : (a·a) = -e, (a·b) maps b -> -b, (b·a) maps a -> a, (b·b) = f
    sympl = {(4, 4): np.array([[0, -1], [0, 0]]), (4, 5): np.array([[0, 0], [0, -1]]),
             (5, 4): np.array([[1, 0], [0, 0]]), (5, 5): np.array([[0, 0], [1, 0]])}
    for (i, j), m in sympl.items():
        table[i, j, :4] = _mat2_coords(m % p, p)
    b = np.zeros((6, 6), dtype=np.int64)
    for i in range(4):
        for j in range(4):
            det = lambda m: (int(m[0, 0]) * int(m[1, 1]) - int(m[0, 1]) * int(m[1, 0])) % p
            b[i, j] = (det((mats[i] + mats[j]) % p) - det(mats[i]) - det(mats[j])) % p
    b[4, 5] = 1
    b[5, 4] = -1
    return _make(S, table, b, [1, 0, 0, 0, 0, 0], p, "B42")


def standard_involution(c: CompositionSuperalgebra) -> HomogeneousMap:
    """x̄ = b(x,1)1 − x as an even map; involutive by construction."""
    if c.unit is None:
        raise NotUnital("standard involution needs a unit")
    p = c.p
    bvec = (c.norm.b @ c.unit) % p
    k = (np.outer(c.unit, bvec) - np.eye(c.dim, dtype=np.int64)) % p
    m = HomogeneousMap(c.space, c.space, 0, k)
    if not np.array_equal(matmul_mod(k, k, p), np.eye(c.dim, dtype=np.int64)):
        raise AssertionError("standard involution is not involutive")
    return m


def para(c: CompositionSuperalgebra) -> CompositionSuperalgebra:
    """Para-Hurwitz twist: same space and norm, product x•y = x̄·ȳ."""
    if c.unit is None:
        raise NotUnital("para-Hurwitz twist needs a unital algebra")
    k = standard_involution(c).matrix.astype(np.float64)
    cf = c.algebra._float_table()
    new = np.einsum("mi,nj,mnl->ijl", k, k, cf)
    new = new.astype(np.int64) % c.p
    out = _make(c.space, new, c.norm.b, c.unit.copy(), c.p, "S" + c.name.lstrip("CB"), symmetric=True)
    return out


# ---------------------------------------------------------------------------
# checkers


def _even_test_vectors(c: CompositionSuperalgebra) -> np.ndarray:
    """Evaluation set {e_i} ∪ {e_i+e_j} over the even basis; vanishing of a
    quadratic identity on this set forces all its coefficients to vanish."""
    even = np.nonzero(c.space.parities == 0)[0]
    vecs = []
    for i in even:
        v = np.zeros(c.dim, dtype=np.int64)
        v[i] = 1
        vecs.append(v)
    for a in range(len(even)):
        for b_ in range(a + 1, len(even)):
            v = np.zeros(c.dim, dtype=np.int64)
            v[even[a]] = 1
            v[even[b_]] = 1
            vecs.append(v)
    return np.stack(vecs) if vecs else np.zeros((0, c.dim), dtype=np.int64)


def check_composition(c: CompositionSuperalgebra) -> CheckResult:
    """The quartic composition identity on all homogeneous basis quadruples:

        b(xy, zt) + (-1)^{xy+xz+yz} b(zy, xt) = (-1)^{yz} b(x,z) b(y,t).

    Since char != 2 this identity already implies multiplicativity of the
    norm and the middle identities, which are confirmed independently on a
    polarization-complete evaluation set whenever the main check passes.
    """
    p = c.p
    cf = c.algebra._float_table()
    bf = c.norm.b.astype(np.float64)
    par = c.space.parities.astype(np.int64)
    prod_b = np.einsum("ijm,ktn,mn->ijkt", cf, cf, bf)
    swap = prod_b.transpose(2, 1, 0, 3)  # b(zy, xt) at [i,j,k,t]
    pi, pj, pk = par[:, None, None, None], par[None, :, None, None], par[None, None, :, None]
    s_mid = 1 - 2 * ((pi * pj + pi * pk + pj * pk) & 1)
    s_rhs = 1 - 2 * ((pj * pk) & 1)
    rhs = s_rhs * np.einsum("ik,jt->ijkt", c.norm.b.astype(np.int64), c.norm.b.astype(np.int64))
    defect = (prod_b.astype(np.int64) + s_mid * swap.astype(np.int64) - rhs) % p
    bad = np.argwhere(defect != 0)
    if bad.size:
        i, j, k, t = (int(v) for v in bad[0])
        return CheckResult(False, (i, j, k, t), np.array([defect[i, j, k, t]]), "composition identity fails")
    # confirm norm multiplicativity and the middle identities
    vs = _even_test_vectors(c)
    for x in vs:
        for y in vs:
            xy = c.mul(x, y)
            if c.norm.q0(xy) != (c.norm.q0(x) * c.norm.q0(y)) % p:
                raise AssertionError("norm multiplicativity fails although the quartic identity holds")
    n = c.dim
    for x in vs:
        lx = np.einsum("i,ijk->jk", x.astype(np.float64), cf).astype(np.int64).T % p
        rx = np.einsum("j,ijk->ik", x.astype(np.float64), cf).astype(np.int64).T % p
        q0x = c.norm.q0(x)
        bl = matmul_mod(matmul_mod(lx.T, c.norm.b, p), lx, p)
        br = matmul_mod(matmul_mod(rx.T, c.norm.b, p), rx, p)
        if not np.array_equal(bl, (q0x * c.norm.b) % p) or not np.array_equal(br, (q0x * c.norm.b) % p):
            raise AssertionError("middle composition identity fails although the quartic identity holds")
    return CheckResult(True)


def check_symmetric_composition(s: CompositionSuperalgebra) -> CheckResult:
    """Associativity of b plus both linearized symmetry identities:

        (x•y)•z + (-1)^{x(y+z)} (z•y)•x = (-1)^{xy} b(x,z) y
        x•(y•z) + (-1)^{z(x+y)} z•(y•x) = (-1)^{yz} b(x,z) y

    on all homogeneous basis triples.
    """
    p = s.p
    cf = s.algebra._float_table()
    bf = s.norm.b.astype(np.float64)
    par = s.space.parities.astype(np.int64)
    pi, pj, pk = par[:, None, None, None], par[None, :, None, None], par[None, None, :, None]
    # b associativity
    lhs = np.tensordot(cf, bf, axes=([2], [0]))  # b(xy, z) at (i,j,k)
    rhs = np.tensordot(cf, bf, axes=([2], [1])).transpose(2, 0, 1)  # b(x, yz)
    d0 = (lhs - rhs).astype(np.int64) % p
    bad = np.argwhere(d0 != 0)
    if bad.size:
        i, j, k = (int(v) for v in bad[0])
        return CheckResult(False, (i, j, k), np.array([d0[i, j, k]]), "polar form is not associative")
    t1 = np.tensordot(cf, cf, axes=([2], [0]))  # (x•y)•z at [i,j,k,l]
    zyx = t1.transpose(2, 1, 0, 3)  # (z•y)•x
    s1 = 1 - 2 * ((pi * (pj + pk)) & 1)
    r1 = (1 - 2 * ((pi * pj) & 1)) * np.einsum("ik,jl->ijkl", s.norm.b.astype(np.int64), np.eye(s.dim, dtype=np.int64))
    d1 = (t1.astype(np.int64) + s1 * zyx.astype(np.int64) - r1) % p
    bad = np.argwhere(d1.any(axis=3))
    if bad.size:
        i, j, k = (int(v) for v in bad[0])
        return CheckResult(False, (i, j, k), d1[i, j, k], "left symmetry identity fails")
    # x•(y•z) at [i,j,k,l] = sum_m c[j,k,m] c[i,m,l]
    t2 = np.tensordot(cf, cf, axes=([2], [1])).transpose(2, 0, 1, 3)
    zyx2 = t2.transpose(2, 1, 0, 3)  # z•(y•x)
    s2 = 1 - 2 * ((pk * (pi + pj)) & 1)
    r2 = (1 - 2 * ((pj * pk) & 1)) * np.einsum("ik,jl->ijkl", s.norm.b.astype(np.int64), np.eye(s.dim, dtype=np.int64))
    d2 = (t2.astype(np.int64) + s2 * zyx2.astype(np.int64) - r2) % p
    bad = np.argwhere(d2.any(axis=3))
    if bad.size:
        i, j, k = (int(v) for v in bad[0])
        return CheckResult(False, (i, j, k), d2[i, j, k], "right symmetry identity fails")
    return CheckResult(True)


def cayley_table_markdown(p: int = 3) -> str:
    """Human-readable split Cayley multiplication table (docs/cayley-table.md)."""
    c = split_hurwitz(8, p)
    labels = c.space.labels
    lines = ["# Split Cayley algebra: Zorn basis multiplication table", ""]
    lines.append("Products x·y (row x, column y); entries are signed basis elements, 0 omitted.")
    lines.append("")
    lines.append("| x\\y | " + " | ".join(labels) + " |")
    lines.append("|---|" + "---|" * 8)
    for i in range(8):
        row = [labels[i]]
        for j in range(8):
            terms = []
            for k in np.nonzero(c.algebra.table[i, j])[0]:
                coeff = int(c.algebra.table[i, j, k])
                sgn = "" if coeff == 1 else ("-" if coeff == p - 1 else f"{coeff}·")
                terms.append(f"{sgn}{labels[k]}")
            row.append("+".join(terms) if terms else "0")
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")
    lines.append("Polar form: b(e1,e2) = 1, b(ui,vj) = δij, all other basis pairs orthogonal;")
    lines.append("the norm is q(x) = b(x,x)/2 and the unit is e1+e2.")
    lines.append("")
    return "\n".join(lines)
