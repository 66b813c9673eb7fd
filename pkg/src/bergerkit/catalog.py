"""Catalog of the classical and exceptional holonomy-algebra families.

Every entry produces an explicit rational basis together with the Gram matrix
of the representation space, and construction re-verifies independence,
bracket closure and skewness exactly.  Complex and quaternionic families are
realized over Q through the usual real block embeddings; the exceptional
families are computed on the fly (derivations of an octonion algebra, or the
stabilizer of the alternated triple-product 4-form) and are flagged
experimental.

Entries are addressed by string ids such as ``so:2,3``, ``u:1,1``,
``gl:2:R``, ``sl:3:R``, ``gl:1:C``, ``sp:1,1``, ``sp:4:R``, ``spin:7``,
``g2``.  An optional ``@so(p,q)`` suffix asserts the expected ambient
signature.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .ratlinalg import QQ, RatMatrix, nullspace
from .quadspaces import QuadraticSpace
from .liealg import MatrixLieAlgebra


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def _unit(n: int, i: int, j: int, v=1) -> RatMatrix:
    return RatMatrix.from_entries(n, n, {(i, j): QQ(v)})


def _diag_sign(r: int, s: int) -> RatMatrix:
    return RatMatrix.diagonal([QQ(1)] * r + [QQ(-1)] * s)


def _block2(a: RatMatrix, b: RatMatrix, c: RatMatrix, d: RatMatrix) -> RatMatrix:
    n = a.rows
    entries = {}
    for m, (ro, co) in ((a, (0, 0)), (b, (0, n)), (c, (n, 0)), (d, (n, n))):
        for i, j, v in m.entries():
            entries[(ro + i, co + j)] = v
    return RatMatrix.from_entries(2 * n, 2 * n, entries)


def _realify(p: RatMatrix, q: RatMatrix) -> RatMatrix:
    """Real 2n x 2n form of the complex matrix P + iQ (x-block first)."""
    return _block2(p, -q, q, p)


def _split_embed(a: RatMatrix) -> RatMatrix:
    """diag(A, -A^t): the action on V + V* preserving both summands."""
    return _block2(a, RatMatrix.zeros(a.rows, a.rows),
                   RatMatrix.zeros(a.rows, a.rows), -a.transpose())


def _pairing_gram(n: int) -> RatMatrix:
    entries = {}
    for i in range(n):
        entries[(i, n + i)] = QQ(1)
        entries[(n + i, i)] = QQ(1)
    return RatMatrix.from_entries(2 * n, 2 * n, entries)


def _kron(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    entries = {}
    for i, j, v in a.entries():
        for k, l, w in b.entries():
            entries[(i * b.rows + k, j * b.cols + l)] = v * w
    return RatMatrix.from_entries(a.rows * b.rows, a.cols * b.cols, entries)


def _sym_basis(n: int) -> list:
    out = [_unit(n, i, i) for i in range(n)]
    out += [_unit(n, i, j) + _unit(n, j, i) for i in range(n) for j in range(i + 1, n)]
    return out


def _skew_basis(n: int) -> list:
    return [_unit(n, i, j) - _unit(n, j, i) for i in range(n) for j in range(i + 1, n)]


def full_so(space: QuadraticSpace, name: str = "") -> MatrixLieAlgebra:
    """so(space): all G-skew matrices, basis G^{-1}(E_ij - E_ji)."""
    ginv = space.gram.inverse()
    basis = [ginv * s for s in _skew_basis(space.dim)]
    sig = space.signature
    return MatrixLieAlgebra(space.dim, basis, metric=space,
                            name=name or f"so({sig.p},{sig.q})")


# ---------------------------------------------------------------------------
# classical families
# ---------------------------------------------------------------------------

def _make_so(p: int, q: int) -> "CatalogEntry":
    space = QuadraticSpace(_diag_sign(p, q))
    return CatalogEntry("so", (p, q), full_so(space, f"so({p},{q})"),
                        in_berger_list=True, in_einstein_list=True, symmetric_family=True)


def _make_so_c(p: int) -> "CatalogEntry":
    skew = _skew_basis(p)
    basis = [_realify(m, RatMatrix.zeros(p, p)) for m in skew]
    basis += [_realify(RatMatrix.zeros(p, p), m) for m in skew]
    space = QuadraticSpace(_diag_sign(p, p))
    alg = MatrixLieAlgebra(2 * p, basis, metric=space, name=f"so({p},C)")
    return CatalogEntry("so_c", (p,), alg, True, True, True)


def _make_u(r: int, s: int, trace_free: bool) -> "CatalogEntry":
    n = r + s
    E = _diag_sign(r, s)
    einv = E   # E is its own inverse
    p_part = [einv * m for m in _skew_basis(n)]          # E-skew hermitian-real part
    if trace_free:
        q_mats = [einv * (_unit(n, i, j) + _unit(n, j, i))
                  for i in range(n) for j in range(i + 1, n)]
        q_mats += [einv * (_unit(n, i, i) - _unit(n, i + 1, i + 1)) for i in range(n - 1)]
    else:
        q_mats = [einv * m for m in _sym_basis(n)]
    basis = [_realify(m, RatMatrix.zeros(n, n)) for m in p_part]
    basis += [_realify(RatMatrix.zeros(n, n), m) for m in q_mats]
    gram = RatMatrix.from_entries(2 * n, 2 * n, {
        (i + o, j + o): E.get(i, j) for o in (0, n) for i in range(n) for j in range(n)
        if E.get(i, j) != 0})
    space = QuadraticSpace(gram)
    tag = "su" if trace_free else "u"
    alg = MatrixLieAlgebra(2 * n, basis, metric=space, name=f"{tag}({r},{s})")
    return CatalogEntry(tag, (r, s), alg, True, not trace_free,
                        symmetric_family=not trace_free)


_QUAT_UNITS = {
    # left multiplication by 1, i, j, k on H with basis (1, i, j, k)
    "1": RatMatrix.identity(4),
    "i": RatMatrix.from_rows([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]),
    "j": RatMatrix.from_rows([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]),
    "k": RatMatrix.from_rows([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]),
}

_QUAT_RIGHT = {
    # right multiplication x -> x q, which commutes with all left multiplications
    "i": RatMatrix.from_rows([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]),
    "j": RatMatrix.from_rows([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]),
    "k": RatMatrix.from_rows([[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]),
}


def _make_sp_quat(r: int, s: int, with_sp1: bool) -> "CatalogEntry":
    n = r + s
    E = _diag_sign(r, s)
    basis = []
    for m in _skew_basis(n):
        basis.append(_kron(E * m, _QUAT_UNITS["1"]))
    for m in _sym_basis(n):
        for unit in ("i", "j", "k"):
            basis.append(_kron(E * m, _QUAT_UNITS[unit]))
    if with_sp1:
        for unit in ("i", "j", "k"):
            basis.append(_kron(RatMatrix.identity(n), _QUAT_RIGHT[unit]))
    gram = _kron(E, RatMatrix.identity(4))
    space = QuadraticSpace(gram)
    tag = "sp_sp1" if with_sp1 else "sp_q"
    name = f"sp({r},{s})+sp(1)" if with_sp1 else f"sp({r},{s})"
    alg = MatrixLieAlgebra(4 * n, basis, metric=space, name=name)
    return CatalogEntry(tag, (r, s), alg, True, with_sp1, symmetric_family=with_sp1)


def _symplectic_basis(n: int) -> list:
    """Basis of {A : A^t J + J A = 0} = J^{-1} . (symmetric matrices)."""
    half = n // 2
    j = RatMatrix.from_entries(n, n, {(i, half + i): QQ(1) for i in range(half)}
                               | {(half + i, i): QQ(-1) for i in range(half)})
    jinv = -j
    return [jinv * m for m in _sym_basis(n)]


def _sl2_basis() -> list:
    return [_unit(2, 0, 0) - _unit(2, 1, 1), _unit(2, 0, 1), _unit(2, 1, 0)]


def _make_sp_sl2(r: int) -> "CatalogEntry":
    """sp(r,R) + sl(2,R) on R^{2r} x R^2 with the product of the two forms."""
    n = 2 * r
    j_big = RatMatrix.from_entries(n, n, {(i, r + i): QQ(1) for i in range(r)}
                                   | {(r + i, i): QQ(-1) for i in range(r)})
    j2 = RatMatrix.from_rows([[0, 1], [-1, 0]])
    basis = [_kron(m, RatMatrix.identity(2)) for m in _symplectic_basis(n)]
    basis += [_kron(RatMatrix.identity(n), m) for m in _sl2_basis()]
    space = QuadraticSpace(_kron(j_big, j2))
    alg = MatrixLieAlgebra(2 * n, basis, metric=space, name=f"sp({r},R)+sl(2,R)")
    return CatalogEntry("sp_sl2", (r,), alg, True, True, True)


def _make_sp_sl2_c(r: int) -> "CatalogEntry":
    n = 2 * r
    j_big = RatMatrix.from_entries(n, n, {(i, r + i): QQ(1) for i in range(r)}
                                   | {(r + i, i): QQ(-1) for i in range(r)})
    j2 = RatMatrix.from_rows([[0, 1], [-1, 0]])
    reals = [_kron(m, RatMatrix.identity(2)) for m in _symplectic_basis(n)]
    reals += [_kron(RatMatrix.identity(n), m) for m in _sl2_basis()]
    dim = 2 * n
    zero = RatMatrix.zeros(dim, dim)
    basis = [_realify(m, zero) for m in reals] + [_realify(zero, m) for m in reals]
    b = _kron(j_big, j2)
    gram = _block2(b, RatMatrix.zeros(dim, dim), RatMatrix.zeros(dim, dim), -b)
    alg = MatrixLieAlgebra(2 * dim, basis, metric=QuadraticSpace(gram),
                           name=f"sp({r},C)+sl(2,C)")
    return CatalogEntry("sp_sl2_c", (r,), alg, True, True, True)


def _make_gl_sl_real(n: int, trace_free: bool) -> "CatalogEntry":
    gl_part = [_unit(n, i, j) for i in range(n) for j in range(n) if i != j]
    if trace_free:
        gl_part += [_unit(n, i, i) - _unit(n, i + 1, i + 1) for i in range(n - 1)]
    else:
        gl_part += [_unit(n, i, i) for i in range(n)]
    basis = [_split_embed(a) for a in gl_part]
    space = QuadraticSpace(_pairing_gram(n))
    tag = "sl" if trace_free else "gl"
    alg = MatrixLieAlgebra(2 * n, basis, metric=space, name=f"{tag}({n},R)")
    return CatalogEntry(f"{tag}_r", (n,), alg, False, False,
                        symmetric_family=not trace_free, gl_part=gl_part)


def _make_gl_sl_complex(m: int, trace_free: bool) -> "CatalogEntry":
    zero = RatMatrix.zeros(m, m)
    units = [_unit(m, i, j) for i in range(m) for j in range(m)]
    complex_part = [_realify(u, zero) for u in units] + [_realify(zero, u) for u in units]
    if trace_free:
        keep = []
        for k, u in enumerate(units):
            i, j = divmod(k, m)
            if i != j:
                keep.append(_realify(u, zero))
                keep.append(_realify(zero, u))
        for i in range(m - 1):
            d = _unit(m, i, i) - _unit(m, i + 1, i + 1)
            keep.append(_realify(d, zero))
            keep.append(_realify(zero, d))
        complex_part = keep
    basis = [_split_embed(a) for a in complex_part]
    space = QuadraticSpace(_pairing_gram(2 * m))
    tag = "sl" if trace_free else "gl"
    alg = MatrixLieAlgebra(4 * m, basis, metric=space, name=f"{tag}({m},C)")
    return CatalogEntry(f"{tag}_c", (m,), alg, False, False,
                        symmetric_family=not trace_free, gl_part=complex_part)


def _make_sp_real(n: int) -> "CatalogEntry":
    if n % 2:
        raise ValueError("sp(n,R) needs even n")
    gl_part = _symplectic_basis(n)
    basis = [_split_embed(a) for a in gl_part]
    space = QuadraticSpace(_pairing_gram(n))
    alg = MatrixLieAlgebra(2 * n, basis, metric=space, name=f"sp({n},R)")
    return CatalogEntry("sp_r", (n,), alg, False, False, False, gl_part=gl_part)


def _make_sp_complex(n: int) -> "CatalogEntry":
    if n % 2:
        raise ValueError("sp(n,C) needs even n")
    zero = RatMatrix.zeros(n, n)
    gl_part = []
    for m in _symplectic_basis(n):
        gl_part.append(_realify(m, zero))
        gl_part.append(_realify(zero, m))
    basis = [_split_embed(a) for a in gl_part]
    space = QuadraticSpace(_pairing_gram(2 * n))
    alg = MatrixLieAlgebra(4 * n, basis, metric=space, name=f"sp({n},C)")
    return CatalogEntry("sp_c", (n,), alg, False, False, False, gl_part=gl_part)


# ---------------------------------------------------------------------------
# octonions and the exceptional families (experimental)
# ---------------------------------------------------------------------------

class _CDAlgebra:
    """Cayley-Dickson tower over Q; elements are coefficient tuples."""

    def __init__(self, dim: int, mul: Callable, conj: Callable):
        self.dim = dim
        self.mul = mul
        self.conj = conj

    @classmethod
    def reals(cls) -> "_CDAlgebra":
        return cls(1, lambda u, v: (u[0] * v[0],), lambda u: (u[0],))

    def double(self, lam: int) -> "_CDAlgebra":
        d = self.dim

        def mul(u, v):
            a, b = u[:d], u[d:]
            c, e = v[:d], v[d:]
            first = tuple(x + QQ(lam) * y for x, y in
                          zip(self.mul(a, c), self.mul(self.conj(e), b)))
            second = tuple(x + y for x, y in
                           zip(self.mul(e, a), self.mul(b, self.conj(c))))
            return first + second

        def conj(u):
            return self.conj(u[:d]) + tuple(-x for x in u[d:])

        return _CDAlgebra(2 * d, mul, conj)

    def basis_vec(self, i: int) -> tuple:
        return tuple(QQ(1) if k == i else QQ(0) for k in range(self.dim))

    def norm_gram(self) -> RatMatrix:
        """Polarized norm form B(u, v) = Re(u * conj(v))."""
        rows = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                prod = self.mul(self.basis_vec(i), self.conj(self.basis_vec(j)))
                row.append(prod[0])
            rows.append(row)
        return RatMatrix.from_rows(rows)


def _octonions(split: bool) -> _CDAlgebra:
    quat = _CDAlgebra.reals().double(-1).double(-1)
    return quat.double(1 if split else -1)


def _derivations(alg: _CDAlgebra) -> list:
    """Derivations D(xy) = D(x)y + x D(y), as matrices on the algebra."""
    d = alg.dim
    basis = [alg.basis_vec(i) for i in range(d)]
    products = [[alg.mul(basis[a], basis[b]) for b in range(d)] for a in range(d)]
    rows = []
    for a in range(d):
        for b in range(d):
            for comp in range(d):
                row: dict = {}

                def add(i, j, v):
                    if v:
                        key = i * d + j
                        nv = row.get(key, QQ(0)) + v
                        if nv == 0:
                            row.pop(key, None)
                        else:
                            row[key] = nv

                # D(e_a e_b)_comp = sum_j (e_a e_b)_j D[comp][j]
                for j in range(d):
                    add(comp, j, products[a][b][j])
                # -(D e_a) e_b: -sum_i D[i][a] (e_i e_b)_comp
                for i in range(d):
                    add(i, a, -products[i][b][comp])
                # -e_a (D e_b): -sum_i D[i][b] (e_a e_i)_comp
                for i in range(d):
                    add(i, b, -products[a][i][comp])
                if row:
                    rows.append(row)
    sols = nullspace(RatMatrix(len(rows), d * d, rows))
    mats = []
    for k in range(sols.dim):
        flat = sols.row_tuple(k)
        mats.append(RatMatrix.from_rows(
            [[flat[i * d + j] for j in range(d)] for i in range(d)]))
    return mats


def _restrict_to_imaginary(mats: Sequence[RatMatrix]) -> list:
    out = []
    d = mats[0].rows if mats else 0
    for m in mats:
        for j in range(d):
            if m.get(0, j) != 0 or m.get(j, 0) != 0:
                raise ValueError("derivation does not annihilate the unit")
        out.append(RatMatrix.from_rows(
            [[m.get(i, j) for j in range(1, d)] for i in range(1, d)]))
    return out


def _make_g2(variant: str) -> "CatalogEntry":
    if variant == "split":
        octo, name, params = _octonions(split=True), "g2(2)'", ("split",)
    else:
        octo, name, params = _octonions(split=False), "g2", ()
    ders = _restrict_to_imaginary(_derivations(octo))
    gram_full = octo.norm_gram()
    gram = RatMatrix.from_rows(
        [[gram_full.get(i, j) for j in range(1, octo.dim)] for i in range(1, octo.dim)])
    alg = MatrixLieAlgebra(octo.dim - 1, ders, metric=QuadraticSpace(gram), name=name)
    if alg.dim != 14:
        raise RuntimeError(f"derivation algebra has dim {alg.dim}, expected 14")
    return CatalogEntry("g2_split" if variant == "split" else "g2", params, alg,
                        True, False, False, experimental=True)


def _make_g2_c() -> "CatalogEntry":
    base = _make_g2("compact").algebra
    alg = _complexify(base, "g2(C)")
    if alg.dim != 28:
        raise RuntimeError("complexified derivation algebra has wrong dimension")
    return CatalogEntry("g2_c", (), alg, True, False, False, experimental=True)


def _cayley_four_form(octo: _CDAlgebra) -> dict:
    """Alternation of B(1/2 (x (conj y) z - z (conj y) x), w) on basis 4-tuples."""
    d = octo.dim
    basis = [octo.basis_vec(i) for i in range(d)]
    gram = octo.norm_gram()

    def triple(x, y, z):
        left = octo.mul(x, octo.mul(octo.conj(y), z))
        right = octo.mul(z, octo.mul(octo.conj(y), x))
        return tuple(QQ(1, 2) * (a - b) for a, b in zip(left, right))

    def pair(u, v):
        gv = gram.mult_vec(v)
        return sum((u[i] * gv[i] for i in range(d)), QQ(0))

    raw = {}
    for a in range(d):
        for b in range(d):
            for c in range(d):
                t = triple(basis[a], basis[b], basis[c])
                for e in range(d):
                    v = pair(t, basis[e])
                    if v:
                        raw[(a, b, c, e)] = v
    from itertools import permutations
    form = {}
    for quad in _sorted_tuples(d, 4):
        total = QQ(0)
        for perm in permutations(range(4)):
            sign = _perm_sign(perm)
            key = tuple(quad[p] for p in perm)
            total += sign * raw.get(key, QQ(0))
        total /= 24
        if total:
            form[quad] = total
    return form


def _sorted_tuples(n: int, k: int) -> list:
    from itertools import combinations
    return list(combinations(range(n), k))


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _form_value(form: dict, idx: tuple) -> Fraction:
    order = tuple(sorted(idx))
    if len(set(idx)) < len(idx):
        return QQ(0)
    v = form.get(order, QQ(0))
    if not v:
        return v
    perm = tuple(order.index(i) for i in idx)
    return v * _perm_sign(perm)


def _make_spin7(split: bool) -> "CatalogEntry":
    octo = _octonions(split=split)
    d = octo.dim
    gram = octo.norm_gram()
    space = QuadraticSpace(gram)
    ambient = full_so(space)
    form = _cayley_four_form(octo)
    # stabilizer: sum over slots of Phi(.., A e_slot, ..) vanishes
    rows = []
    for quad in _sorted_tuples(d, 4):
        row = {}
        for k, bmat in enumerate(ambient.basis):
            total = QQ(0)
            for slot in range(4):
                col = quad[slot]
                for i in range(d):
                    a = bmat.get(i, col)
                    if a:
                        idx = list(quad)
                        idx[slot] = i
                        total += a * _form_value(form, tuple(idx))
            if total:
                row[k] = total
        rows.append(row)
    sols = nullspace(RatMatrix(len(rows), ambient.dim, rows))
    basis = [ambient.element(sols.row_tuple(k)) for k in range(sols.dim)]
    name = "spin(4,3)" if split else "spin(7)"
    alg = MatrixLieAlgebra(d, basis, metric=space, name=name)
    if alg.dim != 21:
        raise RuntimeError(f"4-form stabilizer has dim {alg.dim}, expected 21")
    return CatalogEntry("spin43" if split else "spin7",
                        (4, 3) if split else (7,), alg, True, False, False,
                        experimental=True)


def _make_spin7_c() -> "CatalogEntry":
    base = _make_spin7(split=False).algebra
    alg = _complexify(base, "spin(7,C)")
    return CatalogEntry("spin7_c", (7,), alg, True, False, False, experimental=True)


def _complexify(alg: MatrixLieAlgebra, name: str) -> MatrixLieAlgebra:
    """Span over C of a real so(G)-algebra, realified inside so(G, -G)."""
    n = alg.ambient_dim
    zero = RatMatrix.zeros(n, n)
    basis = [_realify(b, zero) for b in alg.basis]
    basis += [_realify(zero, b) for b in alg.basis]
    g = alg.metric.gram
    gram = _block2(g, RatMatrix.zeros(n, n), RatMatrix.zeros(n, n), -g)
    return MatrixLieAlgebra(2 * n, basis, metric=QuadraticSpace(gram), name=name)


# ---------------------------------------------------------------------------
# entries and id parsing
# ---------------------------------------------------------------------------

@dataclass
class CatalogEntry:
    family: str
    params: tuple
    algebra: MatrixLieAlgebra
    in_berger_list: bool
    in_einstein_list: bool
    symmetric_family: bool
    experimental: bool = False
    gl_part: Optional[list] = None

    @property
    def name(self) -> str:
        return self.algebra.name


@dataclass(frozen=True)
class FamilyInfo:
    key: str
    id_pattern: str
    description: str
    dim_formula: str
    in_berger_list: bool
    in_einstein_list: bool
    symmetric_family: bool
    experimental: bool = False


FAMILIES: list = [
    FamilyInfo("so", "so:p[,q]", "full pseudo-orthogonal algebra so(p,q)",
               "n(n-1)/2, n=p+q", True, True, True),
    FamilyInfo("so_c", "so:p:C", "complex orthogonal so(p,C) inside so(p,p)",
               "p(p-1)", True, True, True),
    FamilyInfo("u", "u:r[,s]", "pseudo-unitary u(r,s) inside so(2r,2s)",
               "(r+s)^2", True, True, True),
    FamilyInfo("su", "su:r[,s]", "special pseudo-unitary su(r,s) inside so(2r,2s)",
               "(r+s)^2-1", True, False, False),
    FamilyInfo("sp_q", "sp:r[,s]", "quaternionic unitary sp(r,s) inside so(4r,4s)",
               "n(2n+1), n=r+s", True, False, False),
    FamilyInfo("sp_sp1", "spsp1:r[,s]", "sp(r,s)+sp(1) inside so(4r,4s)",
               "n(2n+1)+3", True, True, True),
    FamilyInfo("sp_sl2", "spsl2:r:R", "sp(r,R)+sl(2,R) on R^{2r} x R^2 inside so(2r,2r)",
               "r(2r+1)+3", True, True, True),
    FamilyInfo("sp_sl2_c", "spsl2:r:C", "sp(r,C)+sl(2,C) inside so(4r,4r)",
               "2(r(2r+1)+3)", True, True, True),
    FamilyInfo("gl_r", "gl:n:R", "gl(n,R) acting on V + V* inside so(n,n)",
               "n^2", False, False, True),
    FamilyInfo("sl_r", "sl:n:R", "sl(n,R) acting on V + V* inside so(n,n)",
               "n^2-1", False, False, False),
    FamilyInfo("gl_c", "gl:m:C", "gl(m,C) acting on V + V* inside so(2m,2m)",
               "2m^2", False, False, True),
    FamilyInfo("sl_c", "sl:m:C", "sl(m,C) acting on V + V* inside so(2m,2m)",
               "2m^2-2", False, False, False),
    FamilyInfo("sp_r", "sp:n:R", "sp(n,R) (n even) acting on V + V* inside so(n,n)",
               "n(n+1)/2", False, False, False),
    FamilyInfo("sp_c", "sp:n:C", "sp(n,C) (n even) acting on V + V* inside so(2n,2n)",
               "n(n+1)", False, False, False),
    FamilyInfo("spin7", "spin:7", "spin(7) inside so(8), stabilizer of the Cayley 4-form",
               "21", True, False, False, experimental=True),
    FamilyInfo("spin43", "spin:4,3", "spin(4,3) inside so(4,4), split Cayley stabilizer",
               "21", True, False, False, experimental=True),
    FamilyInfo("spin7_c", "spin:7:C", "spin(7,C) inside so(8,8)",
               "42", True, False, False, experimental=True),
    FamilyInfo("g2", "g2", "derivations of the octonions, inside so(7)",
               "14", True, False, False, experimental=True),
    FamilyInfo("g2_split", "g2:split", "derivations of the split octonions, inside so(3,4)",
               "14", True, False, False, experimental=True),
    FamilyInfo("g2_c", "g2:C", "complexified octonion derivations, inside so(7,7)",
               "28", True, False, False, experimental=True),
]

_FAMILY_INFO = {f.key: f for f in FAMILIES}


def _build(family: str, params: tuple) -> CatalogEntry:
    if family == "so":
        return _make_so(*params)
    if family == "so_c":
        return _make_so_c(*params)
    if family == "u":
        return _make_u(params[0], params[1], trace_free=False)
    if family == "su":
        return _make_u(params[0], params[1], trace_free=True)
    if family == "sp_q":
        return _make_sp_quat(params[0], params[1], with_sp1=False)
    if family == "sp_sp1":
        return _make_sp_quat(params[0], params[1], with_sp1=True)
    if family == "sp_sl2":
        return _make_sp_sl2(*params)
    if family == "sp_sl2_c":
        return _make_sp_sl2_c(*params)
    if family == "gl_r":
        return _make_gl_sl_real(params[0], trace_free=False)
    if family == "sl_r":
        return _make_gl_sl_real(params[0], trace_free=True)
    if family == "gl_c":
        return _make_gl_sl_complex(params[0], trace_free=False)
    if family == "sl_c":
        return _make_gl_sl_complex(params[0], trace_free=True)
    if family == "sp_r":
        return _make_sp_real(params[0])
    if family == "sp_c":
        return _make_sp_complex(params[0])
    if family == "spin7":
        return _make_spin7(split=False)
    if family == "spin43":
        return _make_spin7(split=True)
    if family == "spin7_c":
        return _make_spin7_c()
    if family == "g2":
        return _make_g2("compact")
    if family == "g2_split":
        return _make_g2("split")
    if family == "g2_c":
        return _make_g2_c()
    raise KeyError(f"unknown catalog family: {family}")


def catalog_entry(family: str, params: Sequence[int] = ()) -> CatalogEntry:
    if family not in _FAMILY_INFO:
        raise KeyError(f"unknown catalog family: {family}")
    return _build(family, tuple(params))


def catalog(family: str, params: Sequence[int] = ()) -> MatrixLieAlgebra:
    """Construct a catalog algebra; invariants re-verified on construction."""
    return catalog_entry(family, params).algebra


_ID_RE = re.compile(r"^([a-z0-9]+)((?::[^:@]+)*)(?:@(.+))?$")


def parse_catalog_id(text: str) -> CatalogEntry:
    """Resolve ids like so:2,3 / u:1,1 / gl:2:R / sp:4:R / spin:7 / g2:split."""
    m = _ID_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed catalog id: {text!r}")
    head, rest, ambient_claim = m.group(1), m.group(2), m.group(3)
    tokens = [t for t in rest.split(":") if t] if rest else []
    field = None
    if tokens and tokens[-1] in ("R", "C", "H", "split"):
        field = tokens.pop()
    nums: tuple = ()
    if tokens:
        if len(tokens) != 1:
            raise ValueError(f"malformed catalog id: {text!r}")
        try:
            nums = tuple(int(x) for x in tokens[0].split(","))
        except ValueError:
            raise ValueError(f"malformed catalog parameters in {text!r}") from None
    family, params = _resolve_family(head, field, nums, text)
    entry = catalog_entry(family, params)
    if ambient_claim:
        _check_ambient_claim(entry, ambient_claim, text)
    return entry


def _resolve_family(head: str, field: Optional[str], nums: tuple, text: str):
    def pair(default_q=0):
        if len(nums) == 1:
            return (nums[0], default_q)
        if len(nums) == 2:
            return nums
        raise ValueError(f"{text!r}: expected one or two parameters")

    if head == "so":
        if field == "C":
            return "so_c", (nums[0],)
        return "so", pair()
    if head == "u":
        return "u", pair()
    if head == "su":
        return "su", pair()
    if head == "sp":
        if field == "R":
            return "sp_r", (nums[0],)
        if field == "C":
            return "sp_c", (nums[0],)
        return "sp_q", pair()
    if head == "spsp1":
        return "sp_sp1", pair()
    if head == "spsl2":
        if field == "C":
            return "sp_sl2_c", (nums[0],)
        return "sp_sl2", (nums[0],)
    if head == "gl":
        if field == "C":
            return "gl_c", (nums[0],)
        return "gl_r", (nums[0],)
    if head == "sl":
        if field == "C":
            return "sl_c", (nums[0],)
        return "sl_r", (nums[0],)
    if head == "spin":
        if field == "C":
            return "spin7_c", ()
        if nums == (7,):
            return "spin7", ()
        if nums == (4, 3):
            return "spin43", ()
        raise ValueError(f"{text!r}: spin supports spin:7, spin:4,3, spin:7:C")
    if head == "g2":
        if field == "split":
            return "g2_split", ()
        if field == "C":
            return "g2_c", ()
        return "g2", ()
    raise ValueError(f"unknown catalog family in {text!r}")


def _check_ambient_claim(entry: CatalogEntry, claim: str, text: str) -> None:
    m = re.match(r"^so\((\d+),(\d+)\)$", claim.replace(" ", ""))
    if not m:
        raise ValueError(f"{text!r}: ambient annotation must look like @so(p,q)")
    want = {int(m.group(1)), int(m.group(2))}
    sig = entry.algebra.metric.signature
    if {sig.p, sig.q} != want:
        raise ValueError(
            f"{text!r}: ambient signature is ({sig.p},{sig.q}), not {claim}")
