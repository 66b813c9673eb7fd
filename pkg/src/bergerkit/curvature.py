"""Algebraic curvature tensors, Einstein-type conditions, prolongations.

For a metric algebra g the space of curvature tensors is the exact nullspace
of the stacked first-Bianchi constraints inside Lambda^2 V* (x) g; the
Einstein slice (Ricci equal to the metric) is an affine subspace handled by
an exact affine solve, and emptiness is decided, never sampled.  The Ricci
convention is fixed by Ric(X,Y) = tr(Z -> R(Z,X)Y), which gives the
constant-curvature tensor Ricci (n-1) times the metric.

Constraint rows are assembled in lexicographic order of (a, b, c) and output
coordinate, so bases are canonical and runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ratlinalg import (
    QQ,
    RatMatrix,
    SpanSolver,
    SubspaceBasis,
    affine_solve,
    nullspace,
)
from .liealg import MatrixLieAlgebra, generated_ideal


def _pairs(n: int) -> list:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


class CurvatureTensor:
    """Element of Lambda^2 V* (x) g: components R(e_a, e_b) in g for a < b.

    ``comps[pair][k]`` is the coefficient of the k-th basis element of g in
    R(e_a, e_b), where pairs are enumerated lexicographically.
    """

    __slots__ = ("algebra", "comps", "_pairs", "_pair_index")

    def __init__(self, algebra: MatrixLieAlgebra, comps: Sequence[Sequence[Fraction]]):
        n = algebra.ambient_dim
        self.algebra = algebra
        self._pairs = _pairs(n)
        self._pair_index = {p: i for i, p in enumerate(self._pairs)}
        if len(comps) != len(self._pairs):
            raise ValueError("wrong number of pair components")
        self.comps = tuple(tuple(row) for row in comps)
        for row in self.comps:
            if len(row) != algebra.dim:
                raise ValueError("component row has wrong length")

    def coeffs(self, a: int, b: int) -> tuple:
        """g-coordinates of R(e_a, e_b); antisymmetric in (a, b) by storage."""
        if a == b:
            return tuple([QQ(0)] * self.algebra.dim)
        if a < b:
            return self.comps[self._pair_index[(a, b)]]
        return tuple(-c for c in self.comps[self._pair_index[(b, a)]])

    def matrix_at(self, a: int, b: int) -> RatMatrix:
        return self.algebra.element(self.coeffs(a, b))

    def apply(self, a: int, b: int, vec: Sequence) -> tuple:
        return self.matrix_at(a, b).mult_vec(list(vec))

    def bianchi_residual(self) -> Fraction:
        """Max abs of the cyclic sums; zero iff the identity holds."""
        n = self.algebra.ambient_dim
        worst = QQ(0)
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    e = [QQ(0)] * n
                    for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
                        ek = [QQ(0)] * n
                        ek[k] = QQ(1)
                        img = self.apply(i, j, ek)
                        for t in range(n):
                            e[t] += img[t]
                    worst = max(worst, max((abs(v) for v in e), default=QQ(0)))
        return worst

    def scale(self, c) -> "CurvatureTensor":
        return CurvatureTensor(self.algebra,
                               [[v * c for v in row] for row in self.comps])

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.algebra, [
            [x + y for x, y in zip(r1, r2)] for r1, r2 in zip(self.comps, other.comps)])

    def flatten(self) -> tuple:
        return tuple(v for row in self.comps for v in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CurvatureTensor):
            return NotImplemented
        return self.algebra is other.algebra and self.comps == other.comps


class CurvatureSpace:
    """Exact basis of the curvature-tensor space of g."""

    def __init__(self, algebra: MatrixLieAlgebra, basis: Sequence[CurvatureTensor]):
        self.algebra = algebra
        self.basis = list(basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def tensor_from_coords(self, coords: Sequence) -> CurvatureTensor:
        npairs = len(_pairs(self.algebra.ambient_dim))
        acc = [[QQ(0)] * self.algebra.dim for _ in range(npairs)]
        for c, t in zip(coords, self.basis):
            if c:
                for p in range(npairs):
                    row = t.comps[p]
                    for k in range(self.algebra.dim):
                        if row[k]:
                            acc[p][k] += c * row[k]
        return CurvatureTensor(self.algebra, acc)


@dataclass
class AffineCurvatureSpace:
    """The Einstein slice: a particular solution plus the Ricci-flat directions."""
    algebra: MatrixLieAlgebra
    particular: Optional[CurvatureTensor]
    directions: list

    @property
    def is_empty(self) -> bool:
        return self.particular is None

    @property
    def dim_directions(self) -> int:
        return len(self.directions)


def curvature_space(g: MatrixLieAlgebra) -> CurvatureSpace:
    """All tensors in Lambda^2 V* (x) g satisfying the first Bianchi identity.

    Unknowns are indexed by (pair, basis element of g); one constraint row
    per ordered triple a < b < c and output coordinate.
    """
    _require_metric(g)
    n = g.ambient_dim
    d = g.dim
    pairs = _pairs(n)
    pair_index = {p: i for i, p in enumerate(pairs)}
    if d == 0:
        return CurvatureSpace(g, [])
    ncols = len(pairs) * d

    def var(pair_idx: int, k: int) -> int:
        return pair_idx * d + k

    rows = []
    basis_cols = [[tuple(b.get(z, c) for z in range(n)) for c in range(n)] for b in g.basis]
    # basis_cols[k][c][z] = (B_k e_c)_z
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for z in range(n):
                    row: dict = {}

                    def add(i, j, k, v):
                        if not v:
                            return
                        if i < j:
                            idx, sgn = pair_index[(i, j)], 1
                        else:
                            idx, sgn = pair_index[(j, i)], -1
                        col = var(idx, k)
                        nv = row.get(col, QQ(0)) + sgn * v
                        if nv == 0:
                            row.pop(col, None)
                        else:
                            row[col] = nv

                    for k in range(d):
                        add(a, b, k, basis_cols[k][c][z])
                        add(b, c, k, basis_cols[k][a][z])
                        add(c, a, k, basis_cols[k][b][z])
                    rows.append(row)
    sols = nullspace(RatMatrix(len(rows), ncols, rows))
    tensors = []
    for t in range(sols.dim):
        flat = sols.row_tuple(t)
        tensors.append(CurvatureTensor(
            g, [flat[p * d:(p + 1) * d] for p in range(len(pairs))]))
    return CurvatureSpace(g, tensors)


def ricci(tensor: CurvatureTensor) -> RatMatrix:
    """Ric(X, Y) = tr(Z -> R(Z, X) Y); the constant-curvature tensor gives (n-1) g."""
    g = tensor.algebra
    n = g.ambient_dim
    ric = [[QQ(0)] * n for _ in range(n)]
    for p, (a, b) in enumerate(_pairs(n)):
        mat = g.element(tensor.comps[p])
        # R(e_a, e_b) contributes: Ric[b][c] += mat[a][c], Ric[a][c] -= mat[b][c]
        for c in range(n):
            v = mat.get(a, c)
            if v:
                ric[b][c] += v
            v = mat.get(b, c)
            if v:
                ric[a][c] -= v
    return RatMatrix.from_rows(ric)


def einstein_space(g: MatrixLieAlgebra, space: Optional[CurvatureSpace] = None) -> AffineCurvatureSpace:
    """Affine solve of Ric(R) = g over curvature-space coordinates.

    ``particular`` is None exactly when the Einstein slice is empty.
    """
    _require_metric(g)
    if space is None:
        space = curvature_space(g)
    n = g.ambient_dim
    if space.dim == 0:
        # Ric(0) = 0 never equals the (invertible) metric
        return AffineCurvatureSpace(g, None, [])
    cols = []
    for t in space.basis:
        cols.append(ricci(t).flatten())
    rows = []
    for entry in range(n * n):
        rows.append({k: cols[k][entry] for k in range(space.dim) if cols[k][entry] != 0})
    system = RatMatrix(len(rows), space.dim, rows)
    target = list(g.metric.gram.flatten())
    x, kernel = affine_solve(system, target)
    particular = space.tensor_from_coords(x) if x is not None else None
    directions = [space.tensor_from_coords(kernel.row_tuple(i)) for i in range(kernel.dim)]
    return AffineCurvatureSpace(g, particular, directions)


def l_span(space) -> SubspaceBasis:
    """Span of the images {R(e_a, e_b)} in g-coordinates.

    Accepts a CurvatureSpace or an AffineCurvatureSpace; for the affine case
    the images of the particular solution and of every direction are included
    (empty affine slice spans zero).
    """
    if isinstance(space, CurvatureSpace):
        g = space.algebra
        tensors = space.basis
    else:
        g = space.algebra
        if space.particular is None:
            return SubspaceBasis.zero(g.dim)
        tensors = [space.particular] + list(space.directions)
    vecs = []
    for t in tensors:
        vecs.extend(t.comps)
    return SubspaceBasis.from_vectors(g.dim, vecs)


def is_berger(g: MatrixLieAlgebra, space: Optional[CurvatureSpace] = None) -> bool:
    """L(R(g)) = g, with L the ideal spanned by the curvature images.

    The zero algebra is not counted as a Berger subalgebra.
    """
    _require_metric(g)
    if g.dim == 0:
        return False
    if space is None:
        space = curvature_space(g)
    ideal = generated_ideal(g, l_span(space))
    return ideal.dim == g.dim


def is_einstein_berger(g: MatrixLieAlgebra,
                       einstein: Optional[AffineCurvatureSpace] = None) -> bool:
    """L(R_1(g)) = g, with L the vector span of the Einstein-slice images."""
    _require_metric(g)
    if g.dim == 0:
        return False
    if einstein is None:
        einstein = einstein_space(g)
    return l_span(einstein).dim == g.dim


def nabla_space(g: MatrixLieAlgebra, space: Optional[CurvatureSpace] = None) -> list:
    """Basis of the derivation-type space in V* (x) R(g).

    Elements are maps S with S_X a curvature tensor and cyclic sums
    S_X(Y,Z) + S_Y(Z,X) + S_Z(X,Y) = 0; returned as lists of curvature-space
    coordinate rows (one row of length dim R(g) per ambient index).
    """
    _require_metric(g)
    if space is None:
        space = curvature_space(g)
    n = g.ambient_dim
    m_r = space.dim
    if m_r == 0:
        return []
    d = g.dim

    def var(x: int, t: int) -> int:
        return x * m_r + t

    rows = []
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for k in range(d):
                    row: dict = {}

                    def add(x, i, j, k_):
                        for t in range(m_r):
                            v = _pair_coeff(space.basis[t], i, j, k_)
                            if v:
                                col = var(x, t)
                                nv = row.get(col, QQ(0)) + v
                                if nv == 0:
                                    row.pop(col, None)
                                else:
                                    row[col] = nv

                    add(a, b, c, k)
                    add(b, c, a, k)
                    add(c, a, b, k)
                    rows.append(row)
    sols = nullspace(RatMatrix(len(rows), n * m_r, rows))
    out = []
    for i in range(sols.dim):
        flat = sols.row_tuple(i)
        out.append([flat[x * m_r:(x + 1) * m_r] for x in range(n)])
    return out


def _pair_coeff(tensor: CurvatureTensor, i: int, j: int, k: int) -> Fraction:
    if i == j:
        return QQ(0)
    if i < j:
        return tensor.comps[tensor._pair_index[(i, j)]][k]
    return -tensor.comps[tensor._pair_index[(j, i)]][k]


def is_symmetric_berger(g: MatrixLieAlgebra,
                        space: Optional[CurvatureSpace] = None) -> bool:
    """Berger and with vanishing derivation-type space."""
    _require_metric(g)
    if space is None:
        space = curvature_space(g)
    if not is_berger(g, space):
        return False
    return len(nabla_space(g, space)) == 0


# ---------------------------------------------------------------------------
# prolongations of linear representations
# ---------------------------------------------------------------------------

@dataclass
class Prolongation:
    """Basis of the k-th prolongation of a linear algebra g in gl(n).

    Order 1: symmetric maps S with S(X)Y = S(Y)X, each stored as a list of n
    matrices (images of the coordinate vectors).  Order 2: maps on symmetric
    pairs, stored per lexicographic pair (a <= b).
    """
    order: int
    n: int
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)


def prolongation(gl_basis: Sequence[RatMatrix], n: int, order: int) -> Prolongation:
    """Nullspace of the symmetry constraints for maps V^k -> g, k = order."""
    if order not in (1, 2):
        raise ValueError("only first and second prolongations are supported")
    d = len(gl_basis)
    if d == 0:
        return Prolongation(order, n, [])
    cols_of = [[tuple(b.get(z, c) for z in range(n)) for c in range(n)] for b in gl_basis]

    if order == 1:
        ncols = n * d

        def var(x, k):
            return x * d + k

        rows = []
        for x in range(n):
            for y in range(x + 1, n):
                for z in range(n):
                    row = {}
                    for k in range(d):
                        v = cols_of[k][y][z]
                        if v:
                            row[var(x, k)] = row.get(var(x, k), QQ(0)) + v
                        v = cols_of[k][x][z]
                        if v:
                            row[var(y, k)] = row.get(var(y, k), QQ(0)) - v
                    rows.append({c: v for c, v in row.items() if v != 0})
        sols = nullspace(RatMatrix(len(rows), ncols, rows))
        basis = []
        for i in range(sols.dim):
            flat = sols.row_tuple(i)
            maps = []
            for x in range(n):
                coords = flat[x * d:(x + 1) * d]
                m = RatMatrix.zeros(n, n)
                for k, c in enumerate(coords):
                    if c:
                        m = m + gl_basis[k].scale(c)
                maps.append(m)
            basis.append(maps)
        return Prolongation(1, n, basis)

    sym_pairs = [(a, b) for a in range(n) for b in range(a, n)]
    pidx = {p: i for i, p in enumerate(sym_pairs)}
    ncols = len(sym_pairs) * d

    def var2(p, k):
        return p * d + k

    rows = []
    for a in range(n):
        for b in range(n):
            for c in range(b + 1, n):
                # S(e_a, e_b) e_c = S(e_a, e_c) e_b
                for z in range(n):
                    row = {}
                    p1 = pidx[(min(a, b), max(a, b))]
                    p2 = pidx[(min(a, c), max(a, c))]
                    for k in range(d):
                        v = cols_of[k][c][z]
                        if v:
                            col = var2(p1, k)
                            row[col] = row.get(col, QQ(0)) + v
                        v = cols_of[k][b][z]
                        if v:
                            col = var2(p2, k)
                            row[col] = row.get(col, QQ(0)) - v
                    rows.append({cc: v for cc, v in row.items() if v != 0})
    sols = nullspace(RatMatrix(len(rows), ncols, rows))
    basis = []
    for i in range(sols.dim):
        flat = sols.row_tuple(i)
        maps = {}
        for p, (a, b) in enumerate(sym_pairs):
            coords = flat[p * d:(p + 1) * d]
            m = RatMatrix.zeros(n, n)
            for k, c in enumerate(coords):
                if c:
                    m = m + gl_basis[k].scale(c)
            maps[(a, b)] = m
        basis.append(maps)
    return Prolongation(2, n, basis)


def prolongation_of_algebra(g: MatrixLieAlgebra, order: int,
                            gl_part: Optional[Sequence[RatMatrix]] = None) -> Prolongation:
    """Prolongation of the designated gl-part, or of the defining representation."""
    if gl_part is not None:
        n = gl_part[0].rows if gl_part else 0
        return prolongation(gl_part, n, order)
    return prolongation(g.basis, g.ambient_dim, order)


# ---------------------------------------------------------------------------
# split-pairing diagnostics
# ---------------------------------------------------------------------------

def nn_block_structure(tensor: CurvatureTensor, gl_part: Sequence[RatMatrix]) -> dict:
    """Diagnostics for curvature of an algebra preserving V and V*.

    Asserts the vanishing of R on Lambda^2 V and Lambda^2 V* (a violation
    signals a construction bug and raises), and expresses each map
    X -> R(X, q_j) as an element of the first prolongation of the gl-part.
    """
    g = tensor.algebra
    n2 = g.ambient_dim
    if n2 % 2:
        raise ValueError("ambient dimension must be even (V + V*)")
    n = n2 // 2
    for a in range(n):
        for b in range(a + 1, n):
            if any(c != 0 for c in tensor.coeffs(a, b)):
                raise ValueError(f"R(e_{a}, e_{b}) is nonzero on Lambda^2 V")
            if any(c != 0 for c in tensor.coeffs(n + a, n + b)):
                raise ValueError(f"R(q_{a}, q_{b}) is nonzero on Lambda^2 V*")
    prol = prolongation(list(gl_part), n, 1)
    solver = SpanSolver(
        [tuple(v for m in maps for v in m.flatten()) for maps in prol.basis],
        n * n * n) if prol.dim else None
    coords = []
    for j in range(n):
        maps = []
        for x in range(n):
            mat = tensor.matrix_at(x, n + j)
            # gl-part of the value: top-left n x n block
            maps.append(RatMatrix.from_rows(
                [[mat.get(r, c) for c in range(n)] for r in range(n)]))
        flat = tuple(v for m in maps for v in m.flatten())
        if solver is None:
            if any(flat):
                raise ValueError("curvature map is outside the (zero) first prolongation")
            coords.append(())
        else:
            c = solver.coords_of(flat)
            if c is None:
                raise ValueError("curvature map is outside the first prolongation")
            coords.append(c)
    ric = ricci(tensor)
    return {
        "lambda2_v_vanishes": True,
        "lambda2_vstar_vanishes": True,
        "prolongation_coords": coords,
        "ricci_is_zero": ric.is_zero(),
    }


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def curvature_report(g: MatrixLieAlgebra,
                     gl_part: Optional[Sequence[RatMatrix]] = None,
                     with_prolongations: bool = True) -> dict:
    """The full classification report for one algebra (all exact)."""
    _require_metric(g)
    space = curvature_space(g)
    einstein = einstein_space(g, space)
    lr = generated_ideal(g, l_span(space)) if g.dim else l_span(space)
    lr1 = l_span(einstein)
    nabla = nabla_space(g, space)
    report = {
        "algebra": g.name,
        "dim": g.dim,
        "ambient_dim": g.ambient_dim,
        "dim_R": space.dim,
        "dim_R0": einstein.dim_directions,
        "R1_nonempty": not einstein.is_empty,
        "dim_LR": lr.dim,
        "dim_LR1": lr1.dim,
        "is_berger": bool(g.dim) and lr.dim == g.dim,
        "is_einstein_berger": bool(g.dim) and lr1.dim == g.dim,
        "dim_nabla": len(nabla),
        "is_symmetric_berger": bool(g.dim) and lr.dim == g.dim and len(nabla) == 0,
    }
    if with_prolongations:
        report["dim_prolongation_1"] = prolongation_of_algebra(g, 1, gl_part).dim
        report["dim_prolongation_2"] = prolongation_of_algebra(g, 2, gl_part).dim
    return report


def _require_metric(g: MatrixLieAlgebra) -> None:
    if g.metric is None:
        raise ValueError("curvature operations need an algebra with a metric")
