"""Matrix Lie algebras over the rationals.

A :class:`MatrixLieAlgebra` is a list of N x N rational matrices that is
verified at construction to be linearly independent and closed under the
commutator (structure constants are cached from the check).  When a metric is
attached, every basis element is verified to be skew-adjoint for it, i.e. the
algebra sits inside the pseudo-orthogonal algebra of the form.

The stabilizer of an m-dimensional isotropic subspace in Witt coordinates is
assembled from its four blocks (B, A, X, C); see :func:`decorated_algebra`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .ratlinalg import (
    QQ,
    RatMatrix,
    SpanSolver,
    SubspaceBasis,
    affine_solve,
    nullspace,
    span_union,
)
from .quadspaces import (
    QuadraticSpace,
    SplitSignature,
    residual_gram,
    witt_gram,
    _matrix_from_json,
    _matrix_to_json,
)


class LieClosureError(ValueError):
    """A bracket of basis elements left the span; carries the witness pair."""

    def __init__(self, i: int, j: int, msg: str = ""):
        self.witness = (i, j)
        super().__init__(msg or f"bracket of basis elements {i}, {j} is outside the span")


def bracket(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Commutator ab - ba, exact."""
    if a.rows != b.rows or a.cols != b.cols or a.rows != a.cols:
        raise ValueError("bracket needs square matrices of equal size")
    return a * b - b * a


class MatrixLieAlgebra:
    """A bracket-closed span of rational N x N matrices."""

    def __init__(self, ambient_dim: int, basis: Sequence[RatMatrix],
                 metric: Optional[QuadraticSpace] = None, name: str = "",
                 check: bool = True):
        self.ambient_dim = ambient_dim
        self.basis = list(basis)
        self.metric = metric
        self.name = name
        for k, b in enumerate(self.basis):
            if b.rows != ambient_dim or b.cols != ambient_dim:
                raise ValueError(f"basis element {k} has wrong shape")
        if metric is not None and metric.dim != ambient_dim:
            raise ValueError("metric dimension does not match ambient dimension")
        self._solver = SpanSolver([b.flatten() for b in self.basis], ambient_dim ** 2) \
            if self.basis else None
        self._structure: Optional[list] = None
        if check:
            self._verify(metric_check=metric is not None)

    # -- invariants --------------------------------------------------------

    def _verify(self, metric_check: bool) -> None:
        if metric_check:
            G = self.metric.gram
            for k, b in enumerate(self.basis):
                if not (b.transpose() * G + G * b).is_zero():
                    raise ValueError(f"basis element {k} is not skew for the metric")
        self.structure_constants()

    def structure_constants(self) -> list:
        """c[i][j] = coordinates of [b_i, b_j]; computed once, closure-checked."""
        if self._structure is None:
            d = self.dim
            table: list = [[None] * d for _ in range(d)]
            zero = tuple([QQ(0)] * d)
            for i in range(d):
                table[i][i] = zero
                for j in range(i + 1, d):
                    coords = self.coords_of(bracket(self.basis[i], self.basis[j]))
                    if coords is None:
                        raise LieClosureError(i, j)
                    table[i][j] = coords
                    table[j][i] = tuple(-c for c in coords)
            self._structure = table
        return self._structure

    @property
    def dim(self) -> int:
        return len(self.basis)

    # -- coordinates -------------------------------------------------------

    def coords_of(self, mat: RatMatrix) -> Optional[tuple]:
        """Coefficients of ``mat`` against the basis, or None if outside."""
        if self._solver is None:
            return () if mat.is_zero() else None
        return self._solver.coords_of(mat.flatten())

    def contains_matrix(self, mat: RatMatrix) -> bool:
        return self.coords_of(mat) is not None

    def element(self, coords: Sequence) -> RatMatrix:
        out = RatMatrix.zeros(self.ambient_dim, self.ambient_dim)
        for c, b in zip(coords, self.basis):
            if c:
                out = out + b.scale(c)
        return out

    def bracket_coords(self, u: Sequence, v: Sequence) -> tuple:
        """Bracket in coordinates via the cached structure constants."""
        table = self.structure_constants()
        d = self.dim
        out = [QQ(0)] * d
        for i, ci in enumerate(u):
            if not ci:
                continue
            for j, cj in enumerate(v):
                if not cj:
                    continue
                row = table[i][j]
                f = ci * cj
                for k in range(d):
                    if row[k]:
                        out[k] += f * row[k]
        return tuple(out)

    def flat_span(self) -> SubspaceBasis:
        """The algebra as a subspace of gl(N) in flattened coordinates."""
        return SubspaceBasis.from_vectors(
            self.ambient_dim ** 2, [b.flatten() for b in self.basis])

    def ad_matrix(self, i: int) -> RatMatrix:
        """Matrix of ad(b_i) on the algebra in basis coordinates."""
        table = self.structure_constants()
        d = self.dim
        return RatMatrix.from_rows(
            [[table[i][j][k] for j in range(d)] for k in range(d)])

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        data = {
            "name": self.name,
            "ambient_dim": self.ambient_dim,
            "basis": [_matrix_to_json(b) for b in self.basis],
        }
        if self.metric is not None:
            data["metric"] = _matrix_to_json(self.metric.gram)
        return data

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "MatrixLieAlgebra":
        metric = QuadraticSpace(_matrix_from_json(data["metric"])) if "metric" in data else None
        return cls(
            data["ambient_dim"],
            [_matrix_from_json(b) for b in data["basis"]],
            metric=metric,
            name=data.get("name", ""),
            check=check,
        )

    def __repr__(self) -> str:
        tag = f" '{self.name}'" if self.name else ""
        return f"MatrixLieAlgebra(dim={self.dim}, ambient={self.ambient_dim}{tag})"


def zero_algebra(ambient_dim: int, metric: Optional[QuadraticSpace] = None) -> MatrixLieAlgebra:
    return MatrixLieAlgebra(ambient_dim, [], metric=metric, name="0")


# ---------------------------------------------------------------------------
# the isotropic-subspace stabilizer and its (B, A, X, C) blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecoratedElement:
    """Block data (B, A, X, C) of an element of the isotropic stabilizer.

    B is m x m, A is (r+s) x (r+s) with A^t E + E A = 0, X is (r+s) x m
    (column i is the image direction for p_i), C is skew m x m.  The matrix is

        [ B   -X^t E   C    ]
        [ 0    A       X    ]
        [ 0    0      -B^t  ]
    """

    split: SplitSignature
    b: RatMatrix
    a: RatMatrix
    x: RatMatrix
    c: RatMatrix

    def __post_init__(self):
        m, n = self.split.m, self.split.n
        if self.b.rows != m or self.b.cols != m:
            raise ValueError("B block must be m x m")
        if self.a.rows != n or self.a.cols != n:
            raise ValueError("A block must be (r+s) x (r+s)")
        if self.x.rows != n or self.x.cols != m:
            raise ValueError("X block must be (r+s) x m")
        if self.c.rows != m or self.c.cols != m:
            raise ValueError("C block must be m x m")
        if self.c != -self.c.transpose():
            raise ValueError("C block must be skew")
        E = residual_gram(self.split)
        if not (self.a.transpose() * E + E * self.a).is_zero():
            raise ValueError("A block is not in so(r,s)")

    @property
    def matrix(self) -> RatMatrix:
        m, n = self.split.m, self.split.n
        d = self.split.dim
        E = residual_gram(self.split)
        top_mid = -(self.x.transpose() * E)
        entries = {}
        for i in range(m):
            for j in range(m):
                v = self.b.get(i, j)
                if v:
                    entries[(i, j)] = v
                v = self.c.get(i, j)
                if v:
                    entries[(i, m + n + j)] = v
                v = -self.b.get(j, i)
                if v:
                    entries[(m + n + i, m + n + j)] = v
        for i in range(m):
            for a in range(n):
                v = top_mid.get(i, a)
                if v:
                    entries[(i, m + a)] = v
                v = self.x.get(a, i)
                if v:
                    entries[(m + a, m + n + i)] = v
        for a in range(n):
            for b in range(n):
                v = self.a.get(a, b)
                if v:
                    entries[(m + a, m + b)] = v
        return RatMatrix.from_entries(d, d, entries)

    @classmethod
    def zero(cls, split: SplitSignature) -> "DecoratedElement":
        m, n = split.m, split.n
        return cls(split, RatMatrix.zeros(m, m), RatMatrix.zeros(n, n),
                   RatMatrix.zeros(n, m), RatMatrix.zeros(m, m))


def decorated_matrix(split: SplitSignature, b: RatMatrix, a: RatMatrix,
                     x: RatMatrix, c: RatMatrix) -> RatMatrix:
    return DecoratedElement(split, b, a, x, c).matrix


def decorated_project(split: SplitSignature, mat: RatMatrix) -> DecoratedElement:
    """Unique block components of a stabilizer element.

    Raises ``ValueError`` when ``mat`` is not in the stabilizer's span (a
    nonzero forbidden block, an inconsistent -B^t or -X^t E block, a
    non-skew C, or an A outside so(r,s)).
    """
    m, n = split.m, split.n
    d = split.dim
    if mat.rows != d or mat.cols != d:
        raise ValueError("matrix has wrong ambient dimension")
    b = RatMatrix.from_rows([[mat.get(i, j) for j in range(m)] for i in range(m)]) \
        if m else RatMatrix.zeros(0, 0)
    a = RatMatrix.from_rows([[mat.get(m + i, m + j) for j in range(n)] for i in range(n)]) \
        if n else RatMatrix.zeros(0, 0)
    x = RatMatrix.from_rows([[mat.get(m + i, m + n + j) for j in range(m)] for i in range(n)],
                            cols=m) if n else RatMatrix.zeros(0, m)
    c = RatMatrix.from_rows([[mat.get(i, m + n + j) for j in range(m)] for i in range(m)])
    for i in range(m):
        for j in range(d):
            if j < m and mat.get(m + n + i, j) != 0:
                raise ValueError("nonzero lower-left q-to-p block")
        for a_idx in range(n):
            if mat.get(m + n + i, m + a_idx) != 0:
                raise ValueError("nonzero lower q-to-e block")
            if mat.get(m + a_idx, i) != 0:
                raise ValueError("nonzero e-to-p block")
        for j in range(m):
            if mat.get(m + n + i, m + n + j) != -b.get(j, i):
                raise ValueError("lower-right block is not -B^t")
    elem = DecoratedElement(split, b, a, x, c)   # validates C skew, A in so(r,s)
    if elem.matrix != mat:
        raise ValueError("p-to-e block is not -X^t E")
    return elem


def decorated_algebra(split: SplitSignature, name: str = "") -> MatrixLieAlgebra:
    """The maximal subalgebra preserving the isotropic span of p_1..p_m.

    Basis ordering: all B-units E_ij, then an so(r,s) basis, then X-units,
    then C-units; dim = m^2 + (r+s)(r+s-1)/2 + m(r+s) + m(m-1)/2.
    """
    m, n = split.m, split.n
    basis = []
    zb = RatMatrix.zeros(m, m)
    za = RatMatrix.zeros(n, n)
    zx = RatMatrix.zeros(n, m)
    for i in range(m):
        for j in range(m):
            basis.append(decorated_matrix(
                split, RatMatrix.from_entries(m, m, {(i, j): QQ(1)}), za, zx, zb))
    E = residual_gram(split)
    for a in range(n):
        for b in range(a + 1, n):
            gen = RatMatrix.from_entries(
                n, n, {(a, b): E.get(b, b), (b, a): -E.get(a, a)})
            basis.append(decorated_matrix(split, zb, gen, zx, zb))
    for a in range(n):
        for i in range(m):
            basis.append(decorated_matrix(
                split, zb, za, RatMatrix.from_entries(n, m, {(a, i): QQ(1)}), zb))
    for i in range(m):
        for j in range(i + 1, m):
            basis.append(decorated_matrix(
                split, zb, za, zx,
                RatMatrix.from_entries(m, m, {(i, j): QQ(1), (j, i): QQ(-1)})))
    space = QuadraticSpace(witt_gram(split))
    return MatrixLieAlgebra(split.dim, basis, metric=space,
                            name=name or f"iso-stab({split.m};{split.r},{split.s})")


# ---------------------------------------------------------------------------
# centralizers, generated ideals, module probes
# ---------------------------------------------------------------------------

def centralizer(g: MatrixLieAlgebra, ambient: MatrixLieAlgebra) -> SubspaceBasis:
    """{x in ambient : [x, b] = 0 for every basis element b of g}.

    Returned in flattened gl(N) coordinates so it can be compared with
    ``g.flat_span()`` directly.
    """
    if ambient.ambient_dim != g.ambient_dim:
        raise ValueError("ambient mismatch")
    if ambient.dim == 0:
        return SubspaceBasis.zero(g.ambient_dim ** 2)
    # unknowns: coefficients against ambient's basis
    rows = []
    for b in g.basis:
        cols = [bracket(a, b).flatten() for a in ambient.basis]
        for entry in range(g.ambient_dim ** 2):
            row = {k: cols[k][entry] for k in range(ambient.dim) if cols[k][entry] != 0}
            rows.append(row)
    system = RatMatrix(len(rows), ambient.dim, rows)
    sols = nullspace(system)
    vecs = [ambient.element(sols.row_tuple(k)).flatten() for k in range(sols.dim)]
    return SubspaceBasis.from_vectors(g.ambient_dim ** 2, vecs)


def generated_ideal(g: MatrixLieAlgebra, seed: SubspaceBasis) -> SubspaceBasis:
    """Smallest ideal of g containing ``seed`` (seed in g-coordinates)."""
    if seed.ambient_dim != g.dim:
        raise ValueError("seed must be given in g-coordinates")
    current = seed
    while True:
        new_vecs = list(current.row_tuples())
        for i in range(g.dim):
            ei = tuple(QQ(1) if k == i else QQ(0) for k in range(g.dim))
            for v in current.row_tuples():
                new_vecs.append(g.bracket_coords(ei, v))
        nxt = SubspaceBasis.from_vectors(g.dim, new_vecs)
        if nxt.dim == current.dim:
            return nxt
        current = nxt


def invariant_subspace_probe(g: MatrixLieAlgebra, candidate: SubspaceBasis) -> bool:
    """True iff b v stays in ``candidate`` for all basis b and generators v."""
    if candidate.ambient_dim != g.ambient_dim:
        raise ValueError("candidate lives in the wrong module")
    for b in g.basis:
        for i in range(candidate.dim):
            image = b.mult_vec(candidate.row_tuple(i))
            if not candidate.contains_vector(image):
                return False
    return True


def common_kernel(g: MatrixLieAlgebra) -> SubspaceBasis:
    """{v : b v = 0 for all b}, the annihilated part of the module."""
    if g.dim == 0:
        return SubspaceBasis.full(g.ambient_dim)
    rows = []
    for b in g.basis:
        rows.extend(b.rowdict(i) for i in range(b.rows))
    return nullspace(RatMatrix(len(rows), g.ambient_dim, rows))
