"""Pseudo-Euclidean quadratic spaces, Witt bases, and isotropic rebasing.

A :class:`QuadraticSpace` is a rational symmetric invertible Gram matrix; a
:class:`WittBasis` is a basis ``p_1..p_m, e_1..e_{r+s}, q_1..q_m`` in which
the p's and q's are isotropic and pair to the identity while the e's are
orthonormal up to sign.  :func:`witt_rebase` changes the q- and e-vectors
while keeping the p-span fixed, which is how elements of the stabilizer of an
isotropic subspace get their off-diagonal blocks normalized away.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ratlinalg import QQ, RatMatrix, Scalar, affine_solve, _as_qq


@dataclass(frozen=True)
class Signature:
    """Counts of +1 and -1 directions; convention: the +1 block comes first."""
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("signature counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.p + self.q


@dataclass(frozen=True)
class SplitSignature:
    """Ambient signature (m+r, m+s) with an m-dimensional isotropic rank."""
    m: int
    r: int
    s: int

    def __post_init__(self):
        if self.m < 1 or self.r < 0 or self.s < 0:
            raise ValueError("need m >= 1 and r, s >= 0")

    @property
    def n(self) -> int:
        """Dimension of the orthogonal middle block."""
        return self.r + self.s

    @property
    def ambient(self) -> Signature:
        return Signature(self.m + self.r, self.m + self.s)

    @property
    def dim(self) -> int:
        return 2 * self.m + self.r + self.s


def residual_gram(split: SplitSignature) -> RatMatrix:
    """E_{r,s} = diag(+1 x r, -1 x s)."""
    return RatMatrix.diagonal([QQ(1)] * split.r + [QQ(-1)] * split.s)


def signature_of(gram: RatMatrix) -> Signature:
    """Exact signature via symmetric congruence diagonalization (Lagrange)."""
    n = gram.rows
    work = [row[:] for row in gram.to_rows()]
    pos = neg = 0
    used = [False] * n
    for _ in range(n):
        k = next((i for i in range(n) if not used[i] and work[i][i] != 0), None)
        if k is None:
            # all remaining diagonal entries vanish; create one from an
            # off-diagonal pair (possible unless the remaining block is zero)
            pair = None
            for i in range(n):
                if used[i]:
                    continue
                for j in range(n):
                    if not used[j] and j != i and work[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break
            i, j = pair
            for c in range(n):
                work[i][c] += work[j][c]
            for r in range(n):
                work[r][i] += work[r][j]
            k = i
        d = work[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        used[k] = True
        for i in range(n):
            if i == k or used[i]:
                continue
            f = work[i][k] / d
            if f:
                for c in range(n):
                    work[i][c] -= f * work[k][c]
                for r in range(n):
                    work[r][i] -= f * work[r][k]
    return Signature(pos, neg)


class QuadraticSpace:
    """R^n with a rational symmetric invertible bilinear form."""

    __slots__ = ("dim", "gram", "_signature")

    def __init__(self, gram: RatMatrix):
        if gram.rows != gram.cols:
            raise ValueError("Gram matrix must be square")
        if gram != gram.transpose():
            raise ValueError("Gram matrix must be symmetric")
        self.dim = gram.rows
        self.gram = gram
        sig = signature_of(gram)
        if sig.total != self.dim:
            raise ValueError("Gram matrix is degenerate")
        self._signature = sig

    @property
    def signature(self) -> Signature:
        return self._signature

    def inner(self, u: Sequence[Scalar], v: Sequence[Scalar]) -> Fraction:
        gv = self.gram.mult_vec([_as_qq(x) for x in v])
        return sum((_as_qq(u[i]) * gv[i] for i in range(self.dim)), QQ(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadraticSpace):
            return NotImplemented
        return self.gram == other.gram

    def __hash__(self) -> int:
        return hash(self.gram)

    def __repr__(self) -> str:
        s = self.signature
        return f"QuadraticSpace(dim={self.dim}, signature=({s.p},{s.q}))"

    def to_json(self) -> dict:
        return {"dim": self.dim, "gram": _matrix_to_json(self.gram)}

    @classmethod
    def from_json(cls, data: dict) -> "QuadraticSpace":
        return cls(_matrix_from_json(data["gram"]))


def standard_space(sig: Signature) -> QuadraticSpace:
    """diag(+1 x p, -1 x q); the +1 entries come first."""
    return QuadraticSpace(RatMatrix.diagonal([QQ(1)] * sig.p + [QQ(-1)] * sig.q))


def witt_gram(split: SplitSignature) -> RatMatrix:
    """Gram in Witt coordinates: identity blocks pairing p_i with q_i, E_{r,s} middle."""
    m, n = split.m, split.n
    d = split.dim
    entries = {}
    for i in range(m):
        entries[(i, m + n + i)] = QQ(1)
        entries[(m + n + i, i)] = QQ(1)
    for a in range(split.r):
        entries[(m + a, m + a)] = QQ(1)
    for a in range(split.s):
        entries[(m + split.r + a, m + split.r + a)] = QQ(-1)
    return RatMatrix.from_entries(d, d, entries)


class WittBasis:
    """Columns p_1..p_m, e_1..e_n, q_1..q_m of an invertible matrix."""

    __slots__ = ("split", "matrix")

    def __init__(self, split: SplitSignature, matrix: RatMatrix):
        if matrix.rows != split.dim or matrix.cols != split.dim:
            raise ValueError("basis matrix has wrong shape")
        self.split = split
        self.matrix = matrix

    def p(self, i: int) -> tuple:
        return self._col(i)

    def e(self, a: int) -> tuple:
        return self._col(self.split.m + a)

    def q(self, i: int) -> tuple:
        return self._col(self.split.m + self.split.n + i)

    def _col(self, j: int) -> tuple:
        return tuple(self.matrix.get(i, j) for i in range(self.matrix.rows))

    def inverse(self) -> RatMatrix:
        n = self.matrix.rows
        cols = []
        for j in range(n):
            rhs = [QQ(1) if i == j else QQ(0) for i in range(n)]
            x, _ = affine_solve(self.matrix, rhs)
            if x is None:
                raise ValueError("basis matrix is singular")
            cols.append(x)
        return RatMatrix.from_rows(cols).transpose()

    def component_matrix(self, endo: RatMatrix) -> RatMatrix:
        """Matrix of an ambient endomorphism with respect to this basis."""
        return self.inverse() * endo * self.matrix

    def to_json(self) -> dict:
        return {
            "split": {"m": self.split.m, "r": self.split.r, "s": self.split.s},
            "matrix": _matrix_to_json(self.matrix),
        }

    @classmethod
    def from_json(cls, data: dict) -> "WittBasis":
        sp = data["split"]
        return cls(SplitSignature(sp["m"], sp["r"], sp["s"]), _matrix_from_json(data["matrix"]))


def standard_witt(split: SplitSignature) -> tuple:
    """The canonical Witt basis: ambient coordinates are Witt coordinates.

    Returns ``(space, basis)`` where the space's Gram is the block form with
    off-diagonal identity blocks pairing p_i with q_i and E_{r,s} in the
    middle, and the basis is the identity.
    """
    space = QuadraticSpace(witt_gram(split))
    return space, WittBasis(split, RatMatrix.identity(split.dim))


def verify_witt(basis: WittBasis, space: QuadraticSpace) -> bool:
    """Exact check of all Witt-basis pairings against ``space``'s form."""
    split = basis.split
    m, n = split.m, split.n
    if space.dim != split.dim:
        return False
    E = residual_gram(split)
    for i in range(m):
        for j in range(m):
            if space.inner(basis.p(i), basis.p(j)) != 0:
                return False
            if space.inner(basis.q(i), basis.q(j)) != 0:
                return False
            want = QQ(1) if i == j else QQ(0)
            if space.inner(basis.p(i), basis.q(j)) != want:
                return False
    for a in range(n):
        for i in range(m):
            if space.inner(basis.p(i), basis.e(a)) != 0:
                return False
            if space.inner(basis.q(i), basis.e(a)) != 0:
                return False
        for b in range(n):
            if space.inner(basis.e(a), basis.e(b)) != E.get(a, b):
                return False
    return True


class RebaseData:
    """Parameters (X, C) of a Witt rebase and the derived B, D blocks.

    ``x`` is (r+s) x m (column i holds the e-coordinates of the shift X_i of
    q_i), ``c`` is skew m x m.  The derived blocks satisfy
    B_ij = -1/2 g(X_i, X_j) and D_ia = -g(X_i, e_a); feeding inconsistent
    values for them is rejected, which is what makes the result a Witt basis
    again.
    """

    __slots__ = ("split", "x", "c", "b", "d")

    def __init__(self, split: SplitSignature, x: RatMatrix, c: RatMatrix,
                 b: Optional[RatMatrix] = None, d: Optional[RatMatrix] = None):
        m, n = split.m, split.n
        if x.rows != n or x.cols != m:
            raise ValueError(f"X block must be {n}x{m}")
        if c.rows != m or c.cols != m or c != -c.transpose():
            raise ValueError("C block must be skew m x m")
        E = residual_gram(split)
        b_expected = (x.transpose() * E * x).scale(QQ(-1, 2))
        d_expected = -(x.transpose() * E)   # D_ia = -g(X_i, e_a), rows i, cols a
        if b is not None and b != b_expected:
            raise ValueError("B block violates B_ij = -1/2 g(X_i, X_j)")
        if d is not None and d != d_expected:
            raise ValueError("D block violates D_ia = -g(X_i, e_a)")
        self.split = split
        self.x = x
        self.c = c
        self.b = b_expected
        self.d = d_expected


def witt_rebase(basis: WittBasis, data: RebaseData) -> WittBasis:
    """New Witt basis with the same p's.

    With A = B + C:  p'_i = p_i,  e'_a = e_a + sum_i D_ia p_i,
    q'_i = q_i + X_i + sum_j A_ji p_j.  The Gram matrix of the new basis
    equals that of the old one exactly.
    """
    if basis.split != data.split:
        raise ValueError("rebase data is for a different split")
    split = basis.split
    m, n = split.m, split.n
    a_mat = data.b + data.c
    cols = []
    for i in range(m):
        cols.append(list(basis.p(i)))
    for a in range(n):
        col = list(basis.e(a))
        for i in range(m):
            coef = data.d.get(i, a)
            if coef:
                p_i = basis.p(i)
                for k in range(len(col)):
                    col[k] += coef * p_i[k]
        cols.append(col)
    for i in range(m):
        col = list(basis.q(i))
        for a in range(n):
            coef = data.x.get(a, i)
            if coef:
                e_a = basis.e(a)
                for k in range(len(col)):
                    col[k] += coef * e_a[k]
        for j in range(m):
            coef = a_mat.get(j, i)
            if coef:
                p_j = basis.p(j)
                for k in range(len(col)):
                    col[k] += coef * p_j[k]
        cols.append(col)
    return WittBasis(split, RatMatrix.from_rows(cols).transpose())


def cleaning_rebase(split: SplitSignature, x: RatMatrix, c: RatMatrix) -> RebaseData:
    """Rebase parameters that normalize an element with blocks (id, 0, X, C).

    Conjugating by :func:`witt_rebase` with parameters (X', C') adds
    (X', 2 C') to the (X, C) blocks of an element whose gl(m)-block is the
    identity, so the cleaning parameters are (-X, -C/2).
    """
    return RebaseData(split, -x, c.scale(QQ(-1, 2)))


# ---------------------------------------------------------------------------
# JSON helpers (rationals as "num/den" strings)
# ---------------------------------------------------------------------------

def _qq_to_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)


def _qq_from_str(s) -> Fraction:
    if isinstance(s, int):
        return QQ(s)
    return Fraction(s)


def _matrix_to_json(m: RatMatrix) -> list:
    return [[_qq_to_str(m.get(i, j)) for j in range(m.cols)] for i in range(m.rows)]


def _matrix_from_json(data: list) -> RatMatrix:
    return RatMatrix.from_rows([[_qq_from_str(v) for v in row] for row in data])


def space_to_json_str(space: QuadraticSpace) -> str:
    return json.dumps(space.to_json(), sort_keys=True)


def space_from_json_str(text: str) -> QuadraticSpace:
    return QuadraticSpace.from_json(json.loads(text))
