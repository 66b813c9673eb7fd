"""Exact linear algebra over the rationals.

Everything in this module is bit-exact: entries are `fractions.Fraction`
(arbitrary precision, always reduced, positive denominator), elimination is
fraction-free on integer-scaled rows, and canonical forms are unique, so two
computations of the same subspace compare equal entry by entry.

The workhorses are :func:`rref`, :func:`nullspace` and :func:`affine_solve`;
subspaces are handled through :class:`SubspaceBasis`, whose canonical form is
the reduced row echelon form of the stacked generators.  All objects are
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

QQ = Fraction

Scalar = Union[int, Fraction]

# Fill ratio below which a matrix keeps dict-of-columns rows instead of dense
# row lists.  Bianchi constraint systems sit far below this.
SPARSE_FILL_CUTOFF = 0.25


def _as_qq(x: Scalar) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class RatMatrix:
    """Immutable rational matrix with fill-ratio-selected storage.

    Rows are stored either as dense lists or as ``{col: value}`` dicts of the
    nonzero entries; the representation is chosen at construction from the
    fill ratio and never affects results (the two agree entrywise).
    """

    __slots__ = ("rows", "cols", "_dense", "_sparse")

    def __init__(self, rows: int, cols: int, rowdicts: Sequence[dict]):
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix dimensions")
        self.rows = rows
        self.cols = cols
        nnz = sum(len(r) for r in rowdicts)
        if rows * cols > 0 and nnz / (rows * cols) >= SPARSE_FILL_CUTOFF:
            self._dense = [
                [rowdicts[i].get(j, QQ(0)) for j in range(cols)] for i in range(rows)
            ]
            self._sparse = None
        else:
            self._dense = None
            self._sparse = [{j: v for j, v in r.items() if v != 0} for r in rowdicts]

    # -- construction -----------------------------------------------------

    @classmethod
    def from_rows(cls, data: Sequence[Sequence[Scalar]], cols: Optional[int] = None) -> "RatMatrix":
        nrows = len(data)
        if cols is None:
            cols = len(data[0]) if nrows else 0
        rowdicts = []
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged rows")
            rowdicts.append({j: _as_qq(v) for j, v in enumerate(row) if v != 0})
        return cls(nrows, cols, rowdicts)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: dict) -> "RatMatrix":
        rowdicts: list = [dict() for _ in range(rows)]
        for (i, j), v in entries.items():
            if v != 0:
                rowdicts[i][j] = _as_qq(v)
        return cls(rows, cols, rowdicts)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, [dict() for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, [{i: QQ(1)} for i in range(n)])

    @classmethod
    def diagonal(cls, values: Sequence[Scalar]) -> "RatMatrix":
        n = len(values)
        return cls(n, n, [{i: _as_qq(v)} if v != 0 else {} for i, v in enumerate(values)])

    @classmethod
    def column(cls, values: Sequence[Scalar]) -> "RatMatrix":
        return cls(len(values), 1, [{0: _as_qq(v)} if v != 0 else {} for v in values])

    # -- storage ----------------------------------------------------------

    @property
    def is_sparse(self) -> bool:
        return self._sparse is not None

    def rowdict(self, i: int) -> dict:
        """Nonzero entries of row ``i`` as a fresh ``{col: Fraction}`` dict."""
        if self._sparse is not None:
            return dict(self._sparse[i])
        return {j: v for j, v in enumerate(self._dense[i]) if v != 0}

    def _rowdicts(self) -> list:
        return [self.rowdict(i) for i in range(self.rows)]

    def get(self, i: int, j: int) -> Fraction:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError((i, j))
        if self._sparse is not None:
            return self._sparse[i].get(j, QQ(0))
        return self._dense[i][j]

    def to_rows(self) -> list:
        return [[self.get(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def nnz(self) -> int:
        if self._sparse is not None:
            return sum(len(r) for r in self._sparse)
        return sum(1 for row in self._dense for v in row if v != 0)

    def entries(self) -> Iterator[tuple]:
        """Iterate nonzero ``(i, j, value)`` triples in row-major order."""
        for i in range(self.rows):
            for j, v in sorted(self.rowdict(i).items()):
                yield i, j, v

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other)
        out = []
        for i in range(self.rows):
            row = self.rowdict(i)
            for j, v in other.rowdict(i).items():
                s = row.get(j, QQ(0)) + v
                if s == 0:
                    row.pop(j, None)
                else:
                    row[j] = s
            out.append(row)
        return RatMatrix(self.rows, self.cols, out)

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def __neg__(self) -> "RatMatrix":
        return self.scale(-1)

    def scale(self, c: Scalar) -> "RatMatrix":
        c = _as_qq(c)
        if c == 0:
            return RatMatrix.zeros(self.rows, self.cols)
        return RatMatrix(
            self.rows, self.cols,
            [{j: v * c for j, v in self.rowdict(i).items()} for i in range(self.rows)],
        )

    def __mul__(self, other):
        if isinstance(other, RatMatrix):
            return self._matmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def _matmul(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        orows = [other.rowdict(k) for k in range(other.rows)]
        out = []
        for i in range(self.rows):
            acc: dict = {}
            for k, a in self.rowdict(i).items():
                for j, b in orows[k].items():
                    s = acc.get(j, QQ(0)) + a * b
                    if s == 0:
                        acc.pop(j, None)
                    else:
                        acc[j] = s
            out.append(acc)
        return RatMatrix(self.rows, other.cols, out)

    def mult_vec(self, vec: Sequence[Scalar]) -> tuple:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            s = QQ(0)
            for j, v in self.rowdict(i).items():
                x = vec[j]
                if x:
                    s += v * x
            out.append(s)
        return tuple(out)

    def transpose(self) -> "RatMatrix":
        out: list = [dict() for _ in range(self.cols)]
        for i in range(self.rows):
            for j, v in self.rowdict(i).items():
                out[j][i] = v
        return RatMatrix(self.cols, self.rows, out)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of non-square matrix")
        return sum((self.get(i, i) for i in range(self.rows)), QQ(0))

    def is_zero(self) -> bool:
        return self.nnz() == 0

    def inverse(self) -> "RatMatrix":
        """Exact inverse; raises ValueError on singular input."""
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        aug = []
        for i in range(n):
            row = self.rowdict(i)
            row[n + i] = QQ(1)
            aug.append(row)
        rows, pivots = _rref_rowdicts(aug, 2 * n)
        if list(pivots) != list(range(n)):
            raise ValueError("matrix is singular")
        out = [{j - n: v for j, v in rows[i].items() if j >= n} for i in range(n)]
        return RatMatrix(n, n, out)

    def flatten(self) -> tuple:
        """Row-major tuple of all entries (used as coordinates in gl(N))."""
        out = [QQ(0)] * (self.rows * self.cols)
        for i in range(self.rows):
            for j, v in self.rowdict(i).items():
                out[i * self.cols + j] = v
        return tuple(out)

    # -- comparisons ------------------------------------------------------

    def _check_same_shape(self, other: "RatMatrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        if self.rows != other.rows or self.cols != other.cols:
            return False
        return all(self.rowdict(i) == other.rowdict(i) for i in range(self.rows))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols,
                     tuple(tuple(sorted(self.rowdict(i).items())) for i in range(self.rows))))

    def __repr__(self) -> str:
        return f"RatMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def vstack(mats: Sequence[RatMatrix]) -> RatMatrix:
    cols = mats[0].cols if mats else 0
    rowdicts = []
    for m in mats:
        if m.cols != cols:
            raise ValueError("column count mismatch in vstack")
        rowdicts.extend(m.rowdict(i) for i in range(m.rows))
    return RatMatrix(len(rowdicts), cols, rowdicts)


def hstack(mats: Sequence[RatMatrix]) -> RatMatrix:
    rows = mats[0].rows if mats else 0
    rowdicts: list = [dict() for _ in range(rows)]
    off = 0
    for m in mats:
        if m.rows != rows:
            raise ValueError("row count mismatch in hstack")
        for i in range(rows):
            for j, v in m.rowdict(i).items():
                rowdicts[i][off + j] = v
        off += m.cols
    return RatMatrix(rows, off, rowdicts)


# ---------------------------------------------------------------------------
# elimination engine
# ---------------------------------------------------------------------------

def _primitive_int_row(row: dict) -> dict:
    """Scale a rational row to coprime integers (sign preserved)."""
    if not row:
        return {}
    den = 1
    for v in row.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = {j: int(v * den) for j, v in row.items()}
    g = 0
    for x in ints.values():
        g = math.gcd(g, x)
    if g > 1:
        ints = {j: x // g for j, x in ints.items()}
    return ints


def _combine(prow: dict, pval: int, row: dict, rval: int) -> dict:
    """pval*row - rval*prow, gcd-normalized.  Exact integer cross-multiply."""
    out = {}
    for j, v in row.items():
        out[j] = pval * v
    for j, v in prow.items():
        s = out.get(j, 0) - rval * v
        if s == 0:
            out.pop(j, None)
        else:
            out[j] = s
    if not out:
        return out
    g = 0
    for x in out.values():
        g = math.gcd(g, x)
    if g > 1:
        out = {j: x // g for j, x in out.items()}
    return out


def _rref_rowdicts(rowdicts: Sequence[dict], ncols: int) -> tuple:
    """Reduced row echelon form of rational row dicts.

    Returns ``(rows, pivots)`` where rows are ``{col: Fraction}`` dicts with
    unit pivots, sorted by pivot column.  Deterministic and canonical: any
    generating set of the same row space yields the identical output.
    """
    work = [r for r in (_primitive_int_row(row) for row in rowdicts) if r]
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(work)):
            if c in work[i]:
                pr = i
                break
        if pr is None:
            continue
        work[r], work[pr] = work[pr], work[r]
        pval = work[r][c]
        for i in range(r + 1, len(work)):
            a = work[i].get(c)
            if a:
                work[i] = _combine(work[r], pval, work[i], a)
        work = [row for row in work if row] if any(not row for row in work) else work
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    work = work[: len(pivots)]
    # back substitution (still integer rows)
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        pval = work[k][c]
        for i in range(k):
            a = work[i].get(c)
            if a:
                work[i] = _combine(work[k], pval, work[i], a)
    out = []
    for k, c in enumerate(pivots):
        p = work[k][c]
        out.append({j: Fraction(v, p) for j, v in work[k].items()})
    return out, pivots


def rref(m: RatMatrix) -> tuple:
    """Reduced row echelon form and pivot columns.

    Row space is preserved; the result is canonical (equal row spaces give
    identical matrices), idempotent, and computed fraction-free.
    """
    rows, pivots = _rref_rowdicts(m._rowdicts(), m.cols)
    rows = rows + [dict() for _ in range(m.rows - len(rows))]
    return RatMatrix(m.rows, m.cols, rows), pivots


def rank(m: RatMatrix) -> int:
    return len(_rref_rowdicts(m._rowdicts(), m.cols)[1])


def nullspace(m: RatMatrix) -> "SubspaceBasis":
    """Canonical basis of ``{v : m v = 0}``; dim = cols - rank."""
    rows, pivots = _rref_rowdicts(m._rowdicts(), m.cols)
    pivset = set(pivots)
    vecs = []
    for f in range(m.cols):
        if f in pivset:
            continue
        v = [QQ(0)] * m.cols
        v[f] = QQ(1)
        for i, c in enumerate(pivots):
            coeff = rows[i].get(f)
            if coeff:
                v[c] = -coeff
        vecs.append(v)
    return SubspaceBasis.from_vectors(m.cols, vecs)


def affine_solve(m: RatMatrix, b: Sequence[Scalar]) -> tuple:
    """Solve ``m x = b`` exactly.

    Returns ``(particular, kernel)`` where ``particular`` is a coefficient
    tuple or ``None`` when ``b`` is outside the column space (absence of a
    solution is a value, not an error), and ``kernel`` is ``nullspace(m)``.
    """
    if len(b) != m.rows:
        raise ValueError("right-hand side length mismatch")
    sent = m.cols
    aug = []
    for i in range(m.rows):
        row = m.rowdict(i)
        bv = _as_qq(b[i])
        if bv != 0:
            row[sent] = bv
        aug.append(row)
    rows, pivots = _rref_rowdicts(aug, m.cols + 1)
    kernel = nullspace(m)
    if sent in pivots:
        return None, kernel
    x = [QQ(0)] * m.cols
    for i, c in enumerate(pivots):
        x[c] = rows[i].get(sent, QQ(0))
    return tuple(x), kernel


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

class SubspaceBasis:
    """A linear subspace of QQ^n in canonical form.

    The canonical form is the RREF of the stacked generators, so equality of
    subspaces is plain equality of the stored matrices.
    """

    __slots__ = ("ambient_dim", "mat", "pivots")

    def __init__(self, ambient_dim: int, mat: RatMatrix, pivots: Sequence[int]):
        self.ambient_dim = ambient_dim
        self.mat = mat          # dim x ambient, rows are the basis, RREF
        self.pivots = tuple(pivots)

    @classmethod
    def from_vectors(cls, ambient_dim: int, vectors: Iterable[Sequence[Scalar]]) -> "SubspaceBasis":
        rowdicts = [{j: _as_qq(v) for j, v in enumerate(vec) if v != 0} for vec in vectors]
        rows, pivots = _rref_rowdicts(rowdicts, ambient_dim)
        return cls(ambient_dim, RatMatrix(len(rows), ambient_dim, rows), pivots)

    @classmethod
    def full(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(ambient_dim, RatMatrix.identity(ambient_dim), range(ambient_dim))

    @classmethod
    def zero(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(ambient_dim, RatMatrix.zeros(0, ambient_dim), ())

    @property
    def dim(self) -> int:
        return self.mat.rows

    @property
    def vectors(self) -> list:
        """Basis vectors as column matrices."""
        return [RatMatrix.column(self.row_tuple(i)) for i in range(self.dim)]

    def row_tuple(self, i: int) -> tuple:
        row = self.mat.rowdict(i)
        return tuple(row.get(j, QQ(0)) for j in range(self.ambient_dim))

    def row_tuples(self) -> list:
        return [self.row_tuple(i) for i in range(self.dim)]

    def contains_vector(self, vec: Sequence[Scalar]) -> bool:
        # residual after eliminating against the RREF rows
        residual = {j: _as_qq(v) for j, v in enumerate(vec) if v != 0}
        for i, c in enumerate(self.pivots):
            a = residual.get(c)
            if a:
                for j, v in self.mat.rowdict(i).items():
                    s = residual.get(j, QQ(0)) - a * v
                    if s == 0:
                        residual.pop(j, None)
                    else:
                        residual[j] = s
        return not residual

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubspaceBasis):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.mat == other.mat

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.mat))

    def __repr__(self) -> str:
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


def span_union(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Smallest subspace containing both (the sum a + b)."""
    _check_ambient(a, b)
    return SubspaceBasis.from_vectors(a.ambient_dim, a.row_tuples() + b.row_tuples())


def intersect(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Intersection, via the nullspace of the stacked coefficient system."""
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return SubspaceBasis.zero(a.ambient_dim)
    # columns: coefficients alpha (for a) then beta (for b); rows: ambient eqs
    # a^T alpha - b^T beta = 0
    n = a.ambient_dim
    rowdicts: list = [dict() for _ in range(n)]
    for i in range(a.dim):
        for j, v in a.mat.rowdict(i).items():
            rowdicts[j][i] = v
    for i in range(b.dim):
        for j, v in b.mat.rowdict(i).items():
            rowdicts[j][a.dim + i] = -v
    system = RatMatrix(n, a.dim + b.dim, rowdicts)
    sols = nullspace(system)
    vecs = []
    arows = a.row_tuples()
    for k in range(sols.dim):
        coeffs = sols.row_tuple(k)[: a.dim]
        vec = [QQ(0)] * n
        for i, c in enumerate(coeffs):
            if c:
                row = arows[i]
                for j in range(n):
                    if row[j]:
                        vec[j] += c * row[j]
        vecs.append(vec)
    return SubspaceBasis.from_vectors(n, vecs)


def contains(a: SubspaceBasis, b: SubspaceBasis) -> bool:
    """True iff b is a subspace of a."""
    _check_ambient(a, b)
    return all(a.contains_vector(b.row_tuple(i)) for i in range(b.dim))


def subspace_equal(a: SubspaceBasis, b: SubspaceBasis) -> bool:
    _check_ambient(a, b)
    return a == b


def _check_ambient(a: SubspaceBasis, b: SubspaceBasis) -> None:
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient dimension mismatch: {a.ambient_dim} != {b.ambient_dim}")


class SpanSolver:
    """Express vectors in a fixed (independent) spanning set, exactly.

    Built once from the generators, after which :meth:`coords_of` answers
    membership-with-coefficients queries by back substitution only.
    """

    def __init__(self, vectors: Sequence[Sequence[Scalar]], ambient_dim: int):
        self.ambient_dim = ambient_dim
        self.n_vectors = len(vectors)
        rowdicts = []
        for k, vec in enumerate(vectors):
            row = {j: _as_qq(v) for j, v in enumerate(vec) if v != 0}
            row[ambient_dim + k] = QQ(1)   # record the combination
            rowdicts.append(row)
        rows, pivots = _rref_rowdicts(rowdicts, ambient_dim + self.n_vectors)
        if any(p >= ambient_dim for p in pivots):
            raise ValueError("spanning set is linearly dependent")
        self._rows = rows
        self._pivots = pivots

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def coords_of(self, vec: Sequence[Scalar]) -> Optional[tuple]:
        """Coefficients of ``vec`` in the spanning set, or None if outside."""
        residual = {j: _as_qq(v) for j, v in enumerate(vec) if v != 0}
        coeffs = [QQ(0)] * self.n_vectors
        for i, c in enumerate(self._pivots):
            a = residual.get(c)
            if a:
                for j, v in self._rows[i].items():
                    if j < self.ambient_dim:
                        s = residual.get(j, QQ(0)) - a * v
                        if s == 0:
                            residual.pop(j, None)
                        else:
                            residual[j] = s
                    else:
                        coeffs[j - self.ambient_dim] += a * v
        if residual:
            return None
        return tuple(coeffs)
