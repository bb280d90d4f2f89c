"""Exact rational scalars, matrices and subspaces.

Scalars are :class:`fractions.Fraction`.  Matrices act on column vectors, so
entry ``x[i][j]`` (row ``i``, column ``j``) is the coefficient of ``e_i`` in
``x e_j``.  Matrix subspaces live in ``R^(n*n)`` through row-major flattening.

All elimination runs on integer rows (denominators cleared first), so there is
no pivot tolerance anywhere in this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Scalar = Fraction


def to_scalar(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"refusing to convert float {value!r} to an exact scalar")
    return Fraction(value)


def scalar_to_json(q: Fraction) -> str:
    return str(q)


def scalar_from_json(s: str | int) -> Fraction:
    return Fraction(s)


# --------------------------------------------------------------------------
# fraction-free row reduction

def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = reduce(lcm, (Fraction(v).denominator for v in row), 1)
        out.append([int(Fraction(v) * den) for v in row])
    return out


def _primitive(row: list[int]) -> list[int]:
    g = reduce(gcd, row, 0)
    if g > 1:
        row = [v // g for v in row]
    for v in row:
        if v:
            if v < 0:
                row = [-w for w in row]
            break
    return row


def _integer_rref(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Reduce integer rows to a primitive integer RREF.  Returns (rows, pivots)."""
    m = [list(r) for r in rows if any(r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = None
        for i in range(r, len(m)):
            if m[i][c]:
                # prefer the smallest pivot to keep entries small
                if piv is None or abs(m[i][c]) < abs(m[piv][c]):
                    piv = i
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        prow = m[r]
        p = prow[c]
        for i in range(len(m)):
            if i == r or not m[i][c]:
                continue
            f = m[i][c]
            g = gcd(p, f)
            a, b = p // g, f // g
            m[i] = _primitive([a * x - b * y for x, y in zip(m[i], prow)])
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[tuple[tuple[Fraction, ...], ...], tuple[int, ...]]:
    """Reduced row echelon form with unit pivots, zero rows dropped."""
    rows = [list(r) for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    ints, pivots = _integer_rref(_integer_rows(rows), ncols)
    out = []
    for row, c in zip(ints, pivots):
        p = row[c]
        out.append(tuple(Fraction(v, p) for v in row))
    return tuple(out), tuple(pivots)


def bareiss_rank(rows: Sequence[Sequence]) -> int:
    """Rank by Bareiss one-step fraction-free elimination (independent oracle)."""
    m = _integer_rows(rows)
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    prev = 1
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == nrows:
            break
    return r


# --------------------------------------------------------------------------
# matrices

@dataclass(frozen=True)
class Mat:
    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry grid does not match the declared shape")

    @classmethod
    def of(cls, grid: Iterable[Iterable]) -> "Mat":
        ent = tuple(tuple(to_scalar(v) for v in row) for row in grid)
        return cls(len(ent), len(ent[0]) if ent else 0, ent)

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "Mat":
        cols = rows if cols is None else cols
        z = Fraction(0)
        return cls(rows, cols, tuple((z,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls.of([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def unit(cls, n: int, i: int, j: int) -> "Mat":
        """Elementary matrix E_ij (0-based) sending e_j to e_i."""
        return cls.of([[1 if (a, b) == (i, j) else 0 for b in range(n)] for a in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> "Mat":
        n = len(values)
        return cls.of([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def block_diag(cls, *blocks: "Mat") -> "Mat":
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        grid = [[Fraction(0)] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    grid[r + i][c + j] = b.entries[i][j]
            r += b.rows
            c += b.cols
        return cls.of(grid)

    @classmethod
    def from_flat(cls, vec: Sequence, n: int) -> "Mat":
        if len(vec) != n * n:
            raise ValueError(f"expected {n * n} entries, got {len(vec)}")
        return cls.of([vec[i * n:(i + 1) * n] for i in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(v for row in self.entries for v in row)

    @property
    def T(self) -> "Mat":
        return Mat(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> "Mat":
        return Mat(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.entries))

    def scale(self, c) -> "Mat":
        c = to_scalar(c)
        return Mat(self.rows, self.cols, tuple(tuple(c * a for a in r) for r in self.entries))

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols = list(zip(*other.entries))
        return Mat(self.rows, other.cols, tuple(
            tuple(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)) for c in cols)
            for r in self.entries))

    def apply(self, v: Sequence) -> tuple[Fraction, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length does not match matrix columns")
        return tuple(sum((a * to_scalar(b) for a, b in zip(r, v) if a), Fraction(0)) for r in self.entries)

    def trace(self) -> Fraction:
        return sum((self.entries[i][i] for i in range(min(self.rows, self.cols))), Fraction(0))

    def is_zero(self) -> bool:
        return not any(v for row in self.entries for v in row)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise ValueError("only square matrices can be inverted")
        n = self.rows
        aug = [list(self.entries[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        red, piv = rref(aug, 2 * n)
        if tuple(piv[:n]) != tuple(range(n)) or len(red) < n:
            raise ZeroDivisionError("matrix is singular")
        return Mat.of([row[n:] for row in red])

    def to_numpy(self):
        import numpy as np
        return np.array([[float(v) for v in row] for row in self.entries])

    def _same_shape(self, other: "Mat") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[scalar_to_json(v) for v in row] for row in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "Mat":
        m = cls.of([[scalar_from_json(v) for v in row] for row in obj["entries"]])
        if (m.rows, m.cols) != (obj["rows"], obj["cols"]):
            raise ValueError("declared shape disagrees with entries")
        return m


def bracket(x: Mat, y: Mat) -> Mat:
    return x @ y - y @ x


# --------------------------------------------------------------------------
# subspaces

@dataclass(frozen=True)
class Subspace:
    """A linear subspace of Q^ambient stored by its reduced row echelon basis."""

    ambient: int
    basis: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient: int) -> "Subspace":
        vecs = [tuple(to_scalar(v) for v in vec) for vec in vectors]
        for v in vecs:
            if len(v) != ambient:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {ambient}")
        red, _ = rref(vecs, ambient) if vecs else ((), ())
        return cls(ambient, red)

    @classmethod
    def of_matrices(cls, mats: Iterable[Mat], n: int) -> "Subspace":
        return cls.span((m.flat() for m in mats), n * n)

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls.span(([int(i == j) for j in range(ambient)] for i in range(ambient)), ambient)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def canonical(self) -> "Subspace":
        return Subspace.span(self.basis, self.ambient)

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.ambient:
            raise ValueError("ambient dimension mismatch")
        return Subspace.span(self.basis + (tuple(to_scalar(a) for a in v),), self.ambient).dim == self.dim

    def contains_space(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        return Subspace.span(self.basis + other.basis, self.ambient).dim == self.dim

    def __le__(self, other: "Subspace") -> bool:
        return other.contains_space(self)

    def matrices(self) -> list[Mat]:
        n = _matrix_side(self.ambient)
        return [Mat.from_flat(v, n) for v in self.basis]

    def to_json(self) -> dict:
        return {"ambient": self.ambient,
                "basis": [[scalar_to_json(v) for v in row] for row in self.basis]}

    @classmethod
    def from_json(cls, obj: dict) -> "Subspace":
        return cls.span(([scalar_from_json(v) for v in row] for row in obj["basis"]), obj["ambient"])


def _matrix_side(d: int) -> int:
    n = int(round(d ** 0.5))
    if n * n != d:
        raise ValueError(f"ambient dimension {d} is not a square")
    return n


def _check_ambient(s: Subspace, t: Subspace) -> None:
    if s.ambient != t.ambient:
        raise ValueError(f"ambient dimension mismatch: {s.ambient} vs {t.ambient}")


def rank_nullspace(a: Mat | Sequence[Sequence]) -> tuple[int, Subspace]:
    """Rank of ``a`` and its right nullspace ``{v : a v = 0}``."""
    if isinstance(a, Mat):
        rows, ncols = a.entries, a.cols
    else:
        rows = [list(r) for r in a]
        ncols = len(rows[0]) if rows else 0
    red, pivots = rref(rows, ncols) if rows else ((), ())
    free = [c for c in range(ncols) if c not in set(pivots)]
    null = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        null.append(v)
    return len(pivots), Subspace.span(null, ncols)


def nullspace_of_rows(rows: Sequence[Sequence], ncols: int) -> Subspace:
    if not rows:
        return Subspace.full(ncols)
    return rank_nullspace([list(r) for r in rows])[1]


def meet_join(s: Subspace, t: Subspace) -> tuple[Subspace, Subspace]:
    _check_ambient(s, t)
    join = Subspace.span(s.basis + t.basis, s.ambient)
    if not s.dim or not t.dim:
        return Subspace.zero(s.ambient), join
    # (a, b) with sum a_i s_i = sum b_j t_j; columns of the stacked system are basis vectors
    stacked = list(s.basis) + [tuple(-v for v in row) for row in t.basis]
    system = [list(col) for col in zip(*stacked)]
    _, coeffs = rank_nullspace(system)
    meet = []
    for c in coeffs.basis:
        a = c[:s.dim]
        meet.append([sum((ai * row[k] for ai, row in zip(a, s.basis)), Fraction(0)) for k in range(s.ambient)])
    return Subspace.span(meet, s.ambient), join


def conj_invariant(s: Subspace, g: Mat) -> bool:
    """True iff g S g^-1 = S for a matrix subspace S."""
    n = _matrix_side(s.ambient)
    if g.rows != n or g.cols != n:
        raise ValueError("conjugating matrix has the wrong size")
    ginv = g.inverse()
    image = Subspace.of_matrices((g @ x @ ginv for x in s.matrices()), n)
    return image == s


def bracket_invariant(s: Subspace, algebra: Iterable[Mat]) -> bool:
    """True iff [a, S] is contained in S for every a."""
    _matrix_side(s.ambient)
    mats = s.matrices()
    for a in algebra:
        for x in mats:
            if not s.contains(bracket(a, x).flat()):
                return False
    return True


def ortho_complement(s: Subspace) -> Subspace:
    """Complement under the trace pairing tr(x^T y), i.e. the flat dot product."""
    if not s.dim:
        return Subspace.full(s.ambient)
    return rank_nullspace([list(r) for r in s.basis])[1]


def matrix_constraint_space(n: int, constraints) -> Subspace:
    """Matrices x in M_n with every linear functional in ``constraints`` vanishing.

    Each constraint maps a Mat to a Mat (or a scalar); the constraint is the
    vanishing of all of its entries.  Linearity is assumed and exploited by
    evaluating on the unit matrices.
    """
    units = [Mat.unit(n, i, j) for i in range(n) for j in range(n)]
    rows = []
    for c in constraints:
        images = [c(u) for u in units]
        if isinstance(images[0], Mat):
            images = [m.flat() for m in images]
        else:
            images = [(to_scalar(v),) for v in images]
        for k in range(len(images[0])):
            row = [img[k] for img in images]
            if any(row):
                rows.append(row)
    return nullspace_of_rows(rows, n * n)
