"""Exact sparse linear algebra over the rationals.

Kernels, ranks, solving and cohomology dimensions for finite complexes.
Elimination is fraction-free (Bareiss two-step division on integer rows,
denominators cleared up front) with a deterministic pivot order: columns
are scanned left to right and the pivot is the lowest-index remaining row.
Results are therefore reproducible bit for bit.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Tuple

DEFAULT_MAX_NNZ = 200_000


class LinalgError(Exception):
    pass


class CompositionNotZero(LinalgError):
    """The two differentials handed to cohomology_dim do not compose to zero."""


class TooManyNonzeros(LinalgError):
    """A matrix exceeded the configured nonzero cap (see VOA_MAX_NNZ)."""


def max_nonzeros() -> int:
    return int(os.environ.get("VOA_MAX_NNZ", DEFAULT_MAX_NNZ))


Vector = Dict[int, Fraction]


class SparseMatrix:
    """Immutable-by-convention sparse matrix with exact rational entries.

    Entries are stored in a dict keyed by (row, col); zeros are never stored.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], Fraction]] = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix dimensions")
        self.rows = rows
        self.cols = cols
        clean: Dict[Tuple[int, int], Fraction] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise ValueError(f"entry ({i},{j}) out of bounds for {rows}x{cols}")
                v = Fraction(v)
                if v != 0:
                    clean[(i, j)] = v
        if len(clean) > max_nonzeros():
            raise TooManyNonzeros(
                f"matrix has {len(clean)} nonzeros, cap is {max_nonzeros()} "
                "(override with VOA_MAX_NNZ)"
            )
        self.entries = clean

    @classmethod
    def from_rows(cls, data: Iterable[Iterable]) -> "SparseMatrix":
        data = [list(r) for r in data]
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = {}
        for i, r in enumerate(data):
            if len(r) != cols:
                raise ValueError("ragged rows")
            for j, v in enumerate(r):
                if v:
                    entries[(i, j)] = Fraction(v)
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, rows: int, columns: Iterable[Vector]) -> "SparseMatrix":
        entries = {}
        cols = 0
        for j, col in enumerate(columns):
            cols = j + 1
            for i, v in col.items():
                if v:
                    entries[(i, j)] = Fraction(v)
        return cls(rows, cols, entries)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols, {})

    def nnz(self) -> int:
        return len(self.entries)

    def column(self, j: int) -> Vector:
        return {i: v for (i, jj), v in self.entries.items() if jj == j}

    def to_rows(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} times {other.rows}x{other.cols}")
        by_row: Dict[int, Dict[int, Fraction]] = {}
        for (i, k), v in self.entries.items():
            by_row.setdefault(i, {})[k] = v
        by_col: Dict[int, Dict[int, Fraction]] = {}
        for (k, j), v in other.entries.items():
            by_col.setdefault(j, {})[k] = v
        entries: Dict[Tuple[int, int], Fraction] = {}
        for i, row in by_row.items():
            for j, col in by_col.items():
                s = Fraction(0)
                if len(row) <= len(col):
                    for k, v in row.items():
                        w = col.get(k)
                        if w is not None:
                            s += v * w
                else:
                    for k, w in col.items():
                        v = row.get(k)
                        if v is not None:
                            s += v * w
                if s:
                    entries[(i, j)] = s
        return SparseMatrix(self.rows, other.cols, entries)

    def apply(self, vec: Vector) -> Vector:
        """Matrix times sparse column vector."""
        out: Vector = {}
        for (i, j), v in self.entries.items():
            c = vec.get(j)
            if c:
                out[i] = out.get(i, Fraction(0)) + v * c
        return {i: v for i, v in out.items() if v}

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def _integer_rows(m: SparseMatrix, extra: Optional[List[Fraction]] = None) -> List[Dict[int, int]]:
    """Rows of m as integer dicts, denominators cleared row by row.

    If extra is given it is appended as an augmented column with index m.cols.
    """
    rows: List[Dict[int, Fraction]] = [dict() for _ in range(m.rows)]
    for (i, j), v in m.entries.items():
        rows[i][j] = v
    if extra is not None:
        for i, v in enumerate(extra):
            if v:
                rows[i][m.cols] = Fraction(v)
    out: List[Dict[int, int]] = []
    for r in rows:
        if not r:
            out.append({})
            continue
        mult = 1
        for v in r.values():
            mult = mult * v.denominator // gcd(mult, v.denominator)
        out.append({j: int(v * mult) for j, v in r.items()})
    return out


def _echelon(rows: List[Dict[int, int]], ncols: int) -> Tuple[List[Dict[int, int]], List[int]]:
    """Fraction-free row echelon form.

    Returns the pivot rows (one per pivot, in pivot-column order) and the
    list of pivot columns.  Pivot choice: scan columns in increasing order,
    take the lowest-index unused row with a nonzero entry.
    """
    work = [dict(r) for r in rows]
    nrows = len(work)
    pivot_rows: List[Dict[int, int]] = []
    pivot_cols: List[int] = []
    used = [False] * nrows
    prev_pivot = 1
    for c in range(ncols):
        pr = -1
        for i in range(nrows):
            if not used[i] and work[i].get(c):
                pr = i
                break
        if pr < 0:
            continue
        used[pr] = True
        prow = work[pr]
        piv = prow[c]
        for i in range(nrows):
            if used[i] or not work[i]:
                continue
            row = work[i]
            f = row.get(c, 0)
            new: Dict[int, int] = {}
            if f:
                keys = set(row) | set(prow)
                for j in keys:
                    val = piv * row.get(j, 0) - f * prow.get(j, 0)
                    if val:
                        new[j] = val // prev_pivot
            else:
                for j, v in row.items():
                    new[j] = (piv * v) // prev_pivot
            work[i] = new
        pivot_rows.append(prow)
        pivot_cols.append(c)
        prev_pivot = piv
    return pivot_rows, pivot_cols


def rank(m: SparseMatrix) -> int:
    """Exact rank over the rationals."""
    _, pivots = _echelon(_integer_rows(m), m.cols)
    return len(pivots)


def _primitive(vec: Vector) -> Vector:
    """Scale a rational vector to a primitive integer vector, first nonzero entry positive."""
    if not vec:
        return {}
    mult = 1
    for v in vec.values():
        mult = mult * v.denominator // gcd(mult, v.denominator)
    ints = {j: int(v * mult) for j, v in vec.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v))
    first = min(ints)
    sign = 1 if ints[first] > 0 else -1
    return {j: Fraction(sign * v, g) for j, v in ints.items()}


def kernel_basis(m: SparseMatrix) -> List[Vector]:
    """Exact basis of the null space, one primitive vector per free column.

    len(result) == m.cols - rank(m).
    """
    pivot_rows, pivot_cols = _echelon(_integer_rows(m), m.cols)
    pivot_set = set(pivot_cols)
    basis: List[Vector] = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec: Vector = {free: Fraction(1)}
        # back-substitute pivots in reverse order
        for prow, pc in zip(reversed(pivot_rows), reversed(pivot_cols)):
            s = Fraction(0)
            for j, v in prow.items():
                if j == pc:
                    continue
                x = vec.get(j)
                if x:
                    s += v * x
            if s:
                vec[pc] = -s / prow[pc]
        basis.append(_primitive({j: v for j, v in vec.items() if v}))
    return basis


def solve(m: SparseMatrix, b) -> Optional[Vector]:
    """Solve m x = b exactly; returns None when the system is inconsistent.

    b may be a dense list or a sparse dict.  Free variables are set to zero,
    so the returned solution is deterministic.
    """
    if isinstance(b, dict):
        dense = [Fraction(0)] * m.rows
        for i, v in b.items():
            dense[i] = Fraction(v)
    else:
        dense = [Fraction(v) for v in b]
        if len(dense) != m.rows:
            raise ValueError("right-hand side has wrong length")
    aug_rows = _integer_rows(m, extra=dense)
    pivot_rows, pivot_cols = _echelon(aug_rows, m.cols + 1)
    aug_col = m.cols
    if aug_col in pivot_cols:
        return None
    x: Vector = {}
    for prow, pc in zip(reversed(pivot_rows), reversed(pivot_cols)):
        s = Fraction(prow.get(aug_col, 0))
        for j, v in prow.items():
            if j == pc or j == aug_col:
                continue
            xv = x.get(j)
            if xv:
                s += v * xv
        val = -s / prow[pc] if s else Fraction(0)
        if val:
            x[pc] = val
        # unresolved (free) columns of this row default to zero
    return x


def cohomology_dim(d_in: SparseMatrix, d_out: SparseMatrix) -> int:
    """dim ker(d_out) - rank(d_in), with the composition d_out . d_in checked to vanish."""
    if d_in.rows != d_out.cols:
        raise ValueError(
            f"chain spaces disagree: d_in lands in dim {d_in.rows}, d_out leaves dim {d_out.cols}"
        )
    if not d_out.matmul(d_in).is_zero():
        raise CompositionNotZero("d_out . d_in != 0; upstream differential is broken")
    return (d_out.cols - rank(d_out)) - rank(d_in)


def residual(m: SparseMatrix, x: Vector, b: Vector) -> Vector:
    """m x - b as a sparse vector; empty dict means the equation holds."""
    mx = m.apply(x)
    out = dict(mx)
    for i, v in b.items():
        out[i] = out.get(i, Fraction(0)) - v
    return {i: v for i, v in out.items() if v}
