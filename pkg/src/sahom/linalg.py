"""Exact rational linear algebra.

Dense routines (rank, reduced row echelon, kernel, solve) operate on
tuple-of-tuples matrices of Fractions and use first-nonzero pivoting;
they serve the small matrices of zigzag modules and induced maps.

``SparseEchelon`` keeps an echelon family of sparse vectors keyed by
their largest nonzero index; it is what boundary-matrix reduction uses,
where dense elimination would be wasteful.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def zeros(nrows: int, ncols: int) -> Matrix:
    return tuple((_ZERO,) * ncols for _ in range(nrows))


def identity(n: int) -> Matrix:
    return tuple(
        tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)
    )


def shape(a: Matrix) -> tuple[int, int]:
    return (len(a), len(a[0]) if a else 0)


def transpose(a: Matrix) -> Matrix:
    if not a:
        return ()
    return tuple(zip(*a))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n, k = shape(a)
    k2, m = shape(b)
    if k != k2:
        raise ValueError(f"shape mismatch: {shape(a)} x {shape(b)}")
    bt = transpose(b)
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col) if x and y), _ZERO) for col in bt)
        for row in a
    )


def mat_vec(a: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(sum((x * y for x, y in zip(row, v) if x and y), _ZERO) for row in a)


def rref(a: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with the list of pivot columns.

    Pivoting picks the first row with a nonzero entry in the current
    column; arithmetic is exact so no magnitude considerations apply.
    """
    rows = [list(r) for r in a]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in rows), tuple(pivots)


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def kernel_basis(a: Matrix) -> list[Vector]:
    """Basis of the right kernel (one vector per free column)."""
    reduced, pivots = rref(a)
    ncols = shape(a)[1]
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis: list[Vector] = []
    for fc in free:
        v = [_ZERO] * ncols
        v[fc] = _ONE
        for r, pc in enumerate(pivots):
            v[pc] = -reduced[r][fc]
        basis.append(tuple(v))
    return basis


def solve(a: Matrix, b: Sequence[Fraction]) -> Vector | None:
    """One solution of a x = b, or None when inconsistent."""
    nrows, ncols = shape(a)
    if len(b) != nrows:
        raise ValueError("right-hand side length mismatch")
    augmented = tuple(row + (Fraction(bv),) for row, bv in zip(a, b))
    reduced, pivots = rref(augmented)
    if ncols in pivots:
        return None
    x = [_ZERO] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = reduced[r][ncols]
    return tuple(x)


def invert(a: Matrix) -> Matrix | None:
    n, m = shape(a)
    if n != m:
        raise ValueError("only square matrices can be inverted")
    augmented = tuple(row + ident for row, ident in zip(a, identity(n)))
    reduced, pivots = rref(augmented)
    if tuple(pivots[:n]) != tuple(range(n)) or len(pivots) < n:
        return None
    return tuple(row[n:] for row in reduced[:n])


# ---------------------------------------------------------------------------
# sparse vectors and echelon families

SparseVec = dict[int, Fraction]


def sparse_add(u: SparseVec, v: SparseVec, factor: Fraction) -> SparseVec:
    """u + factor * v as a new sparse vector."""
    out = dict(u)
    for k, x in v.items():
        s = out.get(k, _ZERO) + factor * x
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


class SparseEchelon:
    """Echelon family of sparse vectors keyed by largest nonzero index."""

    def __init__(self):
        self.by_pivot: dict[int, SparseVec] = {}

    def reduce(self, vec: SparseVec) -> SparseVec:
        """Fully reduce vec against the family (vec is not consumed)."""
        v = dict(vec)
        while v:
            p = max(v)
            row = self.by_pivot.get(p)
            if row is None:
                return v
            v = sparse_add(v, row, -v[p] / row[p])
        return v

    def insert(self, vec: SparseVec) -> int | None:
        """Reduce and, if nonzero, keep the remainder; returns its pivot."""
        v = self.reduce(vec)
        if not v:
            return None
        p = max(v)
        self.by_pivot[p] = v
        return p

    def __len__(self) -> int:
        return len(self.by_pivot)
