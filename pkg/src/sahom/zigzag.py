"""Zigzag modules of rational vector spaces and their barcodes.

A zigzag module assigns a vector space V_0..V_n to the poset whose
arrows alternate: odd j gives A_j : V_j -> V_{j-1}, even j gives
A_j : V_{j-1} -> V_j (only this regular alternating shape is
supported).  Every such module decomposes uniquely into interval
modules I[b, d]; the multiset of intervals is the barcode.

The decomposition is computed through the generalized rank invariant:
for b <= d let R(b, d) be the rank of the canonical map from the limit
to the colimit of the restriction of the module to [b, d].  An interval
summand I[p, q] contributes 1 to R(b, d) exactly when [p, q] contains
[b, d], so the multiplicity of [b, d] is recovered by the inclusion-
exclusion difference

    m[b, d] = R(b, d) - R(b-1, d) - R(b, d+1) + R(b-1, d+1)

with out-of-range terms read as zero.  Limits are kernels and colimits
are cokernels of explicit rational matrices, so everything is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .linalg import Matrix, kernel_basis, mat, rank

_ZERO = Fraction(0)
_ONE = Fraction(1)


class ZigzagModule:
    """Regular (alternating) zigzag of finite dimensional Q-vector
    spaces, given by dimensions and arrow matrices."""

    __slots__ = ("n", "dims", "arrows")

    def __init__(self, dims: Sequence[int], arrows: Sequence[Matrix]):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("a zigzag module needs at least one space")
        if any(d < 0 for d in dims):
            raise ValueError("dimensions must be non-negative")
        n = len(dims) - 1
        arrows = tuple(mat(a) for a in arrows)
        if len(arrows) != n:
            raise ValueError(f"expected {n} arrows, got {len(arrows)}")
        for j in range(1, n + 1):
            a = arrows[j - 1]
            nrows = len(a)
            ncols = len(a[0]) if a else 0
            want_rows = dims[j - 1] if j % 2 == 1 else dims[j]
            want_cols = dims[j] if j % 2 == 1 else dims[j - 1]
            if nrows != want_rows or (nrows and ncols != want_cols):
                raise ValueError(
                    f"arrow {j} has shape {nrows}x{ncols}, "
                    f"expected {want_rows}x{want_cols}"
                )
            if not nrows and want_cols:
                # normalize empty matrices so shapes stay recoverable
                pass
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "arrows", arrows)

    def __setattr__(self, name, value):
        raise AttributeError("ZigzagModule is immutable")

    def arrow_source(self, j: int) -> int:
        return j if j % 2 == 1 else j - 1

    def arrow_target(self, j: int) -> int:
        return j - 1 if j % 2 == 1 else j

    def arrow_entry(self, j: int, r: int, c: int) -> Fraction:
        a = self.arrows[j - 1]
        return a[r][c] if a else _ZERO

    def __eq__(self, other):
        return (
            isinstance(other, ZigzagModule)
            and self.dims == other.dims
            and self.arrows == other.arrows
        )

    def __repr__(self):
        return f"ZigzagModule(dims={self.dims})"


class Barcode:
    """Multiset of integer intervals [b, d] with multiplicities."""

    __slots__ = ("intervals",)

    def __init__(self, intervals):
        cleaned = []
        for b, d, mult in intervals:
            b, d, mult = int(b), int(d), int(mult)
            if b > d:
                raise ValueError(f"interval [{b}, {d}] is empty")
            if mult < 1:
                raise ValueError("multiplicities must be at least 1")
            cleaned.append((b, d, mult))
        cleaned.sort()
        merged: list[tuple[int, int, int]] = []
        for b, d, mult in cleaned:
            if merged and merged[-1][:2] == (b, d):
                merged[-1] = (b, d, merged[-1][2] + mult)
            else:
                merged.append((b, d, mult))
        object.__setattr__(self, "intervals", tuple(merged))

    def __setattr__(self, name, value):
        raise AttributeError("Barcode is immutable")

    def multiplicity(self, b: int, d: int) -> int:
        for bb, dd, mult in self.intervals:
            if (bb, dd) == (b, d):
                return mult
        return 0

    def total_at(self, j: int) -> int:
        return sum(mult for b, d, mult in self.intervals if b <= j <= d)

    def __eq__(self, other):
        return isinstance(other, Barcode) and self.intervals == other.intervals

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __repr__(self):
        bars = ", ".join(
            f"[{b},{d}]" + (f"x{m}" if m > 1 else "")
            for b, d, m in self.intervals
        )
        return f"Barcode({bars})"


# ---------------------------------------------------------------------------
# generalized rank of a restriction


def _restriction_rank(m: ZigzagModule, b: int, d: int) -> int:
    """Rank of the canonical map lim -> colim of the restriction of the
    module to indices b..d."""
    dims = m.dims[b : d + 1]
    total = sum(dims)
    if total == 0:
        return 0
    offset = []
    acc = 0
    for dim in dims:
        offset.append(acc)
        acc += dim
    arrows = [j for j in range(b + 1, d + 1)]

    # limit: compatible families, the kernel of all arrow constraints
    constraint_rows: list[tuple[Fraction, ...]] = []
    for j in arrows:
        src = m.arrow_source(j) - b
        tgt = m.arrow_target(j) - b
        for r in range(dims[tgt]):
            row = [_ZERO] * total
            for c in range(dims[src]):
                row[offset[src] + c] = m.arrow_entry(j, r, c)
            row[offset[tgt] + r] -= _ONE
            constraint_rows.append(tuple(row))
    if constraint_rows:
        lim_vectors = kernel_basis(tuple(constraint_rows))
    else:
        lim_vectors = [
            tuple(_ONE if i == j else _ZERO for i in range(total))
            for j in range(total)
        ]

    # colimit relations: iota_src(e) - iota_tgt(A e) for each arrow
    relation_cols: list[list[Fraction]] = []
    for j in arrows:
        src = m.arrow_source(j) - b
        tgt = m.arrow_target(j) - b
        for c in range(dims[src]):
            col = [_ZERO] * total
            col[offset[src] + c] += _ONE
            for r in range(dims[tgt]):
                col[offset[tgt] + r] -= m.arrow_entry(j, r, c)
            relation_cols.append(col)

    if not relation_cols:
        return len(lim_vectors)
    relations = tuple(
        tuple(col[r] for col in relation_cols) for r in range(total)
    )
    if not lim_vectors:
        return 0
    combined = tuple(
        tuple(v[r] for v in lim_vectors) + relations[r] for r in range(total)
    )
    return rank(combined) - rank(relations)


def barcode(m: ZigzagModule) -> Barcode:
    """Interval decomposition of the module as a barcode, sorted by
    (birth, death)."""
    n = m.n
    ranks: dict[tuple[int, int], int] = {}
    for b in range(n + 1):
        for d in range(b, n + 1):
            ranks[(b, d)] = _restriction_rank(m, b, d)

    def r(b: int, d: int) -> int:
        if b < 0 or d > n:
            return 0
        return ranks[(b, d)]

    intervals = []
    for b in range(n + 1):
        for d in range(b, n + 1):
            mult = r(b, d) - r(b - 1, d) - r(b, d + 1) + r(b - 1, d + 1)
            if mult < 0:
                raise ArithmeticError(
                    f"negative multiplicity at [{b}, {d}]; malformed module"
                )
            if mult:
                intervals.append((b, d, mult))
    return Barcode(intervals)


# ---------------------------------------------------------------------------
# independent checker and generators


def validate_barcode(m: ZigzagModule, bc: Barcode) -> tuple[bool, list[str]]:
    """Necessary conditions tying a barcode to a module: pointwise
    dimensions must match, and each arrow's rank must equal the number
    of intervals spanning both of its endpoints."""
    report: list[str] = []
    for j in range(m.n + 1):
        have = bc.total_at(j)
        if have != m.dims[j]:
            report.append(
                f"dimension mismatch at index {j}: intervals give {have}, "
                f"module has {m.dims[j]}"
            )
    for j in range(1, m.n + 1):
        a = m.arrows[j - 1]
        have = rank(a) if a and a[0] else 0
        spanning = sum(
            mult for b, d, mult in bc.intervals if b <= j - 1 and d >= j
        )
        if have != spanning:
            report.append(
                f"rank mismatch at arrow {j}: matrix rank {have}, "
                f"spanning intervals {spanning}"
            )
    return (not report, report)


def build_interval_module(b: int, d: int, n: int) -> ZigzagModule:
    """The interval module I[b, d] inside a zigzag of length n."""
    if not 0 <= b <= d <= n:
        raise ValueError(f"need 0 <= b <= d <= n, got b={b}, d={d}, n={n}")
    dims = tuple(1 if b <= j <= d else 0 for j in range(n + 1))
    arrows = []
    for j in range(1, n + 1):
        src = j if j % 2 == 1 else j - 1
        tgt = j - 1 if j % 2 == 1 else j
        if b <= src <= d and b <= tgt <= d:
            arrows.append(((_ONE,),))
        else:
            nrows = dims[tgt]
            ncols = dims[src]
            arrows.append(tuple((_ZERO,) * ncols for _ in range(nrows)))
    return ZigzagModule(dims, arrows)


def direct_sum(modules: Sequence[ZigzagModule]) -> ZigzagModule:
    """Block-diagonal direct sum; all summands must share n."""
    if not modules:
        raise ValueError("direct sum of no modules is ambiguous")
    n = modules[0].n
    if any(m.n != n for m in modules):
        raise ValueError("summands have different lengths")
    dims = tuple(sum(m.dims[j] for m in modules) for j in range(n + 1))
    arrows = []
    for j in range(1, n + 1):
        blocks = []
        for m in modules:
            src = m.arrow_source(j)
            tgt = m.arrow_target(j)
            blocks.append((m.arrows[j - 1], m.dims[tgt], m.dims[src]))
        nrows = sum(r for _, r, _ in blocks)
        ncols = sum(c for _, _, c in blocks)
        big = [[_ZERO] * ncols for _ in range(nrows)]
        r0 = c0 = 0
        for a, r, c in blocks:
            for i in range(r):
                for k in range(c):
                    big[r0 + i][c0 + k] = a[i][k] if a else _ZERO
            r0 += r
            c0 += c
        arrows.append(tuple(tuple(row) for row in big))
    return ZigzagModule(dims, arrows)


def module_from_barcode(bc: Barcode, n: int) -> ZigzagModule:
    """Direct sum of interval modules realizing a barcode."""
    summands = []
    for b, d, mult in bc.intervals:
        summands.extend(build_interval_module(b, d, n) for _ in range(mult))
    if not summands:
        return ZigzagModule((0,) * (n + 1), [()] * n)
    return direct_sum(summands)
