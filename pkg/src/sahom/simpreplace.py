"""Grid rasterization of formulas and triangulation into nested
simplicial complexes.

This is a desk-scale replacement for a guaranteed simplicial-replacement
oracle: formulas are rasterized over a box into cubical sets, cells are
triangulated by the Kuhn/Freudenthal subdivision on a shared vertex
lattice, and tuples of regions come back as one ambient complex with one
subcomplex per tuple entry.  The output is homologically faithful only
when the grid resolves the features of the realized sets, which is why
callers report resolution stability instead of claiming correctness.

Membership modes:

* INTERVAL_OUTER (default) marks a cell exactly when three-valued
  interval evaluation does not refute it, so every point of the
  realized set lies in a marked cell and the approximation errs by
  fattening only.
* SAMPLE_CENTER marks a cell exactly when its center satisfies the
  formula.

Rasterization walks a subdivision tree instead of visiting every cell:
interval evaluation is inclusion-isotone, so a box decided TRUE or
FALSE decides all its descendants and the marked set is identical to
exhaustive per-cell evaluation.

Since triangulations of different cells share the lattice vertices and
the Freudenthal subdivision restricted to a face is the subdivision of
that face, rasters that are subsets yield literal subcomplexes.
"""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .formulas import Box, Formula, Tri, eval_box, eval_point, formula_vars
from .homology import SimplicialComplex
from .reduction import (
    Cell,
    collapse_cubical_family,
    collapse_simplicial_family,
    cube_closure,
    simplex_faces,
)


class GridMode(enum.Enum):
    INTERVAL_OUTER = "outer"
    SAMPLE_CENTER = "center"


class GridSpec:
    """Uniform power-of-two grid over a box."""

    __slots__ = ("box", "resolution", "mode")

    def __init__(self, box: Box, resolution: int, mode: GridMode = GridMode.INTERVAL_OUTER):
        resolution = int(resolution)
        if resolution < 2 or resolution & (resolution - 1):
            raise ValueError("resolution must be a power of two, at least 2")
        if any(lo >= hi for lo, hi in box.intervals):
            raise ValueError("grid box must be nondegenerate on every axis")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "mode", GridMode(mode))

    def __setattr__(self, name, value):
        raise AttributeError("GridSpec is immutable")

    @classmethod
    def cube(cls, radius, dim: int, resolution: int,
             mode: GridMode = GridMode.INTERVAL_OUTER) -> "GridSpec":
        return cls(Box.cube(radius, dim), resolution, mode)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def depth(self) -> int:
        return self.resolution.bit_length() - 1

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(
            (hi - lo) / self.resolution for lo, hi in self.box.intervals
        )

    def cell_box(self, index: Sequence[int]) -> Box:
        return self.block_box(self.depth, index)

    def block_box(self, level: int, index: Sequence[int]) -> Box:
        if len(index) != self.dim:
            raise ValueError("index dimension mismatch")
        blocks = 1 << level
        out = []
        for (lo, hi), j in zip(self.box.intervals, index):
            if not 0 <= j < blocks:
                raise ValueError(f"block index {j} outside 0..{blocks - 1}")
            w = (hi - lo) / blocks
            out.append((lo + j * w, lo + (j + 1) * w))
        return Box(out)

    def vertex_id(self, lattice: Sequence[int]) -> int:
        base = self.resolution + 1
        vid = 0
        for c in reversed(tuple(lattice)):
            if not 0 <= c <= self.resolution:
                raise ValueError(f"lattice coordinate {c} out of range")
            vid = vid * base + c
        return vid

    def vertex_lattice(self, vid: int) -> tuple[int, ...]:
        base = self.resolution + 1
        out = []
        for _ in range(self.dim):
            vid, c = divmod(vid, base)
            out.append(c)
        return tuple(out)

    def vertex_point(self, vid: int) -> tuple[Fraction, ...]:
        widths = self.widths()
        return tuple(
            lo + c * w
            for (lo, _), c, w in zip(
                self.box.intervals, self.vertex_lattice(vid), widths
            )
        )

    def axis_cells_touching(self, axis: int, a: Fraction, b: Fraction) -> range:
        """Indices of cells on one axis whose closed span meets [a, b]."""
        lo, hi = self.box.intervals[axis]
        w = (hi - lo) / self.resolution
        if b < lo or a > hi:
            return range(0)
        j_min = max(0, math.ceil((a - lo) / w - 1))
        j_max = min(self.resolution - 1, math.floor((b - lo) / w))
        return range(j_min, j_max + 1)

    def __eq__(self, other):
        return (
            isinstance(other, GridSpec)
            and self.box == other.box
            and self.resolution == other.resolution
            and self.mode == other.mode
        )

    def __hash__(self):
        return hash((self.box, self.resolution, self.mode))

    def __repr__(self):
        return f"GridSpec({self.box!r}, res={self.resolution}, mode={self.mode.value})"


class CubicalSet:
    """Marked top-dimensional cells of a grid."""

    __slots__ = ("grid", "cells")

    def __init__(self, grid: GridSpec, cells: Iterable[tuple[int, ...]]):
        frozen = frozenset(tuple(c) for c in cells)
        res = grid.resolution
        for c in frozen:
            if len(c) != grid.dim or any(not 0 <= x < res for x in c):
                raise ValueError(f"cell index {c} outside the grid")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cells", frozen)

    def __setattr__(self, name, value):
        raise AttributeError("CubicalSet is immutable")

    def union(self, other: "CubicalSet") -> "CubicalSet":
        if self.grid != other.grid:
            raise ValueError("cannot union cubical sets over different grids")
        return CubicalSet(self.grid, self.cells | other.cells)

    def __len__(self):
        return len(self.cells)

    def __le__(self, other: "CubicalSet") -> bool:
        return self.grid == other.grid and self.cells <= other.cells

    def __eq__(self, other):
        return (
            isinstance(other, CubicalSet)
            and self.grid == other.grid
            and self.cells == other.cells
        )

    def __repr__(self):
        return f"CubicalSet({len(self.cells)} cells of {self.grid.resolution}^{self.grid.dim})"


class RegionUnion:
    """Union-description: rasterizes as the union of member rasters."""

    __slots__ = ("members",)

    def __init__(self, members: Iterable):
        object.__setattr__(self, "members", tuple(members))

    def __setattr__(self, name, value):
        raise AttributeError("RegionUnion is immutable")

    def __repr__(self):
        return f"RegionUnion({len(self.members)} members)"


# ---------------------------------------------------------------------------
# rasterization


def _box_status(obj, box: Box) -> Tri:
    if isinstance(obj, Formula):
        return eval_box(obj, box)
    return obj.eval_box(box)


def _point_status(obj, point) -> bool:
    if isinstance(obj, Formula):
        return eval_point(obj, point)
    return obj.eval_point(point)


def _predicate_dim(obj) -> int | None:
    if isinstance(obj, Formula):
        vs = formula_vars(obj)
        return None if vs is None else len(vs)
    vs = getattr(obj, "vars", None)
    return None if vs is None else len(vs)


def rasterize_many(objs: Sequence, grid: GridSpec) -> list[CubicalSet]:
    """Rasterize several regions over one grid, sharing the subdivision
    tree among all formula-like predicates.

    The marked set of each entry is identical to rasterizing it alone
    (interval evaluation is inclusion-isotone, so pruning decisions on a
    coarse box are valid for all its descendants); only the tree walk
    and the per-box polynomial intervals are shared.  Union-descriptions
    are rasterized member-wise with members deduplicated by identity.
    """
    leaf_index: dict[int, int] = {}
    leaves: list = []
    entry_leaves: list[list[int]] = []

    def leaf_slot(o) -> int:
        key = id(o)
        if key not in leaf_index:
            leaf_index[key] = len(leaves)
            leaves.append(o)
        return leaf_index[key]

    for o in objs:
        if isinstance(o, RegionUnion):
            entry_leaves.append([leaf_slot(m) for m in o.members])
        else:
            entry_leaves.append([leaf_slot(o)])

    leaf_cells: list = [None] * len(leaves)
    tree_ids: list[int] = []
    for j, o in enumerate(leaves):
        if hasattr(o, "cell_set"):
            leaf_cells[j] = frozenset(o.cell_set(grid))
            continue
        want = _predicate_dim(o)
        if want is not None and want != grid.dim:
            raise ValueError(
                f"formula has {want} variables but the grid has dimension {grid.dim}"
            )
        leaf_cells[j] = set()
        tree_ids.append(j)

    if tree_ids:
        outer = grid.mode is GridMode.INTERVAL_OUTER
        depth = grid.depth
        dim = grid.dim
        memo_ok = [getattr(leaves[j], "memo_intervals", False) for j in range(len(leaves))]

        def mark_block(j: int, level: int, index: tuple[int, ...]) -> None:
            span = 1 << (depth - level)
            ranges = [range(i * span, (i + 1) * span) for i in index]
            leaf_cells[j].update(itertools.product(*ranges))

        def walk(level: int, index: tuple[int, ...], active: list[int]) -> None:
            box = grid.block_box(level, index)
            memo: dict = {}
            still: list[int] = []
            for j in active:
                o = leaves[j]
                status = o.eval_box(box, memo) if memo_ok[j] else _box_status(o, box)
                if status is Tri.TRUE:
                    mark_block(j, level, index)
                elif status is Tri.UNKNOWN:
                    still.append(j)
            if not still:
                return
            if level == depth:
                if outer:
                    for j in still:
                        leaf_cells[j].add(index)
                else:
                    center = box.center()
                    for j in still:
                        if _point_status(leaves[j], center):
                            leaf_cells[j].add(index)
                return
            for offsets in itertools.product((0, 1), repeat=dim):
                walk(
                    level + 1,
                    tuple(2 * i + o for i, o in zip(index, offsets)),
                    still,
                )

        walk(0, (0,) * dim, tree_ids)

    out = []
    for slots in entry_leaves:
        cells: set = set()
        for s in slots:
            cells.update(leaf_cells[s])
        out.append(CubicalSet(grid, cells))
    return out


def rasterize(obj, grid: GridSpec) -> CubicalSet:
    """Rasterize a formula, membership predicate, prism description, or
    union-description over the grid."""
    return rasterize_many([obj], grid)[0]


# ---------------------------------------------------------------------------
# triangulation


def _freudenthal_top_simplices(grid: GridSpec, cell: Cell) -> list[tuple[int, ...]]:
    """Kuhn/Freudenthal subdivision of one cubical cell into dim! top
    simplices, as tuples of lattice vertex ids (id order is chain order)."""
    corner, axes = cell
    base = grid.vertex_id(corner)
    steps = [(grid.resolution + 1) ** a for a in axes]
    if not axes:
        return [(base,)]
    out = []
    for perm in itertools.permutations(steps):
        chain = [base]
        for step in perm:
            chain.append(chain[-1] + step)
        out.append(tuple(chain))
    return out


def triangulate(c: CubicalSet) -> SimplicialComplex:
    """Triangulation of the marked cells (with all faces)."""
    top: list[tuple[int, ...]] = []
    for index in sorted(c.cells):
        top.extend(
            _freudenthal_top_simplices(c.grid, (index, tuple(range(c.grid.dim))))
        )
    return SimplicialComplex.from_simplices(top)


def triangulate_family(grid: GridSpec, cells: Mapping[Cell, int]) -> dict[tuple[int, ...], int]:
    """Triangulate a masked cubical family into a masked simplex family.

    A simplex belongs to a member exactly when it is a face of a top
    simplex of some cell of that member, so masks propagate downward
    through codimension-1 faces.
    """
    masks: dict[tuple[int, ...], int] = {}
    for cell in sorted(cells):
        mask = cells[cell]
        for s in _freudenthal_top_simplices(grid, cell):
            masks[s] = masks.get(s, 0) | mask
    by_dim: dict[int, list[tuple[int, ...]]] = {}
    for s in masks:
        by_dim.setdefault(len(s) - 1, []).append(s)
    for dim in sorted(by_dim, reverse=True):
        if dim == 0:
            continue
        for s in by_dim[dim]:
            m = masks[s]
            for f in simplex_faces(s):
                old = masks.get(f)
                if old is None:
                    masks[f] = m
                    by_dim.setdefault(dim - 1, []).append(f)
                elif old | m != old:
                    masks[f] = old | m
    return masks


# ---------------------------------------------------------------------------
# nested complexes


class NestedComplexes:
    """Ambient complex with one subcomplex per tuple entry."""

    __slots__ = ("grid", "complex", "subcomplexes", "names")

    def __init__(self, grid: GridSpec, complex: SimplicialComplex,
                 subcomplexes: Sequence[SimplicialComplex],
                 names: Sequence[str] | None = None):
        subs = tuple(subcomplexes)
        for i, sub in enumerate(subs):
            if not sub.is_subcomplex_of(complex):
                raise ValueError(f"entry {i} is not a subcomplex of the ambient complex")
        if names is None:
            names = tuple(f"K{i}" for i in range(len(subs)))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "complex", complex)
        object.__setattr__(self, "subcomplexes", subs)
        object.__setattr__(self, "names", tuple(names))

    def __setattr__(self, name, value):
        raise AttributeError("NestedComplexes is immutable")

    def __repr__(self):
        return f"NestedComplexes(ambient={self.complex!r}, entries={len(self.subcomplexes)})"


def _complex_from_masks(masks: Mapping[tuple[int, ...], int], bit: int | None) -> SimplicialComplex:
    table: dict[int, list[tuple[int, ...]]] = {}
    for s, m in masks.items():
        if bit is None or m & (1 << bit):
            table.setdefault(len(s) - 1, []).append(s)
    return SimplicialComplex(table)


def replace_tuple(entries: Sequence, grid: GridSpec, reduce: bool = False,
                  names: Sequence[str] | None = None) -> NestedComplexes:
    """Rasterize a tuple of regions and triangulate them into an ambient
    complex with one subcomplex per entry.

    Syntactic inclusions (conjunction extensions, union membership)
    come out as literal subcomplex inclusions because AND can only
    shrink and OR can only grow the marked cell set.  With reduce=True
    the family is collapsed (cubically, then simplicially) before the
    complexes are assembled; this preserves the homotopy type of every
    entry and every inclusion-induced map, and keeps exact linear
    algebra desk-scale.
    """
    rasters = rasterize_many(entries, grid)

    cells: dict[Cell, int] = {}
    for bit, cs in enumerate(rasters):
        for cell in cube_closure(cs.cells, grid.dim):
            cells[cell] = cells.get(cell, 0) | (1 << bit)
    if reduce:
        cells = collapse_cubical_family(cells)
    masks = triangulate_family(grid, cells)
    if reduce:
        masks = collapse_simplicial_family(masks)
    ambient = _complex_from_masks(masks, None)
    subs = [_complex_from_masks(masks, bit) for bit in range(len(rasters))]
    return NestedComplexes(grid, ambient, subs, names)
