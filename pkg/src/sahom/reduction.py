"""Free-pair collapses of cell families that share a membership mask.

A collapse removes a pair (face, coface) where the face has exactly one
proper coface in the whole family and that coface is maximal.  Removing
such a pair is a deformation retraction, so homotopy type is preserved.
Here every cell additionally carries a bitmask saying which member
complexes of a nested family contain it; a pair is only collapsed when
both cells carry the same mask.  Then the pair is free in every member
that contains it and absent from the others, so every member complex,
every union of members, and every inclusion-induced map on homology is
preserved simultaneously.  This is what makes the reduction safe to run
on the nested complexes the pipeline feeds to the homology stage.

Cubical cells are pairs (corner, axes): the integer lattice corner and
the sorted tuple of spanned axis indices.  Simplices are sorted vertex
tuples.  Both collapse routines are deterministic: candidates are
seeded in sorted order and processed LIFO.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

Cell = tuple[tuple[int, ...], tuple[int, ...]]
Simplex = tuple[int, ...]


# ---------------------------------------------------------------------------
# cubical cells


def cube_faces(cell: Cell) -> list[Cell]:
    """Codimension-1 faces of a cubical cell."""
    corner, axes = cell
    out = []
    for i, a in enumerate(axes):
        rest = axes[:i] + axes[i + 1:]
        out.append((corner, rest))
        bumped = tuple(c + (1 if j == a else 0) for j, c in enumerate(corner))
        out.append((bumped, rest))
    return out


def cube_closure(top_cells: Iterable[tuple[int, ...]], dim: int) -> set[Cell]:
    """All faces of the given top-dimensional grid cells."""
    closure: set[Cell] = set()
    stack: list[Cell] = [(tuple(c), tuple(range(dim))) for c in top_cells]
    while stack:
        cell = stack.pop()
        if cell in closure:
            continue
        closure.add(cell)
        if cell[1]:
            stack.extend(cube_faces(cell))
    return closure


def _cube_cofaces(cell: Cell, present) -> list[Cell]:
    corner, axes = cell
    dim = len(corner)
    out = []
    axis_set = set(axes)
    for a in range(dim):
        if a in axis_set:
            continue
        grown = tuple(sorted(axes + (a,)))
        up = (corner, grown)
        if up in present:
            out.append(up)
        shifted = tuple(c - (1 if j == a else 0) for j, c in enumerate(corner))
        down = (shifted, grown)
        if down in present:
            out.append(down)
    return out


def collapse_cubical_family(cells: Mapping[Cell, int]) -> dict[Cell, int]:
    """Collapse a face-closed masked cubical family as far as possible."""
    return _collapse(dict(cells), cube_faces, _cube_cofaces)


# ---------------------------------------------------------------------------
# simplices


def simplex_faces(s: Simplex) -> list[Simplex]:
    return [s[:j] + s[j + 1:] for j in range(len(s))]


def collapse_simplicial_family(simplices: Mapping[Simplex, int]) -> dict[Simplex, int]:
    """Collapse a face-closed masked simplicial family as far as possible."""
    present = dict(simplices)
    cofaces: dict[Simplex, set[Simplex]] = {}
    for s in present:
        if len(s) > 1:
            for f in simplex_faces(s):
                cofaces.setdefault(f, set()).add(s)

    def faces_of(cell):
        return simplex_faces(cell) if len(cell) > 1 else []

    def cofaces_of(cell, _present):
        return sorted(cofaces.get(cell, ()))

    def on_remove(cell):
        if len(cell) > 1:
            for f in simplex_faces(cell):
                hits = cofaces.get(f)
                if hits is not None:
                    hits.discard(cell)

    return _collapse(present, faces_of, cofaces_of, on_remove)


# ---------------------------------------------------------------------------
# shared engine


def _collapse(present: dict, faces_of, cofaces_of, on_remove=None) -> dict:
    counts: dict = {c: 0 for c in present}
    for cell in present:
        for f in faces_of(cell):
            counts[f] += 1

    stack = sorted(c for c, k in counts.items() if k == 1)

    def remove(cell) -> None:
        if on_remove is not None:
            on_remove(cell)
        del present[cell]
        del counts[cell]
        for f in faces_of(cell):
            if f in counts:
                counts[f] -= 1
                if counts[f] == 1:
                    stack.append(f)
                elif counts[f] == 0:
                    # became maximal: its free faces may now pair with it
                    for g in faces_of(f):
                        if g in counts and counts[g] == 1:
                            stack.append(g)

    while stack:
        face = stack.pop()
        if face not in present or counts.get(face) != 1:
            continue
        hits = [c for c in cofaces_of(face, present) if c in present]
        if len(hits) != 1:
            continue
        coface = hits[0]
        if counts[coface] != 0:
            continue
        if present[face] != present[coface]:
            continue
        remove(coface)
        remove(face)

    return present
