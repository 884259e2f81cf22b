"""Simplicial homology over the rationals, exactly.

Complexes store, per dimension, a sorted tuple of simplices; a simplex
is a strictly increasing tuple of integer vertex ids and is oriented by
that sorted order.  Boundary matrices carry the alternating-sign
convention.  Homology bases are explicit cycle vectors, computed by
sparse column reduction of the boundary matrices; induced maps express
image cycles in the codomain basis by echelon solving against
[homology representatives | boundary columns].

Bases are deterministic functions of the simplex ordering.  Nothing
here is approximate: coefficients are Fractions throughout.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .linalg import Matrix, SparseEchelon, SparseVec, sparse_add

Simplex = tuple[int, ...]

_ONE = Fraction(1)


class SimplicialComplex:
    """Finite face-closed simplicial complex with integer vertex ids."""

    __slots__ = ("simplices", "_index")

    def __init__(self, simplices: Mapping[int, Sequence[Simplex]]):
        table: dict[int, tuple[Simplex, ...]] = {}
        for dim, items in simplices.items():
            cleaned = sorted({tuple(s) for s in items})
            for s in cleaned:
                if len(s) != dim + 1:
                    raise ValueError(f"simplex {s} has wrong dimension for {dim}")
                if any(a >= b for a, b in zip(s, s[1:])):
                    raise ValueError(f"simplex {s} is not strictly increasing")
            if cleaned:
                table[dim] = tuple(cleaned)
        object.__setattr__(self, "simplices", table)
        object.__setattr__(self, "_index", {})
        self._check_face_closed()

    def __setattr__(self, name, value):
        raise AttributeError("SimplicialComplex is immutable")

    def _check_face_closed(self) -> None:
        for dim in self.simplices:
            if dim == 0:
                continue
            below = set(self.simplices.get(dim - 1, ()))
            for s in self.simplices[dim]:
                for f in faces(s):
                    if f not in below:
                        raise ValueError(f"missing face {f} of {s}")

    @classmethod
    def from_simplices(cls, simplices: Iterable[Simplex]) -> "SimplicialComplex":
        """Build the face closure of the given simplices."""
        seen: set[Simplex] = set()
        stack = [tuple(sorted(s)) for s in simplices]
        for s in stack:
            if len(set(s)) != len(s):
                raise ValueError(f"repeated vertex in simplex {s}")
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            if len(s) > 1:
                stack.extend(faces(s))
        table: dict[int, list[Simplex]] = {}
        for s in seen:
            table.setdefault(len(s) - 1, []).append(s)
        return cls(table)

    @property
    def dim(self) -> int:
        return max(self.simplices, default=-1)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices.get(0, ()))

    def n_simplices(self, dim: int) -> int:
        return len(self.simplices.get(dim, ()))

    def simplex_index(self, dim: int) -> dict[Simplex, int]:
        idx = self._index.get(dim)
        if idx is None:
            idx = {s: i for i, s in enumerate(self.simplices.get(dim, ()))}
            self._index[dim] = idx
        return idx

    def euler_characteristic(self) -> int:
        return sum(
            (-1) ** dim * len(items) for dim, items in self.simplices.items()
        )

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        for dim, items in self.simplices.items():
            index = other.simplex_index(dim)
            if any(s not in index for s in items):
                return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, SimplicialComplex)
            and self.simplices == other.simplices
        )

    def __hash__(self):
        return hash(tuple(sorted((d, s) for d, s in self.simplices.items())))

    def __repr__(self):
        counts = ", ".join(
            f"{len(self.simplices[d])}x{d}" for d in sorted(self.simplices)
        )
        return f"SimplicialComplex({counts})"


def faces(s: Simplex) -> list[Simplex]:
    return [s[:j] + s[j + 1:] for j in range(len(s))]


# ---------------------------------------------------------------------------
# boundary matrices


def boundary_matrix(k: SimplicialComplex, i: int) -> Matrix:
    """Dense signed incidence matrix of the boundary map C_i -> C_{i-1}."""
    if not 1 <= i <= k.dim:
        raise ValueError(f"boundary dimension {i} out of range 1..{k.dim}")
    rows = k.n_simplices(i - 1)
    row_index = k.simplex_index(i - 1)
    cols = []
    for s in k.simplices.get(i, ()):
        col = [Fraction(0)] * rows
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            col[row_index[face]] = Fraction(-1) ** j
        cols.append(col)
    return tuple(tuple(col[r] for col in cols) for r in range(rows))


def boundary_columns(k: SimplicialComplex, i: int) -> list[SparseVec]:
    """Sparse columns of the boundary map C_i -> C_{i-1}."""
    if i < 1:
        raise ValueError("boundary dimension must be at least 1")
    row_index = k.simplex_index(i - 1)
    out: list[SparseVec] = []
    for s in k.simplices.get(i, ()):
        col: SparseVec = {}
        sign = _ONE
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            col[row_index[face]] = sign
            sign = -sign
        out.append(col)
    return out


def _kernel_of_boundary(k: SimplicialComplex, i: int) -> list[SparseVec]:
    """Cycle-space basis of C_i by sparse column reduction."""
    n = k.n_simplices(i)
    if i == 0:
        return [{j: _ONE} for j in range(n)]
    pivot_to: dict[int, tuple[SparseVec, SparseVec]] = {}
    kernel: list[SparseVec] = []
    for j, col in enumerate(boundary_columns(k, i)):
        r = dict(col)
        v: SparseVec = {j: _ONE}
        while r:
            p = max(r)
            hit = pivot_to.get(p)
            if hit is None:
                break
            rc, vc = hit
            f = -r[p] / rc[p]
            r = sparse_add(r, rc, f)
            v = sparse_add(v, vc, f)
        if r:
            pivot_to[max(r)] = (r, v)
        else:
            kernel.append(v)
    return kernel


# ---------------------------------------------------------------------------
# homology bases


class HomologyBasis:
    """Basis of H_i as explicit cycles in a fixed complex."""

    __slots__ = ("complex", "dimension", "representatives", "_solver")

    def __init__(self, complex: SimplicialComplex, dimension: int,
                 representatives: Sequence[SparseVec], solver: "_ChainSolver"):
        object.__setattr__(self, "complex", complex)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "representatives", tuple(dict(r) for r in representatives))
        object.__setattr__(self, "_solver", solver)

    def __setattr__(self, name, value):
        raise AttributeError("HomologyBasis is immutable")

    @property
    def rank(self) -> int:
        return len(self.representatives)

    def dense(self) -> list[tuple[Fraction, ...]]:
        n = self.complex.n_simplices(self.dimension)
        return [
            tuple(rep.get(j, Fraction(0)) for j in range(n))
            for rep in self.representatives
        ]

    def cycle_simplices(self, index: int) -> list[tuple[Simplex, Fraction]]:
        simplices = self.complex.simplices.get(self.dimension, ())
        rep = self.representatives[index]
        return [(simplices[j], rep[j]) for j in sorted(rep)]

    def __repr__(self):
        return f"HomologyBasis(dim={self.dimension}, rank={self.rank})"


class _ChainSolver:
    """Echelon data for coordinates of cycles modulo boundaries.

    The family mixes boundary columns (no tracking) and homology
    representatives (tracked), all with pairwise distinct pivots, so a
    top-reduction to zero is a membership certificate.
    """

    def __init__(self):
        self.entries: dict[int, tuple[SparseVec, SparseVec | None]] = {}

    def reduce(self, vec: SparseVec) -> tuple[SparseVec, SparseVec]:
        v = dict(vec)
        coeffs: SparseVec = {}
        while v:
            p = max(v)
            hit = self.entries.get(p)
            if hit is None:
                break
            row, tracked = hit
            f = -v[p] / row[p]
            v = sparse_add(v, row, f)
            if tracked is not None:
                coeffs = sparse_add(coeffs, tracked, f)
        return v, coeffs

    def insert_boundary(self, vec: SparseVec) -> None:
        v, _ = self.reduce(vec)
        if v:
            self.entries[max(v)] = (v, None)

    def insert_cycle(self, vec: SparseVec, rep_index: int) -> bool:
        v, coeffs = self.reduce(vec)
        if not v:
            return False
        self.entries[max(v)] = (v, sparse_add({rep_index: _ONE}, coeffs, _ONE))
        return True

    def coordinates(self, vec: SparseVec, rank: int) -> tuple[Fraction, ...]:
        v, coeffs = self.reduce(vec)
        if v:
            raise ArithmeticError(
                "chain is not a combination of basis cycles and boundaries"
            )
        return tuple(-coeffs.get(j, Fraction(0)) for j in range(rank))


def homology_basis(k: SimplicialComplex, i: int) -> HomologyBasis:
    """Basis of H_i(k) = ker d_i / im d_{i+1} with explicit cycle
    representatives (unreduced homology, rational coefficients)."""
    if i < 0:
        raise ValueError("homology dimension must be non-negative")
    solver = _ChainSolver()
    if i + 1 <= k.dim:
        for col in boundary_columns(k, i + 1):
            solver.insert_boundary(col)
    reps: list[SparseVec] = []
    if k.n_simplices(i):
        for cycle in _kernel_of_boundary(k, i):
            if solver.insert_cycle(cycle, len(reps)):
                reps.append(cycle)
    return HomologyBasis(k, i, reps, solver)


def betti_numbers(k: SimplicialComplex, max_dim: int) -> tuple[int, ...]:
    return tuple(homology_basis(k, i).rank for i in range(max_dim + 1))


# ---------------------------------------------------------------------------
# induced maps


class InducedMap:
    """Matrix of a map H_i(domain) -> H_i(codomain) in the given bases.

    Columns express the images of the domain basis cycles in the
    codomain basis: shape is (codomain rank) x (domain rank).
    """

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, domain: HomologyBasis, codomain: HomologyBasis,
                 matrix: Matrix):
        if len(matrix) != codomain.rank or any(
            len(row) != domain.rank for row in matrix
        ):
            raise ValueError("matrix shape does not match the bases")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "matrix", tuple(tuple(row) for row in matrix))

    def __setattr__(self, name, value):
        raise AttributeError("InducedMap is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.codomain.rank, self.domain.rank)

    def rank(self) -> int:
        from .linalg import rank as _rank

        return _rank(self.matrix) if self.matrix and self.matrix[0] else 0

    def __repr__(self):
        return f"InducedMap({self.shape[1]} -> {self.shape[0]})"


def _express(codomain_basis: HomologyBasis, chains: Sequence[SparseVec]) -> Matrix:
    rank = codomain_basis.rank
    columns = [
        codomain_basis._solver.coordinates(chain, rank) for chain in chains
    ]
    return tuple(
        tuple(col[r] for col in columns) for r in range(rank)
    )


def induced_inclusion_map(sub_basis: HomologyBasis, ambient_basis: HomologyBasis) -> InducedMap:
    """Matrix of H_i(sub) -> H_i(ambient) induced by an inclusion of
    complexes; every simplex of the subcomplex must belong to the
    ambient complex."""
    if sub_basis.dimension != ambient_basis.dimension:
        raise ValueError("bases live in different homology dimensions")
    sub = sub_basis.complex
    ambient = ambient_basis.complex
    if not sub.is_subcomplex_of(ambient):
        raise ValueError("domain complex is not a subcomplex of the codomain")
    i = sub_basis.dimension
    sub_simplices = sub.simplices.get(i, ())
    ambient_index = ambient.simplex_index(i)
    chains = [
        {ambient_index[sub_simplices[j]]: c for j, c in rep.items()}
        for rep in sub_basis.representatives
    ]
    return InducedMap(sub_basis, ambient_basis, _express(ambient_basis, chains))


def _sort_sign(values: Sequence[int]) -> int:
    inversions = 0
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            if values[a] > values[b]:
                inversions += 1
    return -1 if inversions % 2 else 1


def induced_simplicial_map(
    vertex_map: Mapping[int, int] | Callable[[int], int],
    dom_basis: HomologyBasis,
    cod_basis: HomologyBasis,
) -> InducedMap:
    """Matrix on homology of the chain map of a simplicial vertex map;
    degenerate simplex images are sent to zero."""
    if dom_basis.dimension != cod_basis.dimension:
        raise ValueError("bases live in different homology dimensions")
    vmap = vertex_map if callable(vertex_map) else vertex_map.__getitem__
    i = dom_basis.dimension
    dom_simplices = dom_basis.complex.simplices.get(i, ())
    cod_index = cod_basis.complex.simplex_index(i)
    image_cols: list[SparseVec | None] = []
    for s in dom_simplices:
        w = [vmap(v) for v in s]
        if len(set(w)) != len(w):
            image_cols.append(None)
            continue
        target = tuple(sorted(w))
        if target not in cod_index:
            raise ValueError(
                f"vertex map is not simplicial: image {target} of {s} missing"
            )
        image_cols.append({cod_index[target]: Fraction(_sort_sign(w))})
    chains: list[SparseVec] = []
    for rep in dom_basis.representatives:
        image: SparseVec = {}
        for j, c in rep.items():
            col = image_cols[j]
            if col is not None:
                image = sparse_add(image, col, c)
        chains.append(image)
    return InducedMap(dom_basis, cod_basis, _express(cod_basis, chains))
