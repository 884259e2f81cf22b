"""Semi-algebraic mapping cylinders, directed cylinders, and the glued
cylinder family of a zigzag diagram.

For a map f: S -> T described by formulas (phi_S over X, phi_T over Y,
phi_f over (X, Y) for the graph), the cylinder formula over (X, Y, T)
is

    ((T = 0) and X = 0 and phi_T(Y))
    or ((0 <= T <= 1) and exists Z . (X = T*Z and phi_S(Z)
                                      and phi_f(Z, Y) and phi_T(Y)))

Its realization is { (t*x, f(x), t) : x in S, t in [0,1] } together
with the apex copy {0} x T x {0}; the source sits inside it as the
slice T = 1.  The existential block is removed by the witness
substitution Z = X / T: the conjunct X = T*Z pins the witness whenever
T > 0, and the T = 0 slice is already covered by the apex disjunct, so
replacing each atom P(Z) with the cleared polynomial T^deg(P) * P(X/T)
preserves the realized set exactly.  The eliminated formula keeps the
strict atom T > 0; closing it is the closed-relaxation stage's job.

Directed cylinders reparametrize over [a, b] with the source copy at b
(forward) or a (backward) and the apex at the other end; the scale
polynomial becomes (t - a)/(b - a) or (b - t)/(b - a).

A zigzag diagram alternates maps out of the odd-indexed sets.  Its
cylinder family places, over every odd index i, a prism joining the two
graphs of f_i and f_{i+1} by affine interpolation of the second
coordinate, and over every even index the two directed cylinders that
share the apex copy of S_i, unioned with the neighbouring prisms.  The
interpolation weights are chosen so prism ends match the neighbouring
cylinders' source slices exactly.  Prisms carry no closed formula; the
rasterizer resolves their existential witness by box search.
"""

from __future__ import annotations

import enum
import itertools
from fractions import Fraction
from typing import Sequence

from .formulas import (
    And,
    Atom,
    Box,
    Exists,
    Formula,
    Or,
    Rel,
    Tri,
    embed,
    eval_box,
    eval_point,
    formula_vars,
    homogenize_substitute,
)
from .polynomials import Polynomial
from . import simpreplace
from .simpreplace import GridMode, GridSpec

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Direction(enum.Enum):
    FWD = "fwd"
    BWD = "bwd"


def _fresh_names(base: str, count: int, taken: Sequence[str]) -> tuple[str, ...]:
    taken = set(taken)
    prefix = base
    while any(f"{prefix}{i + 1}" in taken for i in range(count)):
        prefix = "_" + prefix
    return tuple(f"{prefix}{i + 1}" for i in range(count))


def _fresh_name(base: str, taken: Sequence[str]) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name = "_" + name
    return name


def _conjuncts(f: Formula) -> tuple[Formula, ...]:
    return f.children if isinstance(f, And) else (f,)


class SemialgebraicMapDesc:
    """Formula triple describing a map f: S -> T through its graph."""

    __slots__ = ("k", "m", "x_vars", "y_vars", "phi_S", "phi_T", "phi_f")

    def __init__(self, k: int, m: int, phi_S: Formula, phi_T: Formula,
                 phi_f: Formula, x_vars: Sequence[str] | None = None,
                 y_vars: Sequence[str] | None = None):
        if x_vars is None:
            vs = formula_vars(phi_S)
            if vs is None:
                raise ValueError("x_vars required when phi_S has no atoms")
            x_vars = vs
        if y_vars is None:
            vs = formula_vars(phi_T)
            if vs is None:
                raise ValueError("y_vars required when phi_T has no atoms")
            y_vars = vs
        x_vars = tuple(x_vars)
        y_vars = tuple(y_vars)
        if len(x_vars) != k or len(y_vars) != m:
            raise ValueError("variable counts do not match the ambient dimensions")
        if set(x_vars) & set(y_vars):
            raise ValueError("source and target variables must be disjoint")
        for f, want in ((phi_S, x_vars), (phi_T, y_vars), (phi_f, x_vars + y_vars)):
            have = formula_vars(f)
            if have is not None and have != tuple(want):
                raise ValueError(
                    f"formula variables {have} do not match expected {tuple(want)}"
                )
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "x_vars", x_vars)
        object.__setattr__(self, "y_vars", y_vars)
        object.__setattr__(self, "phi_S", phi_S)
        object.__setattr__(self, "phi_T", phi_T)
        object.__setattr__(self, "phi_f", phi_f)

    def __setattr__(self, name, value):
        raise AttributeError("SemialgebraicMapDesc is immutable")

    def __repr__(self):
        return f"SemialgebraicMapDesc(k={self.k}, m={self.m})"


class CylinderArtifact:
    """Cylinder formulas for one map: quantified, eliminated, and the
    source slice, over the layout (X block, Y block, parameter)."""

    __slots__ = (
        "desc", "a", "b", "direction", "t_var", "z_vars",
        "theta", "theta_qf", "theta_T1",
    )

    def __init__(self, desc: SemialgebraicMapDesc, a, b, direction: Direction,
                 t_var: str, z_vars: tuple[str, ...], theta: Formula,
                 theta_qf: Formula | None = None, theta_T1: Formula | None = None):
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "direction", Direction(direction))
        object.__setattr__(self, "t_var", t_var)
        object.__setattr__(self, "z_vars", tuple(z_vars))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_qf", theta_qf)
        object.__setattr__(self, "theta_T1", theta_T1)

    def __setattr__(self, name, value):
        raise AttributeError("CylinderArtifact is immutable")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.desc.x_vars + self.desc.y_vars + (self.t_var,)

    @property
    def quantified_vars(self) -> tuple[str, ...]:
        return self.vars + self.z_vars

    @property
    def apex_end(self) -> Fraction:
        return self.a if self.direction is Direction.FWD else self.b

    @property
    def source_end(self) -> Fraction:
        return self.b if self.direction is Direction.FWD else self.a

    def scale_polynomial(self) -> Polynomial:
        """The factor multiplying the witness: (t-a)/(b-a) forward,
        (b-t)/(b-a) backward; equals t for the plain cylinder."""
        vs = self.vars
        t = Polynomial.variable(vs, self.t_var)
        span = self.b - self.a
        if self.direction is Direction.FWD:
            return (t - Polynomial.constant(vs, self.a)).scale(1 / span)
        return (Polynomial.constant(vs, self.b) - t).scale(1 / span)

    def with_fields(self, theta_qf=None, theta_T1=None) -> "CylinderArtifact":
        return CylinderArtifact(
            self.desc, self.a, self.b, self.direction, self.t_var, self.z_vars,
            self.theta, theta_qf or self.theta_qf, theta_T1 or self.theta_T1,
        )

    def __repr__(self):
        return (
            f"CylinderArtifact({self.direction.value}, [{self.a}, {self.b}], "
            f"qf={'yes' if self.theta_qf else 'no'})"
        )


# ---------------------------------------------------------------------------
# construction


def build_directed_cyl(desc: SemialgebraicMapDesc, a, b,
                       direction: Direction = Direction.FWD,
                       t_var: str | None = None) -> CylinderArtifact:
    """Quantified cylinder formula over [a, b] with the stated direction."""
    a = Fraction(a)
    b = Fraction(b)
    if a >= b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    direction = Direction(direction)
    taken = desc.x_vars + desc.y_vars
    if t_var is None:
        t_var = _fresh_name("t", taken)
    elif t_var in taken:
        raise ValueError(f"parameter name {t_var!r} collides with the ambient variables")
    z_vars = _fresh_names("z", desc.k, taken + (t_var,))
    vs = desc.x_vars + desc.y_vars + (t_var,)
    ext = vs + z_vars

    t = Polynomial.variable(ext, t_var)
    apex_end = a if direction is Direction.FWD else b
    apex = And(
        (Atom(t - Polynomial.constant(ext, apex_end), Rel.EQ),)
        + tuple(Atom(Polynomial.variable(ext, x), Rel.EQ) for x in desc.x_vars)
        + _conjuncts(embed(desc.phi_T, ext))
    )

    span = b - a
    if direction is Direction.FWD:
        scale = (t - Polynomial.constant(ext, a)).scale(1 / span)
    else:
        scale = (Polynomial.constant(ext, b) - t).scale(1 / span)
    graph_atoms = tuple(
        Atom(
            Polynomial.variable(ext, x) - scale * Polynomial.variable(ext, z),
            Rel.EQ,
        )
        for x, z in zip(desc.x_vars, z_vars)
    )
    phi_S_z = embed(desc.phi_S, ext, dict(zip(desc.x_vars, z_vars)))
    phi_f_z = embed(desc.phi_f, ext, dict(zip(desc.x_vars, z_vars)))
    body = And(
        graph_atoms
        + _conjuncts(phi_S_z)
        + _conjuncts(phi_f_z)
        + _conjuncts(embed(desc.phi_T, ext))
    )
    lower = Atom(t - Polynomial.constant(ext, a), Rel.GE)
    upper = Atom(t - Polynomial.constant(ext, b), Rel.LE)
    main = And((lower, upper, Exists(z_vars, body)))
    return CylinderArtifact(desc, a, b, direction, t_var, z_vars, Or((apex, main)))


def build_theta(desc: SemialgebraicMapDesc, t_var: str | None = None) -> CylinderArtifact:
    """The plain cylinder: forward over [0, 1], apex at 0, source at 1."""
    return build_directed_cyl(desc, 0, 1, Direction.FWD, t_var)


def eliminate_theta(art: CylinderArtifact) -> CylinderArtifact:
    """Quantifier-free cylinder formula via the witness substitution.

    The scaled copy conjunct pins the witness Z = X/scale wherever the
    scale is positive; the zero-scale slice is covered by the apex
    disjunct, so the realization is unchanged.  The bound at the apex
    end becomes strict; the result is deliberately not closed.
    """
    desc = art.desc
    vs = art.vars
    t = Polynomial.variable(vs, art.t_var)
    scale = art.scale_polynomial()

    apex = And(
        (Atom(t - Polynomial.constant(vs, art.apex_end), Rel.EQ),)
        + tuple(Atom(Polynomial.variable(vs, x), Rel.EQ) for x in desc.x_vars)
        + _conjuncts(embed(desc.phi_T, vs))
    )
    identity_sub = {x: x for x in desc.x_vars}
    h_phi_S = homogenize_substitute(embed(desc.phi_S, vs), scale, identity_sub)
    h_phi_f = homogenize_substitute(
        embed(desc.phi_f, vs), scale, identity_sub, passthrough=desc.y_vars
    )
    lower_poly = t - Polynomial.constant(vs, art.a)
    upper_poly = t - Polynomial.constant(vs, art.b)
    if art.direction is Direction.FWD:
        bounds = (Atom(lower_poly, Rel.GT), Atom(upper_poly, Rel.LE))
    else:
        bounds = (Atom(lower_poly, Rel.GE), Atom(upper_poly, Rel.LT))
    main = And(
        bounds
        + _conjuncts(h_phi_S)
        + _conjuncts(h_phi_f)
        + _conjuncts(embed(desc.phi_T, vs))
    )
    return art.with_fields(theta_qf=Or((apex, main)))


def restrict_T1(art: CylinderArtifact) -> CylinderArtifact:
    """Conjoin the source-slice equation (parameter = source end); the
    result's realization is the embedded copy {(x, f(x), source end)}."""
    if art.theta_qf is None:
        raise ValueError("eliminate_theta must run before restrict_T1")
    vs = art.vars
    t = Polynomial.variable(vs, art.t_var)
    slice_atom = Atom(t - Polynomial.constant(vs, art.source_end), Rel.EQ)
    return art.with_fields(theta_T1=And((art.theta_qf, slice_atom)))


def build_cylinder(desc: SemialgebraicMapDesc, a=0, b=1,
                   direction: Direction = Direction.FWD,
                   t_var: str | None = None) -> CylinderArtifact:
    """Convenience: build, eliminate, and restrict in one go."""
    return restrict_T1(eliminate_theta(build_directed_cyl(desc, a, b, direction, t_var)))


# ---------------------------------------------------------------------------
# membership oracle (independent of the witness substitution)


def cylinder_point_oracle(art: CylinderArtifact, point,
                          extra_witnesses: Sequence[Sequence[Fraction]] = ()) -> bool:
    """Membership of a rational point in the cylinder, decided from the
    quantified formula's semantics.

    The witness candidates are X/scale (forced by the scaled-copy
    conjunct whenever the scale is positive) plus any supplied grid
    candidates; at zero scale the apex disjunct already covers the
    realized slice.
    """
    desc = art.desc
    point = tuple(Fraction(p) for p in point)
    if len(point) != len(art.vars):
        raise ValueError("point dimension mismatch")
    x = point[: desc.k]
    y = point[desc.k : desc.k + desc.m]
    t = point[-1]
    if t == art.apex_end and all(v == 0 for v in x) and eval_point(desc.phi_T, y):
        return True
    if not art.a <= t <= art.b:
        return False
    span = art.b - art.a
    scale = (t - art.a) / span if art.direction is Direction.FWD else (art.b - t) / span
    candidates: list[tuple[Fraction, ...]] = []
    if scale > 0:
        candidates.append(tuple(v / scale for v in x))
    candidates.extend(tuple(Fraction(c) for c in w) for w in extra_witnesses)
    for z in candidates:
        if tuple(v * scale for v in z) != x:
            continue
        if (
            eval_point(desc.phi_S, z)
            and eval_point(desc.phi_f, z + y)
            and eval_point(desc.phi_T, y)
        ):
            return True
    return False


# ---------------------------------------------------------------------------
# zigzag diagrams


class ZigzagDiagramDesc:
    """Alternating diagram: for odd i the map f_i goes S_i -> S_{i-1},
    for even i it goes S_{i-1} -> S_i; every graph formula lists the
    domain block first."""

    __slots__ = ("n", "k", "amb_vars", "copy_vars", "phi", "psi")

    def __init__(self, n: int, k: int, phi: Sequence[Formula], psi: Sequence[Formula],
                 amb_vars: Sequence[str] | None = None,
                 copy_vars: Sequence[str] | None = None):
        if n < 1:
            raise ValueError("a zigzag diagram needs n >= 1")
        phi = tuple(phi)
        psi = tuple(psi)
        if len(phi) != n + 1:
            raise ValueError(f"expected {n + 1} set formulas, got {len(phi)}")
        if len(psi) != n:
            raise ValueError(f"expected {n} graph formulas, got {len(psi)}")
        if amb_vars is None:
            for f in phi:
                vs = formula_vars(f)
                if vs is not None:
                    amb_vars = vs
                    break
            else:
                raise ValueError("amb_vars required when all set formulas are atom-free")
        amb_vars = tuple(amb_vars)
        if len(amb_vars) != k:
            raise ValueError("ambient variable count does not match k")
        if copy_vars is None:
            for g in psi:
                vs = formula_vars(g)
                if vs is not None:
                    if vs[:k] != amb_vars:
                        raise ValueError(
                            "graph formulas must list the ambient block first"
                        )
                    copy_vars = vs[k:]
                    break
            else:
                raise ValueError("copy_vars required when all graph formulas are atom-free")
        copy_vars = tuple(copy_vars)
        if len(copy_vars) != k or set(copy_vars) & set(amb_vars):
            raise ValueError("image block must be k fresh variables")
        for f in phi:
            vs = formula_vars(f)
            if vs is not None and vs != amb_vars:
                raise ValueError("set formulas must share the ambient variables")
        for g in psi:
            vs = formula_vars(g)
            if vs is not None and vs != amb_vars + copy_vars:
                raise ValueError("graph formulas must be over (ambient, image) blocks")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "amb_vars", amb_vars)
        object.__setattr__(self, "copy_vars", copy_vars)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    def __setattr__(self, name, value):
        raise AttributeError("ZigzagDiagramDesc is immutable")

    def map_domain(self, i: int) -> int:
        """Index of the domain set of f_i (always odd)."""
        return i if i % 2 == 1 else i - 1

    def map_target(self, i: int) -> int:
        return i - 1 if i % 2 == 1 else i

    def __repr__(self):
        return f"ZigzagDiagramDesc(n={self.n}, k={self.k})"


class PrismDesc:
    """Region {(x, w_1(mu) f(x) + w_2(mu) g(x), mu)} over a source set,
    with affine weights in mu; membership is resolved by witness box
    search during rasterization, never symbolically."""

    __slots__ = ("k", "vars", "source", "graphs", "weights", "mu_range")

    def __init__(self, k: int, vars: Sequence[str], source: Formula,
                 graphs: Sequence[Formula], weights, mu_range):
        vars = tuple(vars)
        if len(vars) != 2 * k + 1:
            raise ValueError("prism variables must be (x block, y block, mu)")
        graphs = tuple(graphs)
        weights = tuple((Fraction(s), Fraction(c)) for s, c in weights)
        if len(graphs) != len(weights) or not 1 <= len(graphs) <= 2:
            raise ValueError("a prism interpolates one or two graphs")
        a, b = mu_range
        a, b = Fraction(a), Fraction(b)
        if a >= b:
            raise ValueError("empty mu range")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "mu_range", (a, b))

    def __setattr__(self, name, value):
        raise AttributeError("PrismDesc is immutable")

    def weight_interval(self, index: int, mu_lo: Fraction, mu_hi: Fraction):
        slope, intercept = self.weights[index]
        lo = slope * mu_lo + intercept
        hi = slope * mu_hi + intercept
        return (min(lo, hi), max(lo, hi))

    def cell_set(self, grid: GridSpec) -> frozenset[tuple[int, ...]]:
        """Marked cells: for each source cell and mu slab, every witness
        cell pair that three-valued evaluation cannot refute contributes
        the y-cells meeting the interpolated value range."""
        k = self.k
        if grid.dim != 2 * k + 1:
            raise ValueError("grid dimension does not match the prism layout")
        res = grid.resolution
        x_box = Box(grid.box.intervals[:k])
        u_box = Box(grid.box.intervals[k : 2 * k])
        x_grid = GridSpec(x_box, res, GridMode.INTERVAL_OUTER)
        u_grid = GridSpec(u_box, res, GridMode.INTERVAL_OUTER)
        x_cells = sorted(simpreplace.rasterize(self.source, x_grid).cells)
        mu_lo, mu_hi = self.mu_range
        mu_cells = grid.axis_cells_touching(2 * k, mu_lo, mu_hi)
        all_u = list(itertools.product(range(res), repeat=k))
        marked: set[tuple[int, ...]] = set()
        for xc in x_cells:
            xiv = x_grid.cell_box(xc).intervals
            witness_sets: list[list[tuple[tuple, Box]]] = []
            for graph in self.graphs:
                hits = []
                for uc in all_u:
                    ub = u_grid.cell_box(uc)
                    if eval_box(graph, Box(xiv + ub.intervals)) is not Tri.FALSE:
                        hits.append((uc, ub))
                witness_sets.append(hits)
            if any(not hits for hits in witness_sets):
                continue
            for mu_idx in mu_cells:
                lo, hi = grid.cell_box(xc + (0,) * k + (mu_idx,)).intervals[2 * k]
                lo = max(lo, mu_lo)
                hi = min(hi, mu_hi)
                if lo > hi:
                    continue
                wivs = [
                    self.weight_interval(g, lo, hi) for g in range(len(self.graphs))
                ]
                for combo in itertools.product(*witness_sets):
                    ranges = []
                    for axis in range(k):
                        total_lo = _ZERO
                        total_hi = _ZERO
                        for wiv, (_, ub) in zip(wivs, combo):
                            plo, phi_ = _interval_mul(wiv, ub.intervals[axis])
                            total_lo += plo
                            total_hi += phi_
                        ranges.append(
                            grid.axis_cells_touching(k + axis, total_lo, total_hi)
                        )
                    if any(len(r) == 0 for r in ranges):
                        continue
                    for yc in itertools.product(*ranges):
                        marked.add(xc + yc + (mu_idx,))
        return frozenset(marked)

    def __repr__(self):
        return f"PrismDesc(k={self.k}, graphs={len(self.graphs)}, mu={self.mu_range})"


def _interval_mul(a, b):
    products = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(products), max(products))


class ZigzagCylinderFamily:
    """Per-index region unions of the zigzag cylinder; shared members
    are shared objects, so unions nest by construction."""

    __slots__ = ("desc", "mu_var", "vars", "members_by_index")

    def __init__(self, desc: ZigzagDiagramDesc, mu_var: str,
                 members_by_index: Sequence[tuple]):
        object.__setattr__(self, "desc", desc)
        object.__setattr__(self, "mu_var", mu_var)
        object.__setattr__(
            self, "vars", desc.amb_vars + desc.copy_vars + (mu_var,)
        )
        object.__setattr__(self, "members_by_index", tuple(
            tuple(ms) for ms in members_by_index
        ))

    def __setattr__(self, name, value):
        raise AttributeError("ZigzagCylinderFamily is immutable")

    def mu_span(self) -> tuple[Fraction, Fraction]:
        return (_ZERO, Fraction(self.desc.n))

    def __repr__(self):
        return f"ZigzagCylinderFamily(n={self.desc.n})"


def _map_desc(d: ZigzagDiagramDesc, i: int) -> SemialgebraicMapDesc:
    """Cylinder input for f_i: source formula over the ambient block,
    target formula re-expressed over the image block."""
    dom = d.map_domain(i)
    tgt = d.map_target(i)
    phi_T = embed(d.phi[tgt], d.copy_vars, dict(zip(d.amb_vars, d.copy_vars)))
    return SemialgebraicMapDesc(
        d.k, d.k, d.phi[dom], phi_T, d.psi[i - 1],
        x_vars=d.amb_vars, y_vars=d.copy_vars,
    )


def build_zigzag_cyl(d: ZigzagDiagramDesc, mu_var: str | None = None) -> ZigzagCylinderFamily:
    """The glued cylinder family: one region union per diagram index,
    with odd regions contained in their even neighbours by construction.

    Even index i carries the backward cylinder of f_i over
    [i - 1/2, i] and the forward cylinder of f_{i+1} over [i, i + 1/2]
    (their apexes glue along the copy of S_i at height i), unioned with
    the neighbouring prisms.  Odd index i carries the prism of S_i over
    [i - 1/2, i + 1/2] whose second coordinate interpolates from
    f_i(x) at the left end to f_{i+1}(x) at the right end; at i = n the
    prism is the constant graph slice over [n - 1/2, n].
    """
    if mu_var is None:
        mu_var = _fresh_name("mu", d.amb_vars + d.copy_vars)
    half = Fraction(1, 2)
    vars = d.amb_vars + d.copy_vars + (mu_var,)

    cylinders: dict[int, CylinderArtifact] = {}
    for i in range(1, d.n + 1):
        desc_i = _map_desc(d, i)
        if i % 2 == 1:
            # map out of S_i, apex at the even neighbour below (i - 1)
            art = build_directed_cyl(desc_i, i - 1, i - half, Direction.FWD, mu_var)
        else:
            art = build_directed_cyl(desc_i, i - half, i, Direction.BWD, mu_var)
        cylinders[i] = eliminate_theta(art)

    prisms: dict[int, PrismDesc] = {}
    for i in range(1, d.n + 1, 2):
        if i != d.n:
            prisms[i] = PrismDesc(
                d.k, vars, d.phi[i],
                (d.psi[i], d.psi[i + 1]),
                # endpoint-matching interpolation: weight of f_i falls
                # from 1 to 0 across [i - 1/2, i + 1/2], f_{i+1} rises
                ((Fraction(-1), i + half), (Fraction(1), -(i - half))),
                (i - half, i + half),
            )
        else:
            prisms[i] = PrismDesc(
                d.k, vars, d.phi[i], (d.psi[i],),
                ((Fraction(0), Fraction(1)),),
                (i - half, Fraction(i)),
            )

    members: list[tuple] = []
    for i in range(d.n + 1):
        if i % 2 == 1:
            members.append((prisms[i],))
        else:
            entry: list = []
            if i != 0:
                entry.append(cylinders[i])
            if i != d.n:
                entry.append(cylinders[i + 1])
            if i - 1 >= 0:
                entry.append(prisms[i - 1])
            if i + 1 <= d.n:
                entry.append(prisms[i + 1])
            members.append(tuple(entry))
    return ZigzagCylinderFamily(d, mu_var, members)


# ---------------------------------------------------------------------------
# the retraction maps g_j


def eval_g(d: ZigzagDiagramDesc, j: int, point, grid: GridSpec,
           family: ZigzagCylinderFamily | None = None):
    """Image of a cylinder-family point under the retraction onto S_j.

    Odd j projects to the ambient block; even j returns the value block
    on the central band and f_j(x) / f_{j+1}(x) on the neighbouring
    prism bands, resolved by witness search over the rasterized graph.
    """
    if not 0 <= j <= d.n:
        raise ValueError(f"index {j} outside 0..{d.n}")
    point = tuple(Fraction(p) for p in point)
    if len(point) != 2 * d.k + 1:
        raise ValueError("point dimension does not match the cylinder layout")
    x = point[: d.k]
    y = point[d.k : 2 * d.k]
    mu = point[-1]
    if j % 2 == 1:
        return x
    half = Fraction(1, 2)
    if j - half <= mu <= j + half:
        return y
    if j != 0 and j - 1 - half <= mu < j - half:
        return _graph_witness(d, j, x, grid)
    if j != d.n and j + half < mu <= j + 1 + half:
        return _graph_witness(d, j + 1, x, grid)
    raise ValueError(f"mu={mu} lies outside the case ranges of g_{j}")


def _graph_witness(d: ZigzagDiagramDesc, i: int, x, grid: GridSpec):
    """Approximate f_i(x) as the midpoint of the bounding box of all
    image cells compatible with the graph formula at x."""
    k = d.k
    u_box = Box(grid.box.intervals[k : 2 * k])
    u_grid = GridSpec(u_box, grid.resolution, GridMode.INTERVAL_OUTER)
    x_intervals = tuple((v, v) for v in x)
    graph = d.psi[i - 1]
    hits = []
    for uc in itertools.product(range(grid.resolution), repeat=k):
        ub = u_grid.cell_box(uc)
        if eval_box(graph, Box(x_intervals + ub.intervals)) is not Tri.FALSE:
            hits.append(ub.intervals)
    if not hits:
        raise LookupError(
            f"no graph cell for f_{i} at {x} at resolution {grid.resolution}"
        )
    out = []
    for axis in range(k):
        lo = min(h[axis][0] for h in hits)
        hi = max(h[axis][1] for h in hits)
        out.append((lo + hi) / 2)
    return tuple(out)
