"""End-to-end pipelines: maps and zigzag diagrams in, homology bases,
induced-map matrices, and barcodes out.

The map pipeline: build the cylinder formula, eliminate the witness
block, conjoin the source-slice equation, replace both formulas by
closed relaxations over the slice formula's polynomial set, rasterize
and triangulate the pair into nested complexes, then run exact
homology.  The matrices of the source inclusion into the cylinder are
the matrices of the original map up to the cylinder's homological
equivalence onto its target.

The zigzag pipeline does the same for the glued cylinder family: odd
regions include into their even neighbours, giving one zigzag module of
rational vector spaces per homology dimension, which the barcode
decomposition consumes.

Rasterization is a heuristic stand-in for a guaranteed simplicial
replacement, so reports carry a resolution-stability section (Betti
numbers at the working resolution and at twice it) rather than a
correctness claim.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .closedify import ThresholdLadder, band_membership
from .cylinder import (
    CylinderArtifact,
    PrismDesc,
    SemialgebraicMapDesc,
    ZigzagDiagramDesc,
    build_theta,
    build_zigzag_cyl,
    eliminate_theta,
    restrict_T1,
)
from .formulas import Box, Formula
from .homology import (
    HomologyBasis,
    InducedMap,
    SimplicialComplex,
    homology_basis,
    induced_inclusion_map,
)
from .parsing import format_formula
from .polynomials import Polynomial
from .formulas import polynomials_of
from .simpreplace import GridMode, GridSpec, NestedComplexes, RegionUnion, replace_tuple
from .zigzag import Barcode, ZigzagModule, barcode, validate_barcode


class PipelineConfig:
    """Knobs shared by every pipeline stage."""

    __slots__ = (
        "max_dim", "resolution", "radius", "eta", "mode", "reduce",
        "stability", "box",
    )

    def __init__(self, max_dim: int = 2, resolution: int = 16, radius=2,
                 eta=Fraction(1, 16), mode: GridMode = GridMode.INTERVAL_OUTER,
                 reduce: bool = True, stability: bool = True,
                 box: Box | None = None):
        max_dim = int(max_dim)
        resolution = int(resolution)
        radius = Fraction(radius)
        eta = Fraction(eta)
        if max_dim < 0:
            raise ValueError("max_dim must be non-negative")
        if resolution < 2 or resolution & (resolution - 1):
            raise ValueError("resolution must be a power of two, at least 2")
        if radius <= 0:
            raise ValueError("radius must be positive")
        if not 0 < eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        object.__setattr__(self, "max_dim", max_dim)
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "radius", radius)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mode", GridMode(mode))
        object.__setattr__(self, "reduce", bool(reduce))
        object.__setattr__(self, "stability", bool(stability))
        object.__setattr__(self, "box", box)

    def __setattr__(self, name, value):
        raise AttributeError("PipelineConfig is immutable")

    def with_resolution(self, resolution: int) -> "PipelineConfig":
        return PipelineConfig(
            self.max_dim, resolution, self.radius, self.eta, self.mode,
            self.reduce, False, self.box,
        )

    def grid_for(self, dim: int) -> GridSpec:
        box = self.box if self.box is not None else Box.cube(self.radius, dim)
        if box.dim != dim:
            raise ValueError(f"configured box has dimension {box.dim}, need {dim}")
        return GridSpec(box, self.resolution, self.mode)

    def to_dict(self) -> dict:
        return {
            "max_dim": self.max_dim,
            "resolution": self.resolution,
            "radius": str(self.radius),
            "eta": str(self.eta),
            "mode": self.mode.value,
            "reduce": self.reduce,
            "stability": self.stability,
        }


def _closed_region(f: Formula, eta: Fraction,
                   polys: tuple[Polynomial, ...] | None = None):
    """Band-membership evaluator of the closed relaxation of f."""
    if polys is None:
        polys = polynomials_of(f)
    ladder = ThresholdLadder(len(polys), eta)
    return band_membership(f, polys, ladder)


def _cycles_json(basis: HomologyBasis) -> list:
    out = []
    for idx in range(basis.rank):
        out.append(
            [[list(simplex), str(coeff)]
             for simplex, coeff in basis.cycle_simplices(idx)]
        )
    return out


def _matrix_json(m: InducedMap) -> list:
    return [[str(x) for x in row] for row in m.matrix]


def _complex_size(k: SimplicialComplex) -> dict:
    return {str(d): len(k.simplices[d]) for d in sorted(k.simplices)}


# ---------------------------------------------------------------------------
# map functor


class MapFunctorResult:
    """Bases, matrices, and the nested complexes of one map run."""

    def __init__(self, artifact: CylinderArtifact, nested: NestedComplexes,
                 source_complex: SimplicialComplex, target_complex: SimplicialComplex,
                 source_bases: list[HomologyBasis], target_bases: list[HomologyBasis],
                 maps: list[InducedMap], stability: dict | None, config: PipelineConfig):
        self.artifact = artifact
        self.nested = nested
        self.source_complex = source_complex
        self.target_complex = target_complex
        self.source_bases = source_bases
        self.target_bases = target_bases
        self.maps = maps
        self.stability = stability
        self.config = config

    def betti_source(self) -> tuple[int, ...]:
        return tuple(b.rank for b in self.source_bases)

    def betti_target(self) -> tuple[int, ...]:
        return tuple(b.rank for b in self.target_bases)

    def report(self) -> dict:
        warnings = []
        if self.config.max_dim >= self.nested.grid.dim:
            warnings.append(
                "max_dim is at least the grid dimension; top homology of a "
                "rasterized set is grid noise"
            )
        if self.stability is not None and not self.stability["stable"]:
            warnings.append(
                "Betti numbers changed between the working resolution and "
                "twice it; refine the grid"
            )
        return {
            "kind": "map-functor",
            "config": self.config.to_dict(),
            "variables": list(self.artifact.vars),
            "formula": format_formula(self.artifact.theta_qf),
            "source_formula": format_formula(self.artifact.theta_T1),
            "complex_sizes": {
                "source": _complex_size(self.source_complex),
                "target": _complex_size(self.target_complex),
            },
            "dimensions": [
                {
                    "i": i,
                    "beta_source": self.source_bases[i].rank,
                    "beta_target": self.target_bases[i].rank,
                    "matrix": _matrix_json(self.maps[i]),
                    "source_basis": _cycles_json(self.source_bases[i]),
                    "target_basis": _cycles_json(self.target_bases[i]),
                }
                for i in range(self.config.max_dim + 1)
            ],
            "stability": self.stability,
            "warnings": warnings,
        }


def _union_complex(a: SimplicialComplex, b: SimplicialComplex) -> SimplicialComplex:
    table: dict[int, set] = {}
    for k in (a, b):
        for dim, items in k.simplices.items():
            table.setdefault(dim, set()).update(items)
    return SimplicialComplex({dim: sorted(items) for dim, items in table.items()})


def _map_regions(desc: SemialgebraicMapDesc, eta: Fraction):
    """Closed relaxations of (source slice, eliminated cylinder) over
    the slice formula's polynomial set."""
    art = restrict_T1(eliminate_theta(build_theta(desc)))
    polys = polynomials_of(art.theta_T1)
    slice_region = _closed_region(art.theta_T1, eta, polys)
    cylinder_region = _closed_region(art.theta_qf, eta, polys)
    return art, slice_region, cylinder_region


def _map_complexes(desc: SemialgebraicMapDesc, cfg: PipelineConfig):
    art, slice_region, cylinder_region = _map_regions(desc, cfg.eta)
    dim = desc.k + desc.m + 1
    nested = replace_tuple(
        [slice_region, cylinder_region], cfg.grid_for(dim),
        reduce=cfg.reduce, names=("source", "cylinder"),
    )
    source = nested.subcomplexes[0]
    target = _union_complex(nested.subcomplexes[0], nested.subcomplexes[1])
    return art, nested, source, target


def map_functor(desc: SemialgebraicMapDesc, cfg: PipelineConfig) -> MapFunctorResult:
    """Bases of H_i of source and cylinder and the matrix of the
    inclusion-induced map, for i = 0..max_dim."""
    art, nested, source, target = _map_complexes(desc, cfg)
    source_bases = [homology_basis(source, i) for i in range(cfg.max_dim + 1)]
    target_bases = [homology_basis(target, i) for i in range(cfg.max_dim + 1)]
    maps = [
        induced_inclusion_map(source_bases[i], target_bases[i])
        for i in range(cfg.max_dim + 1)
    ]
    stability = None
    if cfg.stability:
        fine = cfg.with_resolution(cfg.resolution * 2)
        _, _, fine_source, fine_target = _map_complexes(desc, fine)
        stability = {
            "resolution": cfg.resolution,
            "betti_source": [b.rank for b in source_bases],
            "betti_target": [b.rank for b in target_bases],
            "resolution_2x": fine.resolution,
            "betti_source_2x": [
                homology_basis(fine_source, i).rank for i in range(cfg.max_dim + 1)
            ],
            "betti_target_2x": [
                homology_basis(fine_target, i).rank for i in range(cfg.max_dim + 1)
            ],
        }
        stability["stable"] = (
            stability["betti_source"] == stability["betti_source_2x"]
            and stability["betti_target"] == stability["betti_target_2x"]
        )
    return MapFunctorResult(
        art, nested, source, target, source_bases, target_bases, maps,
        stability, cfg,
    )


# ---------------------------------------------------------------------------
# zigzag functor


class ZigzagFunctorResult:
    """Per-index complexes, per-dimension zigzag modules, barcodes."""

    def __init__(self, desc: ZigzagDiagramDesc, family, nested: NestedComplexes,
                 modules: list[ZigzagModule], bases: list[list[HomologyBasis]],
                 stability: dict | None, config: PipelineConfig):
        self.desc = desc
        self.family = family
        self.nested = nested
        self.modules = modules
        self.bases = bases
        self.stability = stability
        self.config = config

    def complexes(self) -> tuple[SimplicialComplex, ...]:
        return self.nested.subcomplexes

    def barcodes(self) -> list[Barcode]:
        return [barcode(m) for m in self.modules]

    def report(self, include_barcodes: bool = True) -> dict:
        warnings = []
        if self.stability is not None and not self.stability["stable"]:
            warnings.append(
                "Betti numbers changed between the working resolution and "
                "twice it; refine the grid"
            )
        nesting_ok = self.nesting_holds()
        if not nesting_ok:
            warnings.append("subcomplex nesting violated (internal error)")
        out = {
            "kind": "zigzag-functor",
            "config": self.config.to_dict(),
            "n": self.desc.n,
            "variables": list(self.family.vars),
            "complex_sizes": [
                _complex_size(k) for k in self.nested.subcomplexes
            ],
            "nesting": nesting_ok,
            "dimensions": [
                {
                    "i": i,
                    "dims": list(self.modules[i].dims),
                    "arrows": [
                        [[str(x) for x in row] for row in a]
                        for a in self.modules[i].arrows
                    ],
                }
                for i in range(self.config.max_dim + 1)
            ],
            "stability": self.stability,
            "warnings": warnings,
        }
        if include_barcodes:
            out["barcodes"] = []
            for i, bc in enumerate(self.barcodes()):
                ok, report = validate_barcode(self.modules[i], bc)
                if not ok:
                    warnings.extend(report)
                out["barcodes"].append(
                    {
                        "i": i,
                        "intervals": [
                            {"birth": b, "death": d, "multiplicity": m}
                            for b, d, m in bc.intervals
                        ],
                        "valid": ok,
                    }
                )
        return out

    def nesting_holds(self) -> bool:
        subs = self.nested.subcomplexes
        for i in range(0, self.desc.n + 1, 2):
            for j in (i - 1, i + 1):
                if 0 <= j <= self.desc.n and not subs[j].is_subcomplex_of(subs[i]):
                    return False
        return True


def _zigzag_entries(d: ZigzagDiagramDesc, eta: Fraction):
    """Per-index region unions with cylinder members replaced by their
    closed relaxations; shared members stay shared objects."""
    family = build_zigzag_cyl(d)
    converted: dict[int, object] = {}

    def convert(member):
        key = id(member)
        if key not in converted:
            if isinstance(member, PrismDesc):
                converted[key] = member
            else:
                converted[key] = _closed_region(member.theta_qf, eta)
        return converted[key]

    entries = [
        RegionUnion(tuple(convert(m) for m in members))
        for members in family.members_by_index
    ]
    return family, entries


def _zigzag_complexes(d: ZigzagDiagramDesc, cfg: PipelineConfig):
    family, entries = _zigzag_entries(d, cfg.eta)
    dim = 2 * d.k + 1
    if cfg.box is not None:
        box = cfg.box
    else:
        r = cfg.radius
        box = Box(
            ((-r, r),) * (2 * d.k) + ((Fraction(0), Fraction(d.n)),)
        )
    grid = GridSpec(box, cfg.resolution, cfg.mode)
    nested = replace_tuple(
        entries, grid, reduce=cfg.reduce,
        names=tuple(f"S{i}" for i in range(d.n + 1)),
    )
    return family, nested


def zigzag_functor(d: ZigzagDiagramDesc, cfg: PipelineConfig) -> ZigzagFunctorResult:
    """One zigzag module of rational vector spaces per homology
    dimension i = 0..max_dim, with arrows induced by the literal
    subcomplex inclusions of the cylinder family."""
    family, nested = _zigzag_complexes(d, cfg)
    subs = nested.subcomplexes
    bases: list[list[HomologyBasis]] = [
        [homology_basis(subs[j], i) for j in range(d.n + 1)]
        for i in range(cfg.max_dim + 1)
    ]
    modules: list[ZigzagModule] = []
    for i in range(cfg.max_dim + 1):
        dims = tuple(b.rank for b in bases[i])
        arrows = []
        for j in range(1, d.n + 1):
            if j % 2 == 1:
                m = induced_inclusion_map(bases[i][j], bases[i][j - 1])
            else:
                m = induced_inclusion_map(bases[i][j - 1], bases[i][j])
            arrows.append(m.matrix)
        modules.append(ZigzagModule(dims, arrows))
    stability = None
    if cfg.stability:
        fine = cfg.with_resolution(cfg.resolution * 2)
        _, fine_nested = _zigzag_complexes(d, fine)
        betti = [
            [b.rank for b in bases[i]] for i in range(cfg.max_dim + 1)
        ]
        betti_2x = [
            [homology_basis(sub, i).rank for sub in fine_nested.subcomplexes]
            for i in range(cfg.max_dim + 1)
        ]
        stability = {
            "resolution": cfg.resolution,
            "betti": betti,
            "resolution_2x": fine.resolution,
            "betti_2x": betti_2x,
            "stable": betti == betti_2x,
        }
    return ZigzagFunctorResult(d, family, nested, modules, bases, stability, cfg)


def zigzag_barcode(d: ZigzagDiagramDesc, cfg: PipelineConfig):
    """Barcodes per homology dimension; every one passes the
    independent validity check or the run fails loudly."""
    result = zigzag_functor(d, cfg)
    barcodes = result.barcodes()
    for i, bc in enumerate(barcodes):
        ok, report = validate_barcode(result.modules[i], bc)
        if not ok:
            raise ArithmeticError(
                f"barcode validation failed in dimension {i}: {report}"
            )
    return result, barcodes
