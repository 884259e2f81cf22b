"""Quantifier-free formula trees over exact polynomial atoms.

Atoms are sign conditions P ?? 0 with ?? among =, <, >, <=, >=.  Internal
nodes are n-ary AND / OR, unary NOT, and an existential prefix EXISTS
that only ever appears as an intermediate while building mapping
cylinders.  The empty conjunction is the formula TRUE and the empty
disjunction is FALSE.

A formula is *closed* when it has no NOT, no EXISTS, and every atom
relation is <=, >= or = (= being sugar for the conjunction of <= and
>=).  Realizations of closed formulas are closed sets, which is what
the downstream rasterizer relies on.

Point evaluation is exact.  Box evaluation is three-valued interval
arithmetic: TRUE means every point of the box satisfies the formula,
FALSE means none does, UNKNOWN is the honest remainder.  AND is min,
OR is max, NOT swaps TRUE and FALSE.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .polynomials import Interval, Polynomial


class Rel(enum.Enum):
    EQ = "="
    LT = "<"
    GT = ">"
    LE = "<="
    GE = ">="


class Tri(enum.IntEnum):
    """Three-valued truth; the ordering makes AND=min and OR=max."""

    FALSE = 0
    UNKNOWN = 1
    TRUE = 2


class Formula:
    """Base class; every node is immutable and hash/equality is structural."""

    __slots__ = ("_hash",)

    def __eq__(self, other):
        raise NotImplementedError

    def __hash__(self):
        raise NotImplementedError


class Atom(Formula):
    __slots__ = ("poly", "rel")

    def __init__(self, poly: Polynomial, rel: Rel):
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "rel", Rel(rel))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Atom is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Atom)
            and self.rel == other.rel
            and self.poly == other.poly
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((Atom, self.rel, self.poly))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Atom({self.poly} {self.rel.value} 0)"


class _Junction(Formula):
    __slots__ = ("children",)

    def __init__(self, children: Iterable[Formula]):
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("formula nodes are immutable")

    def __eq__(self, other):
        return type(other) is type(self) and self.children == other.children

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self), self.children))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"{type(self).__name__}{self.children!r}"


class And(_Junction):
    __slots__ = ()


class Or(_Junction):
    __slots__ = ()


class Not(Formula):
    __slots__ = ("child",)

    def __init__(self, child: Formula):
        object.__setattr__(self, "child", child)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Not is immutable")

    def __eq__(self, other):
        return isinstance(other, Not) and self.child == other.child

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((Not, self.child))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Not({self.child!r})"


class Exists(Formula):
    __slots__ = ("names", "body")

    def __init__(self, names: Sequence[str], body: Formula):
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Exists is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Exists)
            and self.names == other.names
            and self.body == other.body
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((Exists, self.names, self.body))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Exists({self.names}, {self.body!r})"


TRUE = And(())
FALSE = Or(())


class Box:
    """Axis-aligned product of closed rational intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval]):
        ivals = []
        for lo, hi in intervals:
            lo = Fraction(lo)
            hi = Fraction(hi)
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
            ivals.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(ivals))

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def cube(cls, radius, dim: int) -> Box:
        r = Fraction(radius)
        if r <= 0:
            raise ValueError("radius must be positive")
        return cls(((-r, r),) * dim)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def contains(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.dim:
            raise ValueError("dimension mismatch")
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.intervals))

    def center(self) -> tuple[Fraction, ...]:
        return tuple((lo + hi) / 2 for lo, hi in self.intervals)

    def __eq__(self, other):
        return isinstance(other, Box) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        spans = "; ".join(f"[{lo}, {hi}]" for lo, hi in self.intervals)
        return f"Box({spans})"


# ---------------------------------------------------------------------------
# structural helpers


def formula_vars(f: Formula) -> tuple[str, ...] | None:
    """The shared variable tuple of the formula's atoms, or None when the
    formula has no atoms (TRUE/FALSE are dimension-agnostic)."""
    found: tuple[str, ...] | None = None
    for atom in iter_atoms(f):
        if found is None:
            found = atom.poly.vars
        elif atom.poly.vars != found:
            raise ValueError(
                f"inconsistent atom variables: {found} vs {atom.poly.vars}"
            )
    return found


def iter_atoms(f: Formula):
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            yield node
        elif isinstance(node, (And, Or)):
            stack.extend(node.children)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, Exists):
            stack.append(node.body)
        else:
            raise TypeError(f"not a formula node: {node!r}")


def polynomials_of(f: Formula) -> tuple[Polynomial, ...]:
    """Distinct atom polynomials, deterministically ordered."""
    seen = {}
    for atom in iter_atoms(f):
        seen.setdefault(atom.poly, None)
    return tuple(sorted(seen, key=Polynomial.sort_key))


def has_quantifier(f: Formula) -> bool:
    return any(isinstance(n, Exists) for n in _iter_nodes(f))


def _iter_nodes(f: Formula):
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (And, Or)):
            stack.extend(node.children)
        elif isinstance(node, Not):
            stack.append(node.child)
        elif isinstance(node, Exists):
            stack.append(node.body)


def is_closed(f: Formula) -> bool:
    """No NOT, no EXISTS, and all atom relations among <=, >=, =."""
    for node in _iter_nodes(f):
        if isinstance(node, (Not, Exists)):
            return False
        if isinstance(node, Atom) and node.rel in (Rel.LT, Rel.GT):
            return False
    return True


def embed(f: Formula, new_vars: Sequence[str], rename: Mapping[str, str] | None = None) -> Formula:
    """Rebuild the formula over a larger variable tuple, optionally
    renaming variables on the way."""
    rename = rename or {}

    def walk(node: Formula) -> Formula:
        if isinstance(node, Atom):
            return Atom(node.poly.rename(new_vars, rename), node.rel)
        if isinstance(node, And):
            return And(walk(c) for c in node.children)
        if isinstance(node, Or):
            return Or(walk(c) for c in node.children)
        if isinstance(node, Not):
            return Not(walk(node.child))
        if isinstance(node, Exists):
            return Exists(node.names, walk(node.body))
        raise TypeError(f"not a formula node: {node!r}")

    return walk(f)


# ---------------------------------------------------------------------------
# evaluation


def _sign_truth(sign: int, rel: Rel) -> bool:
    if rel is Rel.EQ:
        return sign == 0
    if rel is Rel.LT:
        return sign < 0
    if rel is Rel.GT:
        return sign > 0
    if rel is Rel.LE:
        return sign <= 0
    return sign >= 0


def eval_point(f: Formula, point: Sequence[Fraction]) -> bool:
    """Exact truth of a quantifier-free formula at a rational point."""
    pt = tuple(Fraction(x) for x in point)

    def walk(node: Formula) -> bool:
        if isinstance(node, Atom):
            value = node.poly.evaluate(pt)
            return _sign_truth((value > 0) - (value < 0), node.rel)
        if isinstance(node, And):
            return all(walk(c) for c in node.children)
        if isinstance(node, Or):
            return any(walk(c) for c in node.children)
        if isinstance(node, Not):
            return not walk(node.child)
        if isinstance(node, Exists):
            raise ValueError("eval_point does not accept quantified formulas")
        raise TypeError(f"not a formula node: {node!r}")

    return walk(f)


def interval_rel_truth(lo: Fraction, hi: Fraction, rel: Rel) -> Tri:
    """Three-valued truth of (value ?? 0) when value ranges over [lo, hi]."""
    if rel is Rel.EQ:
        if lo == hi == 0:
            return Tri.TRUE
        if lo > 0 or hi < 0:
            return Tri.FALSE
        return Tri.UNKNOWN
    if rel is Rel.LE:
        if hi <= 0:
            return Tri.TRUE
        if lo > 0:
            return Tri.FALSE
        return Tri.UNKNOWN
    if rel is Rel.GE:
        if lo >= 0:
            return Tri.TRUE
        if hi < 0:
            return Tri.FALSE
        return Tri.UNKNOWN
    if rel is Rel.LT:
        if hi < 0:
            return Tri.TRUE
        if lo >= 0:
            return Tri.FALSE
        return Tri.UNKNOWN
    if lo > 0:
        return Tri.TRUE
    if hi <= 0:
        return Tri.FALSE
    return Tri.UNKNOWN


def eval_box(f: Formula, box: Box) -> Tri:
    """Sound three-valued truth of the formula over a box.

    TRUE implies every point of the box satisfies f; FALSE implies no
    point does.  Soundness, not tightness, is the contract.
    """

    def walk(node: Formula) -> Tri:
        if isinstance(node, Atom):
            lo, hi = node.poly.interval(box.intervals)
            return interval_rel_truth(lo, hi, node.rel)
        if isinstance(node, And):
            result = Tri.TRUE
            for c in node.children:
                result = min(result, walk(c))
                if result is Tri.FALSE:
                    break
            return result
        if isinstance(node, Or):
            result = Tri.FALSE
            for c in node.children:
                result = max(result, walk(c))
                if result is Tri.TRUE:
                    break
            return result
        if isinstance(node, Not):
            inner = walk(node.child)
            if inner is Tri.TRUE:
                return Tri.FALSE
            if inner is Tri.FALSE:
                return Tri.TRUE
            return Tri.UNKNOWN
        if isinstance(node, Exists):
            raise ValueError("eval_box does not accept quantified formulas")
        raise TypeError(f"not a formula node: {node!r}")

    vs = formula_vars(f)
    if vs is not None and len(vs) != box.dim:
        raise ValueError(f"box has dimension {box.dim}, formula expects {len(vs)}")
    return walk(f)


# ---------------------------------------------------------------------------
# normal forms and substitution


def negate(f: Formula) -> Formula:
    """Negation with NOT pushed onto atoms and eliminated there."""
    if isinstance(f, Atom):
        flipped = {
            Rel.LT: Atom(f.poly, Rel.GE),
            Rel.GT: Atom(f.poly, Rel.LE),
            Rel.LE: Atom(f.poly, Rel.GT),
            Rel.GE: Atom(f.poly, Rel.LT),
        }
        if f.rel in flipped:
            return flipped[f.rel]
        return Or((Atom(f.poly, Rel.LT), Atom(f.poly, Rel.GT)))
    if isinstance(f, And):
        return Or(negate(c) for c in f.children)
    if isinstance(f, Or):
        return And(negate(c) for c in f.children)
    if isinstance(f, Not):
        return remove_negations(f.child)
    raise ValueError("cannot negate a quantified formula")


def remove_negations(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return f
    if isinstance(f, And):
        return And(remove_negations(c) for c in f.children)
    if isinstance(f, Or):
        return Or(remove_negations(c) for c in f.children)
    if isinstance(f, Not):
        return negate(f.child)
    raise ValueError("cannot normalize a quantified formula")


def to_dnf(f: Formula) -> Formula:
    """Disjunctive normal form (negation-free).  Exponential in general;
    only used when emitting canonical closed formulas."""
    g = remove_negations(f)

    def walk(node: Formula) -> list[tuple[Formula, ...]]:
        if isinstance(node, Atom):
            return [(node,)]
        if isinstance(node, Or):
            out: list[tuple[Formula, ...]] = []
            for c in node.children:
                out.extend(walk(c))
            return out
        if isinstance(node, And):
            prods: list[tuple[Formula, ...]] = [()]
            for c in node.children:
                branch = walk(c)
                prods = [p + q for p in prods for q in branch]
            return prods
        raise TypeError(f"unexpected node in DNF conversion: {node!r}")

    clauses = walk(g)
    return Or(And(clause) for clause in clauses)


def homogenize_substitute(
    f: Formula,
    scale: Polynomial,
    substitution: Mapping[str, str],
    passthrough: Sequence[str] = (),
) -> Formula:
    """Replace each substituted variable z by x/scale inside every atom
    and clear denominators by the atom's substituted degree.

    Each atom P ?? 0 becomes (scale^deg * P with z -> x/scale) ?? 0,
    which is sign-equivalent to the original wherever scale > 0.  Atoms
    mentioning variables outside the substitution (and outside the
    explicitly allowed passthrough set) are rejected.
    """
    allowed = set(substitution) | set(passthrough)

    def walk(node: Formula) -> Formula:
        if isinstance(node, Atom):
            extra = node.poly.mentioned_vars() - allowed
            if extra:
                raise ValueError(
                    f"atom mentions non-substituted variable(s) {sorted(extra)}"
                )
            return Atom(node.poly.clear_by(scale, substitution), node.rel)
        if isinstance(node, And):
            return And(walk(c) for c in node.children)
        if isinstance(node, Or):
            return Or(walk(c) for c in node.children)
        if isinstance(node, Not):
            return Not(walk(node.child))
        if isinstance(node, Exists):
            raise ValueError("homogenize_substitute does not accept quantifiers")
        raise TypeError(f"not a formula node: {node!r}")

    return walk(f)
