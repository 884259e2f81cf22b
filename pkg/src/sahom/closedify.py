"""Closed relaxation of formulas whose realization is a closed set.

Given a finite polynomial set P and a formula phi over atoms of P, the
closed relaxation replaces phi by a syntactically closed formula: a
disjunction, over all sign conditions sigma that force phi, of band
conjunctions

    sign 0   ->  -d <= P <= d
    sign +1  ->   P >= c
    sign -1  ->   P <= -c

with thresholds c, d graded by level(sigma) = number of zero signs.
Thresholds come from a strictly decreasing ladder

    mu_s > nu_s > ... > mu_0 > nu_0 > 0,

realized concretely as powers of a base eta in (0,1):
mu_j = eta^(2(s-j)+1), nu_j = eta^(2(s-j)+2).  A symbolic mode leaves
the thresholds as reserved variables __mu_j / __nu_j instead.

The relaxation contains the original set for small enough eta and has
the same homotopy type when the original realization is closed; that
hypothesis is the caller's responsibility and is not decidable here.

``band_membership`` builds an evaluator for the relaxation's realized
set that is semantically identical to interval evaluation of the
emitted formula but avoids walking the (possibly huge) disjunction per
box: per level, each polynomial admits at most one definite sign and a
small set of possible signs, so membership reduces to a few hash
lookups into the sign-condition set.
"""

from __future__ import annotations

import bisect
import itertools
from fractions import Fraction
from typing import Iterable, Sequence

from .formulas import (
    Atom,
    And,
    Box,
    Exists,
    Formula,
    Not,
    Or,
    Rel,
    Tri,
    _sign_truth,
    iter_atoms,
)
from .polynomials import Polynomial

SIGNS = (-1, 0, 1)


class SignCondition:
    """Assignment of a sign in {-1, 0, +1} to each member of an ordered
    polynomial set."""

    __slots__ = ("polys", "signs")

    def __init__(self, polys: Sequence[Polynomial], signs: Sequence[int]):
        ps = tuple(polys)
        ss = tuple(int(s) for s in signs)
        if len(ps) != len(ss):
            raise ValueError("sign vector length does not match polynomial set")
        if any(s not in SIGNS for s in ss):
            raise ValueError(f"signs must lie in {SIGNS}")
        object.__setattr__(self, "polys", ps)
        object.__setattr__(self, "signs", ss)

    def __setattr__(self, name, value):
        raise AttributeError("SignCondition is immutable")

    @property
    def level(self) -> int:
        """Number of polynomials assigned sign zero."""
        return sum(1 for s in self.signs if s == 0)

    def __eq__(self, other):
        return (
            isinstance(other, SignCondition)
            and self.polys == other.polys
            and self.signs == other.signs
        )

    def __hash__(self):
        return hash((self.polys, self.signs))

    def __repr__(self):
        pairs = ", ".join(f"{p}:{s:+d}" for p, s in zip(self.polys, self.signs))
        return f"SignCondition({pairs})"


class ThresholdLadder:
    """Concrete strictly decreasing positive thresholds mu_j, nu_j."""

    __slots__ = ("s", "eta")

    def __init__(self, s: int, eta=Fraction(1, 16)):
        eta = Fraction(eta)
        if s < 0:
            raise ValueError("level count must be non-negative")
        if not (0 < eta < 1):
            raise ValueError("eta must lie strictly between 0 and 1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "eta", eta)

    def __setattr__(self, name, value):
        raise AttributeError("ThresholdLadder is immutable")

    def mu(self, j: int) -> Fraction:
        self._check(j)
        return self.eta ** (2 * (self.s - j) + 1)

    def nu(self, j: int) -> Fraction:
        self._check(j)
        return self.eta ** (2 * (self.s - j) + 2)

    def _check(self, j: int) -> None:
        if not 0 <= j <= self.s:
            raise ValueError(f"level {j} outside 0..{self.s}")

    def __repr__(self):
        return f"ThresholdLadder(s={self.s}, eta={self.eta})"


class SymbolicThreshold:
    """Unevaluated ladder entry; serializes as __mu_j or __nu_j."""

    __slots__ = ("kind", "level")

    def __init__(self, kind: str, level: int):
        if kind not in ("mu", "nu"):
            raise ValueError("kind must be 'mu' or 'nu'")
        if level < 0:
            raise ValueError("level must be non-negative")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "level", level)

    def __setattr__(self, name, value):
        raise AttributeError("SymbolicThreshold is immutable")

    @property
    def name(self) -> str:
        return f"__{self.kind}_{self.level}"

    def __eq__(self, other):
        return (
            isinstance(other, SymbolicThreshold)
            and self.kind == other.kind
            and self.level == other.level
        )

    def __hash__(self):
        return hash((self.kind, self.level))

    def __repr__(self):
        return self.name


# ---------------------------------------------------------------------------
# sign-condition enumeration


def _compile(f: Formula, index: dict[Polynomial, int]):
    """Lower a formula to a tree over polynomial indices for fast
    repeated evaluation under partial sign assignments."""
    if isinstance(f, Atom):
        if f.poly not in index:
            raise ValueError(f"atom polynomial {f.poly} is not in the given set")
        return ("atom", index[f.poly], f.rel)
    if isinstance(f, And):
        return ("and", tuple(_compile(c, index) for c in f.children))
    if isinstance(f, Or):
        return ("or", tuple(_compile(c, index) for c in f.children))
    if isinstance(f, Not):
        return ("not", _compile(f.child, index))
    if isinstance(f, Exists):
        raise ValueError("sign conditions are undefined for quantified formulas")
    raise TypeError(f"not a formula node: {f!r}")


def _eval_partial(node, signs: list[int | None]) -> Tri:
    kind = node[0]
    if kind == "atom":
        s = signs[node[1]]
        if s is None:
            return Tri.UNKNOWN
        return Tri.TRUE if _sign_truth(s, node[2]) else Tri.FALSE
    if kind == "and":
        result = Tri.TRUE
        for c in node[1]:
            result = min(result, _eval_partial(c, signs))
            if result is Tri.FALSE:
                return result
        return result
    if kind == "or":
        result = Tri.FALSE
        for c in node[1]:
            result = max(result, _eval_partial(c, signs))
            if result is Tri.TRUE:
                return result
        return result
    inner = _eval_partial(node[1], signs)
    if inner is Tri.TRUE:
        return Tri.FALSE
    if inner is Tri.FALSE:
        return Tri.TRUE
    return Tri.UNKNOWN


MAX_POLYNOMIAL_SET = 14


def satisfying_sign_conditions(
    f: Formula,
    polys: Sequence[Polynomial],
    max_set_size: int = MAX_POLYNOMIAL_SET,
) -> tuple[SignCondition, ...]:
    """All sign conditions on the polynomial set that force the formula
    true, in lexicographic order of the sign vectors (-1 < 0 < +1).

    Every atom polynomial of f must be a member of the set (canonical
    identity).  The enumeration walks the 3^s assignment tree but
    prunes any subtree on which the formula is already decided.
    """
    ps = tuple(polys)
    if len(set(ps)) != len(ps):
        raise ValueError("polynomial set has duplicates")
    if len(ps) > max_set_size:
        raise ValueError(
            f"polynomial set has {len(ps)} members, above the hard cap "
            f"{max_set_size}; the 3^s enumeration would not be desk-scale"
        )
    n = len(ps)
    # assign frequently-mentioned polynomials first so undecidable
    # subtrees are pruned high up; the output order is unaffected
    counts = [0] * n
    pos_of = {p: i for i, p in enumerate(ps)}
    for atom in iter_atoms(f):
        if atom.poly not in pos_of:
            raise ValueError(f"atom polynomial {atom.poly} is not in the given set")
        counts[pos_of[atom.poly]] += 1
    order = sorted(range(n), key=lambda i: (-counts[i], i))
    index = {ps[orig]: slot for slot, orig in enumerate(order)}
    root = _compile(f, index)
    out: list[tuple[int, ...]] = []
    signs: list[int | None] = [None] * n
    slot_of = [0] * n
    for slot, orig in enumerate(order):
        slot_of[orig] = slot

    def emit_all(prefix_len: int) -> None:
        fixed = signs[:prefix_len]
        for rest in itertools.product(SIGNS, repeat=n - prefix_len):
            slots = fixed + list(rest)
            out.append(tuple(slots[slot_of[orig]] for orig in range(n)))

    def descend(i: int) -> None:
        state = _eval_partial(root, signs)
        if state is Tri.TRUE:
            emit_all(i)
            return
        if state is Tri.FALSE or i == n:
            return
        for s in SIGNS:
            signs[i] = s
            descend(i + 1)
        signs[i] = None

    descend(0)
    out.sort()
    return tuple(SignCondition(ps, t) for t in out)


# ---------------------------------------------------------------------------
# band formulas


def _threshold_names(values: Iterable) -> list[str]:
    names = sorted(
        {v.name for v in values if isinstance(v, SymbolicThreshold)},
        key=lambda n: (int(n.rsplit("_", 1)[1]), n.startswith("__nu")),
    )
    return names


def sign_band_formula(
    sigma: SignCondition,
    c,
    d,
    extended_vars: Sequence[str] | None = None,
) -> Formula:
    """Closed band conjunction for one sign condition.

    Numeric thresholds require 0 < d < c.  Symbolic thresholds extend
    the variable tuple with their reserved names (__mu_j, __nu_j); pass
    ``extended_vars`` to pin the shared tuple when combining several
    band formulas.
    """
    symbolic = isinstance(c, SymbolicThreshold) or isinstance(d, SymbolicThreshold)
    if not symbolic:
        c = Fraction(c)
        d = Fraction(d)
        if not 0 < d < c:
            raise ValueError(f"thresholds must satisfy 0 < d < c, got d={d}, c={c}")

    base_vars = sigma.polys[0].vars if sigma.polys else ()
    if extended_vars is None:
        extra = _threshold_names((c, d)) if symbolic else []
        extended_vars = tuple(base_vars) + tuple(n for n in extra if n not in base_vars)
    vs = tuple(extended_vars)

    def shift(p: Polynomial, threshold, sign: int) -> Polynomial:
        # polynomial p - sign*threshold over the (possibly extended) tuple
        q = p.rename(vs, {}) if p.vars != vs else p
        if isinstance(threshold, SymbolicThreshold):
            t = Polynomial.variable(vs, threshold.name)
        else:
            t = Polynomial.constant(vs, threshold)
        return q - t if sign > 0 else q + t

    atoms: list[Formula] = []
    for p, s in zip(sigma.polys, sigma.signs):
        if s == 0:
            atoms.append(Atom(shift(p, d, -1), Rel.GE))  # P + d >= 0
            atoms.append(Atom(shift(p, d, +1), Rel.LE))  # P - d <= 0
        elif s == 1:
            atoms.append(Atom(shift(p, c, +1), Rel.GE))  # P - c >= 0
        else:
            atoms.append(Atom(shift(p, c, -1), Rel.LE))  # P + c <= 0
    return And(atoms)


def closed_relaxation(
    f: Formula,
    polys: Sequence[Polynomial],
    ladder: ThresholdLadder | None = None,
    symbolic: bool = False,
    max_set_size: int = MAX_POLYNOMIAL_SET,
) -> Formula:
    """The closed formula: disjunction over all forcing sign conditions
    of their band conjunctions, thresholds graded by level.

    In numeric mode the ladder must cover levels 0..len(polys).  The
    empty disjunction is the formula FALSE.
    """
    ps = tuple(polys)
    sigmas = satisfying_sign_conditions(f, ps, max_set_size=max_set_size)
    if symbolic:
        names: list[str] = []
        for sig in sigmas:
            lv = sig.level
            for kind, needed in (("mu", any(s != 0 for s in sig.signs)),
                                 ("nu", any(s == 0 for s in sig.signs))):
                if needed:
                    nm = f"__{kind}_{lv}"
                    if nm not in names:
                        names.append(nm)
        names.sort(key=lambda n: (int(n.rsplit("_", 1)[1]), n.startswith("__nu")))
        base = ps[0].vars if ps else ()
        vs = tuple(base) + tuple(n for n in names if n not in base)
        return Or(
            sign_band_formula(
                sig,
                SymbolicThreshold("mu", sig.level),
                SymbolicThreshold("nu", sig.level),
                extended_vars=vs,
            )
            for sig in sigmas
        )
    if ladder is None:
        ladder = ThresholdLadder(len(ps))
    if ladder.s < len(ps):
        raise ValueError(
            f"ladder covers levels 0..{ladder.s} but the set needs 0..{len(ps)}"
        )
    return Or(
        sign_band_formula(sig, ladder.mu(sig.level), ladder.nu(sig.level))
        for sig in sigmas
    )


# ---------------------------------------------------------------------------
# fast membership in the relaxed set


_PRODUCT_CAP = 4096


class BandMembership:
    """Box/point predicate for the realization of a closed relaxation.

    Evaluation agrees exactly with ``eval_box`` / ``eval_point`` on the
    formula built by ``closed_relaxation`` with the same inputs; the
    sign-condition set is consulted through hash lookups instead of a
    per-disjunct walk, and band truths against the whole threshold
    ladder reduce to bisection because the ladder is monotone in the
    level.
    """

    memo_intervals = True

    def __init__(self, polys: Sequence[Polynomial], sigmas: Iterable[SignCondition],
                 ladder: ThresholdLadder):
        self.polys = tuple(polys)
        self.vars = self.polys[0].vars if self.polys else ()
        self.ladder = ladder
        by_level: dict[int, set[tuple[int, ...]]] = {}
        for sig in sigmas:
            if sig.polys != self.polys:
                raise ValueError("sign condition over a different polynomial set")
            by_level.setdefault(sig.level, set()).add(sig.signs)
        levels = sorted(by_level)
        self.levels = levels
        self.sigma_sets = [frozenset(by_level[lv]) for lv in levels]
        # both threshold lists are ascending because mu_j, nu_j grow with j
        self.mus = [ladder.mu(lv) for lv in levels]
        self.nus = [ladder.nu(lv) for lv in levels]

    def eval_point(self, point) -> bool:
        values = [p.evaluate(point) for p in self.polys]
        for li in range(len(self.levels)):
            mu, nu = self.mus[li], self.nus[li]
            candidate: list[int] = []
            for v in values:
                if v >= mu:
                    candidate.append(1)
                elif v <= -mu:
                    candidate.append(-1)
                elif -nu <= v <= nu:
                    candidate.append(0)
                else:
                    break
            else:
                if tuple(candidate) in self.sigma_sets[li]:
                    return True
        return False

    def eval_box(self, box: Box, memo: dict | None = None) -> Tri:
        """Three-valued membership over a box.

        For each polynomial the level indices where a band holds (or
        cannot be refuted) form a prefix or suffix of the ladder, found
        by bisection; each level then costs a few integer comparisons
        plus hash lookups into its sign-condition set.
        """
        nlevels = len(self.levels)
        if not nlevels:
            return Tri.FALSE
        mus, nus = self.mus, self.nus
        t_plus = []
        p_plus = []
        t_minus = []
        p_minus = []
        t_zero = []
        p_zero = []
        for p in self.polys:
            iv = None if memo is None else memo.get(p)
            if iv is None:
                iv = p.interval(box.intervals)
                if memo is not None:
                    memo[p] = iv
            lo, hi = iv
            t_plus.append(bisect.bisect_right(mus, lo))
            p_plus.append(bisect.bisect_right(mus, hi))
            t_minus.append(bisect.bisect_right(mus, -hi))
            p_minus.append(bisect.bisect_right(mus, -lo))
            a0 = hi if hi >= -lo else -lo
            b0 = lo if lo >= -hi else -hi
            t_zero.append(bisect.bisect_left(nus, a0))
            p_zero.append(bisect.bisect_left(nus, b0))
        npolys = len(self.polys)
        result = Tri.FALSE
        for li in range(nlevels):
            sigmas = self.sigma_sets[li]
            definite: list[int] = []
            possible: list[tuple[int, ...]] = []
            feasible = True
            complete = True
            for j in range(npolys):
                if li < t_plus[j]:
                    definite.append(1)
                elif li < t_minus[j]:
                    definite.append(-1)
                elif li >= t_zero[j]:
                    definite.append(0)
                else:
                    complete = False
                maybe = []
                if li < p_plus[j]:
                    maybe.append(1)
                if li < p_minus[j]:
                    maybe.append(-1)
                if li >= p_zero[j]:
                    maybe.append(0)
                if not maybe:
                    feasible = False
                    break
                possible.append(tuple(maybe))
            if not feasible:
                continue
            if complete and tuple(definite) in sigmas:
                return Tri.TRUE
            size = 1
            for maybe in possible:
                size *= len(maybe)
                if size > _PRODUCT_CAP:
                    break
            if size <= _PRODUCT_CAP and size <= len(sigmas):
                hit = any(t in sigmas for t in itertools.product(*possible))
            else:
                hit = any(
                    all(s in maybe for s, maybe in zip(t, possible))
                    for t in sigmas
                )
            if hit:
                result = Tri.UNKNOWN
        return result


def band_membership(
    f: Formula,
    polys: Sequence[Polynomial],
    ladder: ThresholdLadder | None = None,
    max_set_size: int = MAX_POLYNOMIAL_SET,
) -> BandMembership:
    """Membership evaluator for the closed relaxation of f."""
    ps = tuple(polys)
    if ladder is None:
        ladder = ThresholdLadder(len(ps))
    sigmas = satisfying_sign_conditions(f, ps, max_set_size=max_set_size)
    return BandMembership(ps, sigmas, ladder)
