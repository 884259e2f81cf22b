"""Exact multivariate polynomials over the rationals.

A polynomial is stored in canonical form: an ordered tuple of variable
names plus a map from exponent vectors to nonzero Fraction coefficients.
Two polynomials built from the same mathematical expression (in any
association order) compare equal and hash equal, which is what lets
formula code treat polynomials as set elements.

Interval evaluation is exact: endpoints are rationals and monomial
powers use the even/odd power rule, so x^2 over [-1, 1] is [0, 1] and
no outward rounding is ever needed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Exponents = tuple[int, ...]
Interval = tuple[Fraction, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


class Polynomial:
    """Immutable multivariate polynomial with Fraction coefficients."""

    __slots__ = ("vars", "terms", "_hash", "_compiled")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exponents, Fraction]):
        vs = tuple(vars)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable in {vs}")
        cleaned: dict[Exponents, Fraction] = {}
        for exps, coeff in terms.items():
            e = tuple(int(x) for x in exps)
            if len(e) != len(vs):
                raise ValueError(f"exponent vector {e} does not match variables {vs}")
            if any(x < 0 for x in e):
                raise ValueError(f"negative exponent in {e}")
            c = _as_fraction(coeff)
            if c != 0:
                cleaned[e] = c
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_compiled", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str]) -> Polynomial:
        return cls(vars, {})

    @classmethod
    def constant(cls, vars: Sequence[str], value) -> Polynomial:
        return cls(vars, {(0,) * len(tuple(vars)): _as_fraction(value)})

    @classmethod
    def variable(cls, vars: Sequence[str], name: str) -> Polynomial:
        vs = tuple(vars)
        try:
            i = vs.index(name)
        except ValueError:
            raise ValueError(f"unknown variable {name!r} among {vs}") from None
        exps = tuple(1 if j == i else 0 for j in range(len(vs)))
        return cls(vs, {exps: _ONE})

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> Fraction | None:
        """The value if this polynomial is constant, else None."""
        if not self.terms:
            return _ZERO
        if len(self.terms) == 1:
            (exps, coeff), = self.terms.items()
            if not any(exps):
                return coeff
        return None

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def degree_in(self, names: Iterable[str]) -> int:
        """Max combined exponent of the given variables over all terms."""
        idx = [self.vars.index(n) for n in names]
        if not self.terms or not idx:
            return 0
        return max(sum(e[i] for i in idx) for e in self.terms)

    def mentioned_vars(self) -> frozenset[str]:
        used: set[str] = set()
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    used.add(self.vars[i])
        return frozenset(used)

    # -- equality ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.vars, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    # -- arithmetic ----------------------------------------------------

    def _check_compatible(self, other: Polynomial) -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    def __add__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, _ZERO) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial(self.vars, terms)

    def __neg__(self) -> Polynomial:
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        terms: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, _ZERO) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        return Polynomial(self.vars, terms)

    def scale(self, value) -> Polynomial:
        c = _as_fraction(value)
        if c == 0:
            return Polynomial.zero(self.vars)
        return Polynomial(self.vars, {e: c * k for e, k in self.terms.items()})

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- evaluation ----------------------------------------------------

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != len(self.vars):
            raise ValueError(
                f"point has dimension {len(point)}, expected {len(self.vars)}"
            )
        pt = [_as_fraction(x) for x in point]
        total = _ZERO
        for exps, coeff in self.terms.items():
            value = coeff
            for x, e in zip(pt, exps):
                if e:
                    value *= x**e
            total += value
        return total

    def interval(self, box: Sequence[Interval]) -> Interval:
        """Exact interval enclosure of the polynomial over a box.

        Per-monomial: each variable interval is raised to its exponent
        with the even/odd rule, the factors are interval-multiplied,
        scaled by the coefficient, and the terms are summed.
        """
        if len(box) != len(self.vars):
            raise ValueError(
                f"box has dimension {len(box)}, expected {len(self.vars)}"
            )
        compiled = self._compiled
        if compiled is None:
            compiled = tuple(
                (coeff, tuple((i, e) for i, e in enumerate(exps) if e))
                for exps, coeff in self.terms.items()
            )
            object.__setattr__(self, "_compiled", compiled)
        lo_total = _ZERO
        hi_total = _ZERO
        for coeff, powers in compiled:
            lo = hi = coeff
            for i, e in powers:
                a, b = box[i]
                if e == 1:
                    pl, ph = a, b
                elif e & 1:
                    pl, ph = a**e, b**e
                elif a >= 0:
                    pl, ph = a**e, b**e
                elif b <= 0:
                    pl, ph = b**e, a**e
                else:
                    pl, ph = _ZERO, max(a**e, b**e)
                if lo >= 0 and pl >= 0:
                    lo, hi = lo * pl, hi * ph
                else:
                    c1, c2, c3, c4 = lo * pl, lo * ph, hi * pl, hi * ph
                    lo = min(c1, c2, c3, c4)
                    hi = max(c1, c2, c3, c4)
            lo_total += lo
            hi_total += hi
        return (lo_total, hi_total)

    # -- structural transforms ------------------------------------------

    def rename(self, new_vars: Sequence[str], mapping: Mapping[str, str]) -> Polynomial:
        """Re-express over ``new_vars``, sending each old variable through
        ``mapping`` (identity for names not listed)."""
        nv = tuple(new_vars)
        pos = {name: i for i, name in enumerate(nv)}
        targets = []
        for name in self.vars:
            t = mapping.get(name, name)
            if t not in pos:
                raise ValueError(f"target variable {t!r} not among {nv}")
            targets.append(pos[t])
        terms: dict[Exponents, Fraction] = {}
        for exps, coeff in self.terms.items():
            e = [0] * len(nv)
            for i, x in enumerate(exps):
                if x:
                    e[targets[i]] += x
            key = tuple(e)
            s = terms.get(key, _ZERO) + coeff
            if s:
                terms[key] = s
            else:
                terms.pop(key, None)
        return Polynomial(nv, terms)

    def clear_by(self, scale: Polynomial, substituted: Mapping[str, str]) -> Polynomial:
        """Homogenizing substitution: replace each substituted variable z
        by x/scale and clear denominators.

        Returns scale^D * P(..., x/scale, ...) where D is the combined
        degree of the substituted variables, expressed over scale.vars.
        Variables of P outside ``substituted`` must already be names in
        scale.vars and pass through unchanged.  Sign-equivalent to P at
        z = x/scale wherever scale > 0.
        """
        nv = scale.vars
        pos = {name: i for i, name in enumerate(nv)}
        deg = self.degree_in([n for n in self.vars if n in substituted])
        sub_idx: dict[int, int] = {}
        passthrough_idx: dict[int, int] = {}
        for i, name in enumerate(self.vars):
            if name in substituted:
                t = substituted[name]
                if t not in pos:
                    raise ValueError(f"target variable {t!r} not among {nv}")
                sub_idx[i] = pos[t]
            else:
                if name not in pos:
                    raise ValueError(f"variable {name!r} not among {nv}")
                passthrough_idx[i] = pos[name]
        scale_pow: dict[int, Polynomial] = {0: Polynomial.constant(nv, 1)}
        result = Polynomial.zero(nv)
        for exps, coeff in self.terms.items():
            e = [0] * len(nv)
            z_degree = 0
            for i, x in enumerate(exps):
                if not x:
                    continue
                if i in sub_idx:
                    e[sub_idx[i]] += x
                    z_degree += x
                else:
                    e[passthrough_idx[i]] += x
            k = deg - z_degree
            if k not in scale_pow:
                scale_pow[k] = scale**k
            mono = Polynomial(nv, {tuple(e): coeff})
            result = result + mono * scale_pow[k]
        return result

    # -- printing --------------------------------------------------------

    def sort_key(self) -> tuple:
        """Deterministic ordering key for polynomial sets."""
        items = sorted(self.terms.items(), key=lambda kv: _term_order(kv[0]))
        return (self.vars, tuple((e, c) for e, c in items))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts: list[str] = []
        for exps, coeff in sorted(self.terms.items(), key=lambda kv: _term_order(kv[0])):
            factors = [
                f"{v}^{e}" if e > 1 else v
                for v, e in zip(self.vars, exps)
                if e
            ]
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not parts:
                parts.append(body if coeff > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def _term_order(exps: Exponents) -> tuple:
    # graded order, highest degree first, then lexicographic on exponents
    return (-sum(exps), tuple(-x for x in exps))


def _interval_pow(a: Fraction, b: Fraction, e: int) -> Interval:
    """[a, b]^e with the tight even/odd rule (a <= b)."""
    if e == 1:
        return (a, b)
    if e % 2 == 1:
        return (a**e, b**e)
    if a >= 0:
        return (a**e, b**e)
    if b <= 0:
        return (b**e, a**e)
    return (_ZERO, max(a**e, b**e))
