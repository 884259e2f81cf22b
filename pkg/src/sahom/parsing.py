"""Parser and canonical printer for the formula text format.

Grammar (UTF-8):

    formula  := disj
    disj     := conj ('or' conj)*
    conj     := unary ('and' unary)*
    unary    := 'not' unary | 'exists' IDENT+ '.' unary | primary
    primary  := '(' formula ')' | 'true' | 'false' | atom
    atom     := poly REL poly          REL in { <= >= = < > }
    poly     := term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := '-' factor | base ('^' NAT)?
    base     := '(' poly ')' | IDENT | NUMBER

Numbers are non-negative integers or rationals p/q; decimal literals are
rejected.  Atoms with a nonzero right side are normalized by
subtraction.  A formula file carries a first line `vars: x1 x2 ...`.

The printer emits a canonical text (atoms as `P rel 0` with canonical
polynomial spelling, every non-atom operand parenthesized) and
parse(print(f)) returns a structurally identical formula.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from .formulas import FALSE, TRUE, And, Atom, Exists, Formula, Not, Or, Rel
from .polynomials import Polynomial

_KEYWORDS = {"and", "or", "not", "exists", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<decimal>\d+\.\d*|\.\d+)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|[-+*^()=<>.])
    """,
    re.VERBOSE,
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        column = pos - line_start + 1
        if m.lastgroup == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rfind("\n") + 1
        elif m.lastgroup == "decimal":
            raise FormulaSyntaxError(
                f"non-rational literal {m.group()!r}", line, column
            )
        else:
            tokens.append(_Token(m.lastgroup, m.group(), line, column))
        pos = m.end()
    tokens.append(_Token("end", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vars = tuple(variables)
        for v in self.vars:
            if v in _KEYWORDS:
                raise ValueError(f"variable name {v!r} is a reserved word")

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            self.fail(f"expected {text!r}, found {tok.text!r}")
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise FormulaSyntaxError(message, tok.line, tok.column)

    # formulas ---------------------------------------------------------

    def parse_formula(self) -> Formula:
        f = self.parse_disj()
        if self.peek().kind != "end":
            self.fail(f"trailing input {self.peek().text!r}")
        return f

    def parse_disj(self) -> Formula:
        parts = [self.parse_conj()]
        while self.peek().text == "or":
            self.advance()
            parts.append(self.parse_conj())
        return parts[0] if len(parts) == 1 else Or(parts)

    def parse_conj(self) -> Formula:
        parts = [self.parse_unary()]
        while self.peek().text == "and":
            self.advance()
            parts.append(self.parse_unary())
        return parts[0] if len(parts) == 1 else And(parts)

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "not":
            self.advance()
            return Not(self.parse_unary())
        if tok.text == "exists":
            self.advance()
            names = []
            while self.peek().kind == "ident" and self.peek().text not in _KEYWORDS:
                names.append(self.advance().text)
            if not names:
                self.fail("expected at least one bound variable after 'exists'")
            self.expect(".")
            for n in names:
                if n not in self.vars:
                    self.fail(f"unknown variable {n!r}")
            return Exists(names, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Formula:
        tok = self.peek()
        if tok.text == "(":
            # lookahead decides between a parenthesized formula and a
            # parenthesized polynomial starting an atom
            save = self.pos
            self.advance()
            try:
                inner = self.parse_disj()
                self.expect(")")
            except FormulaSyntaxError:
                self.pos = save
                return self.parse_atom()
            if self.peek().text in ("<", ">", "<=", ">=", "="):
                self.pos = save
                return self.parse_atom()
            return inner
        if tok.text == "true":
            self.advance()
            return TRUE
        if tok.text == "false":
            self.advance()
            return FALSE
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        left = self.parse_poly()
        tok = self.peek()
        if tok.text not in ("<", ">", "<=", ">=", "="):
            self.fail(f"expected a relation, found {tok.text!r}")
        rel = {
            "=": Rel.EQ,
            "<": Rel.LT,
            ">": Rel.GT,
            "<=": Rel.LE,
            ">=": Rel.GE,
        }[self.advance().text]
        right = self.parse_poly()
        return Atom(left - right, rel)

    # polynomials ------------------------------------------------------

    def parse_poly(self) -> Polynomial:
        negate = False
        if self.peek().text == "-":
            self.advance()
            negate = True
        poly = self.parse_term()
        if negate:
            poly = -poly
        while self.peek().text in ("+", "-"):
            op = self.advance().text
            term = self.parse_term()
            poly = poly + term if op == "+" else poly - term
        return poly

    def parse_term(self) -> Polynomial:
        poly = self.parse_factor()
        while self.peek().text == "*":
            self.advance()
            poly = poly * self.parse_factor()
        return poly

    def parse_factor(self) -> Polynomial:
        if self.peek().text == "-":
            self.advance()
            return -self.parse_factor()
        base = self.parse_base()
        if self.peek().text == "^":
            self.advance()
            tok = self.peek()
            if tok.kind != "number" or "/" in tok.text:
                self.fail("exponent must be a non-negative integer")
            self.advance()
            base = base ** int(tok.text)
        return base

    def parse_base(self) -> Polynomial:
        tok = self.peek()
        if tok.text == "(":
            self.advance()
            poly = self.parse_poly()
            self.expect(")")
            return poly
        if tok.kind == "number":
            self.advance()
            return Polynomial.constant(self.vars, Fraction(tok.text))
        if tok.kind == "ident" and tok.text not in _KEYWORDS:
            self.advance()
            if tok.text not in self.vars:
                raise FormulaSyntaxError(
                    f"unknown variable {tok.text!r}", tok.line, tok.column
                )
            return Polynomial.variable(self.vars, tok.text)
        self.fail(f"expected a polynomial, found {tok.text!r}")


def parse_formula(text: str, variables: Sequence[str]) -> Formula:
    """Parse formula text over an ordered variable list."""
    return _Parser(text, variables).parse_formula()


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    parser = _Parser(text, variables)
    poly = parser.parse_poly()
    if parser.peek().kind != "end":
        parser.fail(f"trailing input {parser.peek().text!r}")
    return poly


# ---------------------------------------------------------------------------
# printing


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.poly} {f.rel.value} 0"
    if isinstance(f, And):
        if not f.children:
            return "true"
        return " and ".join(_wrap(c) for c in f.children)
    if isinstance(f, Or):
        if not f.children:
            return "false"
        return " or ".join(_wrap(c) for c in f.children)
    if isinstance(f, Not):
        return f"not {_wrap(f.child)}"
    if isinstance(f, Exists):
        return f"exists {' '.join(f.names)} . {_wrap(f.body)}"
    raise TypeError(f"not a formula node: {f!r}")


def _wrap(f: Formula) -> str:
    if isinstance(f, Atom) or f == TRUE or f == FALSE:
        return format_formula(f)
    return f"({format_formula(f)})"


def format_formula_file(variables: Sequence[str], f: Formula) -> str:
    return f"vars: {' '.join(variables)}\n{format_formula(f)}\n"


def parse_formula_file(content: str) -> tuple[tuple[str, ...], Formula]:
    """Read a formula file: `vars:` header line, then the formula text."""
    stripped = content.lstrip()
    if not stripped.startswith("vars:"):
        raise FormulaSyntaxError("missing 'vars:' header", 1, 1)
    header, _, rest = stripped.partition("\n")
    names = header[len("vars:"):].split()
    if not names:
        raise FormulaSyntaxError("empty variable list in header", 1, 1)
    return tuple(names), parse_formula(rest, names)
