"""μ-recursive function expressions: AST, text syntax and a reference evaluator.

Syntax (whitespace is ignored)::

    expr := "Z" ["[" nat "]"] | "S" | "U" "[" nat "," nat "]"
          | "C" "(" expr ";" expr {"," expr} ")"
          | "P" "(" expr "," expr ")"
          | "M" "(" expr ")"

``Z`` alone is the unary zero function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union


class RecSyntaxError(ValueError):
    def __init__(self, column: int, expected: str, found: str):
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"column {column}: expected {expected}, found {found}")


class ArityError(ValueError):
    def __init__(self, path: str, found, required):
        self.path = path
        self.found = found
        self.required = required
        super().__init__(f"at {path or '<root>'}: found {found}, required {required}")


class ArityMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Zero:
    n: int = 1

    def __str__(self):
        return f"Z[{self.n}]"


@dataclass(frozen=True)
class Succ:
    def __str__(self):
        return "S"


@dataclass(frozen=True)
class Proj:
    n: int
    i: int

    def __str__(self):
        return f"U[{self.n},{self.i}]"


@dataclass(frozen=True)
class Comp:
    f: RecExpr
    gs: tuple[RecExpr, ...]

    def __str__(self):
        return f"C({self.f}; {', '.join(str(g) for g in self.gs)})"


@dataclass(frozen=True)
class PrimRec:
    f: RecExpr
    g: RecExpr

    def __str__(self):
        return f"P({self.f}, {self.g})"


@dataclass(frozen=True)
class Min:
    f: RecExpr

    def __str__(self):
        return f"M({self.f})"


RecExpr = Union[Zero, Succ, Proj, Comp, PrimRec, Min]


def arity(e: RecExpr) -> int:
    if isinstance(e, Zero):
        return e.n
    if isinstance(e, Succ):
        return 1
    if isinstance(e, Proj):
        return e.n
    if isinstance(e, Comp):
        return arity(e.gs[0])
    if isinstance(e, PrimRec):
        return arity(e.f) + 1
    if isinstance(e, Min):
        return arity(e.f) - 1
    raise TypeError(f"not a RecExpr: {e!r}")


def check(e: RecExpr, path: str = "") -> None:
    """Raise :class:`ArityError` for the first ill-formed node."""
    if isinstance(e, Zero):
        if e.n < 0:
            raise ArityError(path, e.n, ">= 0")
    elif isinstance(e, Proj):
        if e.n < 1 or not 1 <= e.i <= e.n:
            raise ArityError(path, f"U[{e.n},{e.i}]", f"1 <= i <= n")
    elif isinstance(e, Comp):
        check(e.f, path + "f")
        if not e.gs:
            raise ArityError(path, 0, ">= 1 inner function")
        for k, g in enumerate(e.gs, 1):
            check(g, f"{path}g{k}")
        if arity(e.f) != len(e.gs):
            raise ArityError(path + "f", arity(e.f), len(e.gs))
        a0 = arity(e.gs[0])
        for k, g in enumerate(e.gs, 1):
            if arity(g) != a0:
                raise ArityError(f"{path}g{k}", arity(g), a0)
    elif isinstance(e, PrimRec):
        check(e.f, path + "f")
        check(e.g, path + "g")
        if arity(e.g) != arity(e.f) + 2:
            raise ArityError(path + "g", arity(e.g), arity(e.f) + 2)
    elif isinstance(e, Min):
        check(e.f, path + "f")
        if arity(e.f) < 2:
            raise ArityError(path + "f", arity(e.f), ">= 2")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, expected: str):
        found = repr(self.peek()) if self.peek() else "end of input"
        raise RecSyntaxError(self.pos + 1, expected, found)

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(repr(ch))
        self.pos += 1

    def nat(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("a natural number")
        return int(self.text[start:self.pos])

    def expr(self) -> RecExpr:
        c = self.peek()
        if c == "Z":
            self.pos += 1
            if self.peek() == "[":
                self.pos += 1
                n = self.nat()
                self.expect("]")
                return Zero(n)
            return Zero(1)
        if c == "S":
            self.pos += 1
            return Succ()
        if c == "U":
            self.pos += 1
            self.expect("[")
            n = self.nat()
            self.expect(",")
            i = self.nat()
            self.expect("]")
            return Proj(n, i)
        if c == "C":
            self.pos += 1
            self.expect("(")
            f = self.expr()
            self.expect(";")
            gs = [self.expr()]
            while self.peek() == ",":
                self.pos += 1
                gs.append(self.expr())
            self.expect(")")
            return Comp(f, tuple(gs))
        if c == "P":
            self.pos += 1
            self.expect("(")
            f = self.expr()
            self.expect(",")
            g = self.expr()
            self.expect(")")
            return PrimRec(f, g)
        if c == "M":
            self.pos += 1
            self.expect("(")
            f = self.expr()
            self.expect(")")
            return Min(f)
        self.fail("one of Z S U C P M")


def parse(text: str) -> RecExpr:
    p = _Parser(text)
    e = p.expr()
    if p.peek():
        p.fail("end of input")
    check(e)
    return e


# --- reference evaluator -----------------------------------------------------


@dataclass(frozen=True)
class Value:
    k: int


@dataclass(frozen=True)
class Diverged:
    fuel_spent: int


EvalResult = Union[Value, Diverged]


class _OutOfFuel(Exception):
    pass


class _Fuel:
    __slots__ = ("left",)

    def __init__(self, n):
        self.left = n

    def tick(self):
        if self.left <= 0:
            raise _OutOfFuel
        self.left -= 1


def _ev(e: RecExpr, xs: Sequence[int], fuel: _Fuel) -> int:
    fuel.tick()
    if isinstance(e, Zero):
        return 0
    if isinstance(e, Succ):
        return xs[0] + 1
    if isinstance(e, Proj):
        return xs[e.i - 1]
    if isinstance(e, Comp):
        return _ev(e.f, [_ev(g, xs, fuel) for g in e.gs], fuel)
    if isinstance(e, PrimRec):
        *x, y = xs
        h = _ev(e.f, x, fuel)
        for m in range(y):
            h = _ev(e.g, [*x, m, h], fuel)
        return h
    if isinstance(e, Min):
        y = 0
        while True:
            fuel.tick()  # one probe
            if _ev(e.f, [*xs, y], fuel) == 0:
                return y
            y += 1
    raise TypeError(f"not a RecExpr: {e!r}")


def evaluate(e: RecExpr, args: Sequence[int], fuel: int = 100_000) -> EvalResult:
    """Evaluate ``e`` on ``args``; every node visit and every minimalization
    probe costs one unit of fuel."""
    if len(args) != arity(e):
        raise ArityMismatch(f"{e} takes {arity(e)} arguments, got {len(args)}")
    if any(not isinstance(a, int) or a < 0 for a in args):
        raise ValueError("arguments must be natural numbers")
    if fuel < 1:
        raise ValueError("fuel must be >= 1")
    f = _Fuel(fuel)
    try:
        return Value(_ev(e, list(args), f))
    except _OutOfFuel:
        return Diverged(fuel)


# ``eval`` shadows the builtin only inside this module's namespace
eval = evaluate  # noqa: A001


# A few standard definitions, written in the DSL.
ADD = "P(U[1,1], C(S; U[3,3]))"
MULT = f"P(Z[1], C({ADD}; U[3,1], U[3,3]))"
PRED = "P(Z[0], U[2,1])"
MONUS = f"P(U[1,1], C({PRED}; U[3,3]))"
