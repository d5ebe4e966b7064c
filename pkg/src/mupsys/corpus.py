"""The bundled differential-testing corpus.

``corpus.txt`` holds one tab-separated entry per line::

    expr    args    expected    max_steps

``expected`` is written by the reference evaluator (``undefined`` when it
runs out of fuel) and must never be edited by hand; regenerate with
``mupsys corpus --write``.  ``max_steps`` is the engine budget for the entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .recfun import ADD, MONUS, MULT, PRED, Value, evaluate, parse

ORACLE_FUEL = 1_000_000
UNDEFINED = "undefined"

# (expression, args, engine step budget)
ENTRIES: list[tuple[str, tuple[int, ...], int]] = [
    ("Z[2]", (3, 5), 100),
    ("Z[1]", (0,), 100),
    ("Z[3]", (1, 1, 1), 100),
    ("Z[0]", (), 100),
    ("S", (0,), 100),
    ("S", (4,), 100),
    ("S", (10,), 100),
    ("U[3,2]", (2, 7, 1), 100),
    ("U[1,1]", (0,), 100),
    ("U[2,1]", (4, 9), 100),
    ("C(S; U[1,1])", (4,), 1000),
    ("C(U[2,2]; Z[3], U[3,1])", (6, 0, 0), 1000),
    ("C(Z[1]; S)", (9,), 1000),
    ("C(S; S)", (2,), 1000),
    ("C(S; C(S; S))", (0,), 1000),
    (ADD, (2, 3), 10_000),
    (ADD, (5, 0), 10_000),
    (ADD, (0, 4), 10_000),
    (MULT, (3, 4), 10_000),
    (MULT, (0, 3), 10_000),
    (MULT, (4, 0), 10_000),
    (PRED, (0,), 10_000),
    (PRED, (5,), 10_000),
    (MONUS, (5, 2), 10_000),
    (MONUS, (2, 5), 10_000),
    (f"M({MONUS})", (0,), 20_000),
    (f"M({MONUS})", (3,), 20_000),
    ("M(U[2,2])", (7,), 1000),
    ("M(U[2,1])", (0,), 1000),
    ("M(C(S; U[2,2]))", (1,), 2000),
    ("M(U[2,1])", (2,), 2000),
    (f"C({ADD}; S, {PRED})", (3,), 10_000),
]


@dataclass(frozen=True)
class Entry:
    expr: str
    args: tuple[int, ...]
    expected: int | None  # None: undefined
    max_steps: int

    def line(self) -> str:
        exp = UNDEFINED if self.expected is None else str(self.expected)
        return "\t".join([self.expr, ",".join(map(str, self.args)), exp, str(self.max_steps)])


def oracle_value(expr: str, args) -> int | None:
    res = evaluate(parse(expr), list(args), ORACLE_FUEL)
    return res.k if isinstance(res, Value) else None


def generate() -> list[Entry]:
    return [Entry(e, a, oracle_value(e, a), n) for e, a, n in ENTRIES]


def default_path() -> Path:
    return Path(str(resources.files("mupsys") / "corpus.txt"))


def write(path: Path | None = None) -> Path:
    path = path or default_path()
    header = "# expr\targs\texpected\tmax_steps  (generated; expected values come from the evaluator)\n"
    path.write_text(header + "".join(e.line() + "\n" for e in generate()), encoding="utf-8")
    return path


def load(path: Path | None = None) -> list[Entry]:
    path = path or default_path()
    out = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if not raw.strip() or raw.startswith("#"):
            continue
        expr, args, exp, steps = raw.split("\t")
        out.append(
            Entry(
                expr,
                tuple(int(a) for a in args.split(",") if a),
                None if exp == UNDEFINED else int(exp),
                int(steps),
            )
        )
    return out
