"""Command-line front end.

Exit codes: 0 ok, 2 parse/arity error, 3 step limit, 4 oracle mismatch,
5 branch limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .compiler import DEFAULT_FUEL, compile
from .engine import (
    DEFAULT_MAX_STEPS,
    BranchLimitExceeded,
    Halted,
    SeededRandom,
    explore,
    run,
)
from .recfun import ArityError, ArityMismatch, RecSyntaxError, Value, evaluate, parse

EXIT_OK, EXIT_PARSE, EXIT_STEP_LIMIT, EXIT_MISMATCH, EXIT_BRANCH_LIMIT = 0, 2, 3, 4, 5


class _Fail(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


def _parse_args_list(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise _Fail(EXIT_PARSE, f"error: --args must be comma-separated naturals, got {text!r}")
    if any(v < 0 for v in vals):
        raise _Fail(EXIT_PARSE, "error: arguments must be natural numbers")
    return vals


def _load(expr: str, args_text: str):
    try:
        e = parse(expr)
    except RecSyntaxError as err:
        caret = " " * (err.column - 1) + "^"
        raise _Fail(EXIT_PARSE, f"SyntaxError at column {err.column}: expected {err.expected}, found {err.found}\n  {expr}\n  {caret}")
    except ArityError as err:
        raise _Fail(EXIT_PARSE, f"ArityError: {err}")
    args = _parse_args_list(args_text)
    try:
        unit = compile(e, args)
    except ArityMismatch as err:
        raise _Fail(EXIT_PARSE, f"ArityError: {err}")
    return e, args, unit


def _emit(lines, out: str | None):
    text = "".join(line + "\n" for line in lines)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_compile(ns) -> int:
    _, _, unit = _load(ns.expr, ns.args)
    _emit([unit.system.dumps()], ns.out)
    sidecar = ns.sidecar or (ns.out + ".inputs.json" if ns.out else None)
    if sidecar:
        Path(sidecar).write_text(_dump(unit.sidecar()) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_run(ns) -> int:
    _, _, unit = _load(ns.expr, ns.args)
    if ns.mode == "exhaustive":
        try:
            branches = explore(unit.system, ns.max_branches, ns.max_steps)
        except BranchLimitExceeded as err:
            raise _Fail(EXIT_BRANCH_LIMIT, f"BranchLimitExceeded: {err}")
        if not all(isinstance(t.outcome, Halted) for t in branches):
            _emit([_dump({"outcome": "step_limit"}) if ns.format == "json" else "step_limit"], ns.out)
            return EXIT_STEP_LIMIT
        values = sorted({t.outcome.output for t in branches})
        if len(values) != 1:
            _emit([_dump({"outcome": "nonconfluent", "values": values})], ns.out)
            return EXIT_MISMATCH
        report = {"value": values[0], "steps": max(t.steps_taken for t in branches), "branches": len(branches)}
    else:
        trace = run(unit.system, SeededRandom(ns.seed), ns.max_steps, record=False)
        if not isinstance(trace.outcome, Halted):
            _emit([_dump({"outcome": "step_limit"}) if ns.format == "json" else "step_limit"], ns.out)
            return EXIT_STEP_LIMIT
        report = {"value": trace.outcome.output, "steps": trace.steps_taken, "seed": ns.seed}
    _emit([_dump(report) if ns.format == "json" else str(report["value"])], ns.out)
    return EXIT_OK


def _check_one(expr: str, args: list[int], expected, seeds: int, max_steps: int):
    """Returns (agreed count, first mismatch or None)."""
    unit = compile(parse(expr), args)
    agreed = 0
    for seed in range(seeds):
        trace = run(unit.system, SeededRandom(seed), max_steps)
        got = trace.outcome.output if isinstance(trace.outcome, Halted) else None
        if got == expected:
            agreed += 1
        else:
            return agreed, (seed, got, trace)
    return agreed, None


def _describe(v) -> str:
    return "undefined" if v is None else f"value {v}"


def cmd_check(ns) -> int:
    if ns.corpus is not None:
        path = Path(ns.corpus) if ns.corpus else None
        jobs = []
        for entry in corpus_mod.load(path):
            oracle = corpus_mod.oracle_value(entry.expr, entry.args)
            if oracle != entry.expected:
                raise _Fail(EXIT_MISMATCH, f"corpus entry {entry.line()!r} disagrees with the evaluator ({oracle})")
            jobs.append((entry.expr, list(entry.args), entry.expected, entry.max_steps))
    else:
        e, args, _ = _load(ns.expr, ns.args)
        res = evaluate(e, args, ns.fuel)
        jobs = [(ns.expr, args, res.k if isinstance(res, Value) else None, ns.max_steps)]

    lines = []
    for expr, args, expected, max_steps in jobs:
        agreed, bad = _check_one(expr, args, expected, ns.seeds, max_steps)
        if bad is not None:
            seed, got, trace = bad
            repro = {"agree": False, "expr": expr, "args": args, "seed": seed,
                     "expected": expected, "got": got}
            out = [_dump(repro)] + [_dump(r) for r in trace.records()]
            _emit(lines + out, None)
            return EXIT_MISMATCH
        if ns.format == "json":
            lines.append(_dump({"agree": True, "expr": expr, "args": args,
                                "value": expected, "agreed": agreed, "seeds": ns.seeds}))
        else:
            lines.append(f"agree: {_describe(expected)}, {agreed}/{ns.seeds}" +
                         (f"  [{expr} @ {','.join(map(str, args))}]" if ns.corpus is not None else ""))
    _emit(lines, None)
    return EXIT_OK


def cmd_trace(ns) -> int:
    _, _, unit = _load(ns.expr, ns.args)
    if ns.mode == "exhaustive":
        try:
            branches = explore(unit.system, ns.max_branches, ns.max_steps)
        except BranchLimitExceeded as err:
            raise _Fail(EXIT_BRANCH_LIMIT, f"BranchLimitExceeded: {err}")
        lines = [_dump({"branch": b, **rec}) for b, t in enumerate(branches) for rec in t.records()]
        _emit(lines, ns.out)
        return EXIT_OK if all(isinstance(t.outcome, Halted) for t in branches) else EXIT_STEP_LIMIT
    trace = run(unit.system, SeededRandom(ns.seed), ns.max_steps)
    _emit([_dump(r) for r in trace.records()], ns.out)
    return EXIT_OK if isinstance(trace.outcome, Halted) else EXIT_STEP_LIMIT


def cmd_corpus(ns) -> int:
    if ns.write:
        path = corpus_mod.write(Path(ns.out) if ns.out else None)
        print(path)
    else:
        _emit([e.line() for e in corpus_mod.generate()], ns.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mupsys", description="Compile μ-recursive functions to P systems and run them.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeded=True):
        sp.add_argument("-e", "--expr", required=True, help="expression, e.g. 'P(U[1,1], C(S; U[3,3]))'")
        sp.add_argument("-a", "--args", default="", help="comma-separated naturals")
        sp.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        sp.add_argument("--format", choices=["json", "plain"], default="json")
        sp.add_argument("--out")
        if seeded:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--mode", choices=["random", "exhaustive"], default="random")
            sp.add_argument("--max-branches", type=int, default=1000)

    sp = sub.add_parser("compile", help="emit the psys-v1 JSON of the compiled system")
    common(sp, seeded=False)
    sp.add_argument("--sidecar", help="write the argument-index -> symbol map here")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("run", help="compile and run")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="compare seeded runs with the reference evaluator")
    sp.add_argument("-e", "--expr")
    sp.add_argument("-a", "--args", default="")
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    sp.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    sp.add_argument("--format", choices=["json", "plain"], default="plain")
    sp.add_argument("--corpus", nargs="?", const="", default=None,
                    help="check every corpus entry (bundled corpus when no path is given)")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("trace", help="emit the JSON-lines execution trace")
    common(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("corpus", help="print or rewrite the corpus with evaluator-produced values")
    sp.add_argument("--write", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "check" and ns.corpus is None and not ns.expr:
        parser.error("check needs --expr or --corpus")
    if getattr(ns, "max_steps", 1) < 1:
        parser.error("--max-steps must be >= 1")
    if getattr(ns, "max_branches", 1) < 1:
        parser.error("--max-branches must be >= 1")
    try:
        return ns.func(ns)
    except _Fail as f:
        if f.message:
            print(f.message, file=sys.stderr)
        return f.code


if __name__ == "__main__":
    sys.exit(main())
