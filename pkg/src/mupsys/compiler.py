"""Compile μ-recursive expressions plus concrete inputs into P systems.

The basic functions compile to the classic two-region systems: the skin holds
``α_i^{x_i}`` and the inner region is the output.

Everything else is assembled from *blocks*.  A block is the sub-system for one
sub-expression instance and owns three regions:

``inp``
    receives the argument objects and one start token ``go`` in a single
    step (or has them pre-seeded).  Its rules are promoted by ``go``, so the
    block is inert until started.
``st``
    receives the block's ``done`` token once started.
``out``
    elementary; accumulates one result object per unit of the value.

All regions of a block share its stage label, and nested blocks get nested
stage labels (``h/g/1``, ``h/f``...).  The parent forwards a block's result
with channel rules placed in the block's ``out`` and ``st`` regions and gated
on the block's stage, so they fire only once the whole block is quiescent,
and then all at once.  That is what turns quiescence into a completion
signal.

Primitive recursion is unrolled into ``y`` copies of the step function, sized
from the concrete input.  Minimalization is a loop: a controller region
re-runs the search function after resetting its stage, and counts non-zero
probes in the output region.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .multiset import Multiset
from .psystem import (
    HERE,
    OUT,
    Compartment,
    EvolutionRule,
    In,
    InvalidSystem,
    PSystem,
    RuleKind,
    To,
    rule,
    validate,
)
from .recfun import (
    ArityMismatch,
    Comp,
    Diverged,
    Min,
    PrimRec,
    Proj,
    RecExpr,
    Succ,
    Value,
    Zero,
    arity,
    check,
    evaluate,
)

DEFAULT_FUEL = 200_000
DIVERGENT_BANK = 8
MAX_COMPARTMENTS = 100_000

ROOT_STAGE = "h"
GO = "go"


class CompileError(ValueError):
    pass


def arg_symbol(k: int) -> str:
    return f"α{k}"


@dataclass
class CompiledUnit:
    system: PSystem
    input_map: dict[int, tuple[str, int]]
    stage_of: dict[str, str]
    output: int

    def sidecar(self) -> dict[str, str]:
        return {str(k): sym for k, (sym, _) in sorted(self.input_map.items())}


@dataclass
class Block:
    stage: str
    inp: int
    st: int
    out: int
    in_syms: list[str]
    go: str
    res: str
    done: str


class _Builder:
    def __init__(self, fuel: int, max_compartments: int):
        self.parent: list[int | None] = []
        self.stage: list[str | None] = []
        self.initial: list[Counter] = []
        self.rules: list[list[EvolutionRule]] = []
        self.edges: set[tuple[int, int]] = set()
        self.alphabet: set[str] = set()
        self.stage_of: dict[str, str] = {}
        self.fuel = fuel
        self.max_compartments = max_compartments

    def new(self, parent: int | None, stage: str | None = None) -> int:
        if len(self.parent) >= self.max_compartments:
            raise CompileError(f"system exceeds {self.max_compartments} compartments")
        self.parent.append(parent)
        self.stage.append(stage)
        self.initial.append(Counter())
        self.rules.append([])
        return len(self.parent)

    def seed(self, label: int, sym: str, n: int = 1):
        if n:
            self.alphabet.add(sym)
            self.initial[label - 1][sym] += n

    def add(self, label: int, r: EvolutionRule):
        self.alphabet.update(r.symbols())
        for _, t in r.rhs:
            if t.kind == "to":
                self.edges.add((min(label, t.label), max(label, t.label)))
        self.rules[label - 1].append(r)

    def value(self, e: RecExpr, args: Sequence[int]) -> int:
        # Values only size the structure of blocks that are never started when
        # the computation diverges, so a stand-in of 0 is harmless there.
        res = evaluate(e, args, self.fuel)
        return res.k if isinstance(res, Value) else 0

    def build(self, output: int) -> PSystem:
        comps = tuple(
            Compartment(
                label=i + 1,
                parent=self.parent[i],
                stage=self.stage[i],
                initial=Multiset(self.initial[i]),
                rules=tuple(self.rules[i]),
            )
            for i in range(len(self.parent))
        )
        return PSystem(frozenset(self.alphabet), comps, frozenset(self.edges), output)


# --- structural dependence -----------------------------------------------------


def value_deps(e: RecExpr) -> set[int]:
    """Argument positions (1-based) the value of ``e`` may depend on."""
    if isinstance(e, Zero):
        return set()
    if isinstance(e, Succ):
        return {1}
    if isinstance(e, Proj):
        return {e.i}
    if isinstance(e, Comp):
        out: set[int] = set()
        for k in value_deps(e.f):
            out |= value_deps(e.gs[k - 1])
        return out
    return set(range(1, arity(e) + 1))


def shape_depends(e: RecExpr, tainted: set[int]) -> bool:
    """Whether the compiled shape of ``e`` changes with the tainted inputs.

    Only unrolled recursion (and the probe bank of a minimalization whose
    search function is itself input-shaped) is sized by input values.
    """
    if not tainted or isinstance(e, (Zero, Succ, Proj)):
        return False
    if isinstance(e, Comp):
        if any(shape_depends(g, tainted) for g in e.gs):
            return True
        inner = {k for k, g in enumerate(e.gs, 1) if value_deps(g) & tainted}
        return shape_depends(e.f, inner)
    if isinstance(e, PrimRec):
        return True
    if isinstance(e, Min):
        return shape_depends(e.f, tainted | {arity(e.f)})
    raise TypeError(e)


# --- blocks --------------------------------------------------------------------


def _block(
    b: _Builder,
    e: RecExpr,
    args: Sequence[int],
    path: str,
    parent: int | None,
    in_syms: list[str] | None = None,
    go: str | None = None,
) -> Block:
    stage = ROOT_STAGE if not path else f"{ROOT_STAGE}/{path}"
    b.stage_of[path] = stage
    n = arity(e)
    if in_syms is None:
        in_syms = [f"{stage}:x{k}" for k in range(1, n + 1)]
    if go is None:
        go = f"{stage}:go"
    res, done = f"{stage}:r", f"{stage}:done"
    sub = (lambda p: f"{path}/{p}") if path else (lambda p: p)

    inp = b.new(parent, stage)
    blk = Block(stage, inp, 0, 0, in_syms, go, res, done)

    if isinstance(e, (Zero, Succ, Proj)):
        blk.st = b.new(inp, stage)
        blk.out = b.new(inp, stage)
        keep = {Succ: 1, Proj: getattr(e, "i", None)}.get(type(e))
        for k, a in enumerate(in_syms, 1):
            if k == keep:
                b.add(inp, rule(a, (res, In(blk.out)), promoter=go))
            else:
                b.add(inp, rule(a, promoter=go))
        if isinstance(e, Succ):
            # the blocker keeps the region non-empty until started, so the
            # one-shot rule adds its object only after the inputs have moved
            blocker = f"{stage}:w"
            b.seed(inp, blocker)
            b.add(inp, rule(f"{go} {blocker}", (done, In(blk.st))))
            b.add(inp, rule(Multiset(), (res, In(blk.out))))
        else:
            b.add(inp, rule(go, (done, In(blk.st))))
        return blk

    if isinstance(e, Comp):
        group = f"{stage}/g"
        gblocks = [
            _block(b, g, args, sub(f"g/{k}"), inp) for k, g in enumerate(e.gs, 1)
        ]
        for j, a in enumerate(in_syms):
            b.add(inp, rule(a, *[(g.in_syms[j], In(g.inp)) for g in gblocks], promoter=go))
        b.add(inp, rule(go, *[(g.go, In(g.inp)) for g in gblocks]))
        vals = [b.value(g, args) for g in e.gs]
        fblk = _block(b, e.f, vals, sub("f"), inp)
        # every inner result is released in the same step, once all are done
        for k, g in enumerate(gblocks):
            b.add(g.out, rule(g.res, (fblk.in_syms[k], To(fblk.inp)), gate=group))
            if k == 0:
                b.add(g.st, rule(g.done, (fblk.go, To(fblk.inp)), gate=group))
            else:
                b.add(g.st, rule(g.done, gate=group))
        blk.st, blk.out, blk.res, blk.done = fblk.st, fblk.out, fblk.res, fblk.done
        return blk

    if isinstance(e, PrimRec):
        *xs, y = args
        fblk = _block(b, e.f, xs, sub("f"), inp)
        for j, a in enumerate(in_syms[:-1]):
            b.add(inp, rule(a, (fblk.in_syms[j], In(fblk.inp)), promoter=go))
        # the recursion depth is fixed by the pipeline length
        b.add(inp, rule(in_syms[-1], promoter=go))
        b.add(inp, rule(go, (fblk.go, In(fblk.inp))))
        h = b.value(e.f, xs)
        prev = fblk
        for i in range(1, y + 1):
            sp = sub(f"s/{i}")
            sstage = f"{ROOT_STAGE}/{sp}"
            syms = [f"{sstage}:#{j}" for j in range(1, len(xs) + 1)]
            syms += [f"{sstage}:@", f"{sstage}:h"]
            gblk = _block(b, e.g, [*xs, i - 1, h], sp, inp, syms, f"{sstage}:go")
            for j, x in enumerate(xs):
                b.seed(gblk.inp, syms[j], x)
            b.seed(gblk.inp, syms[-2], i - 1)
            b.add(prev.out, rule(prev.res, (syms[-1], To(gblk.inp)), gate=prev.stage))
            b.add(prev.st, rule(prev.done, (gblk.go, To(gblk.inp)), gate=prev.stage))
            h = b.value(e.g, [*xs, i - 1, h])
            prev = gblk
        blk.st, blk.out, blk.res, blk.done = prev.st, prev.out, prev.res, prev.done
        return blk

    if isinstance(e, Min):
        return _min_block(b, e, args, path, blk, sub)

    raise TypeError(e)


def _min_block(b: _Builder, e: Min, xs: Sequence[int], path: str, blk: Block, sub) -> Block:
    # Regions: inp = argument store (a_j^{x_j} b^y), the probe sub-system,
    # ctl = controller, out = iteration counter.
    stage, store, k = blk.stage, blk.inp, len(xs)
    ctl = b.new(store, stage)
    blk.out = b.new(store, stage)
    blk.st = b.new(store, stage)
    blk.res = f"{stage}:¶"
    fstage = f"{stage}/f"

    bsym = f"{stage}:b"
    hash_, q = f"{stage}:#", f"{stage}:q"
    oplus = [f"{stage}:⊕{j}" for j in range(1, k + 1)]
    otimes = f"{stage}:⊗"

    if not shape_depends(e.f, {k + 1}):
        # one probe sub-system, re-armed by reset after every non-zero probe
        size, spin = 1, False
        probes = [_block(b, e.f, [*xs, 0], sub("f"), store)]
    else:
        res = evaluate(e, xs, b.fuel)
        if isinstance(res, Value):
            size, spin = res.k + 1, False
        else:
            size, spin = DIVERGENT_BANK, True
        probes = [_block(b, e.f, [*xs, y], sub(f"f/{y}"), store) for y in range(size)]

    def tag(base, y):
        return f"{stage}:{base}" if size == 1 else f"{stage}:{base}{y}"

    gos = [blk.go] + [f"{stage}:go{y}" for y in range(1, size)]

    for y, pb in enumerate(probes):
        g = gos[y]
        for j, a in enumerate(blk.in_syms):
            b.add(store, rule(a, (pb.in_syms[j], In(pb.inp)), (oplus[j], In(ctl)), promoter=g))
        b.add(store, rule(bsym, (pb.in_syms[k], In(pb.inp)), (otimes, In(ctl)), promoter=g))
        b.add(store, rule(g, (pb.go, In(pb.inp))))
        b.add(pb.out, rule(pb.res, (hash_, To(ctl)), gate=pb.stage))
        b.add(pb.st, rule(pb.done, (q, To(ctl)), gate=pb.stage))

    b.seed(ctl, tag("p", 0))
    for y in range(size):
        p, pp = tag("p", y), tag("p′", y)
        # a non-zero probe: count it, grow y by one, start recycling
        b.add(ctl, rule(f"{p} {hash_} {q}", (blk.res, To(blk.out)), (bsym, OUT), (pp, HERE), priority=2))
        b.add(ctl, rule(hash_, promoter=pp, priority=1))
        for j in range(k):
            b.add(ctl, rule(oplus[j], (blk.in_syms[j], OUT), promoter=pp, priority=1))
        b.add(ctl, rule(otimes, (bsym, OUT), promoter=pp, priority=1))
        if y + 1 < size or not spin:
            nxt = (y + 1) % size
            b.add(ctl, rule(pp, (tag("p", nxt), HERE), (gos[nxt], OUT), reset=fstage))
        else:
            omega = f"{stage}:ω"
            b.add(ctl, rule(pp, (omega, HERE), reset=fstage))
            b.add(ctl, rule(omega, (omega, HERE)))
    # a zero probe: the loop is over
    b.add(ctl, rule(q, (blk.done, To(blk.st))))
    return blk


# --- encoders --------------------------------------------------------------------


def _two_region(
    n: int, args: Sequence[int], rules_for, alphabet_extra=()
) -> CompiledUnit:
    syms = [arg_symbol(k) for k in range(1, n + 1)]
    skin = Compartment(
        label=1,
        initial=Multiset(dict(zip(syms, args))),
        rules=tuple(rules_for(syms)),
    )
    inner = Compartment(label=2, parent=1)
    system = PSystem(frozenset(syms) | frozenset(alphabet_extra), (skin, inner), frozenset(), 2)
    return CompiledUnit(
        system,
        {k: (s, x) for k, (s, x) in enumerate(zip(syms, args), 1)},
        {"": "1"},
        2,
    )


def _check_args(args: Sequence[int], n: int):
    if len(args) != n:
        raise ArityMismatch(f"expected {n} arguments, got {len(args)}")
    if any(not isinstance(a, int) or a < 0 for a in args):
        raise ValueError("arguments must be natural numbers")


def encode_zero(n: int, args: Sequence[int]) -> CompiledUnit:
    _check_args(args, n)
    return _two_region(n, args, lambda syms: [rule(s) for s in syms])


def encode_succ(x: int) -> CompiledUnit:
    _check_args([x], 1)

    def rules_for(syms):
        a = syms[0]
        return [rule(a, (a, In(2))), rule(Multiset(), (a, In(2)))]

    return _two_region(1, [x], rules_for)


def encode_proj(n: int, j: int, args: Sequence[int]) -> CompiledUnit:
    if not 1 <= j <= n:
        raise ValueError(f"projection index {j} out of 1..{n}")
    _check_args(args, n)

    def rules_for(syms):
        return [
            rule(s, (s, In(2))) if k == j else rule(s) for k, s in enumerate(syms, 1)
        ]

    return _two_region(n, args, rules_for)


def _compile_blocks(
    e: RecExpr, args: Sequence[int], fuel: int, max_compartments: int
) -> CompiledUnit:
    b = _Builder(fuel, max_compartments)
    syms = [arg_symbol(k) for k in range(1, len(args) + 1)]
    root = _block(b, e, args, "", None, syms, GO)
    for s, x in zip(syms, args):
        b.seed(root.inp, s, x)
    b.seed(root.inp, GO)
    system = b.build(root.out)
    errors = validate(system)
    if errors:
        raise InvalidSystem(errors)
    return CompiledUnit(
        system,
        {k: (s, x) for k, (s, x) in enumerate(zip(syms, args), 1)},
        b.stage_of,
        root.out,
    )


def encode_comp(f: RecExpr, gs: Sequence[RecExpr], args: Sequence[int], **kw) -> CompiledUnit:
    return compile(Comp(f, tuple(gs)), args, **kw)


def encode_primrec(f: RecExpr, g: RecExpr, args: Sequence[int], **kw) -> CompiledUnit:
    return compile(PrimRec(f, g), args, **kw)


def encode_min(f: RecExpr, args: Sequence[int], **kw) -> CompiledUnit:
    return compile(Min(f), args, **kw)


def compile(  # noqa: A001
    e: RecExpr,
    args: Sequence[int],
    fuel: int = DEFAULT_FUEL,
    max_compartments: int = MAX_COMPARTMENTS,
) -> CompiledUnit:
    check(e)
    args = list(args)
    _check_args(args, arity(e))
    if isinstance(e, Zero):
        return encode_zero(e.n, args)
    if isinstance(e, Succ):
        return encode_succ(args[0])
    if isinstance(e, Proj):
        return encode_proj(e.n, e.i, args)
    return _compile_blocks(e, args, fuel, max_compartments)
