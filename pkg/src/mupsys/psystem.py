"""Static model of graph-structured P systems.

A system is a set of compartments labelled ``1..m``.  Compartments nest in a
single tree (used by ``in``/``out`` targets) and may additionally be joined by
undirected channels (used by ``to`` targets).  Every compartment belongs to a
*stage*: a ``/``-separated path naming the sub-system it is part of.  A stage
``s`` covers every compartment whose stage is ``s`` or starts with ``s/``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, NamedTuple

from .multiset import EMPTY, Multiset, check_symbol


class InvalidSystem(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Target:
    kind: str  # "here" | "out" | "in" | "to"
    label: int | None = None

    def __post_init__(self):
        if self.kind in ("here", "out"):
            if self.label is not None:
                raise ValueError(f"{self.kind} target takes no label")
        elif self.kind in ("in", "to"):
            if not isinstance(self.label, int):
                raise ValueError(f"{self.kind} target needs a compartment label")
        else:
            raise ValueError(f"unknown target {self.kind!r}")

    def __repr__(self):
        return self.kind if self.label is None else f"{self.kind}_{self.label}"

    def to_json(self):
        return self.kind if self.label is None else [self.kind, self.label]

    @classmethod
    def from_json(cls, obj) -> Target:
        if isinstance(obj, str):
            return cls(obj)
        kind, label = obj
        return cls(kind, label)


HERE = Target("here")
OUT = Target("out")


def In(j: int) -> Target:
    return Target("in", j)


def To(j: int) -> Target:
    return Target("to", j)


class RuleKind(enum.Enum):
    ORDINARY = "ordinary"
    CATHARSIS = "catharsis"  # u -> empty
    ONE_SHOT_EMPTY = "one_shot_empty"  # empty -> v, once, only on an empty region


@dataclass(frozen=True)
class EvolutionRule:
    lhs: Multiset
    rhs: tuple[tuple[str, Target], ...] = ()
    kind: RuleKind = RuleKind.ORDINARY
    priority: int = 0
    promoter: str | None = None
    gate: str | None = None
    reset: str | None = None

    @property
    def radius(self) -> int:
        return self.lhs.cardinality

    def symbols(self):
        yield from self.lhs
        for sym, _ in self.rhs:
            yield sym
        if self.promoter is not None:
            yield self.promoter

    def __repr__(self):
        left = " ".join(self.lhs.elements()) or "ε"
        right = " ".join(f"({s},{t!r})" for s, t in self.rhs) or "ε"
        extras = []
        if self.priority:
            extras.append(f"prio={self.priority}")
        if self.promoter:
            extras.append(f"|{self.promoter}")
        if self.gate:
            extras.append(f"gate={self.gate}")
        if self.reset:
            extras.append(f"reset={self.reset}")
        return f"{left} -> {right}" + (f" [{' '.join(extras)}]" if extras else "")

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "lhs": self.lhs.to_json(),
            "rhs": [[s, t.to_json()] for s, t in self.rhs],
            "kind": self.kind.value,
            "priority": self.priority,
        }
        if self.promoter is not None:
            d["promoter"] = self.promoter
        if self.gate is not None:
            d["gate"] = self.gate
        if self.reset is not None:
            d["reset"] = self.reset
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> EvolutionRule:
        return cls(
            lhs=Multiset.from_json(d["lhs"]),
            rhs=tuple((check_symbol(s), Target.from_json(t)) for s, t in d["rhs"]),
            kind=RuleKind(d["kind"]),
            priority=d.get("priority", 0),
            promoter=d.get("promoter"),
            gate=d.get("gate"),
            reset=d.get("reset"),
        )


def rule(lhs, *rhs, **kw) -> EvolutionRule:
    """Shorthand: ``rule("a b", ("c", HERE))``; kind is inferred from the shape."""
    if isinstance(lhs, str):
        lhs = Multiset(lhs.split())
    elif not isinstance(lhs, Multiset):
        lhs = Multiset(lhs)
    if "kind" not in kw:
        if not lhs:
            kw["kind"] = RuleKind.ONE_SHOT_EMPTY
        elif not rhs:
            kw["kind"] = RuleKind.CATHARSIS
    return EvolutionRule(lhs, tuple(rhs), **kw)


@dataclass(frozen=True)
class Compartment:
    label: int
    parent: int | None = None
    stage: str | None = None
    initial: Multiset = EMPTY
    rules: tuple[EvolutionRule, ...] = ()

    @property
    def stage_label(self) -> str:
        return self.stage if self.stage is not None else str(self.label)


class RuleInfo(NamedTuple):
    rule: EvolutionRule
    lhs: tuple[tuple[str, int], ...]
    routes: tuple[tuple[int | None, str], ...]
    one_shot: bool
    promoter: str | None
    gate: str | None
    priority: int


def in_scope(stage: str, scope: str) -> bool:
    return stage == scope or stage.startswith(scope + "/")


@dataclass(frozen=True)
class PSystem:
    alphabet: frozenset[str]
    compartments: tuple[Compartment, ...]
    edges: frozenset[tuple[int, int]] = frozenset()
    output: int = 1

    def __post_init__(self):
        # store edges as ordered pairs (min, max) so the relation is symmetric
        object.__setattr__(
            self, "edges", frozenset((min(e), max(e)) for e in self.edges)
        )

    @property
    def m(self) -> int:
        return len(self.compartments)

    @cached_property
    def by_label(self) -> dict[int, Compartment]:
        return {c.label: c for c in self.compartments}

    def compartment(self, label: int) -> Compartment:
        return self.by_label[label]

    @cached_property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self.by_label))

    @cached_property
    def skin(self) -> int | None:
        roots = [c.label for c in self.compartments if c.parent is None]
        return roots[0] if len(roots) == 1 else None

    @cached_property
    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {c.label: [] for c in self.compartments}
        for c in self.compartments:
            if c.parent is not None and c.parent in out:
                out[c.parent].append(c.label)
        return out

    @cached_property
    def one_shot_labels(self) -> list[int]:
        return [
            c.label
            for c in self.compartments
            if any(r.kind is RuleKind.ONE_SHOT_EMPTY for r in c.rules)
        ]

    @cached_property
    def rule_table(self) -> dict[int, tuple[RuleInfo, ...]]:
        """Per compartment, each rule with its left side as ``(symbol, count)``
        pairs and its right side resolved to destination labels (``None``
        for objects leaving the skin)."""
        table = {}
        for c in self.compartments:
            infos = []
            for r in c.rules:
                routes = []
                for sym, t in r.rhs:
                    if t.kind == "here":
                        dest = c.label
                    elif t.kind == "out":
                        dest = c.parent
                    else:
                        dest = t.label
                    routes.append((dest, sym))
                infos.append(RuleInfo(r, tuple(r.lhs.items()), tuple(routes),
                                      r.kind is RuleKind.ONE_SHOT_EMPTY,
                                      r.promoter, r.gate, r.priority))
            table[c.label] = tuple(infos)
        return table

    @cached_property
    def validation_errors(self) -> list[StructuralError]:
        return validate(self)

    def scope(self, stage: str) -> list[int]:
        """Labels of compartments covered by ``stage``."""
        return self._scopes.setdefault(
            stage,
            [c.label for c in self.compartments if in_scope(c.stage_label, stage)],
        )

    @cached_property
    def _scopes(self) -> dict[str, list[int]]:
        return {}

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def to_json(self) -> dict[str, Any]:
        comps = []
        for c in sorted(self.compartments, key=lambda c: c.label):
            d: dict[str, Any] = {"label": c.label}
            if c.parent is not None:
                d["parent"] = c.parent
            if c.stage is not None and c.stage != str(c.label):
                d["stage"] = c.stage
            d["initial"] = c.initial.to_json()
            d["rules"] = [r.to_json() for r in c.rules]
            comps.append(d)
        return {
            "alphabet": sorted(self.alphabet),
            "compartments": comps,
            "edges": [list(e) for e in sorted(self.edges)],
            "output": self.output,
        }

    def dumps(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=indent)

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> PSystem:
        comps = []
        for cd in d["compartments"]:
            stage = cd.get("stage")
            comps.append(
                Compartment(
                    label=cd["label"],
                    parent=cd.get("parent"),
                    stage=None if stage == str(cd["label"]) else stage,
                    initial=Multiset.from_json(cd.get("initial", {})),
                    rules=tuple(EvolutionRule.from_json(r) for r in cd.get("rules", [])),
                )
            )
        return cls(
            alphabet=frozenset(check_symbol(s) for s in d["alphabet"]),
            compartments=tuple(comps),
            edges=frozenset(tuple(e) for e in d.get("edges", [])),
            output=d["output"],
        )

    @classmethod
    def loads(cls, text: str) -> PSystem:
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class StructuralError:
    code: str
    message: str
    compartment: int | None = None
    rule: int | None = None

    def __str__(self):
        where = ""
        if self.compartment is not None:
            where = f" at ({self.compartment}" + (
                f", {self.rule})" if self.rule is not None else ")"
            )
        return f"{self.code}{where}: {self.message}"


def validate(sys: PSystem) -> list[StructuralError]:
    errors: list[StructuralError] = []
    err = lambda *a: errors.append(StructuralError(*a))  # noqa: E731

    labels = [c.label for c in sys.compartments]
    if sorted(labels) != list(range(1, len(labels) + 1)):
        err("BadLabels", f"labels must be exactly 1..{len(labels)}, got {sorted(labels)}")
    if len(labels) == 0:
        return errors
    known = set(labels)

    for sym in sys.alphabet:
        try:
            check_symbol(sym)
        except ValueError as e:
            err("BadSymbol", str(e))

    roots = [c.label for c in sys.compartments if c.parent is None]
    if len(roots) != 1:
        err("NotATree", f"expected a single skin, found roots {roots}")
    for c in sys.compartments:
        if c.parent is not None and c.parent not in known:
            err("UnknownParent", f"parent {c.parent} does not exist", c.label)
    # cycle check: walk up from every compartment
    for c in sys.compartments:
        seen = {c.label}
        p = c.parent
        while p is not None and p in known:
            if p in seen:
                err("NotATree", "nesting relation has a cycle", c.label)
                break
            seen.add(p)
            p = sys.by_label[p].parent

    if sys.output not in known:
        err("UnknownOutput", f"output compartment {sys.output} does not exist")
    elif sys.children.get(sys.output):
        err("OutputNotElementary", f"output {sys.output} contains other membranes", sys.output)

    for i, j in sys.edges:
        if i not in known or j not in known or i == j:
            err("InvalidEdge", f"edge {{{i},{j}}} is not a pair of distinct labels")

    stages = [c.stage_label for c in sys.compartments]
    for c in sys.compartments:
        if c.stage is not None and (not c.stage or any(ch.isspace() for ch in c.stage)):
            err("BadStage", f"invalid stage label {c.stage!r}", c.label)
        for sym in c.initial:
            if sym not in sys.alphabet:
                err("UnknownSymbol", f"initial symbol {sym!r} not in alphabet", c.label)
        for idx, r in enumerate(c.rules):
            for sym in r.symbols():
                if sym not in sys.alphabet:
                    err("UnknownSymbol", f"symbol {sym!r} not in alphabet", c.label, idx)
            if r.kind is RuleKind.ORDINARY and not r.lhs:
                err("BadRuleKind", "ordinary rule needs a non-empty left side", c.label, idx)
            if r.kind is RuleKind.CATHARSIS and (not r.lhs or r.rhs):
                err("BadRuleKind", "catharsis rule must be u -> empty with u non-empty", c.label, idx)
            if r.kind is RuleKind.ONE_SHOT_EMPTY and (r.lhs or not r.rhs):
                err("BadRuleKind", "one-shot rule must be empty -> v with v non-empty", c.label, idx)
            if not isinstance(r.priority, int):
                err("BadPriority", "priority must be an integer", c.label, idx)
            for name, st in (("gate", r.gate), ("reset", r.reset)):
                if st is not None and not any(in_scope(s, st) for s in stages):
                    err("UnknownStage", f"{name} stage {st!r} covers no compartment", c.label, idx)
            for _, t in r.rhs:
                if t.kind == "in":
                    if t.label not in known or sys.by_label[t.label].parent != c.label:
                        err("InvalidInTarget", f"in_{t.label} is not a child of {c.label}", c.label, idx)
                elif t.kind == "to":
                    if t.label not in known or not sys.has_edge(c.label, t.label):
                        err("InvalidGraphTarget", f"to_{t.label} has no channel from {c.label}", c.label, idx)
    return errors


@dataclass(frozen=True, eq=False)
class Configuration:
    contents: dict[int, Multiset]
    fired: frozenset[tuple[int, int]] = frozenset()
    step: int = 0

    def key(self):
        return (
            tuple(sorted(self.contents.items())),
            tuple(sorted(self.fired)),
        )

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.step == other.step and self.key() == other.key()

    def __hash__(self):
        return hash((self.key(), self.step))

    def __getitem__(self, label: int) -> Multiset:
        return self.contents[label]

    def contents_json(self) -> dict[str, dict[str, int]]:
        """Non-empty regions only, keyed by label."""
        return {str(l): ms.to_json() for l, ms in sorted(self.contents.items()) if ms}


def initial_configuration(sys: PSystem) -> Configuration:
    errors = sys.validation_errors
    if errors:
        raise InvalidSystem(errors)
    return Configuration({c.label: c.initial for c in sys.compartments})
