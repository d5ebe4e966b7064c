"""Maximally parallel execution of P systems.

Admissibility of every rule is decided once per step against the contents at
the start of the step:

* ordinary/catharsis rules need their left side contained in the region;
* a one-shot rule needs an empty region and must not have fired since the
  last reset of its stage;
* a promoter symbol, if any, must be present (it is never consumed);
* a gated rule needs its gate stage to be quiescent (see :func:`_activity`);
* among the rules surviving the above, only those of the highest priority in
  the compartment are admissible (strong priority).

A step then applies a maximal multiset of admissible rule instances.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Union

from .multiset import Multiset
from .psystem import (
    Configuration,
    EvolutionRule,
    PSystem,
    RuleKind,
    in_scope,
    initial_configuration,
)

DEFAULT_MAX_STEPS = 1_000_000
ONE_SHOT = RuleKind.ONE_SHOT_EMPTY


class IllegalInstanceSet(RuntimeError):
    pass


class BranchLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SeededRandom:
    seed: int = 0


@dataclass(frozen=True)
class Exhaustive:
    max_branches: int = 1000

    def __post_init__(self):
        if self.max_branches < 1:
            raise ValueError("max_branches must be >= 1")


Strategy = Union[SeededRandom, Exhaustive]

Coord = tuple[int, int]  # (compartment label, rule index)


@dataclass(frozen=True)
class RuleInstanceSet:
    counts: tuple[tuple[Coord, int], ...] = ()

    @classmethod
    def of(cls, mapping) -> RuleInstanceSet:
        items = mapping.items() if hasattr(mapping, "items") else mapping
        return cls(tuple(sorted((tuple(k), n) for k, n in items if n)))

    def items(self):
        return self.counts

    def as_dict(self) -> dict[Coord, int]:
        return dict(self.counts)

    def __getitem__(self, coord: Coord) -> int:
        return self.as_dict().get(coord, 0)

    def __len__(self):
        return len(self.counts)

    def __bool__(self):
        return bool(self.counts)

    def to_json(self) -> list[list[int]]:
        return [[l, r, n] for (l, r), n in self.counts]


@dataclass(frozen=True)
class Halted:
    output: int


@dataclass(frozen=True)
class StepLimitExceeded:
    pass


@dataclass
class Trace:
    steps: list[tuple[Configuration, RuleInstanceSet]]
    outcome: Halted | StepLimitExceeded
    final: Configuration
    steps_taken: int = 0

    def records(self) -> Iterator[dict]:
        for cfg, m in self.steps:
            yield {"step": cfg.step, "applied": m.to_json(), "contents": cfg.contents_json()}
        if isinstance(self.outcome, Halted):
            yield {"outcome": "halted", "output": self.outcome.output}
        else:
            yield {"outcome": "step_limit"}


# --- admissibility -----------------------------------------------------------


def _rules(sys: PSystem, label: int) -> tuple[EvolutionRule, ...]:
    return sys.by_label[label].rules


def _live_labels(sys: PSystem, cfg: Configuration) -> list[int]:
    """Compartments where some rule could possibly be admissible."""
    live = [l for l, ms in cfg.contents.items() if ms]
    for l in _one_shot_labels(sys):
        if not cfg.contents[l]:
            live.append(l)
    return live


def _one_shot_labels(sys: PSystem) -> list[int]:
    return sys.one_shot_labels


def _basic(sys: PSystem, cfg: Configuration, label: int) -> list[int]:
    """Rule indices passing the containment / one-shot / promoter tests."""
    contents = cfg.contents[label]
    get = contents.get
    out = []
    for idx, info in enumerate(sys.rule_table[label]):
        if info.one_shot:
            if contents or (label, idx) in cfg.fired:
                continue
        else:
            short = False
            for s, n in info.lhs:
                if get(s, 0) < n:
                    short = True
                    break
            if short:
                continue
        if info.promoter is None or info.promoter in contents:
            out.append(idx)
    return out


def _stage_of(sys: PSystem, label: int) -> str:
    return sys.by_label[label].stage_label


def _activity(sys, basic, stage, memo) -> bool:
    # A stage is active when some rule in its scope could fire: an ungated
    # rule, or a rule gated on a strictly deeper stage whose gate is open.
    # Rules gated on the stage itself (its exit channels) or on outer stages
    # do not count.  Recursion only descends, so it terminates.
    if stage in memo:
        return memo[stage]
    active = False
    for label, idxs in basic.items():
        if not idxs or not in_scope(_stage_of(sys, label), stage):
            continue
        for idx in idxs:
            gate = _rules(sys, label)[idx].gate
            if gate is None:
                active = True
            elif gate != stage and in_scope(gate, stage):
                active = not _activity(sys, basic, gate, memo)
            if active:
                break
        if active:
            break
    memo[stage] = active
    return active


def admissible_map(sys: PSystem, cfg: Configuration) -> dict[int, list[int]]:
    """Admissible rule indices for every compartment that has any."""
    basic = {}
    for label in _live_labels(sys, cfg):
        idxs = _basic(sys, cfg, label)
        if idxs:
            basic[label] = idxs
    memo: dict[str, bool] = {}
    result = {}
    table = sys.rule_table
    for label in sorted(basic):
        rules = table[label]
        cand = [
            i
            for i in basic[label]
            if rules[i].gate is None or not _activity(sys, basic, rules[i].gate, memo)
        ]
        if len(cand) > 1:
            top = max(rules[i].priority for i in cand)
            cand = [i for i in cand if rules[i].priority == top]
        if cand:
            result[label] = cand
    return result


def admissible_rules(cfg: Configuration, sys: PSystem, label: int) -> list[int]:
    return admissible_map(sys, cfg).get(label, [])


# --- selection ---------------------------------------------------------------


def _fits(lhs, residual: dict[str, int]) -> bool:
    return all(residual.get(s, 0) >= n for s, n in lhs)


def _rng(seed: int, step: int) -> random.Random:
    return random.Random(f"{seed}:{step}")


def _independent(sys, live) -> bool:
    seen = set()
    for label, idx in live:
        for s, _ in sys.rule_table[label][idx].lhs:
            if (label, s) in seen:
                return False
            seen.add((label, s))
    return True


def _saturate(table, pairs, contents, counts) -> None:
    # No two pairs compete for an object, so every draw order ends with each
    # pair applied as often as its compartment allows.  Skipping the draws is
    # safe because the generator is reseeded every step.
    for p in pairs:
        info = table[p[0]][p[1]]
        if info.one_shot:
            counts[p] += 1
        else:
            get = contents[p[0]].get
            counts[p] += min(get(s, 0) // n for s, n in info.lhs)


def _select_random(sys, cfg, adm, seed) -> RuleInstanceSet:
    # Draw uniformly among (label, rule) pairs still applicable to the
    # residual contents until none remain; the result is maximal by
    # construction.
    table = sys.rule_table
    pairs = [(l, i) for l in sorted(adm) for i in adm[l]]
    counts: Counter = Counter()
    if _independent(sys, pairs):
        _saturate(table, pairs, cfg.contents, counts)
        return RuleInstanceSet.of(counts)

    rng = None  # seeded on the first contested draw
    residual = {l: dict(cfg.contents[l].items()) for l in adm}
    used_one_shot: set[Coord] = set()

    def applicable(p):
        info = table[p[0]][p[1]]
        if info.one_shot:
            return p not in used_one_shot
        return _fits(info.lhs, residual[p[0]])

    live = [p for p in pairs if applicable(p)]
    while live:
        if _independent(sys, live):
            _saturate(table, live, residual, counts)
            break
        if rng is None:
            rng = _rng(seed, cfg.step)
        p = live[rng.randrange(len(live))]
        label, idx = p
        info = table[label][idx]
        counts[p] += 1
        if info.one_shot:
            used_one_shot.add(p)
        else:
            res = residual[label]
            for s, n in info.lhs:
                res[s] -= n
        live = [q for q in live if q[0] != label or applicable(q)]
    return RuleInstanceSet.of(counts)


def _local_maximal(sys, cfg, label, idxs) -> list[dict[int, int]]:
    rules = _rules(sys, label)
    out: list[dict[int, int]] = []
    start = dict(cfg.contents[label].items())

    def rec(k, residual, acc):
        if k == len(idxs):
            for j, i in enumerate(idxs):
                r = rules[i]
                if r.kind is ONE_SHOT:
                    if acc[j] == 0:
                        return
                elif _fits(r.lhs.items(), residual):
                    return
            out.append({i: c for i, c in zip(idxs, acc) if c})
            return
        r = rules[idxs[k]]
        if r.kind is ONE_SHOT:
            top = 1
        else:
            top = min(residual.get(s, 0) // n for s, n in r.lhs.items())
        for c in range(top, -1, -1):
            res = dict(residual)
            for s, n in r.lhs.items():
                res[s] = res.get(s, 0) - c * n
            rec(k + 1, res, acc + [c])

    rec(0, start, [])
    return out


def enumerate_maximal_sets(
    cfg: Configuration, sys: PSystem, limit: int | None = None
) -> list[RuleInstanceSet]:
    """All maximal instance sets over admissible rules, in canonical order."""
    adm = admissible_map(sys, cfg)
    per_label = []
    total = 1
    for label in sorted(adm):
        local = _local_maximal(sys, cfg, label, adm[label])
        per_label.append([(label, v) for v in local])
        total *= len(local)
        if limit is not None and total > limit:
            raise BranchLimitExceeded(f"more than {limit} maximal instance sets")
    result = set()
    for combo in itertools.product(*per_label):
        result.add(
            RuleInstanceSet.of({(l, i): c for l, v in combo for i, c in v.items()})
        )
    return sorted(result, key=lambda m: m.counts)


def select_maximal(cfg: Configuration, sys: PSystem, strategy: Strategy) -> RuleInstanceSet:
    """One maximal instance set.  Exhaustive callers should use
    :func:`enumerate_maximal_sets`; here it yields the canonical first member."""
    if isinstance(strategy, SeededRandom):
        return _select_random(sys, cfg, admissible_map(sys, cfg), strategy.seed)
    sets = enumerate_maximal_sets(cfg, sys, strategy.max_branches)
    return sets[0]


# --- application -------------------------------------------------------------


def _apply(sys: PSystem, cfg: Configuration, m: RuleInstanceSet) -> Configuration:
    delta: dict[int, dict[str, int]] = {}
    fired = cfg.fired
    resets = set()
    for (label, idx), n in m.items():
        info = sys.rule_table[label][idx]
        if info.lhs:
            d = delta.setdefault(label, {})
            for s, k in info.lhs:
                d[s] = d.get(s, 0) - k * n
        for dest, sym in info.routes:
            if dest is None:  # out of the skin: the environment is a sink
                continue
            d = delta.setdefault(dest, {})
            d[sym] = d.get(sym, 0) + n
        if info.one_shot:
            fired = fired | {(label, idx)}
        if info.rule.reset is not None:
            resets.add(info.rule.reset)

    contents = dict(cfg.contents)
    for label, change in delta.items():
        d = dict(contents[label].items())
        for s, k in change.items():
            left = d.get(s, 0) + k
            if left < 0:
                raise IllegalInstanceSet(f"compartment {label} over-consumed {s!r}")
            if left:
                d[s] = left
            else:
                d.pop(s, None)
        contents[label] = Multiset._trusted(d)

    for stage in sorted(resets):
        scope = set(sys.scope(stage))
        for l in scope:
            contents[l] = sys.by_label[l].initial
        fired = frozenset(f for f in fired if f[0] not in scope)

    return Configuration(contents, frozenset(fired), cfg.step + 1)


def check_instance_set(sys: PSystem, cfg: Configuration, m: RuleInstanceSet) -> None:
    """Raise :class:`IllegalInstanceSet` unless ``m`` is admissible and maximal."""
    adm = admissible_map(sys, cfg)
    residual = {l: dict(cfg.contents[l].items()) for l in cfg.contents}
    for (label, idx), n in m.items():
        if idx not in adm.get(label, []):
            raise IllegalInstanceSet(f"rule ({label}, {idx}) is not admissible")
        r = _rules(sys, label)[idx]
        if n < 1 or (r.kind is ONE_SHOT and n > 1):
            raise IllegalInstanceSet(f"bad count {n} for ({label}, {idx})")
        for s, k in r.lhs.items():
            residual[label][s] = residual[label].get(s, 0) - k * n
            if residual[label][s] < 0:
                raise IllegalInstanceSet(f"compartment {label} over-consumed {s!r}")
    chosen = m.as_dict()
    for label, idxs in adm.items():
        for idx in idxs:
            r = _rules(sys, label)[idx]
            if r.kind is ONE_SHOT:
                extendable = (label, idx) not in chosen
            else:
                extendable = _fits(r.lhs.items(), residual[label])
            if extendable:
                raise IllegalInstanceSet(f"not maximal: ({label}, {idx}) still applicable")


def apply_step(cfg: Configuration, sys: PSystem, m: RuleInstanceSet) -> Configuration:
    check_instance_set(sys, cfg, m)
    return _apply(sys, cfg, m)


def output_of(sys: PSystem, cfg: Configuration) -> int:
    return cfg.contents[sys.output].cardinality


def run(
    sys: PSystem,
    strategy: SeededRandom = SeededRandom(0),
    max_steps: int = DEFAULT_MAX_STEPS,
    record: bool = True,
) -> Trace:
    """Run until halting or ``max_steps`` applied steps.

    Only seeded runs are supported here; use :func:`explore` to follow every
    nondeterministic branch.
    """
    if not isinstance(strategy, SeededRandom):
        raise TypeError("run() takes a SeededRandom strategy; use explore() for exhaustive mode")
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    cfg = initial_configuration(sys)
    steps: list[tuple[Configuration, RuleInstanceSet]] = []
    while True:
        adm = admissible_map(sys, cfg)
        if not adm:
            outcome: Halted | StepLimitExceeded = Halted(output_of(sys, cfg))
            break
        if cfg.step >= max_steps:
            outcome = StepLimitExceeded()
            break
        m = _select_random(sys, cfg, adm, strategy.seed)
        if record:
            steps.append((cfg, m))
        cfg = _apply(sys, cfg, m)
    return Trace(steps, outcome, cfg, cfg.step)


def explore(
    sys: PSystem,
    max_branches: int = 1000,
    max_steps: int = 10_000,
) -> list[Trace]:
    """Follow every maximal-parallel branch depth first.

    Each returned trace is one complete branch, in canonical order.  Raises
    :class:`BranchLimitExceeded` once more than ``max_branches`` exist.
    """
    branches: list[Trace] = []
    path: list[tuple[Configuration, RuleInstanceSet]] = []
    # stack of (configuration, iterator over its maximal sets)
    stack: list[tuple[Configuration, Iterator[RuleInstanceSet] | None]] = []

    def enter(cfg: Configuration):
        if not admissible_map(sys, cfg):
            branches.append(Trace(list(path), Halted(output_of(sys, cfg)), cfg, cfg.step))
        elif cfg.step >= max_steps:
            branches.append(Trace(list(path), StepLimitExceeded(), cfg, cfg.step))
        else:
            stack.append((cfg, iter(enumerate_maximal_sets(cfg, sys, max_branches))))
            return
        if len(branches) > max_branches:
            raise BranchLimitExceeded(f"more than {max_branches} branches")

    enter(initial_configuration(sys))
    while stack:
        cfg, it = stack[-1]
        m = next(it, None)
        if m is None:
            stack.pop()
            if path:
                path.pop()
            continue
        path.append((cfg, m))
        enter(_apply(sys, cfg, m))
        if len(stack) == 0 or stack[-1][0] is cfg:
            # the child was a leaf
            path.pop()
    return branches
