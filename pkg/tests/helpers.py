"""Shared generators and an independent reference checker for engine steps.

The checker deliberately re-derives admissibility from first principles
instead of calling into the engine, so that engine bugs cannot hide behind
themselves.  It assumes flat stage labels (no ``/``), which is all the
random generator produces.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from mupsys.engine import (
    BranchLimitExceeded,
    SeededRandom,
    admissible_map,
    apply_step,
    enumerate_maximal_sets,
    select_maximal,
)
from mupsys.multiset import Multiset
from mupsys.psystem import (
    HERE,
    OUT,
    Compartment,
    EvolutionRule,
    In,
    PSystem,
    RuleKind,
    To,
    initial_configuration,
    validate,
)
from mupsys.recfun import Comp, Min, PrimRec, Proj, Succ, Zero

SYMBOLS = ("a", "b", "c")
STAGES = ("s1", "s2")
FEATURES = ("priority", "promoter", "gate", "one_shot", "reset")


# --- random systems ----------------------------------------------------------


def _random_rule(rng, label, children, neighbours, stages, force=None) -> EvolutionRule:
    one_shot = force == "one_shot" or rng.random() < 0.15
    if one_shot:
        lhs = Multiset()
        kind = RuleKind.ONE_SHOT_EMPTY
        n_rhs = rng.randint(1, 2)
    else:
        lhs = Multiset([rng.choice(SYMBOLS) for _ in range(rng.randint(1, 2))])
        n_rhs = rng.randint(0, 2)
        kind = RuleKind.ORDINARY if n_rhs else RuleKind.CATHARSIS
    targets = [HERE, OUT] + [In(c) for c in children] + [To(j) for j in neighbours]
    rhs = tuple((rng.choice(SYMBOLS), rng.choice(targets)) for _ in range(n_rhs))
    priority = rng.choice((0, 0, 1, 2))
    if force == "priority" and priority == 0:
        priority = rng.choice((1, 2))
    promoter = rng.choice(SYMBOLS) if force == "promoter" or rng.random() < 0.2 else None
    gate = rng.choice(stages) if force == "gate" or rng.random() < 0.2 else None
    reset = rng.choice(stages) if force == "reset" or rng.random() < 0.1 else None
    return EvolutionRule(lhs, rhs, kind, priority, promoter, gate, reset)


def random_system(rng: random.Random, force: str | None = None) -> PSystem:
    """At most 3 compartments, 5 rules and 6 initial objects."""
    m = rng.randint(1, 3)
    parents = {1: None}
    for k in range(2, m + 1):
        parents[k] = rng.randint(1, k - 1)
    stage = {k: rng.choice(STAGES + (None,)) for k in parents}
    stage_labels = sorted({s if s is not None else str(k) for k, s in stage.items()})
    pairs = [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]
    edges = {p for p in pairs if rng.random() < 0.5}

    n_rules = rng.randint(1, 5)
    owners = [rng.randint(1, m) for _ in range(n_rules)]
    forced_at = rng.randrange(n_rules) if force else -1
    rules: dict[int, list[EvolutionRule]] = {k: [] for k in parents}
    for n, owner in enumerate(owners):
        children = [c for c, p in parents.items() if p == owner]
        neighbours = sorted({j for e in edges for j in e if owner in e and j != owner})
        rules[owner].append(
            _random_rule(rng, owner, children, neighbours, stage_labels,
                         force if n == forced_at else None)
        )
    if force == "priority":
        # a competitor with lower priority in the same compartment
        owner = owners[forced_at]
        if len(rules[owner]) < 2 and n_rules < 5:
            rules[owner].append(EvolutionRule(Multiset([rng.choice(SYMBOLS)]), (), RuleKind.CATHARSIS))

    budget = rng.randint(1, 6)
    initial = {k: Counter() for k in parents}
    for _ in range(budget):
        initial[rng.randint(1, m)][rng.choice(SYMBOLS)] += 1

    leaves = [k for k in parents if not any(p == k for p in parents.values())]
    sys = PSystem(
        alphabet=frozenset(SYMBOLS),
        compartments=tuple(
            Compartment(k, parents[k], stage[k], Multiset(dict(initial[k])), tuple(rules[k]))
            for k in sorted(parents)
        ),
        edges=frozenset(edges),
        output=rng.choice(leaves),
    )
    assert validate(sys) == [], validate(sys)
    return sys


# --- reference semantics -------------------------------------------------------


def _contains(big, small) -> bool:
    return all(big.get(s, 0) >= n for s, n in small.items())


def ref_basic(sys, contents, fired, label, idx) -> bool:
    r = sys.by_label[label].rules[idx]
    here = contents[label]
    if r.kind is RuleKind.ONE_SHOT_EMPTY:
        ok = here.cardinality == 0 and (label, idx) not in fired
    else:
        ok = _contains(here, r.lhs)
    return ok and (r.promoter is None or here.get(r.promoter, 0) > 0)


def ref_stage_busy(sys, contents, fired, stage) -> bool:
    """Some ungated rule of a compartment in ``stage`` passes the basic tests."""
    for c in sys.compartments:
        if c.stage_label != stage:
            continue
        for idx, r in enumerate(c.rules):
            if r.gate is None and ref_basic(sys, contents, fired, c.label, idx):
                return True
    return False


def ref_candidates(sys, contents, fired) -> dict[int, list[int]]:
    """Basic tests plus gating, before priority filtering."""
    out = {}
    for c in sys.compartments:
        out[c.label] = [
            idx
            for idx, r in enumerate(c.rules)
            if ref_basic(sys, contents, fired, c.label, idx)
            and (r.gate is None or not ref_stage_busy(sys, contents, fired, r.gate))
        ]
    return out


def ref_admissible(sys, contents, fired) -> dict[int, list[int]]:
    out = {}
    for label, idxs in ref_candidates(sys, contents, fired).items():
        if idxs:
            top = max(sys.by_label[label].rules[i].priority for i in idxs)
            out[label] = [i for i in idxs if sys.by_label[label].rules[i].priority == top]
    return out


def ref_apply(sys, contents, m: dict) -> dict[int, Counter]:
    """Expected contents after applying ``m``, ignoring resets."""
    new = {l: Counter(dict(ms.items())) for l, ms in contents.items()}
    for (label, idx), n in m.items():
        r = sys.by_label[label].rules[idx]
        for s, k in r.lhs.items():
            new[label][s] -= k * n
        for s, t in r.rhs:
            if t.kind == "here":
                new[label][s] += n
            elif t.kind == "out":
                parent = sys.by_label[label].parent
                if parent is not None:
                    new[parent][s] += n
            else:
                new[t.label][s] += n
    return new


@dataclass
class StepReport:
    violations: list[str] = field(default_factory=list)
    exercised: set[str] = field(default_factory=set)


def check_step(sys, cfg, m, nxt, fires_since_arm: Counter, maximal_sets) -> StepReport:
    """Check one engine step ``cfg --m--> nxt`` against the reference rules.

    ``fires_since_arm`` is updated in place; ``maximal_sets`` is the engine's
    enumeration for ``cfg``.
    """
    rep = StepReport()
    bad = rep.violations.append
    contents, fired = cfg.contents, cfg.fired
    chosen = m.as_dict()
    adm = ref_admissible(sys, contents, fired)
    cand = ref_candidates(sys, contents, fired)
    rules = lambda l: sys.by_label[l].rules  # noqa: E731

    # maximality
    rep.exercised.add("maximality")
    if m not in maximal_sets:
        bad(f"maximality: {m} not among enumerated maximal sets")
    residual = {l: Counter(dict(ms.items())) for l, ms in contents.items()}
    for (l, i), n in chosen.items():
        if i not in adm.get(l, []):
            bad(f"maximality: ({l},{i}) applied but not admissible")
        for s, k in rules(l)[i].lhs.items():
            residual[l][s] -= k * n
            if residual[l][s] < 0:
                bad(f"maximality: ({l},{i}) over-consumes {s}")
    for l, idxs in adm.items():
        for i in idxs:
            r = rules(l)[i]
            if r.kind is RuleKind.ONE_SHOT_EMPTY:
                if (l, i) not in chosen:
                    bad(f"maximality: one-shot ({l},{i}) admissible but unused")
            elif _contains(residual[l], r.lhs):
                bad(f"maximality: ({l},{i}) still applicable to the residue")

    # conservation (with resets applied last)
    rep.exercised.add("conservation")
    expected = ref_apply(sys, contents, chosen)
    reset_stages = {rules(l)[i].reset for (l, i) in chosen if rules(l)[i].reset}
    reset_labels = {c.label for c in sys.compartments if c.stage_label in reset_stages}
    for l in expected:
        want = dict(sys.by_label[l].initial.items()) if l in reset_labels else +expected[l]
        if dict(nxt.contents[l].items()) != want:
            bad(f"conservation: compartment {l} is {dict(nxt.contents[l].items())}, expected {want}")
    if reset_labels:
        rep.exercised.add("reset")

    # one-shot: only on an empty region, at most once per arming
    for (l, i), n in chosen.items():
        if rules(l)[i].kind is RuleKind.ONE_SHOT_EMPTY:
            rep.exercised.add("one_shot")
            fires_since_arm[(l, i)] += n
            if contents[l].cardinality:
                bad(f"one-shot: ({l},{i}) fired on a non-empty region")
            if fires_since_arm[(l, i)] > 1:
                bad(f"one-shot: ({l},{i}) fired twice in one arming")
    for l in reset_labels:
        for i in range(len(rules(l))):
            fires_since_arm.pop((l, i), None)
            if (l, i) in nxt.fired:
                bad(f"one-shot: ({l},{i}) still marked fired after reset")

    # strong priority
    for l, idxs in cand.items():
        if len({rules(l)[i].priority for i in idxs}) > 1:
            rep.exercised.add("priority")
        top = max((rules(l)[i].priority for i in idxs), default=None)
        for (cl, ci) in chosen:
            if cl == l and rules(l)[ci].priority != top:
                bad(f"priority: ({l},{ci}) applied below an admissible priority {top}")

    # promoter: present at step start, and never consumed by the promoted rule
    consumed = {l: Counter() for l in contents}
    for (l, i), n in chosen.items():
        for s, k in rules(l)[i].lhs.items():
            consumed[l][s] += k * n
    for (l, i) in chosen:
        p = rules(l)[i].promoter
        if p is None:
            continue
        rep.exercised.add("promoter")
        if contents[l].get(p, 0) == 0:
            bad(f"promoter: ({l},{i}) applied without {p}")
        if l not in reset_labels:
            lost = contents[l].get(p, 0) - nxt.contents[l].get(p, 0)
            if lost > consumed[l][p]:
                bad(f"promoter: {p} in {l} decreased by {lost}, only {consumed[l][p]} consumed")

    # gate quiescence
    for l, c in sys.by_label.items():
        for i, r in enumerate(c.rules):
            if r.gate is None or not ref_basic(sys, contents, fired, l, i):
                continue
            rep.exercised.add("gate")
            if (l, i) in chosen and ref_stage_busy(sys, contents, fired, r.gate):
                bad(f"gate: ({l},{i}) applied while stage {r.gate} was active")
    return rep


def exercise(sys, seed: int, max_steps: int = 12, max_objects: int = 60) -> StepReport:
    """Run ``sys`` under a seeded strategy, checking every step."""
    total = StepReport()
    cfg = initial_configuration(sys)
    arm: Counter = Counter()
    for _ in range(max_steps):
        adm = admissible_map(sys, cfg)
        ref = ref_admissible(sys, cfg.contents, cfg.fired)
        if adm != ref:
            total.violations.append(f"admissibility: engine {adm}, reference {ref}")
        if not adm or sum(ms.cardinality for ms in cfg.contents.values()) > max_objects:
            break
        try:
            sets = enumerate_maximal_sets(cfg, sys, limit=5000)
        except BranchLimitExceeded:
            break
        m = select_maximal(cfg, sys, SeededRandom(seed))
        nxt = apply_step(cfg, sys, m)
        rep = check_step(sys, cfg, m, nxt, arm, sets)
        total.violations += rep.violations
        total.exercised |= rep.exercised
        cfg = nxt
    return total


# --- random expressions ------------------------------------------------------


def random_expr(rng: random.Random, n: int, depth: int):
    """A well-formed expression of arity ``n``."""
    opts = ["Z", "U"] + (["S"] if n == 1 else [])
    if depth > 0 and n >= 1:
        opts += ["C", "C", "P", "M"]
    k = rng.choice(opts)
    if k == "Z" or (k == "U" and n == 0):
        return Zero(n)
    if k == "S":
        return Succ()
    if k == "U":
        return Proj(n, rng.randint(1, n))
    if k == "C":
        m = rng.randint(1, 2)
        return Comp(random_expr(rng, m, depth - 1), tuple(random_expr(rng, n, depth - 1) for _ in range(m)))
    if k == "P":
        return PrimRec(random_expr(rng, n - 1, depth - 1), random_expr(rng, n + 1, depth - 1))
    return Min(random_expr(rng, n + 1, depth - 1))
