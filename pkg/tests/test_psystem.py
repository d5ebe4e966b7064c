import json
import random

import pytest

from mupsys.compiler import compile, encode_succ, encode_zero
from mupsys.multiset import Multiset
from mupsys.psystem import (
    HERE,
    OUT,
    Compartment,
    In,
    InvalidSystem,
    PSystem,
    RuleKind,
    Target,
    To,
    in_scope,
    initial_configuration,
    rule,
    validate,
)
from mupsys.recfun import MULT, parse

from helpers import random_system


def two_region(rules, output=2, edges=(), extra=()):
    comps = (Compartment(1, None, None, Multiset(), tuple(rules)), Compartment(2, 1)) + tuple(extra)
    return PSystem(frozenset("abc"), comps, frozenset(edges), output)


def codes(sys):
    return [(e.code, e.compartment, e.rule) for e in validate(sys)]


def test_canonical_two_region_system_is_valid():
    assert validate(two_region([rule("a", ("a", In(2)))])) == []


def test_graph_target_needs_an_edge():
    third = Compartment(3, 1)
    sys = two_region([rule("a", ("b", HERE)), rule("a", ("a", To(3)))], extra=(third,))
    assert codes(sys) == [("InvalidGraphTarget", 1, 1)]
    ok = two_region([rule("a", ("a", To(3)))], edges={(3, 1)}, extra=(third,))
    assert validate(ok) == []


def test_output_must_be_elementary():
    sys = two_region([], output=1)
    assert [e.code for e in validate(sys)] == ["OutputNotElementary"]


@pytest.mark.parametrize(
    "sys, code",
    [
        (PSystem(frozenset("a"), (Compartment(1), Compartment(3, 1)), output=3), "BadLabels"),
        (PSystem(frozenset("a"), (Compartment(1), Compartment(2)), output=2), "NotATree"),
        (PSystem(frozenset("a"), (Compartment(1, 2), Compartment(2, 1)), output=2), "NotATree"),
        (PSystem(frozenset("a"), (Compartment(1), Compartment(2, 1)), output=7), "UnknownOutput"),
        (two_region([rule("z", ("a", HERE))]), "UnknownSymbol"),
        (two_region([rule("a", ("a", In(1)))]), "InvalidInTarget"),
        (two_region([rule("a", ("a", HERE), gate="nowhere")]), "UnknownStage"),
        (two_region([rule("a", ("a", HERE), kind=RuleKind.CATHARSIS)]), "BadRuleKind"),
        (two_region([rule(Multiset(), kind=RuleKind.ONE_SHOT_EMPTY)]), "BadRuleKind"),
        (two_region([], edges={(1, 1)}), "InvalidEdge"),
        (PSystem(frozenset(["a b"]), (Compartment(1), Compartment(2, 1)), output=2), "BadSymbol"),
    ],
)
def test_structural_errors(sys, code):
    assert code in [e.code for e in validate(sys)]


def test_invalid_system_refuses_to_start():
    with pytest.raises(InvalidSystem):
        initial_configuration(two_region([], output=1))


def test_initial_configuration_of_zero_system():
    cfg = initial_configuration(encode_zero(2, [3, 5]).system)
    assert cfg[1] == Multiset({"α1": 3, "α2": 5})
    assert cfg[2] == Multiset()
    assert cfg.step == 0 and not cfg.fired


def test_initial_configuration_of_successor_at_zero():
    cfg = initial_configuration(encode_succ(0).system)
    assert not cfg[1] and not cfg.fired


def test_all_empty_system_starts_empty():
    cfg = initial_configuration(two_region([rule("a", ("b", HERE))]))
    assert all(not ms for ms in cfg.contents.values())


def test_rule_helper_infers_kind():
    assert rule("a").kind is RuleKind.CATHARSIS
    assert rule(Multiset(), ("a", HERE)).kind is RuleKind.ONE_SHOT_EMPTY
    assert rule("a b", ("c", OUT)).kind is RuleKind.ORDINARY
    assert rule("a a b").radius == 3


def test_target_validation():
    with pytest.raises(ValueError):
        Target("in")
    with pytest.raises(ValueError):
        Target("here", 2)
    with pytest.raises(ValueError):
        Target("sideways")


def test_edges_are_unordered():
    sys = two_region([], edges={(2, 1)})
    assert sys.has_edge(1, 2) and sys.has_edge(2, 1)


def test_stage_scope():
    assert in_scope("h/f", "h") and in_scope("h", "h")
    assert not in_scope("hx", "h") and not in_scope("h", "h/f")


@pytest.mark.parametrize(
    "unit",
    [encode_zero(2, [3, 5]), encode_succ(0), compile(parse(MULT), [2, 2]), compile(parse("M(U[2,1])"), [1])],
    ids=["zero", "succ", "mult", "min"],
)
def test_json_round_trip_is_bit_exact(unit):
    text = unit.system.dumps()
    back = PSystem.loads(text)
    assert back == unit.system
    assert back.dumps() == text
    assert json.loads(text)["output"] == unit.output


def test_json_round_trip_random_systems():
    rng = random.Random(3)
    for _ in range(200):
        sys = random_system(rng)
        assert PSystem.loads(sys.dumps()).dumps() == sys.dumps()


def test_one_shot_rule_record():
    doc = encode_succ(0).system.to_json()
    kinds = [r["kind"] for r in doc["compartments"][0]["rules"]]
    assert kinds == ["ordinary", "one_shot_empty"]
