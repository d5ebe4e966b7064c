"""Compile μ-recursive functions into graph-structured P systems and run them
under maximally parallel multiset rewriting."""

from .compiler import CompiledUnit, compile
from .engine import (
    Exhaustive,
    Halted,
    RuleInstanceSet,
    SeededRandom,
    StepLimitExceeded,
    Trace,
    enumerate_maximal_sets,
    explore,
    run,
)
from .multiset import Multiset
from .psystem import PSystem, validate
from .recfun import evaluate, parse

__all__ = [
    "CompiledUnit",
    "Exhaustive",
    "Halted",
    "Multiset",
    "PSystem",
    "RuleInstanceSet",
    "SeededRandom",
    "StepLimitExceeded",
    "Trace",
    "compile",
    "enumerate_maximal_sets",
    "evaluate",
    "explore",
    "parse",
    "run",
    "validate",
]
