import logging
import math

import pytest
from hypothesis import given

from patternguard.dsl import Align, Base, ClassAtom, Delim, EnumAtom, Literal, Pattern, Recursive, Rep, matcher_for
from patternguard.gentree import default_tree
from patternguard.refine import (
    EntropyParams,
    SlotStats,
    atom_cost,
    greedy_travel,
    refine_patterns,
    token_entropy,
)

from refine_props import check_case, greedy_is_optimal, random_case, slot_cases

T = default_tree()
M = matcher_for(T)


def test_token_entropy_examples():
    assert token_entropy(SlotStats.of(0, ["ADD"] * 10)) == 1.0
    assert token_entropy(SlotStats.of(0, ["a"] * 5 + ["b"] * 5)) == 2.0
    assert token_entropy(SlotStats.of(0, ["a", "b", "c", "d"])) == 3.0
    with pytest.raises(ValueError):
        token_entropy(SlotStats.of(0, []))


def test_atom_cost_examples():
    stats = SlotStats.of(0, ["ID:"] * 4)
    assert atom_cost(Literal("ID:"), stats, T) == 3.0
    digits = SlotStats.of(0, ["12", "345", "6"])
    assert atom_cost(ClassAtom("DIGIT"), digits, T) < atom_cost(ClassAtom("ANY"), digits, T)
    # the gap is exactly the class term difference times the mean length
    gap = atom_cost(ClassAtom("ANY"), digits, T) - atom_cost(ClassAtom("DIGIT"), digits, T)
    assert gap == pytest.approx(2 * 0.5 * (math.log2(95) - math.log2(10)))
    single = SlotStats.of(0, ["ADD", "ADD"])
    assert atom_cost(EnumAtom(("ADD",)), single, T) == 3 * EntropyParams().beta


def test_greedy_travel_examples():
    p = Pattern((ClassAtom("ALNUM"),))
    digits = ["12", "345", "6", "78"]
    assert greedy_travel(p, [digits], T) == Pattern((ClassAtom("DIGIT"),))
    ops = ["DELETE", "ADD"] * 3
    out = greedy_travel(Pattern((ClassAtom("ALPHA"),)), [ops], T)
    assert out == Pattern((EnumAtom(("DELETE", "ADD")),))
    assert not M.pattern_match(out, "KILL").accepted
    mixed = ["aB3", "Zz9q", "x1Y", "Q7", "mm0R", "k2"]
    assert greedy_travel(Pattern((ClassAtom("ALNUM"),)), [mixed], T) == Pattern((ClassAtom("ALNUM"),))


def test_fixed_length_slot_gets_exact_rep():
    out = greedy_travel(Pattern((ClassAtom("ALNUM"),)), [["12345", "67890", "11111", "2468"[:4] + "0"]], T)
    assert out == Pattern((ClassAtom("DIGIT", Rep.exactly(5)),))


def test_refine_fig1_skeleton():
    k = Recursive(Align((Base(Pattern((ClassAtom("ALPHA"),))), Delim(","),
                         Base(Pattern((ClassAtom("ALNUM"),))))), ";")
    values = ["CSS,12345;JAVA,4567", "GO,1;RUST,22;PHP,333", "HTML,9", "SQL,12;KT,99999", "ELM,5"]
    out, = refine_patterns([k], values, T)
    a = out.body.children[0].pattern.atoms[0]
    assert a == ClassAtom("UPPER")
    assert out.body.children[2].pattern.atoms[0].label == "DIGIT"
    assert out.sep == ";" and out.body.children[1] == Delim(",")
    assert all(M.accepts(out, v) for v in values)


def test_refine_is_idempotent_on_minimal_pattern():
    k = Base(Pattern((ClassAtom("DIGIT"),)))
    values = ["1", "22", "333", "4444", "55", "6"]
    once, = refine_patterns([k], values, T)
    twice, = refine_patterns([once], values, T)
    assert once == twice


def test_zero_coverage_skeleton_dropped(caplog):
    k1 = Base(Pattern((ClassAtom("DIGIT"),)))
    k2 = Base(Pattern((ClassAtom("UPPER"),)))
    with caplog.at_level(logging.WARNING):
        out = refine_patterns([k1, k2], ["12", "34"], T)
    assert len(out) == 1 and "accepts no training value" in caplog.text


@given(slot_cases())
def test_refinement_properties(case):
    assert check_case(*case) == []


def test_greedy_small_instance_quality():
    import random

    rng = random.Random(11)
    results = [greedy_is_optimal(*random_case(rng)) for _ in range(100)]
    assert sum(results) >= 90
