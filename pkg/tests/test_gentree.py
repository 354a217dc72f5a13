import itertools
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from patternguard.gentree import (
    DistanceParams,
    TreeError,
    default_tree,
    format_tree,
    generalization_cost,
    map_char,
    nearest_common_ancestor,
    parse_tree,
    pattern_based_distance,
    segment_distance,
)

from oracles import all_scripts_distance, bfs_distance, edit_distance, root_path

T = default_tree()
PRINTABLE = string.printable[:95]
short = st.text(alphabet=PRINTABLE, max_size=6)


def nid(label):
    return T.by_label(label)


def test_default_tree_shape():
    assert T.label(T.root) == "ANY"
    assert [T.label(c) for c in T.children(T.root)] == ["ALNUM", "PUNCT", "SPACE"]
    assert T.alphabet == frozenset(PRINTABLE)
    assert T.label(T.parent(map_char("q", T))) == "LOWER"


def test_map_char_outside_tree():
    assert map_char("\t", T) is None
    assert pattern_based_distance("a", "\t", T) == float("inf")


def test_nca_examples():
    a, three, plus = (map_char(c, T) for c in "a3+")
    assert nearest_common_ancestor(a, a, T) == a
    assert T.label(nearest_common_ancestor(a, three, T)) == "ALNUM"
    assert T.label(nearest_common_ancestor(a, plus, T)) == "ANY"


def test_nca_matches_root_path_intersection():
    # every node pair, including internal ones
    for x, y in itertools.product(range(len(T)), repeat=2):
        px, py = T.root_path(x), T.root_path(y)
        common = [n for n in px if n in py]
        # root_path runs root first, so the deepest shared node is last
        assert nearest_common_ancestor(x, y, T) == common[-1]


def test_generalization_cost_examples():
    a = map_char("a", T)
    assert generalization_cost(a, a, T) == 0
    assert generalization_cost(a, nid("ALNUM"), T) == 3
    assert generalization_cost(map_char("3", T), nid("ALNUM"), T) == 2
    with pytest.raises(TreeError):
        generalization_cost(a, nid("DIGIT"), T)


def test_distance_examples():
    assert pattern_based_distance("a", "a", T) == 0
    assert pattern_based_distance("a", "3", T) == 5
    assert pattern_based_distance("a", "+", T) == 6


@given(st.sampled_from(PRINTABLE), st.sampled_from(PRINTABLE))
def test_distance_matches_graph_walk(x, y):
    assert pattern_based_distance(x, y, T) == (0 if x == y else bfs_distance(x, y))


def test_distance_bounded_by_root_costs():
    root = T.root
    for x, y in itertools.combinations(PRINTABLE, 2):
        bound = generalization_cost(map_char(x, T), root, T) + generalization_cost(map_char(y, T), root, T)
        assert pattern_based_distance(x, y, T) <= bound


def test_oracle_root_paths_agree_with_tree():
    for c in PRINTABLE:
        mine = [T.label(n) for n in reversed(T.root_path(map_char(c, T)))][1:]
        assert mine == root_path(("leaf", c))[1:]


def test_segment_distance_examples():
    assert segment_distance("abcd", "abcd", T) == 0
    assert segment_distance("1234", "abcd", T) == 20
    assert segment_distance("ab+d", "abcd", T) == 6


@given(short, short)
def test_segment_distance_matches_script_enumeration(a, b):
    assert segment_distance(a, b, T) == all_scripts_distance(a, b)


@given(st.text(alphabet=PRINTABLE, max_size=40), st.text(alphabet=PRINTABLE, max_size=40))
def test_segment_distance_long_strings(a, b):
    # long pairs go through the vectorized path
    assert segment_distance(a, b, T) == edit_distance(a, b)


@given(short, short)
def test_segment_distance_symmetric_and_zero_iff_equal(a, b):
    d = segment_distance(a, b, T)
    assert d == segment_distance(b, a, T)
    assert (d == 0) == (a == b)


def test_indel_cost_parameter():
    assert segment_distance("ab", "abc", T, DistanceParams(indel_cost=1.5)) == 1.5
    with pytest.raises(ValueError):
        DistanceParams(indel_cost=-1)


def test_tree_file_round_trip():
    text = format_tree(T)
    again = parse_tree(text)
    assert again == T
    assert again.char_distance("a", "3") == 5


def test_custom_tree():
    t = parse_tree("0 ROOT\n1 VOWEL aeiou\n1 CONS b-df-hj-np-tv-z\n")
    assert t.char_distance("a", "e") == 2
    assert t.char_distance("a", "b") == 4
    assert segment_distance("ab", "eb", t) == 2


@pytest.mark.parametrize("text, msg", [
    ("", "empty"),
    ("0 ANY\n0 OTHER a\n", "root"),
    ("0 ANY\n1 A ab\n1 B bc\n", "b"),
    ("0 ANY\n2 A a\n", "depth"),
])
def test_tree_file_errors(text, msg):
    with pytest.raises(TreeError):
        parse_tree(text)
