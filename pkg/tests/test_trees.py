import json

import numpy as np
import pytest
from hypothesis import given

from conftest import trees
from tedlearn.trees import (
    Alphabet,
    AlphabetError,
    Dataset,
    DatasetFormatError,
    Tree,
    TreeSyntaxError,
    dataset_from_dict,
    load_dataset,
    parse_tree,
    random_tree,
    serialize_tree,
)


def test_parse_nested():
    t = parse_tree("1(2,3(4))")
    assert t.label == "1"
    assert [c.label for c in t.children] == ["2", "3"]
    assert t.size == 4
    assert [n.label for n in t.postorder()] == ["2", "4", "3", "1"]
    assert [n.label for n in t.preorder()] == ["1", "2", "3", "4"]


def test_whitespace_is_ignored():
    assert parse_tree(" a ( b , c ) ") == parse_tree("a(b,c)")


@given(trees())
def test_serialize_round_trip(t):
    assert parse_tree(serialize_tree(t)) == t
    assert str(t) == serialize_tree(t)


@pytest.mark.parametrize("text, pos", [("a(", 2), ("a(b", 3), ("a)b", 1), ("", 0), ("a(b,)", 4)])
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(TreeSyntaxError) as err:
        parse_tree(text)
    assert err.value.position == pos


def test_gap_symbol_cannot_label_a_node():
    with pytest.raises(AlphabetError):
        parse_tree("a(-)")
    with pytest.raises(AlphabetError):
        Alphabet(("a", "-"))


def test_alphabet_membership_is_checked():
    A = Alphabet(("a", "b"))
    with pytest.raises(AlphabetError):
        parse_tree("a(c)", A)
    assert A.index("-") == 2
    assert A.extended == ("a", "b", "-")


def test_duplicate_symbols_rejected():
    with pytest.raises(AlphabetError):
        Alphabet(("a", "a"))


def test_dataset_round_trip(tmp_path):
    A = Alphabet(("a", "b"))
    d = Dataset(A, [(parse_tree("a(b)"), "x"), (parse_tree("b"), "y")])
    path = tmp_path / "d.json"
    d.save(path)
    back = load_dataset(path)
    assert back.alphabet == A
    assert back.records == d.records
    assert back.classes == ["x", "y"]


@pytest.mark.parametrize(
    "doc",
    [{}, {"alphabet": ["a"], "records": []}, {"alphabet": ["a"], "records": [{"tree": "a"}]}],
)
def test_malformed_datasets(doc):
    with pytest.raises(DatasetFormatError):
        dataset_from_dict(doc)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DatasetFormatError):
        load_dataset(p)


def test_random_tree_respects_bounds():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = random_tree(rng, ("a", "b"), 6)
        assert 1 <= t.size <= 6
        assert set(t.labels()) <= {"a", "b"}


def test_tree_is_hashable_and_frozen():
    t = Tree("a", (Tree("b"),))
    assert {t: 1}[parse_tree("a(b)")] == 1
    with pytest.raises(Exception):
        t.label = "c"
