import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrigdemand.c45 import (
    C45Params,
    Internal,
    Leaf,
    SplitTest,
    best_numeric_split,
    best_split,
    build_tree,
    entropy,
    extract_rules,
    gain_ratio,
    load_tree,
    predict,
    predict_many,
    save_tree,
    tree_from_dict,
    tree_to_dict,
)
from irrigdemand.core import Dataset, TrainingRecord, default_schema

import oracles
from helpers import make_dataset, random_table

GROW_ALL = C45Params(min_leaf=1, min_gain_ratio=0.0, max_depth=None)


@st.composite
def tables(draw, max_rows=12, max_attrs=3, n_classes=3):
    kinds = draw(st.lists(st.sampled_from(["num", "cat"]), min_size=1, max_size=max_attrs))
    n = draw(st.integers(1, max_rows))
    rows = [
        [float(draw(st.integers(0, 4))) if k == "num" else draw(st.sampled_from("PQR")) for k in kinds]
        for _ in range(n)
    ]
    labels = draw(st.lists(st.integers(0, n_classes - 1), min_size=n, max_size=n))
    return rows, labels, kinds


def walk(node):
    yield node
    if isinstance(node, Internal):
        for c in node.children:
            yield from walk(c)


class TestEntropy:
    def test_uniform(self):
        assert entropy([5, 5]) == 1.0

    def test_pure(self):
        assert entropy([8, 0]) == 0.0

    def test_nine_five(self):
        assert entropy([9, 5]) == pytest.approx(0.94029, abs=1e-4)
        assert entropy([9, 5]) == pytest.approx(oracles.entropy([9, 5]), abs=1e-12)

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=6).filter(lambda c: sum(c) > 0))
    def test_bounds(self, counts):
        h = entropy(counts)
        assert -1e-12 <= h <= math.log2(len(counts)) + 1e-12
        assert h == pytest.approx(oracles.entropy(counts), abs=1e-12)


class TestGainRatio:
    def test_perfect_binary(self):
        ds = make_dataset([[0.0], [0.0], [1.0], [1.0]], [0, 0, 1, 1], ["num"])
        assert gain_ratio(ds, SplitTest(0, 0.5)) == pytest.approx(1.0)

    def test_independent(self):
        ds = make_dataset([[0.0], [0.0], [1.0], [1.0]], [0, 1, 0, 1], ["num"])
        assert gain_ratio(ds, SplitTest(0, 0.5)) == 0.0

    def test_six_record_fixture(self):
        ds = make_dataset([[x] for x in [1.0, 1.5, 2.0, 3.0, 4.0, 5.0]], [0, 0, 1, 1, 1, 1], ["num"])
        assert gain_ratio(ds, SplitTest(0, 2.0)) == pytest.approx(0.4591, abs=1e-4)

    def test_categorical(self):
        ds = make_dataset([["P"], ["Q"], ["R"], ["P"]], [0, 1, 2, 0], ["cat"])
        expected = oracles.gain_ratio([[0, 0], [1], [2]])
        assert gain_ratio(ds, SplitTest(0, None, ("P", "Q", "R"))) == pytest.approx(expected)

    @given(tables())
    def test_matches_oracle(self, table):
        rows, labels, kinds = table
        ds = make_dataset(rows, labels, kinds)
        for g, j, t in oracles.candidate_splits(rows, labels, kinds):
            if t is None:
                cats = tuple(sorted({r[j] for r in rows}))
                test = SplitTest(j, None, cats)
            else:
                test = SplitTest(j, t)
            assert gain_ratio(ds, test) == pytest.approx(g, abs=1e-12)


class TestBestNumericSplit:
    def test_constant(self):
        ds = make_dataset([[1.0]] * 3, [0, 1, 0], ["num"])
        assert best_numeric_split(ds, 0) is None

    def test_two_values(self):
        ds = make_dataset([[1.0], [3.0]], [0, 1], ["num"])
        assert best_numeric_split(ds, "a0") == (2.0, 1.0)

    def test_rejects_categorical(self):
        ds = make_dataset([["P"], ["Q"]], [0, 1], ["cat"])
        with pytest.raises(ValueError):
            best_numeric_split(ds, 0)

    @given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 2)), min_size=1, max_size=8))
    def test_argmax_oracle(self, pairs):
        rows = [[float(x)] for x, _ in pairs]
        labels = [y for _, y in pairs]
        got = best_numeric_split(make_dataset(rows, labels, ["num"]), 0)
        want = oracles.best_split(rows, labels, ["num"])
        if want is None:
            assert got is None
        else:
            assert got[0] == want[2]
            assert got[1] == pytest.approx(want[0], abs=1e-12)


class TestBestSplit:
    @settings(max_examples=150)
    @given(tables(max_rows=10, max_attrs=4), st.integers(1, 3))
    def test_root_is_brute_force_argmax(self, table, min_leaf):
        rows, labels, kinds = table
        ds = make_dataset(rows, labels, kinds)
        got = best_split(ds, min_leaf)
        want = oracles.best_split(rows, labels, kinds, min_leaf)
        if want is None:
            assert got is None
            return
        assert got.test.attribute == want[1]
        assert got.test.threshold == want[2]
        assert got.gain_ratio == pytest.approx(want[0], abs=1e-12)


def xor_dataset():
    return make_dataset([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [0, 1, 1, 0], ["num", "num"])


def table1_dataset():
    schema = default_schema()
    rows = [
        ((18.1, 3.8, 80.0, 122.0, 0.2, 9.5, "SMC", "Barley"), "0.01-0.05"),
        ((16.4, 6.7, 48.0, 481.0, 0.0, 16.6, "RBE", "Wheat"), "0.06-0.10"),
        ((30.1, 14.0, 65.0, 275.0, 0.0, 24.7, "SMC", "Rice"), "0.11-0.15"),
        ((30.7, 15.9, 58.0, 257.0, 0.0, 29.3, "SMC", "Corn"), "0.06-0.10"),
    ]
    return Dataset(schema, tuple(TrainingRecord(v, schema.label_index(lab)) for v, lab in rows))


class TestBuildTree:
    def test_pure_is_leaf(self):
        tree = build_tree(make_dataset([[1.0], [2.0]], [1, 1], ["num"]), GROW_ALL)
        assert isinstance(tree.root, Leaf)
        assert tree.root.majority_class == 1 and tree.root.leaf_accuracy == 1.0

    def test_xor(self):
        ds = xor_dataset()
        tree = build_tree(ds, GROW_ALL)
        assert tree.depth == 2
        assert predict_many(tree, ds) == ds.labels

    def test_xor_blocked_by_min_gain(self):
        tree = build_tree(xor_dataset(), C45Params(min_leaf=1, min_gain_ratio=0.01))
        assert isinstance(tree.root, Leaf)

    def test_table1_resubstitution(self):
        ds = table1_dataset()
        tree = build_tree(ds, C45Params(min_leaf=1))
        assert predict_many(tree, ds) == ds.labels

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_tree(make_dataset([], [], ["num"]))

    def test_min_leaf_stops(self):
        ds = make_dataset([[float(i)] for i in range(10)], [0] * 5 + [1] * 5, ["num"])
        assert isinstance(build_tree(ds, C45Params(min_leaf=6)).root, Leaf)
        assert build_tree(ds, C45Params(min_leaf=5)).root.test == SplitTest(0, 4.5)

    def test_max_depth(self):
        rng = random.Random(3)
        rows, labels = random_table(rng, 60, ["num", "num", "num"], levels=20)
        ds = make_dataset(rows, labels, ["num"] * 3)
        assert build_tree(ds, C45Params(min_leaf=1, min_gain_ratio=0, max_depth=2)).depth <= 2
        assert isinstance(build_tree(ds, C45Params(min_leaf=1, max_depth=0)).root, Leaf)

    def test_forced_root_empty_branch(self):
        ds = make_dataset([[1.0], [2.0], [2.0]], [0, 1, 1], ["num"])
        tree = build_tree(ds, GROW_ALL, forced_root=SplitTest(0, 10.0))
        empty = tree.root.children[1]
        assert isinstance(empty, Leaf)
        assert (empty.support, empty.leaf_accuracy, empty.majority_class) == (0, 0.0, 1)

    @settings(max_examples=80)
    @given(tables(max_rows=40, max_attrs=3), st.integers(1, 4))
    def test_structure_invariants(self, table, min_leaf):
        rows, labels, kinds = table
        ds = make_dataset(rows, labels, kinds)
        tree = build_tree(ds, C45Params(min_leaf=min_leaf, min_gain_ratio=0.0))
        assert sum(leaf.support for leaf in tree.leaves()) == len(ds)
        for node in walk(tree.root):
            if isinstance(node, Internal):
                summed = [sum(c) for c in zip(*(ch.class_counts for ch in node.children))]
                assert summed == list(node.class_counts)
                assert all(ch.support >= min_leaf for ch in node.children)
            else:
                assert node.leaf_accuracy == (max(node.class_counts) / node.support if node.support else 0.0)
        again = build_tree(ds, C45Params(min_leaf=min_leaf, min_gain_ratio=0.0))
        assert again == tree

    @settings(max_examples=60)
    @given(tables(max_rows=30, max_attrs=3))
    def test_consistent_data_fits_exactly(self, table):
        rows, labels, kinds = table
        first = {}
        labels = [first.setdefault(tuple(r), y) for r, y in zip(rows, labels)]
        ds = make_dataset(rows, labels, kinds)
        assert predict_many(build_tree(ds, GROW_ALL), ds) == ds.labels


class TestPredict:
    def test_single_leaf(self):
        tree = build_tree(make_dataset([[1.0], [2.0], [3.0]], [2, 2, 0], ["num"]), C45Params(min_leaf=5))
        assert predict(tree, (99.0,))[0] == 2

    def test_unseen_category_follows_largest_child(self):
        ds = make_dataset([["P"]] * 2 + [["Q"]] * 5, [0, 0, 1, 1, 1, 1, 1], ["cat"])
        tree = build_tree(ds, GROW_ALL)
        assert tree.root.test.categories == ("P", "Q")
        label, leaf = predict(tree, ("Z",))
        assert label == 1 and leaf.support == 5

    def test_accepts_record_or_values(self):
        ds = xor_dataset()
        tree = build_tree(ds, GROW_ALL)
        assert predict(tree, ds.records[1]) == predict(tree, ds.records[1].values)


class TestRules:
    def test_single_leaf_rule(self):
        tree = build_tree(make_dataset([[1.0]], [0], ["num"]))
        (rule,) = extract_rules(tree)
        assert rule.conditions == () and str(rule).startswith("IF TRUE THEN 0.01-0.05")

    @settings(max_examples=60)
    @given(tables(max_rows=40, max_attrs=3))
    def test_filter_replay(self, table):
        rows, labels, kinds = table
        ds = make_dataset(rows, labels, kinds)
        tree = build_tree(ds, GROW_ALL)
        rules = extract_rules(tree)
        assert len(rules) == tree.n_leaves
        for rule in rules:
            selected = [r for r in ds if rule.matches(r, ds.schema)]
            assert len(selected) == rule.support
            for r in selected:
                assert predict(tree, r)[0] == rule.majority_class
        for r in ds:
            assert sum(rule.matches(r, ds.schema) for rule in rules) == 1


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        rng = random.Random(11)
        kinds = ["num", "cat", "num"]
        rows, labels = random_table(rng, 80, kinds)
        ds = make_dataset(rows, labels, kinds)
        tree = build_tree(ds, C45Params(min_leaf=2, min_gain_ratio=0))
        assert tree_from_dict(json.loads(json.dumps(tree_to_dict(tree)))) == tree
        save_tree(tree, tmp_path / "t.json")
        loaded = load_tree(tmp_path / "t.json")
        assert predict_many(loaded, ds) == predict_many(tree, ds)

    def test_rejects_foreign_document(self):
        with pytest.raises(ValueError):
            tree_from_dict({"format": "something-else", "version": 1})

    def test_document_shape(self):
        d = tree_to_dict(build_tree(xor_dataset(), GROW_ALL))
        assert (d["format"], d["version"]) == ("irrigdemand.c45-tree", 1)
        assert d["root"]["attribute"] == "a0" and d["root"]["threshold"] == 0.5
        assert len(d["root"]["children"]) == 2
