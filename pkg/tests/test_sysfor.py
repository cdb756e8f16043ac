import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrigdemand.c45 import C45Params, DecisionTree, Leaf, build_tree, predict
from irrigdemand.sysfor import (
    Forest,
    SysForParams,
    build_forest,
    forest_from_dict,
    forest_to_dict,
    load_forest,
    save_forest,
    select_good_attributes,
    voting2_leaf,
    voting2_predict,
)

import oracles
from helpers import make_dataset, make_schema, one_good_fixture, random_table, three_good_fixture

LOOSE = C45Params(min_leaf=1, min_gain_ratio=0.0)


def leaf_of(node, values):
    """Independent traversal used as the voting oracle."""
    while not isinstance(node, Leaf):
        t = node.test
        v = values[t.attribute]
        if t.threshold is not None:
            node = node.children[0 if v <= t.threshold else 1]
        elif v in t.categories:
            node = node.children[t.categories.index(v)]
        else:
            sizes = [c.support for c in node.children]
            node = node.children[sizes.index(max(sizes))]
    return node


class TestParams:
    @pytest.mark.parametrize("kw", [{"num_trees": 0}, {"goodness": 0}, {"goodness": 1.5}, {"separation": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SysForParams(**kw)


class TestGoodAttributes:
    def test_single_informative(self):
        ds = make_dataset([[0.0, 5.0], [0.0, 5.0], [1.0, 5.0], [1.0, 5.0]], [0, 0, 1, 1], ["num", "num"])
        good = select_good_attributes(ds, SysForParams(c45=LOOSE))
        assert [(g.attribute, g.threshold) for g in good] == [(0, 0.5)]
        assert good[0].gain_ratio == pytest.approx(1.0)

    def test_tie_ordered_by_index(self):
        rows = [[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]]
        ds = make_dataset(rows, [0, 0, 1, 1], ["num", "num"])
        good = select_good_attributes(ds, SysForParams(c45=LOOSE))
        assert [g.attribute for g in good] == [0, 1]

    def test_three_good(self):
        ds, _, _ = three_good_fixture()
        good = select_good_attributes(ds, SysForParams(c45=LOOSE))
        assert [g.attribute for g in good] == [0, 1, 2]
        assert good[0].gain_ratio > good[1].gain_ratio > good[2].gain_ratio

    def test_separation_drops_close_thresholds(self):
        rows = [[float(x)] for x in range(10)]
        labels = [0, 0, 0, 1, 1, 1, 1, 2, 2, 2]
        ds = make_dataset(rows, labels, ["num"])
        wide = select_good_attributes(ds, SysForParams(goodness=0.1, separation=1.0, c45=LOOSE))
        assert len(wide) == 1
        narrow = select_good_attributes(ds, SysForParams(goodness=0.1, separation=0.01, c45=LOOSE))
        assert len(narrow) > 1

    @settings(max_examples=150)
    @given(st.integers(0, 10**6), st.integers(1, 10), st.integers(1, 4),
           st.sampled_from([0.1, 0.3, 0.7]), st.sampled_from([0.05, 0.3, 0.6]), st.integers(1, 2))
    def test_brute_force(self, seed, n, n_attrs, goodness, separation, min_leaf):
        rng = random.Random(seed)
        kinds = [rng.choice(["num", "cat"]) for _ in range(n_attrs)]
        rows, labels = random_table(rng, n, kinds, levels=6)
        ds = make_dataset(rows, labels, kinds)
        params = SysForParams(goodness=goodness, separation=separation, c45=C45Params(min_leaf=min_leaf))
        got = select_good_attributes(ds, params)
        want = oracles.good_splits(rows, labels, kinds, goodness, separation, min_leaf)
        assert [(g.attribute, g.threshold) for g in got] == [(j, t) for _, j, t in want]
        assert [g.gain_ratio for g in got] == pytest.approx([g for g, _, _ in want], abs=1e-12)


class TestBuildForest:
    def test_one_tree_is_forced_c45(self):
        ds, _, _ = three_good_fixture()
        params = SysForParams(num_trees=1, c45=LOOSE)
        forest = build_forest(ds, params)
        best = select_good_attributes(ds, params)[0]
        assert forest.trees == (build_tree(ds, LOOSE, forced_root=best.test),)

    def test_three_good_three_trees(self):
        ds, _, _ = three_good_fixture()
        forest = build_forest(ds, SysForParams(num_trees=3, c45=LOOSE))
        roots = [t.root.test for t in forest.trees]
        assert len(forest) == 3
        assert len({r.key for r in roots}) == 3
        assert [r.attribute for r in roots] == [0, 1, 2]

    def test_one_good_alternative_level_one(self):
        ds = one_good_fixture()
        params = SysForParams(num_trees=5, goodness=0.6, c45=LOOSE)
        assert len(select_good_attributes(ds, params)) == 1
        forest = build_forest(ds, params)
        assert len(forest) == 3  # the left branch offers a1..a3; the right branch is pure
        roots = {t.root.test for t in forest.trees}
        assert len(roots) == 1
        level_one = [t.root.children[0].test.key for t in forest.trees]
        assert len(set(level_one)) == len(level_one)
        for t in forest.trees[1:]:
            assert t.root.children[1] == forest.trees[0].root.children[1]

    def test_no_good_split_gives_single_leaf(self):
        ds = make_dataset([[1.0], [1.0]], [0, 1], ["num"])
        forest = build_forest(ds, SysForParams(c45=LOOSE))
        assert len(forest) == 1 and isinstance(forest.trees[0].root, Leaf)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 6))
    def test_tree_count_and_step_two_roots(self, seed, num_trees):
        rng = random.Random(seed)
        kinds = ["num", "cat", "num"]
        rows, labels = random_table(rng, 40, kinds, levels=8)
        ds = make_dataset(rows, labels, kinds)
        params = SysForParams(num_trees=num_trees, c45=C45Params(min_leaf=2, min_gain_ratio=0))
        forest = build_forest(ds, params)
        assert 1 <= len(forest) <= num_trees
        good = select_good_attributes(ds, params)
        step_two = forest.trees[: len(good)]
        assert [t.root.test for t in step_two] == [g.test for g in good[:num_trees]]
        assert build_forest(ds, params) == forest


class TestVoting:
    def test_most_accurate_leaf_wins(self):
        schema = make_schema(["num"], n_classes=2)
        a = DecisionTree(Leaf.from_counts([7, 3]), schema, LOOSE)
        b = DecisionTree(Leaf.from_counts([1, 9]), schema, LOOSE)
        forest = Forest((a, b), SysForParams(), schema)
        assert voting2_predict(forest, (0.0,)) == 1
        assert voting2_leaf(forest, (0.0,))[1] == 1

    def test_support_then_index_break_ties(self):
        schema = make_schema(["num"], n_classes=2)
        small = DecisionTree(Leaf.from_counts([8, 2]), schema, LOOSE)
        big = DecisionTree(Leaf.from_counts([4, 16]), schema, LOOSE)
        assert voting2_predict(Forest((small, big), SysForParams(), schema), (0.0,)) == 1
        twin = DecisionTree(Leaf.from_counts([16, 4]), schema, LOOSE)
        assert voting2_leaf(Forest((twin, big), SysForParams(), schema), (0.0,))[:2] == (0, 0)

    def test_single_tree_matches_c45(self):
        ds, _, _ = three_good_fixture()
        forest = build_forest(ds, SysForParams(num_trees=1, c45=LOOSE))
        for r in ds:
            assert voting2_predict(forest, r) == predict(forest.trees[0], r)[0]

    def test_unanimous(self):
        ds, _, _ = three_good_fixture()
        forest = build_forest(ds, SysForParams(num_trees=3, c45=LOOSE))
        for r in ds:
            votes = {predict(t, r)[0] for t in forest.trees}
            if len(votes) == 1:
                assert voting2_predict(forest, r) == votes.pop()

    def test_oracle_random_records(self):
        rng = random.Random(5)
        kinds = ["num", "cat", "num", "num"]
        rows, labels = random_table(rng, 120, kinds, levels=10)
        ds = make_dataset(rows, labels, kinds)
        forest = build_forest(ds, SysForParams(num_trees=5, c45=C45Params(min_leaf=3, min_gain_ratio=0)))
        assert len(forest) >= 3
        probes, _ = random_table(rng, 300, kinds, levels=12)
        for values in probes:
            leaves = [leaf_of(t.root, values) for t in forest.trees]
            best = max(range(len(leaves)), key=lambda i: (leaves[i].leaf_accuracy, leaves[i].support, -i))
            assert voting2_predict(forest, values) == leaves[best].majority_class


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        rng = random.Random(2)
        kinds = ["num", "cat"]
        rows, labels = random_table(rng, 60, kinds)
        ds = make_dataset(rows, labels, kinds)
        forest = build_forest(ds, SysForParams(num_trees=4, c45=C45Params(min_leaf=2)))
        assert forest_from_dict(json.loads(json.dumps(forest_to_dict(forest)))) == forest
        save_forest(forest, tmp_path / "f.json")
        loaded = load_forest(tmp_path / "f.json")
        assert [voting2_predict(loaded, r) for r in ds] == [voting2_predict(forest, r) for r in ds]

    def test_rejects_tree_document(self):
        with pytest.raises(ValueError):
            forest_from_dict({"format": "irrigdemand.c45-tree", "version": 1})
