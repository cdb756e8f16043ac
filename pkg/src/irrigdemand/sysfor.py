"""SysFor: a forest of gain-ratio trees grown from alternative good splits.

Construction:

1. Rank every admissible split at the root by gain ratio and keep the
   "good" ones: within a relative factor of the best, and (for repeated
   numerical attributes) with thresholds spread apart.
2. Grow one tree per good split, using it as the forced root, up to the
   requested number of trees.
3. If trees are still missing, reuse the first tree's root, look for good
   splits inside each branch it creates, and grow extra trees that swap
   one branch's level-1 subtree for one rooted at an alternative split.

Prediction (Voting-2): of all the leaves a record reaches, one per tree,
the most accurate leaf decides.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .c45 import (
    TIE_TOL,
    C45Params,
    DecisionTree,
    Internal,
    Leaf,
    SplitTest,
    _all_candidates,
    _Encoded,
    _grow,
    node_from_dict,
    node_to_dict,
    predict,
    rank_by_score,
    schema_from_dict,
    schema_to_dict,
)
from .core import AttributeSchema, Dataset


@dataclass(frozen=True)
class SysForParams:
    num_trees: int = 5
    goodness: float = 0.3
    separation: float = 0.3
    c45: C45Params = field(default_factory=C45Params)

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")
        if not 0 < self.goodness <= 1:
            raise ValueError("goodness must be in (0, 1]")
        if not 0 < self.separation <= 1:
            raise ValueError("separation must be in (0, 1]")


@dataclass(frozen=True)
class GoodAttribute:
    test: SplitTest
    gain_ratio: float

    @property
    def attribute(self) -> int:
        return self.test.attribute

    @property
    def threshold(self) -> float | None:
        return self.test.threshold


@dataclass(frozen=True)
class Forest:
    trees: tuple[DecisionTree, ...]
    params: SysForParams
    schema: AttributeSchema

    def predict(self, record) -> int:
        return voting2_predict(self, record)

    def __len__(self):
        return len(self.trees)


def _select_good(enc: _Encoded, idx: np.ndarray, params: SysForParams, skip=frozenset()) -> list[GoodAttribute]:
    cands = _all_candidates(enc, idx, params.c45.min_leaf, skip)
    if not cands:
        return []
    best = max(c.gain_ratio for c in cands)
    if best <= 0:
        return []
    cutoff = params.goodness * best - TIE_TOL
    kept = [c for c in cands if c.gain_ratio > 0 and c.gain_ratio >= cutoff]
    kept = rank_by_score(kept, lambda c: c.gain_ratio, lambda c: c.test.key)

    ranges = {}
    chosen: list[GoodAttribute] = []
    for c in kept:
        t = c.test
        if t.is_numerical:
            if t.attribute not in ranges:
                col = enc.columns[t.attribute][idx]
                ranges[t.attribute] = float(col.max() - col.min())
            gap = params.separation * ranges[t.attribute]
            if any(
                g.attribute == t.attribute and abs(g.threshold - t.threshold) < gap
                for g in chosen
            ):
                continue
        chosen.append(GoodAttribute(t, c.gain_ratio))
    return chosen


def select_good_attributes(dataset: Dataset, params: SysForParams | None = None) -> list[GoodAttribute]:
    """Good splits of ``dataset``, best gain ratio first.

    A split is good when its gain ratio is positive and at least
    ``goodness`` times the best one.  A numerical attribute may appear more
    than once, but each of its thresholds must sit at least ``separation``
    times the attribute's observed range away from the ones already taken
    (checked greedily from the best split down).  Splits must leave
    ``c45.min_leaf`` records in every branch.
    """
    params = params or SysForParams()
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    enc = _Encoded(dataset)
    return _select_good(enc, np.arange(len(dataset)), params)


def _level_one_key(node):
    return node.test.key if isinstance(node, Internal) else None


def build_forest(dataset: Dataset, params: SysForParams | None = None) -> Forest:
    params = params or SysForParams()
    if len(dataset) == 0:
        raise ValueError("cannot build a forest from an empty dataset")
    schema = dataset.schema
    enc = _Encoded(dataset)
    idx = np.arange(len(dataset))
    c45 = params.c45

    good = _select_good(enc, idx, params)
    if not good:
        leaf = Leaf.from_counts(enc.class_counts(idx))
        return Forest((DecisionTree(leaf, schema, c45),), params, schema)

    trees = [
        DecisionTree(_grow(enc, idx, 0, c45, frozenset(), g.test), schema, c45)
        for g in good[: params.num_trees]
    ]
    missing = params.num_trees - len(trees)
    if missing > 0:
        trees.extend(_alternative_trees(enc, idx, trees[0], params, missing))
    return Forest(tuple(trees), params, schema)


def _alternative_trees(enc, idx, first: DecisionTree, params: SysForParams, limit: int) -> list[DecisionTree]:
    root = first.root
    if not isinstance(root, Internal):
        return []
    c45 = params.c45
    used = frozenset() if root.test.is_numerical else frozenset({root.test.attribute})
    parts = enc.partition(idx, root.test)

    swaps = []
    for p, part in enumerate(parts):
        if len(part) == 0:
            continue
        taken = _level_one_key(root.children[p])
        for g in _select_good(enc, part, params, used):
            if g.test.key != taken:
                swaps.append((g, p))
    swaps = rank_by_score(swaps, lambda s: s[0].gain_ratio, lambda s: (s[1], s[0].test.key))

    out = []
    for g, p in swaps[:limit]:
        children = list(root.children)
        children[p] = _grow(enc, parts[p], 1, c45, used, g.test)
        joined = Internal(root.test, tuple(children), root.class_counts)
        out.append(DecisionTree(joined, first.schema, c45))
    return out


def voting2_leaf(forest: Forest, record) -> tuple[int, int, Leaf]:
    """``(class, tree_index, leaf)`` for the winning leaf.

    Leaves are ranked by accuracy, then support, then earlier tree.
    """
    if not forest.trees:
        raise ValueError("forest is empty")
    best = None
    for i, tree in enumerate(forest.trees):
        _, leaf = predict(tree, record)
        key = (leaf.leaf_accuracy, leaf.support, -i)
        if best is None or key > best[0]:
            best = (key, i, leaf)
    _, i, leaf = best
    return leaf.majority_class, i, leaf


def voting2_predict(forest: Forest, record) -> int:
    return voting2_leaf(forest, record)[0]


FOREST_FORMAT = "irrigdemand.sysfor-forest"
FORMAT_VERSION = 1


def forest_to_dict(forest: Forest) -> dict:
    return {
        "format": FOREST_FORMAT,
        "version": FORMAT_VERSION,
        "schema": schema_to_dict(forest.schema),
        "params": asdict(forest.params),
        "trees": [node_to_dict(t.root, forest.schema) for t in forest.trees],
    }


def forest_from_dict(d: dict) -> Forest:
    if d.get("format") != FOREST_FORMAT:
        raise ValueError(f"not a {FOREST_FORMAT} document")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported forest format version {d.get('version')!r}")
    schema = schema_from_dict(d["schema"])
    p = dict(d["params"])
    params = SysForParams(c45=C45Params(**p.pop("c45")), **p)
    trees = tuple(DecisionTree(node_from_dict(r, schema), schema, params.c45) for r in d["trees"])
    return Forest(trees, params, schema)


def save_forest(forest: Forest, path) -> None:
    Path(path).write_text(json.dumps(forest_to_dict(forest), indent=1) + "\n", encoding="utf-8")


def load_forest(path) -> Forest:
    return forest_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
