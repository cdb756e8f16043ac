"""Gain-ratio decision trees in the C4.5 style.

Numerical attributes split in two at a threshold (``value <= t`` goes
left); categorical attributes split many ways, one branch per category seen
at the node.  There is no pruning: growth stops on purity, minimum leaf
size, minimum gain ratio, or depth.

Trees are immutable once built.  Leaves keep their full class counts so
that forest voting can rank leaves by accuracy.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from .core import Attribute, AttributeKind, AttributeSchema, Dataset, TrainingRecord, UsageBin

# Gain ratios closer than this count as tied; ties go to the lowest
# attribute index, then the lowest threshold.
TIE_TOL = 1e-9
_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class C45Params:
    min_leaf: int = 10
    min_gain_ratio: float = 0.01
    max_depth: int | None = 15

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")


@dataclass(frozen=True)
class SplitTest:
    """A node test on one attribute.

    Numerical: ``threshold`` set, two branches (``<=`` then ``>``).
    Categorical: ``categories`` lists the branch values in child order.
    """

    attribute: int
    threshold: float | None = None
    categories: tuple[str, ...] = ()

    @property
    def is_numerical(self) -> bool:
        return self.threshold is not None

    @property
    def n_branches(self) -> int:
        return 2 if self.is_numerical else len(self.categories)

    @property
    def key(self) -> tuple:
        """Identity used for ordering and de-duplication."""
        return (self.attribute, -math.inf if self.threshold is None else self.threshold)

    def branch(self, value) -> int | None:
        """Child index for ``value``, or None for an unseen category."""
        if self.is_numerical:
            return 0 if value <= self.threshold else 1
        try:
            return self.categories.index(value)
        except ValueError:
            return None

    def describe(self, schema: AttributeSchema) -> str:
        name = schema.attributes[self.attribute].name
        if self.is_numerical:
            return f"{name} <= {self.threshold:g}"
        return f"{name} in {{{', '.join(self.categories)}}}"


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple[int, ...]
    majority_class: int
    support: int
    leaf_accuracy: float

    @classmethod
    def from_counts(cls, counts, fallback_class: int | None = None) -> "Leaf":
        counts = tuple(int(c) for c in counts)
        support = sum(counts)
        if support == 0:
            # Only forced splits can create an empty branch.
            return cls(counts, fallback_class or 0, 0, 0.0)
        majority = max(range(len(counts)), key=lambda c: (counts[c], -c))
        return cls(counts, majority, support, counts[majority] / support)


@dataclass(frozen=True)
class Internal:
    test: SplitTest
    children: tuple["Node", ...]
    class_counts: tuple[int, ...]

    @property
    def support(self) -> int:
        return sum(self.class_counts)

    def route(self, value) -> "Node":
        b = self.test.branch(value)
        if b is None:
            # Unseen category: follow the best-populated branch (first on ties).
            b = max(range(len(self.children)), key=lambda i: (_support(self.children[i]), -i))
        return self.children[b]


Node = Union[Leaf, Internal]


def _support(node: Node) -> int:
    return node.support


@dataclass(frozen=True)
class DecisionTree:
    root: Node
    schema: AttributeSchema
    params: C45Params = field(default_factory=C45Params)

    def predict(self, record) -> tuple[int, Leaf]:
        return predict(self, record)

    def leaves(self) -> Iterator[Leaf]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                yield node
            else:
                stack.extend(reversed(node.children))

    @property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    @property
    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(c) for c in node.children)

        return walk(self.root)


# --- information measures -------------------------------------------------


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = [float(c) for c in class_counts]
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be non-negative")
    total = sum(counts)
    if total <= 0:
        raise ValueError("entropy needs at least one record")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return max(h, 0.0)


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Row-wise entropy of a 2-D count matrix (rows with zero total give 0)."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def _gain_ratio_from_groups(group_counts: np.ndarray) -> float:
    """Gain ratio of a partition given its groups x classes count matrix."""
    group_counts = np.asarray(group_counts, dtype=float)
    sizes = group_counts.sum(axis=1)
    sizes = sizes[sizes > 0]
    if len(sizes) < 2:
        return 0.0
    n = sizes.sum()
    parent = _entropy_rows(group_counts.sum(axis=0, keepdims=True))[0]
    child = _entropy_rows(group_counts)
    gain = parent - float((group_counts.sum(axis=1) / n) @ child)
    if gain <= _GAIN_EPS:
        return 0.0
    split_info = _entropy_rows(sizes[None, :])[0]
    return gain / split_info


# --- dataset encoding ------------------------------------------------------


class _Encoded:
    """Column-wise numeric view of a dataset used during induction."""

    def __init__(self, dataset: Dataset):
        schema = dataset.schema
        self.schema = schema
        self.n_classes = schema.n_classes
        self.y = np.fromiter((r.class_label for r in dataset.records), dtype=np.int64, count=len(dataset))
        self.columns: list[np.ndarray] = []
        self.categories: dict[int, tuple[str, ...]] = {}
        for j, attr in enumerate(schema.attributes):
            raw = [r.values[j] for r in dataset.records]
            if attr.is_numerical:
                self.columns.append(np.asarray(raw, dtype=float))
            else:
                cats = tuple(sorted(set(raw)))
                lookup = {c: i for i, c in enumerate(cats)}
                self.categories[j] = cats
                self.columns.append(np.fromiter((lookup[v] for v in raw), dtype=np.int64, count=len(raw)))

    def class_counts(self, idx: np.ndarray) -> np.ndarray:
        return np.bincount(self.y[idx], minlength=self.n_classes)

    def numeric_scan(self, idx: np.ndarray, attr: int, min_leaf: int):
        """All admissible thresholds of a numerical attribute with their gain ratios.

        Returns ``(thresholds, gain_ratios)``, thresholds ascending.
        """
        x = self.columns[attr][idx]
        y = self.y[idx]
        n = len(idx)
        if n < 2:
            return np.empty(0), np.empty(0)
        order = np.argsort(x, kind="stable")
        xs, ys = x[order], y[order]
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), ys] = 1.0
        left = np.cumsum(onehot, axis=0)[:-1]
        total = left[-1] + onehot[-1]
        right = total[None, :] - left
        n_left = np.arange(1, n, dtype=float)
        n_right = n - n_left
        ok = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not ok.any():
            return np.empty(0), np.empty(0)
        pos = np.nonzero(ok)[0]
        left, right, n_left, n_right = left[pos], right[pos], n_left[pos], n_right[pos]
        parent = _entropy_rows(total[None, :])[0]
        gain = parent - (n_left * _entropy_rows(left) + n_right * _entropy_rows(right)) / n
        p_left = n_left / n
        split_info = -(p_left * np.log2(p_left) + (1 - p_left) * np.log2(1 - p_left))
        gr = np.where(gain > _GAIN_EPS, gain / split_info, 0.0)
        lo, hi = xs[pos], xs[pos + 1]
        thresholds = (lo + hi) / 2.0
        # Adjacent floats can round the midpoint up onto the upper value.
        thresholds = np.where(thresholds < hi, thresholds, lo)
        return thresholds, gr

    def categorical_split(self, idx: np.ndarray, attr: int, min_leaf: int):
        """Multi-way split over the categories present, or None if inadmissible."""
        codes = self.columns[attr][idx]
        present = np.unique(codes)
        if len(present) < 2:
            return None
        counts = np.zeros((len(present), self.n_classes))
        for g, code in enumerate(present):
            counts[g] = np.bincount(self.y[idx][codes == code], minlength=self.n_classes)
        if counts.sum(axis=1).min() < min_leaf:
            return None
        cats = self.categories[attr]
        test = SplitTest(attr, None, tuple(cats[c] for c in present))
        return test, _gain_ratio_from_groups(counts)

    def partition(self, idx: np.ndarray, test: SplitTest) -> list[np.ndarray]:
        col = self.columns[test.attribute][idx]
        if test.is_numerical:
            mask = col <= test.threshold
            return [idx[mask], idx[~mask]]
        cats = self.categories[test.attribute]
        lookup = {c: i for i, c in enumerate(cats)}
        parts = []
        covered = np.zeros(len(idx), dtype=bool)
        for c in test.categories:
            code = lookup.get(c, -1)
            mask = col == code
            covered |= mask
            parts.append(idx[mask])
        if not covered.all():
            missing = sorted({cats[k] for k in col[~covered]})
            raise ValueError(f"categorical test does not cover categories {missing}")
        return parts


@dataclass(frozen=True)
class Candidate:
    test: SplitTest
    gain_ratio: float


def _candidates_by_attribute(enc: _Encoded, idx: np.ndarray, min_leaf: int, skip=frozenset()):
    """Yield ``(attr, thresholds_or_None, gain_ratios, tests)`` per attribute."""
    for j, attr in enumerate(enc.schema.attributes):
        if j in skip:
            continue
        if attr.is_numerical:
            ts, grs = enc.numeric_scan(idx, j, min_leaf)
            if len(ts):
                yield j, ts, grs
        else:
            got = enc.categorical_split(idx, j, min_leaf)
            if got is not None:
                test, gr = got
                yield j, test, np.array([gr])


def _all_candidates(enc: _Encoded, idx: np.ndarray, min_leaf: int, skip=frozenset()) -> list[Candidate]:
    out = []
    for j, ts, grs in _candidates_by_attribute(enc, idx, min_leaf, skip):
        if isinstance(ts, SplitTest):
            out.append(Candidate(ts, float(grs[0])))
        else:
            out.extend(Candidate(SplitTest(j, float(t)), float(g)) for t, g in zip(ts, grs))
    return out


def rank_by_score(items, score, tiebreak) -> list:
    """Sort descending by ``score``; scores within ``TIE_TOL`` of a run's
    leader count as equal and fall back to ascending ``tiebreak``."""
    ordered = sorted(items, key=lambda it: -score(it))
    out, run = [], []
    for it in ordered:
        if run and score(run[0]) - score(it) > TIE_TOL:
            out.extend(sorted(run, key=tiebreak))
            run = []
        run.append(it)
    out.extend(sorted(run, key=tiebreak))
    return out


def _best_candidate(enc: _Encoded, idx: np.ndarray, min_leaf: int, skip=frozenset()) -> Candidate | None:
    per_attr = list(_candidates_by_attribute(enc, idx, min_leaf, skip))
    if not per_attr:
        return None
    best = max(float(grs.max()) for _, _, grs in per_attr)
    for j, ts, grs in per_attr:
        hits = np.nonzero(grs >= best - TIE_TOL)[0]
        if len(hits):
            k = int(hits[0])
            if isinstance(ts, SplitTest):
                return Candidate(ts, float(grs[0]))
            return Candidate(SplitTest(j, float(ts[k])), float(grs[k]))
    return None  # pragma: no cover


# --- public split measures --------------------------------------------------


def gain_ratio(dataset: Dataset, test: SplitTest) -> float:
    """Information gain of ``test`` on ``dataset`` divided by its split information.

    A test leaving every record in one branch scores 0.
    """
    enc = _Encoded(dataset)
    idx = np.arange(len(dataset))
    parts = enc.partition(idx, test)
    counts = np.array([enc.class_counts(p) for p in parts], dtype=float)
    return _gain_ratio_from_groups(counts)


def best_numeric_split(dataset: Dataset, attribute, min_leaf: int = 1) -> tuple[float, float] | None:
    """``(threshold, gain_ratio)`` maximizing gain ratio on a numerical attribute."""
    j = attribute if isinstance(attribute, int) else dataset.schema.index(attribute)
    if not dataset.schema.attributes[j].is_numerical:
        raise ValueError(f"attribute {dataset.schema.attributes[j].name!r} is not numerical")
    enc = _Encoded(dataset)
    ts, grs = enc.numeric_scan(np.arange(len(dataset)), j, min_leaf)
    if not len(ts):
        return None
    k = int(np.nonzero(grs >= grs.max() - TIE_TOL)[0][0])
    return float(ts[k]), float(grs[k])


def best_split(dataset: Dataset, min_leaf: int = 1) -> Candidate | None:
    """The split ``build_tree`` would choose at the root of ``dataset``."""
    enc = _Encoded(dataset)
    return _best_candidate(enc, np.arange(len(dataset)), min_leaf)


# --- induction ---------------------------------------------------------------


def _grow(enc: _Encoded, idx: np.ndarray, depth: int, params: C45Params, used: frozenset,
          forced: SplitTest | None = None) -> Node:
    counts = enc.class_counts(idx)
    n = len(idx)
    if forced is not None:
        test = forced
    else:
        if (
            np.count_nonzero(counts) <= 1
            or n < 2 * params.min_leaf
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            return Leaf.from_counts(counts)
        best = _best_candidate(enc, idx, params.min_leaf, used)
        if best is None or best.gain_ratio < params.min_gain_ratio:
            return Leaf.from_counts(counts)
        test = best.test
    parent_leaf = Leaf.from_counts(counts)
    child_used = used if test.is_numerical else used | {test.attribute}
    children = []
    for part in enc.partition(idx, test):
        if len(part) == 0:
            children.append(Leaf.from_counts(np.zeros_like(counts), parent_leaf.majority_class))
        else:
            children.append(_grow(enc, part, depth + 1, params, child_used))
    return Internal(test, tuple(children), tuple(int(c) for c in counts))


def build_tree(dataset: Dataset, params: C45Params | None = None,
               forced_root: SplitTest | None = None) -> DecisionTree:
    """Grow a tree by recursive best-gain-ratio splitting.

    With ``forced_root`` the root uses exactly that test and the subtrees
    grow normally; a branch the test leaves empty becomes a leaf carrying
    the parent's majority class.
    """
    params = params or C45Params()
    if len(dataset) == 0:
        raise ValueError("cannot build a tree from an empty dataset")
    enc = _Encoded(dataset)
    root = _grow(enc, np.arange(len(dataset)), 0, params, frozenset(), forced_root)
    return DecisionTree(root, dataset.schema, params)


# --- prediction and rules ------------------------------------------------------


def _values(record) -> Sequence:
    return record.values if isinstance(record, TrainingRecord) else record


def predict(tree: DecisionTree, record) -> tuple[int, Leaf]:
    """Majority class of the leaf ``record`` falls into, and that leaf."""
    values = _values(record)
    node = tree.root
    while isinstance(node, Internal):
        node = node.route(values[node.test.attribute])
    return node.majority_class, node


def predict_many(tree: DecisionTree, records) -> list[int]:
    return [predict(tree, r)[0] for r in records]


@dataclass(frozen=True)
class Condition:
    attribute: str
    op: str  # "<=", ">" or "=="
    value: object

    def holds(self, value) -> bool:
        if self.op == "<=":
            return value <= self.value
        if self.op == ">":
            return value > self.value
        return value == self.value

    def __str__(self):
        v = f"{self.value:g}" if isinstance(self.value, float) else str(self.value)
        return f"{self.attribute} {self.op} {v}"


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    majority_class: int
    label: str
    support: int
    leaf_accuracy: float

    def matches(self, record, schema: AttributeSchema) -> bool:
        values = _values(record)
        return all(c.holds(values[schema.index(c.attribute)]) for c in self.conditions)

    def __str__(self):
        lhs = " AND ".join(map(str, self.conditions)) or "TRUE"
        return f"IF {lhs} THEN {self.label} (support={self.support}, accuracy={self.leaf_accuracy:.3f})"


def extract_rules(tree: DecisionTree) -> list[Rule]:
    """One rule per leaf: the conjunction of tests on its root-to-leaf path."""
    schema = tree.schema
    rules = []

    def walk(node, path):
        if isinstance(node, Leaf):
            label = schema.class_bins[node.majority_class].label
            rules.append(Rule(tuple(path), node.majority_class, label, node.support, node.leaf_accuracy))
            return
        t = node.test
        name = schema.attributes[t.attribute].name
        if t.is_numerical:
            walk(node.children[0], path + [Condition(name, "<=", t.threshold)])
            walk(node.children[1], path + [Condition(name, ">", t.threshold)])
        else:
            for cat, child in zip(t.categories, node.children):
                walk(child, path + [Condition(name, "==", cat)])

    walk(tree.root, [])
    return rules


# --- serialization --------------------------------------------------------------

TREE_FORMAT = "irrigdemand.c45-tree"
FORMAT_VERSION = 1


def schema_to_dict(schema: AttributeSchema) -> dict:
    return {
        "attributes": [{"name": a.name, "kind": a.kind.value} for a in schema.attributes],
        "class_bins": [{"lo": b.lo, "hi": b.hi, "label": b.label} for b in schema.class_bins],
    }


def schema_from_dict(d: dict) -> AttributeSchema:
    return AttributeSchema(
        tuple(Attribute(a["name"], AttributeKind(a["kind"])) for a in d["attributes"]),
        tuple(UsageBin(b["lo"], b["hi"], b["label"]) for b in d["class_bins"]),
    )


def node_to_dict(node: Node, schema: AttributeSchema) -> dict:
    if isinstance(node, Leaf):
        return {
            "leaf": True,
            "class_counts": list(node.class_counts),
            "majority": schema.class_bins[node.majority_class].label,
        }
    t = node.test
    d = {"leaf": False, "attribute": schema.attributes[t.attribute].name}
    if t.is_numerical:
        d["threshold"] = t.threshold
    else:
        d["categories"] = list(t.categories)
    d["class_counts"] = list(node.class_counts)
    d["children"] = [node_to_dict(c, schema) for c in node.children]
    return d


def node_from_dict(d: dict, schema: AttributeSchema) -> Node:
    if d["leaf"]:
        majority = schema.label_index(d["majority"])
        leaf = Leaf.from_counts(d["class_counts"], majority)
        if leaf.support and leaf.majority_class != majority:
            raise ValueError("leaf majority does not match its class counts")
        return leaf
    j = schema.index(d["attribute"])
    if "threshold" in d:
        test = SplitTest(j, float(d["threshold"]))
    else:
        test = SplitTest(j, None, tuple(d["categories"]))
    children = tuple(node_from_dict(c, schema) for c in d["children"])
    if len(children) != test.n_branches:
        raise ValueError(f"node on {d['attribute']!r} has {len(children)} children, expected {test.n_branches}")
    return Internal(test, children, tuple(int(c) for c in d["class_counts"]))


def tree_to_dict(tree: DecisionTree) -> dict:
    return {
        "format": TREE_FORMAT,
        "version": FORMAT_VERSION,
        "schema": schema_to_dict(tree.schema),
        "params": asdict(tree.params),
        "root": node_to_dict(tree.root, tree.schema),
    }


def tree_from_dict(d: dict) -> DecisionTree:
    if d.get("format") != TREE_FORMAT:
        raise ValueError(f"not a {TREE_FORMAT} document")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported tree format version {d.get('version')!r}")
    schema = schema_from_dict(d["schema"])
    return DecisionTree(node_from_dict(d["root"], schema), schema, C45Params(**d["params"]))


def save_tree(tree: DecisionTree, path) -> None:
    Path(path).write_text(json.dumps(tree_to_dict(tree), indent=1) + "\n", encoding="utf-8")


def load_tree(path) -> DecisionTree:
    return tree_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
