"""Model comparison: k-fold accuracy and seasonal demand per irrigation node.

Two kinds of evidence are produced:

* fold accuracies of the daily class predictions (``folds.csv``);
* seasonal megalitres per node, predicted vs. delivered, with a closeness
  score per node and overall (``nodes.csv`` and ``summary.json``).
"""

from __future__ import annotations

import csv
import datetime
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .c45 import C45Params, DecisionTree, build_tree, predict
from .core import (
    AttributeSchema,
    ConfigError,
    Dataset,
    FarmProfile,
    GapError,
    RowError,
    SchemaError,
    TrainingRecord,
    WeatherDay,
)
from .etc_baseline import CropCoefficientTable, EtcModel
from .ingest import _read_rows
from .preprocess import make_values
from .sysfor import Forest, SysForParams, build_forest, voting2_predict


class C45Model:
    name = "c45"

    def __init__(self, params: C45Params | None = None):
        self.params = params or C45Params()
        self.tree: DecisionTree | None = None

    def fit(self, dataset: Dataset):
        self.tree = build_tree(dataset, self.params)
        return self

    def predict(self, record) -> int:
        return predict(self.tree, record)[0]


class SysForModel:
    name = "sysfor"

    def __init__(self, params: SysForParams | None = None):
        self.params = params or SysForParams()
        self.forest: Forest | None = None

    def fit(self, dataset: Dataset):
        self.forest = build_forest(dataset, self.params)
        return self

    def predict(self, record) -> int:
        return voting2_predict(self.forest, record)


MODEL_NAMES = ("c45", "sysfor", "etc")


def make_model(name: str, *, c45: C45Params | None = None, sysfor: SysForParams | None = None,
               kc_table: CropCoefficientTable | None = None):
    if name == "c45":
        return C45Model(c45)
    if name == "sysfor":
        if sysfor is None and c45 is not None:
            sysfor = SysForParams(c45=c45)
        return SysForModel(sysfor)
    if name == "etc":
        return EtcModel(kc_table)
    raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


# --- cross-validation -----------------------------------------------------------


@dataclass(frozen=True)
class FoldReport:
    model: str
    accuracies: tuple[float, ...]

    @property
    def fold_count(self) -> int:
        return len(self.accuracies)

    @property
    def average(self) -> float:
        return math.fsum(self.accuracies) / len(self.accuracies)


def kfold_split(dataset, k: int, seed: int) -> list[np.ndarray]:
    """Shuffle with ``seed``, then cut into ``k`` contiguous folds.

    Fold sizes differ by at most one, larger folds first.
    """
    n = dataset if isinstance(dataset, int) else len(dataset)
    if k < 2:
        raise ConfigError("k must be >= 2")
    if k > n:
        raise ConfigError(f"cannot split {n} records into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def accuracy_pct(model, records: Sequence[TrainingRecord]) -> float:
    correct = sum(1 for r in records if model.predict(r) == r.class_label)
    return 100.0 * correct / len(records)


def cross_validate(model, dataset: Dataset, k: int = 3, seed: int = 0, **model_kwargs) -> FoldReport:
    """Train on k-1 folds, test on the held-out one, for every fold.

    ``model`` is a model name (see ``MODEL_NAMES``) or an object with
    ``fit(dataset)`` and ``predict(record)``; it is refit for each fold.
    """
    if isinstance(model, str):
        model = make_model(model, **model_kwargs)
    folds = kfold_split(dataset, k, seed)
    accs = []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        model.fit(dataset.subset(np.sort(train_idx)))
        test = [dataset.records[t] for t in test_idx]
        accs.append(accuracy_pct(model, test))
    return FoldReport(getattr(model, "name", type(model).__name__), tuple(accs))


@dataclass(frozen=True)
class ExternalPredictions:
    """Class predictions made elsewhere, keyed by record index."""

    model: str
    predictions: Mapping[int, int]


EXTERNAL_HEADER = ("record_index", "model", "predicted_bin")


def load_external_predictions(path, schema: AttributeSchema) -> dict[str, ExternalPredictions]:
    """Read ``external_predictions.csv``; bins may be labels or indices."""
    by_model: dict[str, dict[int, int]] = defaultdict(dict)
    for lineno, row in _read_rows(path, EXTERNAL_HEADER):
        try:
            index = int(row["record_index"])
        except ValueError:
            raise RowError(f"cannot parse record_index={row['record_index']!r}", path, lineno) from None
        model = row["model"]
        if not model:
            raise RowError("empty model name", path, lineno)
        text = row["predicted_bin"]
        try:
            label = schema.label_index(text)
        except KeyError:
            try:
                label = int(text)
            except ValueError:
                raise RowError(f"unknown bin {text!r}", path, lineno) from None
        if not 0 <= label < schema.n_classes:
            raise RowError(f"bin index {label} out of range", path, lineno)
        if index in by_model[model]:
            raise RowError(f"second prediction for record {index} by {model}", path, lineno)
        by_model[model][index] = label
    return {m: ExternalPredictions(m, preds) for m, preds in sorted(by_model.items())}


def write_external_predictions(preds: Iterable[ExternalPredictions], schema: AttributeSchema, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EXTERNAL_HEADER)
        for ext in preds:
            for index in sorted(ext.predictions):
                w.writerow([index, ext.model, schema.class_bins[ext.predictions[index]].label])


def cross_validate_external(ext: ExternalPredictions, dataset: Dataset, k: int = 3, seed: int = 0) -> FoldReport:
    """Score outside predictions fold by fold on the same partition as ``cross_validate``."""
    folds = kfold_split(dataset, k, seed)
    bad = [i for i in ext.predictions if not 0 <= i < len(dataset)]
    if bad:
        raise ConfigError(f"{ext.model}: record indices out of range: {bad[:5]}")
    accs = []
    for fold in folds:
        missing = [int(i) for i in fold if int(i) not in ext.predictions]
        if missing:
            raise ConfigError(f"{ext.model}: no prediction for test records {missing[:5]}")
        correct = sum(1 for i in fold if ext.predictions[int(i)] == dataset.records[i].class_label)
        accs.append(100.0 * correct / len(fold))
    return FoldReport(ext.model, tuple(accs))


# --- seasonal demand and nodes ------------------------------------------------------


def day_record(schema: AttributeSchema, farm: FarmProfile, weather: WeatherDay) -> TrainingRecord:
    """An unlabeled record (class -1) for forecasting one farm-day."""
    return TrainingRecord(make_values(schema, weather, farm), -1, (farm.farm_id, weather.date), None, weather.eto)


def seasonal_demand(model, farm: FarmProfile, weather: Mapping[datetime.date, WeatherDay],
                    start: datetime.date, n_days: int, schema: AttributeSchema) -> float:
    """Megalitres ``farm`` needs over ``n_days`` days from ``start``.

    Each day's predicted bin is turned into usage via the bin midpoint.
    """
    per_day = []
    for i in range(n_days):
        day = start + datetime.timedelta(days=i)
        w = weather.get(day)
        if w is None:
            raise GapError(f"no weather for {day.isoformat()} (farm {farm.farm_id})", day)
        label = model.predict(day_record(schema, farm, w))
        per_day.append(schema.class_bins[label].midpoint * farm.area)
    return math.fsum(per_day)


def node_aggregate(farm_demands: Mapping[str, float], farm_nodes: Mapping[str, str],
                   nodes: Iterable[str] = ()) -> tuple[dict[str, float], list[str]]:
    """Sum farm demands per node.

    Returns ``(totals, empty_nodes)``.  Nodes listed in ``nodes`` that own no
    farm get a zero total and are reported in ``empty_nodes``.
    """
    grouped: dict[str, list[float]] = defaultdict(list)
    for farm_id, ml in farm_demands.items():
        try:
            grouped[farm_nodes[farm_id]].append(ml)
        except KeyError:
            raise ConfigError(f"farm {farm_id!r} is not mapped to a node") from None
    totals = {node: math.fsum(v) for node, v in sorted(grouped.items())}
    empty = []
    for node in nodes:
        if node not in totals:
            totals[node] = 0.0
            empty.append(node)
    return totals, empty


def closeness_accuracy(actual: float, predicted: float) -> float:
    """``(1 - |actual - predicted| / actual) * 100``; negative past a 100% miss."""
    if not actual > 0:
        raise ValueError("closeness is undefined unless actual > 0")
    return (1.0 - abs(actual - predicted) / actual) * 100.0


def normalize_node_id(node_id: str) -> str:
    """Loose key so ``coly7``, ``Coly 7`` and ``COLY_7`` name the same node."""
    return "".join(ch for ch in node_id.lower() if ch not in " \t_-")


@dataclass(frozen=True)
class NodeReport:
    node_id: str
    actual_ml: float | None
    predicted_ml: Mapping[str, float] = field(default_factory=dict)
    excluded: bool = False

    @property
    def closeness(self) -> dict[str, float | None]:
        ok = not self.excluded and self.actual_ml is not None and self.actual_ml > 0
        return {
            m: closeness_accuracy(self.actual_ml, p) if ok else None
            for m, p in self.predicted_ml.items()
        }


def build_node_reports(predicted: Mapping[str, Mapping[str, float]],
                       actuals: Mapping[str, float] | None = None,
                       excluded: Iterable[str] = ()) -> list[NodeReport]:
    """Combine per-model node totals with delivered actuals.

    ``predicted`` maps model name to node totals.  A node is excluded when
    it matches an entry of ``excluded`` (loosely, see ``normalize_node_id``)
    or its actual usage is zero, which leaves closeness undefined.
    """
    wanted = {normalize_node_id(e) for e in excluded}
    nodes: list[str] = list(actuals) if actuals else []
    seen = set(nodes)
    for totals in predicted.values():
        for node in sorted(totals):
            if node not in seen:
                nodes.append(node)
                seen.add(node)
    reports = []
    for node in nodes:
        actual = None if actuals is None else actuals.get(node)
        excl = normalize_node_id(node) in wanted or (actual is not None and actual <= 0)
        preds = {m: totals.get(node, 0.0) for m, totals in predicted.items()}
        reports.append(NodeReport(node, actual, preds, excl))
    return reports


def summarize(node_reports: Sequence[NodeReport], models: Sequence[str] | None = None) -> dict:
    """Totals and closeness over the non-excluded nodes.

    ``overall_closeness_pct`` scores summed totals; ``mean_node_closeness_pct``
    averages the per-node scores.
    """
    if models is None:
        models = sorted({m for r in node_reports for m in r.predicted_ml})
    kept = [r for r in node_reports if not r.excluded]
    with_actual = [r for r in kept if r.actual_ml is not None]
    total_actual = math.fsum(r.actual_ml for r in with_actual) if with_actual else None
    total_pred, overall, mean_node = {}, {}, {}
    for m in models:
        basis = with_actual if with_actual else kept
        total_pred[m] = math.fsum(r.predicted_ml.get(m, 0.0) for r in basis)
        if total_actual:
            overall[m] = closeness_accuracy(total_actual, total_pred[m])
            scores = [r.closeness[m] for r in with_actual if r.closeness.get(m) is not None]
            mean_node[m] = math.fsum(scores) / len(scores) if scores else None
        else:
            overall[m] = None
            mean_node[m] = None
    return {
        "models": list(models),
        "excluded_nodes": [r.node_id for r in node_reports if r.excluded],
        "total_actual_ml": total_actual,
        "total_predicted_ml": total_pred,
        "overall_closeness_pct": overall,
        "mean_node_closeness_pct": mean_node,
    }


# --- report files ---------------------------------------------------------------

FOLDS_HEADER = ("model", "fold", "accuracy_pct")
NODES_HEADER = ("node_id", "actual_ml", "model", "predicted_ml", "difference_ml", "closeness_pct", "excluded")
NODE_ACTUALS_HEADER = ("node_id", "actual_ml")
FARM_DEMAND_HEADER = ("farm_id", "node_id", "model", "demand_ml")


def _num(x) -> str:
    if x is None:
        return ""
    return repr(round(float(x), 6))


def write_folds_csv(fold_reports: Sequence[FoldReport], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FOLDS_HEADER)
        for rep in fold_reports:
            for i, acc in enumerate(rep.accuracies, start=1):
                w.writerow([rep.model, i, _num(acc)])
            w.writerow([rep.model, "average", _num(rep.average)])


def write_nodes_csv(node_reports: Sequence[NodeReport], path, models: Sequence[str] | None = None) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODES_HEADER)
        for r in node_reports:
            closeness = r.closeness
            for m in models or list(r.predicted_ml):
                pred = r.predicted_ml.get(m, 0.0)
                diff = None if r.actual_ml is None else pred - r.actual_ml
                w.writerow([r.node_id, _num(r.actual_ml), m, _num(pred), _num(diff),
                            _num(closeness.get(m)), "true" if r.excluded else "false"])


def emit_reports(fold_reports: Sequence[FoldReport], node_reports: Sequence[NodeReport], out_dir,
                 models: Sequence[str] | None = None) -> dict[str, Path]:
    """Write ``folds.csv``, ``nodes.csv`` and ``summary.json`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"folds": out / "folds.csv", "nodes": out / "nodes.csv", "summary": out / "summary.json"}
    if models is None:
        models = sorted({m for r in node_reports for m in r.predicted_ml})
    write_folds_csv(fold_reports, paths["folds"])
    write_nodes_csv(node_reports, paths["nodes"], models)
    summary = summarize(node_reports, models)
    summary = json.loads(json.dumps(summary), parse_float=lambda s: round(float(s), 6))
    paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def read_node_actuals(path) -> dict[str, float]:
    actuals = {}
    for lineno, row in _read_rows(path, NODE_ACTUALS_HEADER):
        node = row["node_id"]
        if not node:
            raise RowError("empty node_id", path, lineno)
        if node in actuals:
            raise SchemaError(f"{path}:{lineno}: duplicate node_id {node!r}")
        try:
            ml = float(row["actual_ml"])
        except ValueError:
            raise RowError(f"cannot parse actual_ml={row['actual_ml']!r}", path, lineno) from None
        if ml < 0 or not math.isfinite(ml):
            raise RowError(f"actual_ml must be a finite value >= 0, got {ml}", path, lineno)
        actuals[node] = ml
    return actuals


def write_node_actuals(actuals: Mapping[str, float], path) -> None:
    lines = [",".join(NODE_ACTUALS_HEADER)] + [f"{n},{v!r}" for n, v in actuals.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_farm_demand_csv(rows: Iterable[tuple[str, str, str, float]], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FARM_DEMAND_HEADER)
        for farm_id, node_id, model, ml in rows:
            w.writerow([farm_id, node_id, model, _num(ml)])
