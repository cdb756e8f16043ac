"""
Cross-validation and a node-level seasonal forecast
===================================================

Compare the tree, the forest and the crop-coefficient baseline by 3-fold
accuracy, then forecast a week of demand per farm, sum farms into channel
nodes and score the totals against delivered volumes.
"""

import datetime
import math
import tempfile
from pathlib import Path

from irrigdemand.evaluation import (
    build_node_reports,
    cross_validate,
    emit_reports,
    make_model,
    node_aggregate,
    seasonal_demand,
)
from irrigdemand.pipeline import prepare_dataset
from irrigdemand.synth import ScenarioConfig, simulate

sc = simulate(ScenarioConfig(seed=4, n_farms=20, n_days=120))
weather = {w.date: w for w in sc.weather}
kw = {"kc_table": sc.kc_table}

# 3-fold accuracy on both preprocessing methods.  The ET_c model is not
# trained; it maps K_c x ET_o straight to a usage bin.
for method in ("ewd", "rep"):
    ds = prepare_dataset(sc.farms, {"": weather}, sc.deliveries, sc.config.season_end, method)
    for name in ("c45", "sysfor", "etc"):
        rep = cross_validate(name, ds, k=3, seed=0, **kw)
        folds = " ".join(f"{a:6.2f}" for a in rep.accuracies)
        print(f"{method} {name:>6}: {folds}  avg {rep.average:6.2f}")

# Train on the first 100 days and forecast the last week.
cut = sc.config.start_date + datetime.timedelta(days=100)
train_events = [e for e in sc.deliveries if e.date < cut]
train = prepare_dataset(sc.farms, {"": weather}, train_events, cut - datetime.timedelta(days=1), "rep")
start, days = cut, 7

actual = {}
for farm in sc.farms:
    used = math.fsum(sc.truth[(farm.farm_id, start + datetime.timedelta(days=i))] for i in range(days))
    actual[farm.node_id] = actual.get(farm.node_id, 0.0) + used

farm_nodes = {f.farm_id: f.node_id for f in sc.farms}
predicted = {}
for name in ("c45", "sysfor", "etc"):
    model = make_model(name, **kw).fit(train)
    demand = {f.farm_id: seasonal_demand(model, f, weather, start, days, train.schema) for f in sc.farms}
    predicted[name], _ = node_aggregate(demand, farm_nodes)

# Closeness is (1 - |actual - predicted| / actual) x 100 per node.  On this
# noise-free season the models pick the same bins, and most of the gap to
# the actual comes from valuing each day at its bin midpoint.
reports = build_node_reports(predicted, actual)
for r in reports:
    scores = "  ".join(f"{m} {r.predicted_ml[m]:7.2f} ({r.closeness[m]:6.2f}%)" for m in predicted)
    print(f"{r.node_id}: actual {r.actual_ml:7.2f}  {scores}")

out = Path(tempfile.mkdtemp(prefix="irrigdemand-demo-"))
emit_reports([], reports, out)
print("reports in", out, sorted(p.name for p in out.iterdir()))
