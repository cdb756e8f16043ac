"""
SysFor: several trees from alternative good splits
===================================================

SysFor ranks every split at the root, keeps the ones close enough to the
best, and grows one tree from each.  A record is classified by the single
most accurate leaf it reaches across the forest.
"""

from irrigdemand.c45 import C45Params
from irrigdemand.pipeline import prepare_dataset
from irrigdemand.synth import ScenarioConfig, simulate
from irrigdemand.sysfor import SysForParams, build_forest, select_good_attributes, voting2_leaf

sc = simulate(ScenarioConfig(seed=3, n_farms=12, n_days=90))
stations = {"": {w.date: w for w in sc.weather}}
ds = prepare_dataset(sc.farms, stations, sc.deliveries, sc.config.season_end, "rep")

params = SysForParams(num_trees=5, goodness=0.3, separation=0.3, c45=C45Params(min_leaf=10))

# Step 1: the good splits at the root, best first.
for g in select_good_attributes(ds, params):
    print(f"{g.test.describe(ds.schema):35s} gain ratio {g.gain_ratio:.3f}")

# Steps 2 and 3: one tree per good split, topped up with trees that swap a
# level-1 subtree when there are fewer good splits than trees requested.
forest = build_forest(ds, params)
for i, tree in enumerate(forest.trees):
    print(f"tree {i}: root {tree.root.test.describe(ds.schema)}, {tree.n_leaves} leaves")

# Voting-2 on a few records: which tree's leaf decided, and how sure it was.
for rec in ds.records[::400]:
    label, tree_index, leaf = voting2_leaf(forest, rec)
    print(f"{rec.provenance[0]} {rec.provenance[1]}: predicted {ds.schema.class_bins[label].label}, "
          f"actual {ds.schema.class_bins[rec.class_label].label}, tree {tree_index}, "
          f"leaf accuracy {leaf.leaf_accuracy:.2f} over {leaf.support} records")
