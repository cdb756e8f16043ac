import random

from irrigdemand.core import Attribute, AttributeKind, AttributeSchema, Dataset, TrainingRecord, usage_bins

KIND = {"num": AttributeKind.NUMERICAL, "cat": AttributeKind.CATEGORICAL}


def make_schema(kinds, n_classes=3):
    attrs = tuple(Attribute(f"a{j}", KIND[k]) for j, k in enumerate(kinds))
    return AttributeSchema(attrs, usage_bins(n_classes))


def make_dataset(rows, labels, kinds, n_classes=3):
    schema = make_schema(kinds, n_classes)
    return Dataset(schema, tuple(TrainingRecord(tuple(r), y) for r, y in zip(rows, labels)))


def random_table(rng: random.Random, n_rows, kinds, n_classes=3, levels=4):
    """Small random table; numeric columns draw from few levels to force ties."""
    rows = []
    for _ in range(n_rows):
        row = []
        for k in kinds:
            if k == "num":
                row.append(float(rng.randint(0, levels)))
            else:
                row.append(rng.choice("PQR"))
        rows.append(row)
    labels = [rng.randrange(n_classes) for _ in range(n_rows)]
    return rows, labels


def three_good_fixture():
    """Three numeric attributes, each informative to a different degree."""
    y = [0] * 10 + [1] * 10
    a0 = [float(v) for v in y]
    a1 = a0[:]
    a1[0], a1[19] = 1.0, 0.0
    a2 = a0[:]
    a2[0], a2[1], a2[19] = 1.0, 1.0, 0.0
    rows = [list(r) for r in zip(a0, a1, a2)]
    return make_dataset(rows, y, ["num"] * 3), rows, y


def one_good_fixture():
    """Only ``a0`` is good at the root; inside its left branch a1..a3 all separate the class."""
    rows, y = [], []
    for i in range(20):
        b = i % 2
        rows.append([0.0, float(b), float(b), float(b)])
        y.append(b)
    for i in range(20):
        rows.append([1.0, float(i % 2), float((i // 2) % 2), float((i // 4) % 2)])
        y.append(2)
    return make_dataset(rows, y, ["num"] * 4)
