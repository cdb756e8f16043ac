import datetime
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from irrigdemand.core import (
    Attribute,
    AttributeKind,
    AttributeSchema,
    Dataset,
    SchemaError,
    TrainingRecord,
    UsageBin,
    default_schema,
    discretize_usage,
    usage_bins,
    validate_dataset,
)

THREE = AttributeSchema(default_schema().attributes, usage_bins(3))


class TestDiscretize:
    def test_table_one_row(self):
        assert THREE.class_bins[discretize_usage(0.03, THREE)].label == "0.01-0.05"

    def test_zero_clamps_to_first_bin(self):
        assert discretize_usage(0.0, THREE) == 0

    def test_interior_value(self):
        assert THREE.class_bins[discretize_usage(0.125, THREE)].label == "0.11-0.15"

    def test_above_range_clamps_to_last_bin(self):
        assert discretize_usage(4.0, THREE) == 2

    def test_boundaries_are_half_open(self):
        assert discretize_usage(0.05, THREE) == 0
        assert discretize_usage(0.055, THREE) == 1
        assert discretize_usage(0.105, THREE) == 2

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            discretize_usage(math.nan, THREE)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, u1, u2):
        lo, hi = sorted((u1, u2))
        assert discretize_usage(lo, THREE) <= discretize_usage(hi, THREE)

    @given(st.integers(1, 20))
    def test_midpoints_round_trip(self, n_bins):
        schema = default_schema(n_bins)
        for i, b in enumerate(schema.class_bins):
            assert discretize_usage(b.midpoint, schema) == i

    @given(st.integers(0, 5), st.floats(0, 1, exclude_max=True))
    def test_value_inside_bin_maps_to_it(self, i, frac):
        schema = default_schema(6)
        b = schema.class_bins[i]
        u = b.lo + frac * (b.hi - b.lo)
        if u < b.hi:
            assert discretize_usage(u, schema) == i


class TestSchema:
    def test_default_labels(self):
        labels = [b.label for b in usage_bins(3)]
        assert labels == ["0.01-0.05", "0.06-0.10", "0.11-0.15"]

    def test_bins_contiguous(self):
        bins = usage_bins(6)
        assert all(a.hi == b.lo for a, b in zip(bins, bins[1:]))
        assert bins[0].lo == 0.005 and bins[1].midpoint == pytest.approx(0.08)

    def test_duplicate_attribute_names(self):
        a = Attribute("x", AttributeKind.NUMERICAL)
        with pytest.raises(SchemaError):
            AttributeSchema((a, a), usage_bins(2))

    def test_gapped_bins_rejected(self):
        bins = (UsageBin(0.01, 0.05, "a"), UsageBin(0.06, 0.10, "b"))
        with pytest.raises(SchemaError):
            AttributeSchema(default_schema().attributes, bins)

    def test_needs_a_bin(self):
        with pytest.raises(SchemaError):
            AttributeSchema(default_schema().attributes, ())


def _rec(tmax=25.0, tmin=10.0, humidity=50.0, label=0):
    values = (tmax, tmin, humidity, 200.0, 0.0, 20.0, "SMC", "Rice")
    return TrainingRecord(values, label, ("F001", datetime.date(2008, 11, 2)))


class TestValidateDataset:
    def test_empty(self):
        assert validate_dataset(Dataset(default_schema())) == []

    def test_clean_record(self):
        assert validate_dataset(Dataset(default_schema(), (_rec(),))) == []

    def test_tmax_below_tmin_names_farm_and_date(self):
        problems = validate_dataset(Dataset(default_schema(), (_rec(tmax=5.0),)))
        assert len(problems) == 1
        assert "F001" in problems[0] and "2008-11-02" in problems[0]

    def test_humidity_range(self):
        problems = validate_dataset(Dataset(default_schema(), (_rec(humidity=180.0),)))
        assert len(problems) == 1 and "humidity" in problems[0]

    def test_bad_label_and_kind(self):
        rec = TrainingRecord((1.0, 0.0, 50.0, 1.0, 0.0, 1.0, 3, "Rice"), 99)
        problems = validate_dataset(Dataset(default_schema(), (rec,)))
        assert len(problems) == 2
