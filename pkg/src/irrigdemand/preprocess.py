"""Turn delivery intervals into daily usage and a classification dataset.

Two ways of spreading a delivered volume over the days it serves:

* EWD (equal water distribution): every day gets the same share.
* REP (reference-evapotranspiration based): each day's share is weighted
  by that day's ET_o, so hot, dry days draw more water than mild ones.
"""

from __future__ import annotations

import csv
import datetime
import enum
import math
from pathlib import Path
from typing import Mapping, Sequence

from .core import (
    WEATHER_ATTRIBUTES,
    AttributeSchema,
    Dataset,
    DeliveryInterval,
    GapError,
    SchemaError,
    RowError,
    TrainingRecord,
    default_schema,
    discretize_usage,
)
from .ingest import RawJoinedDay, _read_rows, parse_date


class DisaggregationMethod(enum.Enum):
    EWD = "ewd"
    REP = "rep"

    @classmethod
    def parse(cls, text) -> "DisaggregationMethod":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unknown method {text!r}, expected 'ewd' or 'rep'") from None


def ewd_distribute(interval: DeliveryInterval) -> list[float]:
    if interval.n < 1:
        raise ValueError("interval must span at least one day")
    share = interval.wt / interval.n
    return [share] * interval.n


def rep_distribute(interval: DeliveryInterval) -> list[float]:
    """Split ``wt`` proportionally to daily ET_o.

    Falls back to an equal split when the interval's ET_o sums to zero
    (station outage reporting zeros), so the volume is still conserved.
    """
    etos = interval.eto_by_day
    if any(e < 0 or math.isnan(e) for e in etos):
        raise ValueError(f"negative or NaN ET_o in interval starting {interval.start_date}")
    total = math.fsum(etos)
    # Uniform ET_o makes the weights exactly 1/n; take the equal split so the
    # two methods agree bit for bit rather than to rounding.
    if total == 0 or all(e == etos[0] for e in etos):
        return ewd_distribute(interval)
    return [interval.wt * (e / total) for e in etos]


DISTRIBUTORS = {
    DisaggregationMethod.EWD: ewd_distribute,
    DisaggregationMethod.REP: rep_distribute,
}


def distribute(interval: DeliveryInterval, method) -> list[float]:
    return DISTRIBUTORS[DisaggregationMethod.parse(method)](interval)


def make_values(schema: AttributeSchema, weather, farm) -> tuple:
    """Attribute values for one farm-day in schema order."""
    source = {
        "tmax_c": weather.tmax,
        "tmin_c": weather.tmin,
        "humidity_pct": weather.humidity,
        "wind_km_day": weather.wind,
        "rainfall_mm": weather.rainfall,
        "solar_mj_m2": weather.solar,
        "soil_type": farm.soil_type,
        "crop_type": farm.crop_type,
    }
    try:
        return tuple(source[name] for name in schema.names)
    except KeyError as exc:
        raise SchemaError(f"schema attribute {exc.args[0]!r} has no data source") from None


def build_dataset(
    joined: Mapping[tuple[str, datetime.date], RawJoinedDay],
    intervals: Sequence[DeliveryInterval],
    method,
    schema: AttributeSchema | None = None,
) -> Dataset:
    """One record per farm-day inside an interval, ordered by (farm, date).

    The class is the farm's per-hectare usage that day, discretized.
    """
    schema = schema or default_schema()
    method = DisaggregationMethod.parse(method)
    rows = []
    for iv in intervals:
        usages = distribute(iv, method)
        for day, used in zip(iv.dates, usages):
            jd = joined.get((iv.farm_id, day))
            if jd is None:
                raise GapError(f"no joined weather/farm row for {iv.farm_id} on {day.isoformat()}", day)
            per_ha = used / jd.farm.area
            rec = TrainingRecord(
                values=make_values(schema, jd.weather, jd.farm),
                class_label=discretize_usage(per_ha, schema),
                provenance=(iv.farm_id, day),
                usage=per_ha,
                eto=jd.weather.eto,
            )
            rows.append(rec)
    rows.sort(key=lambda r: r.provenance)
    return Dataset(schema, tuple(rows))


DATASET_HEADER = (
    "farm_id",
    "date",
    *WEATHER_ATTRIBUTES,
    "soil_type",
    "crop_type",
    "usage_ml_ha_day",
    "class_bin",
)


def write_dataset_csv(dataset: Dataset, path) -> None:
    schema = dataset.schema
    if tuple(schema.names) != DATASET_HEADER[2:-2]:
        raise SchemaError("dataset dump requires the default eight-attribute layout")
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_HEADER)
        for rec in dataset.records:
            farm, day = rec.provenance if rec.provenance else ("", None)
            usage = "" if rec.usage is None else repr(rec.usage)
            w.writerow(
                [farm, day.isoformat() if day else "", *map(_cell, rec.values), usage,
                 schema.class_bins[rec.class_label].label]
            )


def _cell(v):
    return repr(v) if isinstance(v, float) else str(v)


def read_dataset_csv(path, schema: AttributeSchema | None = None) -> Dataset:
    """Load a dataset dump; class bins must name bins of ``schema``."""
    schema = schema or default_schema()
    if tuple(schema.names) != DATASET_HEADER[2:-2]:
        raise SchemaError("dataset dump requires the default eight-attribute layout")
    records = []
    numeric = set(WEATHER_ATTRIBUTES)
    for lineno, row in _read_rows(path, DATASET_HEADER):
        values = []
        for name in schema.names:
            text = row[name]
            if name in numeric:
                try:
                    values.append(float(text))
                except ValueError:
                    raise RowError(f"cannot parse {name}={text!r}", path, lineno) from None
            else:
                values.append(text)
        try:
            label = schema.label_index(row["class_bin"])
        except KeyError:
            raise SchemaError(f"{path}:{lineno}: unknown class bin {row['class_bin']!r}") from None
        provenance = None
        if row["farm_id"] or row["date"]:
            try:
                provenance = (row["farm_id"], parse_date(row["date"]))
            except ValueError:
                raise RowError(f"cannot parse date={row['date']!r}", path, lineno) from None
        usage = float(row["usage_ml_ha_day"]) if row["usage_ml_ha_day"] else None
        records.append(TrainingRecord(tuple(values), label, provenance, usage))
    return Dataset(schema, tuple(records))
