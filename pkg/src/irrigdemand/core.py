"""Domain types shared by every stage of the pipeline.

The classification table has eight non-class attributes (six weather
readings plus soil and crop codes) and a class attribute: daily crop water
usage in ML/ha/day, discretized into contiguous bins.
"""

from __future__ import annotations

import datetime
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

Value = Union[float, str]


class IrrigDemandError(Exception):
    """Base class for all package errors."""


class SchemaError(IrrigDemandError):
    """Input does not match an expected layout (missing column, bad header)."""


class RowError(IrrigDemandError):
    """A single input row is unparseable or violates a range invariant."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.path = path
        self.line = line


class GapError(IrrigDemandError):
    """Required data for a date is missing (weather gap, unjoined day)."""

    def __init__(self, message: str, date: datetime.date | None = None):
        super().__init__(message)
        self.date = date


class ConfigError(IrrigDemandError):
    """Invalid parameters or inconsistent configuration."""


class AttributeKind(enum.Enum):
    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: AttributeKind

    @property
    def is_numerical(self) -> bool:
        return self.kind is AttributeKind.NUMERICAL


@dataclass(frozen=True)
class UsageBin:
    """Half-open usage interval ``[lo, hi)`` in ML/ha/day."""

    lo: float
    hi: float
    label: str

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[Attribute, ...]
    class_bins: tuple[UsageBin, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "class_bins", tuple(self.class_bins))
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in {names}")
        if not self.class_bins:
            raise SchemaError("schema needs at least one class bin")
        for b in self.class_bins:
            if not b.hi > b.lo:
                raise SchemaError(f"empty bin {b.label!r}")
        for a, b in zip(self.class_bins, self.class_bins[1:]):
            if a.hi != b.lo:
                raise SchemaError(f"bins {a.label!r} and {b.label!r} are not contiguous")
        labels = [b.label for b in self.class_bins]
        if len(set(labels)) != len(labels):
            raise SchemaError(f"duplicate bin labels in {labels}")

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def n_classes(self) -> int:
        return len(self.class_bins)

    def index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise KeyError(name)

    def label_index(self, label: str) -> int:
        for i, b in enumerate(self.class_bins):
            if b.label == label:
                return i
        raise KeyError(label)


WEATHER_ATTRIBUTES = (
    "tmax_c",
    "tmin_c",
    "humidity_pct",
    "wind_km_day",
    "rainfall_mm",
    "solar_mj_m2",
)


def usage_bins(n_bins: int = 6, width: float = 0.05, start: float = 0.005) -> tuple[UsageBin, ...]:
    """Equal-width contiguous bins labeled the way usage tables print them.

    With the defaults the first bins are ``[0.005, 0.055)`` labeled
    ``"0.01-0.05"`` and ``[0.055, 0.105)`` labeled ``"0.06-0.10"``.
    """
    if n_bins < 1:
        raise ConfigError("n_bins must be >= 1")
    if not width > 0:
        raise ConfigError("bin width must be positive")
    # Edges are rounded so that repeated addition does not leave 0.10500000000000001.
    edges = [round(start + k * width, 10) for k in range(n_bins + 1)]
    bins = []
    for lo, hi in zip(edges, edges[1:]):
        label = f"{lo + 0.005:.2f}-{hi - 0.005:.2f}"
        bins.append(UsageBin(lo, hi, label))
    return tuple(bins)


def default_schema(n_bins: int = 6) -> AttributeSchema:
    """The eight-attribute layout: six weather readings, soil type, crop type."""
    attrs = [Attribute(name, AttributeKind.NUMERICAL) for name in WEATHER_ATTRIBUTES]
    attrs.append(Attribute("soil_type", AttributeKind.CATEGORICAL))
    attrs.append(Attribute("crop_type", AttributeKind.CATEGORICAL))
    return AttributeSchema(tuple(attrs), usage_bins(n_bins))


def discretize_usage(usage: float, schema: AttributeSchema) -> int:
    """Index of the class bin holding ``usage``; out-of-range values clamp."""
    usage = float(usage)
    if math.isnan(usage):
        raise ValueError("usage is NaN")
    bins = schema.class_bins
    if usage < bins[0].lo:
        return 0
    for i, b in enumerate(bins):
        if usage < b.hi:
            return i
    return len(bins) - 1


@dataclass(frozen=True)
class WeatherDay:
    date: datetime.date
    tmax: float
    tmin: float
    humidity: float
    wind: float
    rainfall: float
    solar: float
    eto: float

    def violations(self) -> list[str]:
        out = []
        if self.tmax < self.tmin:
            out.append(f"tmax {self.tmax} < tmin {self.tmin}")
        if not 0 <= self.humidity <= 100:
            out.append(f"humidity {self.humidity} outside [0, 100]")
        for name in ("wind", "rainfall", "solar", "eto"):
            v = getattr(self, name)
            if v < 0:
                out.append(f"{name} {v} is negative")
        for name in ("tmax", "tmin", "humidity", "wind", "rainfall", "solar", "eto"):
            if math.isnan(getattr(self, name)):
                out.append(f"{name} is NaN")
        return out

    def weather_values(self) -> tuple[float, ...]:
        """Readings in schema attribute order."""
        return (self.tmax, self.tmin, self.humidity, self.wind, self.rainfall, self.solar)


@dataclass(frozen=True)
class FarmProfile:
    farm_id: str
    node_id: str
    area: float
    soil_type: str
    crop_type: str
    station_id: str | None = None

    def violations(self) -> list[str]:
        out = []
        if not self.area > 0:
            out.append(f"area {self.area} must be > 0")
        if not self.node_id:
            out.append("node_id is empty")
        return out


@dataclass(frozen=True)
class DeliveryEvent:
    farm_id: str
    date: datetime.date
    volume: float


@dataclass(frozen=True)
class DeliveryInterval:
    """Volume ``wt`` delivered on ``start_date`` serving ``n`` days."""

    farm_id: str
    start_date: datetime.date
    n: int
    wt: float
    eto_by_day: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "eto_by_day", tuple(float(e) for e in self.eto_by_day))
        if self.n < 1:
            raise ValueError(f"interval for {self.farm_id} at {self.start_date} has n={self.n}")
        if len(self.eto_by_day) != self.n:
            raise ValueError("eto_by_day length must equal n")
        if self.wt < 0:
            raise ValueError("delivered volume must be >= 0")

    @property
    def dates(self) -> list[datetime.date]:
        return [self.start_date + datetime.timedelta(days=i) for i in range(self.n)]


@dataclass(frozen=True)
class TrainingRecord:
    """One farm-day row.

    ``usage`` (ML/ha/day) and ``eto`` (mm/day) ride along outside the
    attribute values: the first for dumps and demand checks, the second for
    the crop-coefficient baseline, which needs ET_o but must not train on it.
    """

    values: tuple[Value, ...]
    class_label: int
    provenance: tuple[str, datetime.date] | None = None
    usage: float | None = None
    eto: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class Dataset:
    schema: AttributeSchema
    records: tuple[TrainingRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.schema, tuple(self.records[i] for i in indices))

    @property
    def labels(self) -> list[int]:
        return [r.class_label for r in self.records]


def record_violations(record: TrainingRecord, schema: AttributeSchema) -> list[str]:
    out = []
    if len(record.values) != len(schema.attributes):
        return [f"has {len(record.values)} values, schema expects {len(schema.attributes)}"]
    for attr, v in zip(schema.attributes, record.values):
        if attr.is_numerical:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                out.append(f"{attr.name}={v!r} is not numeric")
            elif math.isnan(v):
                out.append(f"{attr.name} is NaN")
        elif not isinstance(v, str) or not v:
            out.append(f"{attr.name}={v!r} is not a category code")
    if not 0 <= record.class_label < schema.n_classes:
        out.append(f"class_label {record.class_label} outside [0, {schema.n_classes})")
    names = schema.names
    values = dict(zip(names, record.values))
    tmax, tmin = values.get("tmax_c"), values.get("tmin_c")
    if isinstance(tmax, (int, float)) and isinstance(tmin, (int, float)) and tmax < tmin:
        out.append(f"tmax_c {tmax} < tmin_c {tmin}")
    hum = values.get("humidity_pct")
    if isinstance(hum, (int, float)) and not 0 <= hum <= 100:
        out.append(f"humidity_pct {hum} outside [0, 100]")
    for name in ("wind_km_day", "rainfall_mm", "solar_mj_m2"):
        v = values.get(name)
        if isinstance(v, (int, float)) and v < 0:
            out.append(f"{name} {v} is negative")
    return out


def validate_dataset(dataset: Dataset) -> list[str]:
    """Every invariant violation in ``dataset``, one message per problem."""
    problems = []
    for i, rec in enumerate(dataset.records):
        where = f"record {i}"
        if rec.provenance is not None:
            farm, day = rec.provenance
            where = f"farm {farm} on {day.isoformat()}"
        for msg in record_violations(rec, dataset.schema):
            problems.append(f"{where}: {msg}")
    return problems
