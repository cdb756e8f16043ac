"""File-to-dataset composition used by the command line and the demos."""

from __future__ import annotations

import dataclasses
import datetime
from pathlib import Path
from typing import Mapping, Sequence

from .core import AttributeSchema, ConfigError, Dataset, DeliveryEvent, FarmProfile, GapError, WeatherDay
from .ingest import (
    DEFAULT_STATION,
    build_delivery_intervals,
    index_weather,
    join_days,
    parse_delivery_csv,
    parse_farm_csv,
    parse_weather_csv,
    weather_for_farm,
)
from .preprocess import build_dataset

Stations = Mapping[str, Mapping[datetime.date, WeatherDay]]


def load_stations(specs: Sequence[str]) -> dict[str, dict[datetime.date, WeatherDay]]:
    """Parse weather files given as ``path`` or ``STATION=path``.

    A bare path registers the default station, which serves every farm
    without an explicit ``station_id``.
    """
    stations = {}
    for spec in specs:
        station, sep, path = str(spec).partition("=")
        if not sep:
            station, path = DEFAULT_STATION, station
        if station in stations:
            raise ConfigError(f"weather for station {station or '(default)'!r} given twice")
        stations[station] = index_weather(parse_weather_csv(Path(path)))
    if not stations:
        raise ConfigError("at least one weather file is required")
    return stations


def prepare_dataset(
    farms: Sequence[FarmProfile],
    stations: Stations,
    events: Sequence[DeliveryEvent],
    season_end: datetime.date,
    method,
    schema: AttributeSchema | None = None,
) -> Dataset:
    """Deliveries + weather + farm table -> labeled daily dataset."""
    by_id = {f.farm_id: f for f in farms}
    unknown = sorted({e.farm_id for e in events} - set(by_id))
    if unknown:
        raise GapError(f"deliveries reference unknown farms: {', '.join(unknown)}")
    ordered = sorted(events, key=lambda e: (e.farm_id, e.date))
    intervals = build_delivery_intervals(
        ordered, lambda farm_id: weather_for_farm(by_id[farm_id], stations), season_end
    )
    joined = join_days(farms, stations, intervals)
    return build_dataset(joined, intervals, method, schema)


def prepare_dataset_from_files(weather: Sequence[str], deliveries, farms, season_end: datetime.date,
                               method, schema: AttributeSchema | None = None) -> Dataset:
    return prepare_dataset(
        parse_farm_csv(farms),
        load_stations(weather),
        parse_delivery_csv(deliveries),
        season_end,
        method,
        schema,
    )


def attach_eto(dataset: Dataset, stations: Stations, farms: Sequence[FarmProfile] = ()) -> Dataset:
    """Copy each record's ET_o from the weather series serving its farm and date."""
    by_id = {f.farm_id: f for f in farms}
    records = []
    for rec in dataset.records:
        if rec.provenance is None:
            raise ConfigError("records need farm_id and date to look up ET_o")
        farm_id, day = rec.provenance
        farm = by_id.get(farm_id) or FarmProfile(farm_id, "?", 1.0, "", "")
        w = weather_for_farm(farm, stations).get(day)
        if w is None:
            raise GapError(f"no weather for {day.isoformat()} (farm {farm_id})", day)
        records.append(dataclasses.replace(rec, eto=w.eto))
    return Dataset(dataset.schema, tuple(records))
