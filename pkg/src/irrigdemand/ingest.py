"""Readers for the three input tables and the delivery-interval builder.

All files are UTF-8, comma separated, with a header row.  Parsers validate
ranges as they go and report the offending line number (1-based, header is
line 1).
"""

from __future__ import annotations

import csv
import datetime
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import (
    DeliveryEvent,
    DeliveryInterval,
    FarmProfile,
    GapError,
    RowError,
    SchemaError,
    WeatherDay,
)

WEATHER_HEADER = (
    "date",
    "tmax_c",
    "tmin_c",
    "humidity_pct",
    "wind_km_day",
    "rainfall_mm",
    "solar_mj_m2",
    "eto_mm",
)
DELIVERY_HEADER = ("farm_id", "date", "volume_ml")
FARM_HEADER = ("farm_id", "node_id", "area_ha", "soil_type", "crop_type")
FARM_STATION_COLUMN = "station_id"

DEFAULT_STATION = ""


def _read_rows(path, header: Sequence[str], optional: Sequence[str] = ()):
    """Yield ``(line_number, {column: text})`` after checking the header."""
    path = Path(path)
    with path.open("r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected header {','.join(header)}")
        for col in header:
            if col not in got:
                raise SchemaError(f"{path}: missing column {col!r}")
        allowed = set(header) | set(optional)
        for col in got:
            if col not in allowed:
                raise SchemaError(f"{path}: unexpected column {col!r}")
        if len(set(got)) != len(got):
            raise SchemaError(f"{path}: duplicate columns in header")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(got):
                raise RowError(f"expected {len(got)} fields, got {len(row)}", path, lineno)
            yield lineno, dict(zip(got, (c.strip() for c in row)))


def parse_date(text: str) -> datetime.date:
    return datetime.date.fromisoformat(text)


def _field(row, name, conv, path, lineno):
    try:
        value = conv(row[name])
    except ValueError:
        raise RowError(f"cannot parse {name}={row[name]!r}", path, lineno) from None
    if isinstance(value, float) and not math.isfinite(value):
        raise RowError(f"{name}={row[name]!r} is not finite", path, lineno)
    return value


def parse_weather_csv(path) -> list[WeatherDay]:
    days = []
    seen = set()
    for lineno, row in _read_rows(path, WEATHER_HEADER):
        values = [_field(row, col, float, path, lineno) for col in WEATHER_HEADER[1:]]
        day = WeatherDay(_field(row, "date", parse_date, path, lineno), *values)
        problems = day.violations()
        if problems:
            raise RowError("; ".join(problems), path, lineno)
        if day.date in seen:
            raise RowError(f"duplicate date {day.date.isoformat()}", path, lineno)
        seen.add(day.date)
        days.append(day)
    return days


def parse_delivery_csv(path) -> list[DeliveryEvent]:
    """Delivery events sorted by (farm, date); same-day rows are summed."""
    totals: dict[tuple[str, datetime.date], list[float]] = defaultdict(list)
    for lineno, row in _read_rows(path, DELIVERY_HEADER):
        farm = row["farm_id"]
        if not farm:
            raise RowError("empty farm_id", path, lineno)
        date = _field(row, "date", parse_date, path, lineno)
        volume = _field(row, "volume_ml", float, path, lineno)
        if volume < 0:
            raise RowError(f"negative volume {volume}", path, lineno)
        totals[(farm, date)].append(volume)
    return [
        DeliveryEvent(farm, date, math.fsum(vols))
        for (farm, date), vols in sorted(totals.items())
    ]


def parse_farm_csv(path) -> list[FarmProfile]:
    farms = []
    seen = set()
    for lineno, row in _read_rows(path, FARM_HEADER, optional=(FARM_STATION_COLUMN,)):
        farm_id = row["farm_id"]
        if not farm_id:
            raise RowError("empty farm_id", path, lineno)
        if farm_id in seen:
            raise SchemaError(f"{path}:{lineno}: duplicate farm_id {farm_id!r}")
        seen.add(farm_id)
        area = _field(row, "area_ha", float, path, lineno)
        farm = FarmProfile(
            farm_id=farm_id,
            node_id=row["node_id"],
            area=area,
            soil_type=row["soil_type"],
            crop_type=row["crop_type"],
            station_id=row.get(FARM_STATION_COLUMN) or None,
        )
        problems = farm.violations()
        if not farm.soil_type:
            problems.append("empty soil_type")
        if not farm.crop_type:
            problems.append("empty crop_type")
        if problems:
            raise RowError("; ".join(problems), path, lineno)
        farms.append(farm)
    return farms


def index_weather(days: Iterable[WeatherDay]) -> dict[datetime.date, WeatherDay]:
    return {d.date: d for d in days}


def weather_for_farm(farm: FarmProfile, stations: Mapping[str, Mapping[datetime.date, WeatherDay]]):
    """The weather series serving ``farm``.

    ``stations`` maps station id to a date-indexed series.  A lone station
    serves every farm; otherwise farms must name their station.
    """
    if farm.station_id is not None:
        try:
            return stations[farm.station_id]
        except KeyError:
            raise SchemaError(f"farm {farm.farm_id} names unknown station {farm.station_id!r}") from None
    if len(stations) == 1:
        return next(iter(stations.values()))
    if DEFAULT_STATION in stations:
        return stations[DEFAULT_STATION]
    raise SchemaError(f"farm {farm.farm_id} has no station_id and several stations are loaded")


def build_delivery_intervals(
    events: Sequence[DeliveryEvent],
    weather: Mapping[datetime.date, WeatherDay],
    season_end: datetime.date,
) -> list[DeliveryInterval]:
    """Split each farm's deliveries into the spans they serve.

    A delivery covers the days from its own date up to the day before the
    next delivery; the last one runs through ``season_end`` inclusive.
    ``weather`` may also be a callable ``farm_id -> series`` for
    multi-station setups.
    """
    by_farm: dict[str, list[DeliveryEvent]] = defaultdict(list)
    for ev in events:
        by_farm[ev.farm_id].append(ev)

    intervals = []
    for farm_id in sorted(by_farm):
        evs = by_farm[farm_id]
        dates = [e.date for e in evs]
        if dates != sorted(dates) or len(set(dates)) != len(dates):
            raise ValueError(f"deliveries for {farm_id} must be sorted with unique dates")
        series = weather(farm_id) if callable(weather) else weather
        for k, ev in enumerate(evs):
            if ev.date > season_end:
                raise GapError(
                    f"delivery to {farm_id} on {ev.date.isoformat()} is after season end "
                    f"{season_end.isoformat()}",
                    ev.date,
                )
            if k + 1 < len(evs):
                n = (evs[k + 1].date - ev.date).days
            else:
                n = (season_end - ev.date).days + 1
            etos = []
            for i in range(n):
                day = ev.date + datetime.timedelta(days=i)
                w = series.get(day)
                if w is None:
                    raise GapError(f"no weather for {day.isoformat()} (farm {farm_id})", day)
                etos.append(w.eto)
            intervals.append(DeliveryInterval(farm_id, ev.date, n, ev.volume, tuple(etos)))
    return intervals


@dataclass(frozen=True)
class RawJoinedDay:
    farm: FarmProfile
    weather: WeatherDay

    @property
    def farm_id(self) -> str:
        return self.farm.farm_id

    @property
    def date(self) -> datetime.date:
        return self.weather.date


def join_days(
    farms: Sequence[FarmProfile],
    stations: Mapping[str, Mapping[datetime.date, WeatherDay]],
    intervals: Sequence[DeliveryInterval],
) -> dict[tuple[str, datetime.date], RawJoinedDay]:
    """One joined row per (farm, day) covered by an interval."""
    by_id = {f.farm_id: f for f in farms}
    joined = {}
    for iv in intervals:
        farm = by_id.get(iv.farm_id)
        if farm is None:
            raise GapError(f"deliveries reference unknown farm {iv.farm_id!r}")
        series = weather_for_farm(farm, stations)
        for day in iv.dates:
            w = series.get(day)
            if w is None:
                raise GapError(f"no weather for {day.isoformat()} (farm {farm.farm_id})", day)
            joined[(farm.farm_id, day)] = RawJoinedDay(farm, w)
    return joined
