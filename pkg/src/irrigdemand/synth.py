"""Seeded synthetic irrigation scenarios with known daily usage.

Real delivery statements are not public, so this module fabricates a
season: one weather station, a set of farms, and deliveries that are the
exact sums of a hidden daily usage series.  The hidden series is written to
``truth.csv`` so reconstructions can be checked against it.

Daily usage on a farm is ``K_c x ET_o x 0.01 x area x (1 + noise * e)``
with ``e`` uniform on [-1, 1].  ET_o follows a seasonal cosine with
multiplicative day-to-day jitter and drops on rainy days.  Solar radiation
is derived from ET_o, so the weather columns determine ET_o.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .core import ConfigError, DeliveryEvent, FarmProfile, WeatherDay
from .etc_baseline import ML_PER_MM_HA, CropCoefficientTable, write_kc_csv
from .ingest import DELIVERY_HEADER, FARM_HEADER, WEATHER_HEADER, _read_rows

TRUTH_HEADER = ("farm_id", "date", "usage_ml")

SOLAR_PER_ETO = 3.3  # MJ/m^2 per mm of ET_o


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    n_farms: int = 20
    n_days: int = 120
    delivery_period: int = 7
    start_date: datetime.date = datetime.date(2008, 10, 1)
    eto_base: float = 6.0
    eto_amplitude: float = 3.0
    eto_jitter: float = 0.15
    rain_probability: float = 0.1
    crops: tuple[str, ...] = ("Rice", "Corn", "Wheat", "Barley")
    soils: tuple[str, ...] = ("SMC", "RBE")
    kc: Mapping[str, float] = field(
        default_factory=lambda: {"Rice": 1.2, "Corn": 1.05, "Wheat": 0.8, "Barley": 0.7}
    )
    n_nodes: int = 4
    area_range: tuple[float, float] = (20.0, 150.0)
    noise: float = 0.0

    def __post_init__(self):
        if self.n_farms < 1 or self.n_days < 1:
            raise ConfigError("n_farms and n_days must be >= 1")
        if self.delivery_period < 1:
            raise ConfigError("delivery_period must be >= 1")
        if not 0 <= self.noise <= 1:
            raise ConfigError("noise must be in [0, 1]")
        if not 0 <= self.rain_probability <= 1:
            raise ConfigError("rain_probability must be in [0, 1]")
        if self.eto_jitter < 0 or self.eto_base <= 0 or self.eto_amplitude < 0:
            raise ConfigError("ET_o base must be > 0, amplitude and jitter >= 0")
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be >= 1")
        if not self.crops or not self.soils:
            raise ConfigError("need at least one crop and one soil type")
        missing = [c for c in self.crops if c not in self.kc]
        if missing:
            raise ConfigError(f"no K_c for crops {missing}")
        lo, hi = self.area_range
        if not 0 < lo <= hi:
            raise ConfigError("area_range must satisfy 0 < low <= high")

    @property
    def season_end(self) -> datetime.date:
        return self.start_date + datetime.timedelta(days=self.n_days - 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start_date"] = self.start_date.isoformat()
        d["crops"] = list(self.crops)
        d["soils"] = list(self.soils)
        d["kc"] = dict(sorted(self.kc.items()))
        d["area_range"] = list(self.area_range)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScenarioConfig":
        d = dict(d)
        if "start_date" in d and isinstance(d["start_date"], str):
            d["start_date"] = datetime.date.fromisoformat(d["start_date"])
        for key in ("crops", "soils", "area_range"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    weather: tuple[WeatherDay, ...]
    farms: tuple[FarmProfile, ...]
    deliveries: tuple[DeliveryEvent, ...]
    truth: Mapping[tuple[str, datetime.date], float]

    @property
    def kc_table(self) -> CropCoefficientTable:
        return CropCoefficientTable(dict(self.config.kc))


def _weather(cfg: ScenarioConfig, rng: np.random.Generator) -> list[WeatherDay]:
    n = cfg.n_days
    phase = -np.cos(2 * np.pi * np.arange(n) / n)  # -1 at season start, +1 mid-season
    rain = rng.random(n) < cfg.rain_probability
    rain_mm = np.where(rain, rng.exponential(8.0, n), 0.0)
    jitter = 1 + cfg.eto_jitter * rng.uniform(-1, 1, n)
    eto = (cfg.eto_base + cfg.eto_amplitude * phase) * jitter * np.where(rain, 0.55, 1.0)
    eto = np.maximum(eto, 0.1)
    tmax = 25 + 7 * phase + rng.normal(0, 1.5, n) - 3 * rain
    spread = 8 + 6 * rng.random(n)
    humidity = np.clip(55 - 15 * phase + rng.normal(0, 7, n) + 20 * rain, 5, 100)
    wind = 120 + 280 * rng.random(n)

    days = []
    for i in range(n):
        e = round(float(eto[i]), 2)
        hi = round(float(tmax[i]), 1)
        days.append(
            WeatherDay(
                date=cfg.start_date + datetime.timedelta(days=i),
                tmax=hi,
                tmin=round(hi - float(spread[i]), 1),
                humidity=round(float(humidity[i]), 0),
                wind=round(float(wind[i]), 0),
                rainfall=round(float(rain_mm[i]), 1),
                solar=round(e * SOLAR_PER_ETO, 2),
                eto=e,
            )
        )
    return days


def simulate(config: ScenarioConfig | None = None) -> Scenario:
    cfg = config or ScenarioConfig()
    rng = np.random.default_rng(cfg.seed)
    weather = _weather(cfg, rng)

    farms = []
    for k in range(cfg.n_farms):
        area = round(float(rng.uniform(*cfg.area_range)), 1)
        farms.append(
            FarmProfile(
                farm_id=f"F{k + 1:03d}",
                node_id=f"N{k % cfg.n_nodes + 1}",
                area=area,
                soil_type=cfg.soils[int(rng.integers(len(cfg.soils)))],
                crop_type=cfg.crops[int(rng.integers(len(cfg.crops)))],
            )
        )

    truth = {}
    deliveries = []
    for farm in farms:
        kc = cfg.kc[farm.crop_type]
        eps = rng.uniform(-1, 1, cfg.n_days)
        usage = [
            kc * w.eto * ML_PER_MM_HA * farm.area * (1 + cfg.noise * float(e))
            for w, e in zip(weather, eps)
        ]
        for w, u in zip(weather, usage):
            truth[(farm.farm_id, w.date)] = u
        for start in range(0, cfg.n_days, cfg.delivery_period):
            chunk = usage[start : start + cfg.delivery_period]
            deliveries.append(DeliveryEvent(farm.farm_id, weather[start].date, math.fsum(chunk)))
    return Scenario(cfg, tuple(weather), tuple(farms), tuple(deliveries), truth)


def write_scenario(scenario: Scenario, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "weather": out / "weather.csv",
        "farms": out / "farms.csv",
        "deliveries": out / "deliveries.csv",
        "truth": out / "truth.csv",
        "kc": out / "kc.csv",
        "scenario": out / "scenario.json",
    }

    def table(path, header, rows):
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    table(paths["weather"], WEATHER_HEADER, (
        [d.date.isoformat(), repr(d.tmax), repr(d.tmin), repr(d.humidity), repr(d.wind),
         repr(d.rainfall), repr(d.solar), repr(d.eto)]
        for d in scenario.weather
    ))
    table(paths["farms"], FARM_HEADER, (
        [f.farm_id, f.node_id, repr(f.area), f.soil_type, f.crop_type] for f in scenario.farms
    ))
    table(paths["deliveries"], DELIVERY_HEADER, (
        [e.farm_id, e.date.isoformat(), repr(e.volume)] for e in scenario.deliveries
    ))
    table(paths["truth"], TRUTH_HEADER, (
        [farm, day.isoformat(), repr(ml)] for (farm, day), ml in sorted(scenario.truth.items())
    ))
    write_kc_csv(scenario.kc_table, paths["kc"])
    meta = {"config": scenario.config.to_dict(), "season_end": scenario.config.season_end.isoformat()}
    paths["scenario"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def generate(config: ScenarioConfig | None, out_dir) -> dict[str, Path]:
    """Simulate a scenario and write its CSV files; returns the paths."""
    return write_scenario(simulate(config), out_dir)


def read_truth_csv(path) -> dict[tuple[str, datetime.date], float]:
    return {
        (row["farm_id"], datetime.date.fromisoformat(row["date"])): float(row["usage_ml"])
        for _, row in _read_rows(path, TRUTH_HEADER)
    }
