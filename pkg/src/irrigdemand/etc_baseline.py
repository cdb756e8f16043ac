"""Crop-coefficient baseline: ET_c = K_c x ET_o.

One season-constant K_c per crop.  The shipped table (``data/kc_default.csv``)
holds generic mid-season placeholders; supply locally calibrated values for
real work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .core import AttributeSchema, RowError, SchemaError, discretize_usage
from .ingest import _read_rows

KC_HEADER = ("crop_type", "kc")

# 1 mm of water over 1 ha is 10 m^3, i.e. 0.01 ML.
ML_PER_MM_HA = 0.01


def etc_mm(kc: float, eto: float) -> float:
    """Crop evapotranspiration in mm/day."""
    if not kc > 0:
        raise ValueError(f"crop coefficient must be > 0, got {kc}")
    if not eto >= 0:
        raise ValueError(f"ET_o must be >= 0, got {eto}")
    return kc * eto


def etc_usage(kc: float, eto: float) -> float:
    """Crop water usage in ML/ha/day."""
    return etc_mm(kc, eto) * ML_PER_MM_HA


@dataclass(frozen=True)
class CropCoefficientTable:
    kc: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for crop, v in self.kc.items():
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"K_c for {crop!r} must be a positive number, got {v!r}")

    def __getitem__(self, crop: str) -> float:
        try:
            return self.kc[crop]
        except KeyError:
            raise KeyError(f"no crop coefficient for crop {crop!r}") from None

    def __contains__(self, crop) -> bool:
        return crop in self.kc

    def missing(self, crops) -> list[str]:
        return sorted({c for c in crops if c not in self.kc})


def load_kc_csv(path) -> CropCoefficientTable:
    table = {}
    for lineno, row in _read_rows(path, KC_HEADER):
        crop = row["crop_type"]
        if not crop:
            raise RowError("empty crop_type", path, lineno)
        if crop in table:
            raise SchemaError(f"{path}:{lineno}: duplicate crop_type {crop!r}")
        try:
            kc = float(row["kc"])
        except ValueError:
            raise RowError(f"cannot parse kc={row['kc']!r}", path, lineno) from None
        if not (kc > 0 and math.isfinite(kc)):
            raise RowError(f"kc must be > 0, got {kc}", path, lineno)
        table[crop] = kc
    return CropCoefficientTable(table)


def default_kc_table() -> CropCoefficientTable:
    ref = resources.files("irrigdemand") / "data" / "kc_default.csv"
    with resources.as_file(ref) as p:
        return load_kc_csv(Path(p))


def write_kc_csv(table: CropCoefficientTable, path) -> None:
    lines = [",".join(KC_HEADER)] + [f"{crop},{kc!r}" for crop, kc in sorted(table.kc.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class EtcModel:
    """Classifier predicting the bin of K_c x ET_o.

    Needs no training; ``fit`` only checks every crop has a coefficient.
    Records must carry ``eto``.
    """

    name = "etc"

    def __init__(self, kc_table: CropCoefficientTable | None = None, crop_attribute: str = "crop_type"):
        self.kc_table = kc_table if kc_table is not None else default_kc_table()
        self.crop_attribute = crop_attribute
        self.schema: AttributeSchema | None = None

    def fit(self, dataset):
        self.schema = dataset.schema
        j = dataset.schema.index(self.crop_attribute)
        missing = self.kc_table.missing(r.values[j] for r in dataset.records)
        if missing:
            raise SchemaError(f"no crop coefficient for {', '.join(missing)}")
        return self

    def usage(self, record) -> float:
        if record.eto is None:
            raise ValueError("ET_c baseline needs records that carry eto")
        crop = record.values[self.schema.index(self.crop_attribute)]
        return etc_usage(self.kc_table[crop], record.eto)

    def predict(self, record) -> int:
        if self.schema is None:
            raise RuntimeError("call fit() first")
        return discretize_usage(self.usage(record), self.schema)
