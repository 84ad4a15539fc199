"""Operational emission change between a storage case and its base case."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .dispatch import DispatchSolution
from .model import FuelType

_INTENSITY_KG_PER_MWH = {
    FuelType.COAL: 937.0,
    FuelType.OCGT: 651.0,
    FuelType.CCGT: 394.0,
    FuelType.OTHER: 300.0,
    FuelType.BIOMASS: 120.0,
    FuelType.NUCLEAR: 0.0,
    FuelType.NPSHYD: 0.0,
    FuelType.WIND: 0.0,
    FuelType.PSH: 0.0,
    FuelType.ZERO_RATED: 0.0,
}


class IntensityTable(dict):
    """Marginal carbon intensity per fuel, kgCO2/MWh."""

    def __init__(self, values: Mapping[FuelType | str, float]):
        super().__init__({FuelType(k): float(v) for k, v in values.items()})
        missing = [f.value for f in FuelType if f not in self]
        if missing:
            raise ValueError(f"intensity table is missing {missing}")
        if any(v < 0 for v in self.values()):
            raise ValueError("carbon intensities must be nonnegative")


def default_intensities() -> IntensityTable:
    return IntensityTable(_INTENSITY_KG_PER_MWH)


@dataclass(frozen=True)
class EmissionDelta:
    total: float  # kgCO2 over the horizon
    rate: float  # kgCO2/h
    per_fuel: dict[FuelType, float]  # kgCO2
    per_fuel_mwh: dict[FuelType, float]


def emission_delta(base: DispatchSolution, test: DispatchSolution,
                   table: IntensityTable | None = None,
                   horizon_hours: float | None = None) -> EmissionDelta:
    """Emission change of ``test`` relative to ``base``.

    Each unit's net redispatch energy (offers minus bids) is differenced
    between the two solutions and priced at its fuel's intensity.  Storage
    itself emits nothing; it only shows up through displaced generation.
    """
    table = default_intensities() if table is None else table
    base_units = {u.id: u for u in base.scenario.units}
    test_units = {u.id: u for u in test.scenario.units}
    if set(base_units) != set(test_units):
        raise ValueError("base and test solutions cover different balancing units")
    if horizon_hours is None:
        horizon_hours = base.scenario.horizon_hours

    per_fuel_mwh = {f: 0.0 for f in FuelType}
    per_fuel = {f: 0.0 for f in FuelType}
    for uid, unit in base_units.items():
        delta_mwh = float(test.unit_energy(uid).sum()) - float(base.unit_energy(uid).sum())
        per_fuel_mwh[unit.fuel] += delta_mwh
        per_fuel[unit.fuel] += delta_mwh * table[unit.fuel]
    total = sum(per_fuel.values())
    return EmissionDelta(total, total / horizon_hours, per_fuel, per_fuel_mwh)


def write_emission_csv(delta: EmissionDelta, path: str | os.PathLike) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fuel", "delta_mwh", "delta_kgco2"])
        for fuel in FuelType:
            w.writerow([fuel.value, repr(delta.per_fuel_mwh[fuel]), repr(delta.per_fuel[fuel])])
        w.writerow(["total", repr(sum(delta.per_fuel_mwh.values())), repr(delta.total)])
    return path
