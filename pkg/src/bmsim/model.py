"""Domain types: network, balancing units, storage assets and scenarios.

Every type validates itself on construction and is frozen afterwards, so a
scenario can be handed to worker processes without copying concerns.

Units: power in MW, energy in MWh, prices in £/MWh, settlement periods of
``period_hours`` (half an hour by default).
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np


class ScenarioError(ValueError):
    """A scenario file or object violates its schema or an invariant."""


class FuelType(str, enum.Enum):
    COAL = "Coal"
    OCGT = "OCGT"
    CCGT = "CCGT"
    OTHER = "Other"
    BIOMASS = "Biomass"
    NUCLEAR = "Nuclear"
    NPSHYD = "NPSHYD"
    WIND = "Wind"
    PSH = "PSH"
    ZERO_RATED = "ZeroRated"  # storage, demand-side response, embedded renewables


class Tech(str, enum.Enum):
    LIB = "LIB"
    VRFB = "VRFB"
    PSH = "PSH"
    HES = "HES"


ROUND_TRIP_EFFICIENCY = {Tech.LIB: 0.85, Tech.VRFB: 0.64, Tech.PSH: 0.79, Tech.HES: 0.30}

# £/MWh of throughput, charged on both legs
DEGRADATION_TARIFF = {Tech.LIB: 13.17, Tech.VRFB: 0.78, Tech.PSH: 0.00, Tech.HES: 0.23}


def _tech(value: Tech | str) -> Tech:
    try:
        return Tech(value)
    except ValueError:
        raise ScenarioError(f"unknown technology {value!r}") from None


def _fuel(value: FuelType | str) -> FuelType:
    try:
        return FuelType(value)
    except ValueError:
        raise ScenarioError(f"unknown fuel type {value!r}") from None


@dataclass(frozen=True)
class Node:
    id: str
    zone: str


@dataclass(frozen=True)
class Line:
    from_node: str
    to_node: str
    susceptance: float  # per unit on the system base
    capacity: float  # MW

    @property
    def name(self) -> str:
        return f"{self.from_node}-{self.to_node}"


@dataclass(frozen=True)
class Network:
    nodes: tuple[Node, ...]
    lines: tuple[Line, ...]
    reference_node: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "lines", tuple(self.lines))
        ids = [n.id for n in self.nodes]
        if not ids:
            raise ScenarioError("network has no nodes")
        if len(set(ids)) != len(ids):
            raise ScenarioError("network node ids must be unique")
        known = set(ids)
        if self.reference_node not in known:
            raise ScenarioError(f"reference node {self.reference_node!r} is not in the network")
        for line in self.lines:
            for end in (line.from_node, line.to_node):
                if end not in known:
                    raise ScenarioError(f"line {line.name} references unknown node {end!r}")
            if line.from_node == line.to_node:
                raise ScenarioError(f"line {line.name} is a self-loop")
            if not line.susceptance > 0:
                raise ScenarioError(f"line {line.name} susceptance must be positive")
            if not line.capacity > 0:
                raise ScenarioError(f"line {line.name} capacity must be positive")
        if not self._connected():
            raise ScenarioError("network is not connected")

    def _connected(self) -> bool:
        adjacent: dict[str, set[str]] = {n.id: set() for n in self.nodes}
        for line in self.lines:
            adjacent[line.from_node].add(line.to_node)
            adjacent[line.to_node].add(line.from_node)
        seen = {self.reference_node}
        queue = deque(seen)
        while queue:
            for nxt in adjacent[queue.popleft()] - seen:
                seen.add(nxt)
                queue.append(nxt)
        return len(seen) == len(self.nodes)

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def index_of(self, node: str) -> int:
        return self.node_ids.index(node)

    def zone_of(self, node: str) -> str:
        return self.nodes[self.index_of(node)].zone

    def nodes_in_zone(self, zone: str) -> list[str]:
        return [n.id for n in self.nodes if n.zone == zone]

    def line_names(self) -> list[str]:
        """Unique display names; parallel circuits get a ``#k`` suffix."""
        seen: dict[str, int] = {}
        names = []
        for line in self.lines:
            k = seen.get(line.name, 0) + 1
            seen[line.name] = k
            names.append(line.name if k == 1 else f"{line.name}#{k}")
        return names


Ladder = tuple[tuple[float, float], ...]


def _ladder(pairs: Iterable[Sequence[float]]) -> Ladder:
    return tuple((float(p), float(v)) for p, v in pairs)


@dataclass(frozen=True)
class BmUnit:
    """A balancing unit: its final physical notification plus priced deviations.

    ``offer_ladder`` and ``bid_ladder`` hold ``(price, volume)`` bands.  Offers
    are upward deviations from the FPN; bids are downward.
    """

    id: str
    node: str
    fuel: FuelType
    fpn: tuple[float, ...]
    offer_ladder: Ladder
    bid_ladder: Ladder
    p_min: float
    p_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "fuel", _fuel(self.fuel))
        object.__setattr__(self, "fpn", tuple(float(v) for v in self.fpn))
        object.__setattr__(self, "offer_ladder", _ladder(self.offer_ladder))
        object.__setattr__(self, "bid_ladder", _ladder(self.bid_ladder))
        who = f"unit {self.id}"
        if self.p_min > self.p_max:
            raise ScenarioError(f"{who}: p_min exceeds p_max")
        for side, ladder in (("offer", self.offer_ladder), ("bid", self.bid_ladder)):
            for price, volume in ladder:
                if not (math.isfinite(price) and math.isfinite(volume)):
                    raise ScenarioError(f"{who}: {side} ladder has non-finite entries")
                if volume < 0:
                    raise ScenarioError(f"{who}: {side} volumes must be nonnegative")
        offer_prices = [p for p, _ in self.offer_ladder]
        if any(b < a for a, b in zip(offer_prices, offer_prices[1:])):
            raise ScenarioError(f"{who}: offer prices must be nondecreasing")
        bid_prices = [p for p, _ in self.bid_ladder]
        if any(b > a for a, b in zip(bid_prices, bid_prices[1:])):
            raise ScenarioError(f"{who}: bid prices must be nonincreasing")
        up, down = self.offer_volume, self.bid_volume
        for t, mw in enumerate(self.fpn, start=1):
            if not self.p_min <= mw <= self.p_max:
                raise ScenarioError(f"{who}: FPN {mw} MW in period {t} is outside [p_min, p_max]")
            if mw + up > self.p_max + 1e-9:
                raise ScenarioError(f"{who}: FPN plus offer volume exceeds p_max in period {t}")
            if mw - down < self.p_min - 1e-9:
                raise ScenarioError(f"{who}: FPN minus bid volume is below p_min in period {t}")

    @property
    def offer_volume(self) -> float:
        return sum(v for _, v in self.offer_ladder)

    @property
    def bid_volume(self) -> float:
        return sum(v for _, v in self.bid_ladder)


@dataclass(frozen=True)
class StorageAsset:
    technology: Tech
    node: str
    rated_power: float  # MW
    duration: float  # hours
    eta_charge: float
    eta_discharge: float
    degradation_tariff: float  # £/MWh throughput
    soc_initial: float  # MWh
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "technology", _tech(self.technology))
        who = f"storage {self.label}"
        if not (self.rated_power > 0 and self.duration > 0):
            raise ScenarioError(f"{who}: rated power and duration must be positive")
        for eta in (self.eta_charge, self.eta_discharge):
            if not 0 < eta <= 1:
                raise ScenarioError(f"{who}: efficiencies must lie in (0, 1]")
        target = ROUND_TRIP_EFFICIENCY[self.technology]
        if abs(self.eta_charge * self.eta_discharge - target) > 1e-9:
            raise ScenarioError(f"{who}: charge x discharge efficiency must equal the "
                                f"{self.technology.value} round trip {target}")
        if not 0 <= self.soc_initial <= self.energy_capacity:
            raise ScenarioError(f"{who}: initial state of charge {self.soc_initial} MWh is outside "
                                f"[0, {self.energy_capacity}]")
        if self.degradation_tariff < 0:
            raise ScenarioError(f"{who}: degradation tariff must be nonnegative")

    @property
    def energy_capacity(self) -> float:
        return self.rated_power * self.duration

    @property
    def round_trip(self) -> float:
        return self.eta_charge * self.eta_discharge

    @property
    def label(self) -> str:
        return self.name or f"{Tech(self.technology).value}@{self.node}"


def make_storage(tech: Tech | str, node: str, rated_power: float, duration: float,
                 **overrides) -> StorageAsset:
    """Storage asset with technology defaults.

    The round-trip efficiency is split evenly between the legs, the degradation
    tariff comes from the technology table and the asset starts half full.
    Keyword overrides replace any of those defaults.
    """
    tech = _tech(tech)
    if not (rated_power > 0 and duration > 0):
        raise ScenarioError("rated power and duration must be positive")
    leg = math.sqrt(ROUND_TRIP_EFFICIENCY[tech])
    fields = dict(
        technology=tech, node=node, rated_power=float(rated_power), duration=float(duration),
        eta_charge=leg, eta_discharge=leg, degradation_tariff=DEGRADATION_TARIFF[tech],
        soc_initial=0.5 * rated_power * duration,
    )
    unknown = set(overrides) - set(fields) - {"name"}
    if unknown:
        raise ScenarioError(f"unknown storage override(s): {sorted(unknown)}")
    fields.update(overrides)
    return StorageAsset(**fields)


@dataclass(frozen=True)
class Scenario:
    """One balancing horizon.

    ``imbalance[i][t]`` is the signed imbalance at ``network.nodes[i]`` in
    period ``t``; positive means a shortfall that needs upward action.
    """

    network: Network
    units: tuple[BmUnit, ...]
    storage_fleet: tuple[StorageAsset, ...]
    imbalance: tuple[tuple[float, ...], ...]
    horizon: int
    period_hours: float = 0.5
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "storage_fleet", tuple(self.storage_fleet))
        imbalance = tuple(tuple(float(v) for v in row) for row in self.imbalance)
        object.__setattr__(self, "imbalance", imbalance)
        if self.horizon < 1:
            raise ScenarioError("horizon must be at least one settlement period")
        if not self.period_hours > 0:
            raise ScenarioError("period length must be positive")
        if len(imbalance) != len(self.network.nodes):
            raise ScenarioError("imbalance must be given for every node")
        for node, row in zip(self.network.nodes, imbalance):
            if len(row) != self.horizon:
                raise ScenarioError(f"imbalance for node {node.id} must cover all {self.horizon} periods")
            if not all(math.isfinite(v) for v in row):
                raise ScenarioError(f"imbalance for node {node.id} has non-finite values")
        known = set(self.network.node_ids)
        ids = [u.id for u in self.units]
        if len(set(ids)) != len(ids):
            raise ScenarioError("unit ids must be unique")
        for unit in self.units:
            if unit.node not in known:
                raise ScenarioError(f"unit {unit.id}: unknown node {unit.node!r}")
            if len(unit.fpn) != self.horizon:
                raise ScenarioError(f"unit {unit.id}: FPN must cover all {self.horizon} periods")
        labels = [s.label for s in self.storage_fleet]
        if len(set(labels)) != len(labels):
            raise ScenarioError("storage assets must have distinct labels")
        for asset in self.storage_fleet:
            if asset.node not in known:
                raise ScenarioError(f"storage {asset.label}: unknown node {asset.node!r}")

    @property
    def horizon_hours(self) -> float:
        return self.horizon * self.period_hours

    def imbalance_array(self) -> np.ndarray:
        return np.array(self.imbalance, dtype=float).reshape(len(self.network.nodes), self.horizon)

    def with_storage(self, *assets: StorageAsset) -> "Scenario":
        return replace(self, storage_fleet=tuple(assets))

    def unit(self, unit_id: str) -> BmUnit:
        for unit in self.units:
            if unit.id == unit_id:
                return unit
        raise KeyError(unit_id)
