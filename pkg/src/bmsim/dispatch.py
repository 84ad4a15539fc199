"""Pay-as-bid balancing redispatch over a settlement horizon.

The system operator accepts offers (upward) and bids (downward) from balancing
units, and may charge or discharge storage, so that every node balances its
imbalance against DC line flows in every period.  It minimises

    sum over periods of  offer payments - bid receipts + storage degradation

Network model: voltage magnitudes fixed at 1 p.u., no losses, line flow in MW
is ``BASE_MVA * susceptance_pu * (angle_from - angle_to)`` with angles limited
to +/- ``ANGLE_LIMIT`` rad and the reference angle fixed at zero.

Ladder bands are chained: the accepted fraction of band ``r + 1`` may not
exceed that of band ``r``, which keeps acceptances in ladder order even among
equally priced bands.

Storage follows ``soc[t+1] = soc[t] + eta_c * charge * dt - discharge / eta_d * dt``
with the final state of charge equal to the initial one.  Assets with a zero
degradation tariff carry a tiny throughput penalty (``TIE_BREAK``) so that the
LP never charges and discharges at once for free; it is left out of reported
costs.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lp import LpProblem, Sense, Status, solve_lp
from .model import FuelType, Scenario, ScenarioError, StorageAsset

BASE_MVA = 100.0
ANGLE_LIMIT = 0.5
TIE_BREAK = 1e-6

log = logging.getLogger(__name__)


class DispatchError(RuntimeError):
    pass


class InfeasibleDispatch(DispatchError):
    """No redispatch balances the system.

    ``period`` is the first settlement period (counted from 1) whose total
    upward or downward headroom falls short of the net imbalance, or ``None``
    when every period has enough headroom and the network is the bottleneck.
    """

    def __init__(self, message: str, period: int | None):
        super().__init__(message)
        self.period = period


@dataclass
class _Layout:
    offer: dict[str, np.ndarray]  # unit -> (bands, T) variable index, -1 for empty bands
    bid: dict[str, np.ndarray]
    charge: np.ndarray  # (S, T)
    discharge: np.ndarray
    soc: np.ndarray  # (S, T + 1)
    angle: np.ndarray  # (N, T), -1 at the reference node
    flow: np.ndarray  # (L, T)
    tie_break: np.ndarray  # (S,) bool


def _assemble(scenario: Scenario) -> tuple[LpProblem, _Layout]:
    net = scenario.network
    T, dt = scenario.horizon, scenario.period_hours
    N, L, S = len(net.nodes), len(net.lines), len(scenario.storage_fleet)
    node_ix = {node: i for i, node in enumerate(net.node_ids)}
    lp = LpProblem()

    offer, bid = {}, {}
    for unit in scenario.units:
        for side, ladder, sign, store in (("offer", unit.offer_ladder, 1.0, offer),
                                          ("bid", unit.bid_ladder, -1.0, bid)):
            idx = np.full((len(ladder), T), -1, dtype=int)
            for t in range(T):
                for r, (price, volume) in enumerate(ladder):
                    if volume > 0:
                        idx[r, t] = lp.add_variable(0.0, volume, sign * price * dt,
                                                    f"{side}[{unit.id}#{r + 1},{t + 1}]")
            store[unit.id] = idx

    angle = np.full((N, T), -1, dtype=int)
    ref = node_ix[net.reference_node]
    for i, node in enumerate(net.node_ids):
        if i == ref:
            continue
        for t in range(T):
            angle[i, t] = lp.add_variable(-ANGLE_LIMIT, ANGLE_LIMIT, 0.0, f"angle[{node},{t + 1}]")

    names = net.line_names()
    flow = np.full((L, T), -1, dtype=int)
    for k, line in enumerate(net.lines):
        for t in range(T):
            flow[k, t] = lp.add_variable(-line.capacity, line.capacity, 0.0, f"flow[{names[k]},{t + 1}]")

    charge = np.full((S, T), -1, dtype=int)
    discharge = np.full((S, T), -1, dtype=int)
    soc = np.full((S, T + 1), -1, dtype=int)
    tie_break = np.zeros(S, dtype=bool)
    for s, asset in enumerate(scenario.storage_fleet):
        tie_break[s] = asset.degradation_tariff == 0.0
        wear = (asset.degradation_tariff + (TIE_BREAK if tie_break[s] else 0.0)) * dt
        for t in range(T):
            charge[s, t] = lp.add_variable(0.0, asset.rated_power, wear, f"charge[{asset.label},{t + 1}]")
            discharge[s, t] = lp.add_variable(0.0, asset.rated_power, wear, f"discharge[{asset.label},{t + 1}]")
        soc[s, 0] = lp.add_variable(asset.soc_initial, asset.soc_initial, 0.0, f"soc[{asset.label},0]")
        for t in range(1, T + 1):
            soc[s, t] = lp.add_variable(0.0, asset.energy_capacity, 0.0, f"soc[{asset.label},{t}]")

    imbalance = scenario.imbalance_array()
    for t in range(T):
        rows: list[dict[int, float]] = [{} for _ in range(N)]
        for unit in scenario.units:
            row = rows[node_ix[unit.node]]
            for j in offer[unit.id][:, t]:
                if j >= 0:
                    row[j] = 1.0
            for j in bid[unit.id][:, t]:
                if j >= 0:
                    row[j] = -1.0
        for s, asset in enumerate(scenario.storage_fleet):
            row = rows[node_ix[asset.node]]
            row[discharge[s, t]] = 1.0
            row[charge[s, t]] = -1.0
        for k, line in enumerate(net.lines):
            rows[node_ix[line.from_node]][flow[k, t]] = -1.0
            rows[node_ix[line.to_node]][flow[k, t]] = 1.0
        for i, node in enumerate(net.node_ids):
            lp.add_constraint(rows[i], Sense.EQ, imbalance[i, t], f"balance[{node},{t + 1}]")

        for k, line in enumerate(net.lines):
            gain = BASE_MVA * line.susceptance
            row = {int(flow[k, t]): 1.0}
            a, b = angle[node_ix[line.from_node], t], angle[node_ix[line.to_node], t]
            if a >= 0:
                row[int(a)] = -gain
            if b >= 0:
                row[int(b)] = gain
            lp.add_constraint(row, Sense.EQ, 0.0, f"flowlaw[{names[k]},{t + 1}]")

        for unit in scenario.units:
            for side, ladder, store in (("offer", unit.offer_ladder, offer), ("bid", unit.bid_ladder, bid)):
                live = [r for r, (_, v) in enumerate(ladder) if v > 0]
                for lo, hi in zip(live, live[1:]):
                    ratio = ladder[hi][1] / ladder[lo][1]
                    lp.add_constraint({int(store[unit.id][hi, t]): 1.0, int(store[unit.id][lo, t]): -ratio},
                                      Sense.LE, 0.0, f"{side}order[{unit.id}#{hi + 1},{t + 1}]")

    for s, asset in enumerate(scenario.storage_fleet):
        for t in range(T):
            lp.add_constraint({int(soc[s, t + 1]): 1.0, int(soc[s, t]): -1.0,
                               int(charge[s, t]): -asset.eta_charge * dt,
                               int(discharge[s, t]): dt / asset.eta_discharge},
                              Sense.EQ, 0.0, f"soc[{asset.label},{t + 1}]")
        lp.add_constraint({int(soc[s, T]): 1.0, int(soc[s, 0]): -1.0}, Sense.EQ, 0.0,
                          f"cyclic[{asset.label}]")

    layout = _Layout(offer, bid, charge, discharge, soc, angle, flow, tie_break)
    return lp, layout


def build_dispatch_problem(scenario: Scenario) -> LpProblem:
    """The redispatch LP for ``scenario``; infeasible inputs still produce a problem."""
    return _assemble(scenario)[0]


def lp_header(scenario: Scenario) -> str:
    return (f"bmsim redispatch LP: {len(scenario.network.nodes)} nodes, {scenario.horizon} periods "
            f"of {scenario.period_hours} h\nflow_MW = {BASE_MVA:g} MVA base x susceptance_pu x "
            f"(angle_from - angle_to); |angle| <= {ANGLE_LIMIT} rad")


@dataclass(frozen=True, eq=False)
class DispatchSolution:
    """Optimal redispatch.

    ``accepted_offer[unit]`` and ``accepted_bid[unit]`` are ``(bands, T)``
    arrays in MW; storage arrays are indexed by position in the scenario's
    fleet; ``soc`` holds ``T + 1`` period boundaries.
    """

    scenario: Scenario
    accepted_offer: dict[str, np.ndarray]
    accepted_bid: dict[str, np.ndarray]
    storage_charge: np.ndarray
    storage_discharge: np.ndarray
    soc: np.ndarray
    angle: np.ndarray
    flow: np.ndarray
    objective_cost: float
    iterations: int = field(default=0)

    @property
    def period_hours(self) -> float:
        return self.scenario.period_hours

    def unit_energy(self, unit_id: str) -> np.ndarray:
        """Net MWh deviation from FPN per period (offers positive, bids negative)."""
        up = self.accepted_offer[unit_id].sum(axis=0)
        down = self.accepted_bid[unit_id].sum(axis=0)
        return (up - down) * self.period_hours

    def storage_index(self, asset: StorageAsset | str) -> int:
        label = asset if isinstance(asset, str) else asset.label
        labels = [a.label for a in self.scenario.storage_fleet]
        if label not in labels:
            raise KeyError(f"storage {label} is not part of this solution")
        return labels.index(label)


def _short_period(scenario: Scenario) -> int | None:
    imbalance = scenario.imbalance_array().sum(axis=0)
    up = sum(u.offer_volume for u in scenario.units)
    down = sum(u.bid_volume for u in scenario.units)
    flex = sum(a.rated_power for a in scenario.storage_fleet)
    for t, need in enumerate(imbalance, start=1):
        if need > up + flex + 1e-9 or -need > down + flex + 1e-9:
            return t
    return None


def solve_dispatch(scenario: Scenario) -> DispatchSolution:
    problem, lay = _assemble(scenario)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("LP listing:\n%s", problem.to_lp_text(lp_header(scenario)))
    result = solve_lp(problem)
    log.debug("%d variables, %d constraints: %s after %d simplex iterations",
              problem.n_variables, len(problem.constraints), result.status.value, result.iterations)
    if result.status is Status.INFEASIBLE:
        period = _short_period(scenario)
        where = f"period {period} lacks headroom" if period else "network or storage limits bind"
        raise InfeasibleDispatch(f"redispatch is infeasible: {where}", period)
    if result.status is Status.UNBOUNDED:
        raise DispatchError("internal error: redispatch LP is unbounded")

    x = result.values

    def take(idx: np.ndarray) -> np.ndarray:
        if x.size == 0:
            out = np.zeros(idx.shape)
        else:
            out = np.where(idx >= 0, x[np.maximum(idx, 0)], 0.0)
        out.setflags(write=False)
        return out

    charge, discharge = take(lay.charge), take(lay.discharge)
    penalty = TIE_BREAK * scenario.period_hours * float(
        (charge[lay.tie_break] + discharge[lay.tie_break]).sum())
    return DispatchSolution(
        scenario=scenario,
        accepted_offer={u: take(i) for u, i in lay.offer.items()},
        accepted_bid={u: take(i) for u, i in lay.bid.items()},
        storage_charge=charge,
        storage_discharge=discharge,
        soc=take(lay.soc),
        angle=take(lay.angle),
        flow=take(lay.flow),
        objective_cost=result.objective_value - penalty,
        iterations=result.iterations,
    )


def bm_cost(solution: DispatchSolution) -> float:
    """Recompute the balancing cost from accepted volumes, ladder prices and storage throughput."""
    dt = solution.period_hours
    total = 0.0
    for unit in solution.scenario.units:
        offers = solution.accepted_offer[unit.id]
        bids = solution.accepted_bid[unit.id]
        for r, (price, _) in enumerate(unit.offer_ladder):
            total += price * float(offers[r].sum()) * dt
        for r, (price, _) in enumerate(unit.bid_ladder):
            total -= price * float(bids[r].sum()) * dt
    for s, asset in enumerate(solution.scenario.storage_fleet):
        throughput = float(solution.storage_charge[s].sum() + solution.storage_discharge[s].sum())
        total += asset.degradation_tariff * throughput * dt
    return total


def storage_delta_run(scenario_without: Scenario, asset: StorageAsset,
                      base: DispatchSolution | None = None
                      ) -> tuple[DispatchSolution, DispatchSolution, float]:
    """Solve with and without ``asset``; the delta is ``cost(with) - cost(base)``.

    A precomputed ``base`` solution may be passed to avoid re-solving it.
    """
    if scenario_without.storage_fleet:
        raise ScenarioError("the base scenario must not contain storage")
    if base is None:
        base = solve_dispatch(scenario_without)
    with_storage = solve_dispatch(scenario_without.with_storage(asset))
    return base, with_storage, bm_cost(with_storage) - bm_cost(base)


def k_fraction(solution: DispatchSolution, asset: StorageAsset | str) -> float:
    """Mean share of rated power used for balancing, over all periods."""
    s = solution.storage_index(asset)
    rated = solution.scenario.storage_fleet[s].rated_power
    use = (solution.storage_charge[s] + solution.storage_discharge[s]) / rated
    return float(min(1.0, max(0.0, use.mean())))


@dataclass(frozen=True, eq=False)
class DispatchReport:
    objective_cost: float
    fuel_energy: dict[FuelType, np.ndarray]  # MWh deviation from FPN per period
    utilisation: dict[str, float]

    def net_energy(self) -> np.ndarray:
        """Net redispatch energy per period, summed over fuels."""
        return np.sum(list(self.fuel_energy.values()), axis=0)


def dispatch_report(solution: DispatchSolution) -> DispatchReport:
    T = solution.scenario.horizon
    fuels: dict[FuelType, np.ndarray] = {}
    for unit in solution.scenario.units:
        fuels.setdefault(unit.fuel, np.zeros(T))
        fuels[unit.fuel] = fuels[unit.fuel] + solution.unit_energy(unit.id)
    util = {a.label: k_fraction(solution, a) for a in solution.scenario.storage_fleet}
    return DispatchReport(solution.objective_cost, fuels, util)


def solution_rows(solution: DispatchSolution) -> list[tuple[str, str, int, float]]:
    """Rows of ``(kind, entity, period, value)``; ``soc`` periods are boundaries from 0."""
    sc = solution.scenario
    rows = []
    for kind, ladders in (("offer", solution.accepted_offer), ("bid", solution.accepted_bid)):
        for unit in sc.units:
            values = ladders[unit.id]
            for r in range(values.shape[0]):
                rows += [(kind, f"{unit.id}#{r + 1}", t + 1, float(v)) for t, v in enumerate(values[r])]
    for s, asset in enumerate(sc.storage_fleet):
        rows += [("charge", asset.label, t + 1, float(v)) for t, v in enumerate(solution.storage_charge[s])]
        rows += [("discharge", asset.label, t + 1, float(v)) for t, v in enumerate(solution.storage_discharge[s])]
        rows += [("soc", asset.label, t, float(v)) for t, v in enumerate(solution.soc[s])]
    for k, name in enumerate(sc.network.line_names()):
        rows += [("flow", name, t + 1, float(v)) for t, v in enumerate(solution.flow[k])]
    for i, node in enumerate(sc.network.node_ids):
        rows += [("angle", node, t + 1, float(v)) for t, v in enumerate(solution.angle[i])]
    return rows


def write_solution_csv(solution: DispatchSolution, path: str | os.PathLike) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "entity", "period", "value"])
        w.writerows((k, e, t, repr(v)) for k, e, t, v in solution_rows(solution))
    return path
