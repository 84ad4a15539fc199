"""Scenario builders and independent residual checks shared by the test modules.

The checks recompute every physical law from the solution arrays and the
scenario data alone; they never look at the LP rows the solver was given.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from bmsim.dispatch import BASE_MVA, ANGLE_LIMIT, DispatchSolution
from bmsim.model import BmUnit, Line, Network, Node, Scenario

REFERENCE = Path(__file__).resolve().parents[1] / "data" / "reference" / "scenario"

BALANCE_TOL = 1e-7  # MW
FLOW_TOL = 1e-7  # MW
SOC_TOL = 1e-7  # MWh
SIMULTANEOUS_TOL = 1e-6  # MW


def single_node(units, imbalance, period_hours=0.5, zone="A"):
    net = Network([Node("N1", zone)], [], "N1")
    horizon = len(imbalance)
    return Scenario(net, tuple(units), (), (tuple(imbalance),), horizon, period_hours)


def unit(uid, node, fuel, offers=(), bids=(), fpn=None, horizon=1, p_min=0.0, p_max=None):
    """A unit whose FPN sits between its bid and offer headroom."""
    down = sum(v for _, v in bids)
    up = sum(v for _, v in offers)
    if fpn is None:
        fpn = down
    if p_max is None:
        p_max = fpn + up
    return BmUnit(uid, node, fuel, (fpn,) * horizon, tuple(offers), tuple(bids), p_min, p_max)


def network(nodes, lines, zones=None):
    zones = zones or {}
    return Network([Node(n, zones.get(n, "Z")) for n in nodes],
                   [Line(a, b, s, c) for a, b, s, c in lines], nodes[0])


def nodal_residuals(sol: DispatchSolution) -> np.ndarray:
    sc = sol.scenario
    net = sc.network
    ix = {n: i for i, n in enumerate(net.node_ids)}
    inject = np.zeros((len(net.nodes), sc.horizon))
    for u in sc.units:
        inject[ix[u.node]] += sol.accepted_offer[u.id].sum(axis=0) - sol.accepted_bid[u.id].sum(axis=0)
    for s, a in enumerate(sc.storage_fleet):
        inject[ix[a.node]] += sol.storage_discharge[s] - sol.storage_charge[s]
    for k, line in enumerate(net.lines):
        inject[ix[line.from_node]] -= sol.flow[k]
        inject[ix[line.to_node]] += sol.flow[k]
    return inject - sc.imbalance_array()


def flow_residuals(sol: DispatchSolution) -> np.ndarray:
    net = sol.scenario.network
    ix = {n: i for i, n in enumerate(net.node_ids)}
    out = np.zeros((len(net.lines), sol.scenario.horizon))
    for k, line in enumerate(net.lines):
        spread = sol.angle[ix[line.from_node]] - sol.angle[ix[line.to_node]]
        out[k] = sol.flow[k] - BASE_MVA * line.susceptance * spread
    return out


def soc_residuals(sol: DispatchSolution) -> np.ndarray:
    """Per-step storage energy balance, followed by the cyclic end condition."""
    sc = sol.scenario
    dt = sc.period_hours
    res = []
    for s, a in enumerate(sc.storage_fleet):
        step = a.eta_charge * sol.storage_charge[s] * dt - sol.storage_discharge[s] / a.eta_discharge * dt
        res.extend(np.diff(sol.soc[s]) - step)
        res.append(sol.soc[s, 0] - a.soc_initial)
        res.append(sol.soc[s, -1] - a.soc_initial)
        # telescoped form: total change equals the summed steps
        res.append(sol.soc[s, -1] - sol.soc[s, 0] - step.sum())
    return np.array(res)


def assert_invariants(sol: DispatchSolution, simultaneous: bool = True) -> None:
    sc = sol.scenario
    net = sc.network
    assert np.abs(nodal_residuals(sol)).max(initial=0) <= BALANCE_TOL
    assert np.abs(flow_residuals(sol)).max(initial=0) <= FLOW_TOL
    ref = net.node_ids.index(net.reference_node)
    assert np.all(sol.angle[ref] == 0)
    assert np.abs(sol.angle).max(initial=0) <= ANGLE_LIMIT + 1e-9
    for k, line in enumerate(net.lines):
        assert np.abs(sol.flow[k]).max(initial=0) <= line.capacity + FLOW_TOL
    assert np.abs(soc_residuals(sol)).max(initial=0) <= SOC_TOL
    for s, a in enumerate(sc.storage_fleet):
        assert sol.soc[s].min() >= -SOC_TOL
        assert sol.soc[s].max() <= a.energy_capacity + SOC_TOL
        for arr in (sol.storage_charge[s], sol.storage_discharge[s]):
            assert arr.min() >= -1e-9 and arr.max() <= a.rated_power + 1e-9
        if simultaneous:
            both = np.minimum(sol.storage_charge[s], sol.storage_discharge[s])
            assert both.max() <= SIMULTANEOUS_TOL, f"{a.label} charges and discharges together"
    for u in sc.units:
        for ladder, acc in ((u.offer_ladder, sol.accepted_offer[u.id]), (u.bid_ladder, sol.accepted_bid[u.id])):
            for r, (_, vol) in enumerate(ladder):
                assert acc[r].min() >= -1e-9 and acc[r].max() <= vol + 1e-9
            live = [r for r, (_, v) in enumerate(ladder) if v > 0]
            for lo, hi in zip(live, live[1:]):
                cap = ladder[hi][1] / ladder[lo][1] * acc[lo]
                assert np.all(acc[hi] <= cap + 1e-7)
        assert_merit_order(u.offer_ladder, sol.accepted_offer[u.id], better=lambda a, b: a < b)
        assert_merit_order(u.bid_ladder, sol.accepted_bid[u.id], better=lambda a, b: a > b)


def assert_merit_order(ladder, accepted, better, tol=1e-7) -> None:
    """A band is used only once every strictly better-priced band of the unit is full."""
    for hi, (p_hi, _) in enumerate(ladder):
        used = accepted[hi] > tol
        for lo, (p_lo, v_lo) in enumerate(ladder):
            if v_lo > 0 and better(p_lo, p_hi):
                assert np.all(accepted[lo][used] >= v_lo - tol)
