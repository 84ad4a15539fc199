"""Base-versus-storage sweeps over technologies, sizes and locations."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .carbon import emission_delta
from .dispatch import DispatchSolution, bm_cost, k_fraction, solve_dispatch
from .io import load_scenario
from .model import Scenario, ScenarioError, Tech, make_storage
from .valuation import (CM_DERATING, PLACEHOLDER_CM_PRICE, PLACEHOLDER_DC_PRICE, RevenueInputs,
                        capex_sensitivity, table2_defaults)

log = logging.getLogger(__name__)

HOURS_PER_MONTH = 720.0


@dataclass(frozen=True)
class ValuationConfig:
    cm_price: float = PLACEHOLDER_CM_PRICE
    dc_price: float = PLACEHOLDER_DC_PRICE
    dc_hours_per_year: float = 8760.0
    cm_derating: float = CM_DERATING
    # horizon savings -> monthly savings; None means HOURS_PER_MONTH / horizon hours
    month_scale: float | None = None
    # monthly savings -> yearly; one simulated month stands for a whole year by default
    nbb_multiplier: float = 12.0
    capex_factors: tuple[float, ...] = (1.0, 0.7, 0.3)


@dataclass(frozen=True)
class SweepConfig:
    scenario: Path
    technologies: tuple[Tech, ...]
    sizes: tuple[float, ...] = (1.0, 100.0)
    duration: float = 2.0
    nodes: tuple[str, ...] = ()
    zones: tuple[str, ...] = ()
    valuation: ValuationConfig = field(default_factory=ValuationConfig)
    out: Path = Path("out")
    parallel: int = 1

    def __post_init__(self) -> None:
        if not self.technologies:
            raise ScenarioError("sweep needs at least one technology")
        if not self.nodes and not self.zones:
            raise ScenarioError("sweep needs candidate nodes or zones")
        if not self.sizes or any(s <= 0 for s in self.sizes):
            raise ScenarioError("storage sizes must be positive")
        if self.duration <= 0:
            raise ScenarioError("storage duration must be positive")
        if self.parallel < 1:
            raise ScenarioError("parallelism must be at least one worker")


def load_config(path: str | os.PathLike) -> SweepConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path.name}: invalid JSON ({exc})") from None
    here = path.parent
    known = {"scenario", "technologies", "sizes_mw", "duration_h", "nodes", "zones",
             "valuation", "out", "parallel"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"{path.name}: unknown keys {sorted(unknown)}")
    if "scenario" not in raw:
        raise ScenarioError(f"{path.name}: 'scenario' is required")
    try:
        valuation = ValuationConfig(**{
            k: (tuple(v) if k == "capex_factors" else v) for k, v in raw.get("valuation", {}).items()
        })
        techs = tuple(Tech(t) for t in raw.get("technologies", []))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path.name}: {exc}") from None
    return SweepConfig(
        scenario=here / raw["scenario"],
        technologies=techs,
        sizes=tuple(float(s) for s in raw.get("sizes_mw", (1, 100))),
        duration=float(raw.get("duration_h", 2.0)),
        nodes=tuple(raw.get("nodes", ())),
        zones=tuple(raw.get("zones", ())),
        valuation=valuation,
        out=here / raw.get("out", "out"),
        parallel=int(raw.get("parallel", 1)),
    )


def candidate_nodes(config: SweepConfig, scenario: Scenario) -> list[str]:
    net = scenario.network
    wanted = set(config.nodes)
    for zone in config.zones:
        wanted.update(net.nodes_in_zone(zone))
    chosen = [n for n in net.node_ids if n in wanted]
    if not chosen:
        raise ScenarioError("no candidate node or zone matches the network")
    return chosen


@dataclass(frozen=True)
class SweepRow:
    tech: str
    size: float
    zone: str
    node: str
    cost_delta: float = math.nan  # £ over the horizon
    emission_rate: float = math.nan  # kgCO2/h
    kappa: float = math.nan
    npv: float = math.nan
    npv_capex_70: float = math.nan
    npv_capex_30: float = math.nan
    nbb_per_year: float = math.nan
    cmr: float = math.nan
    dcr: float = math.nan
    error: str = ""

    @property
    def key(self) -> tuple:
        return (self.tech, self.size, self.zone, self.node)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    base_cost: float
    horizon_hours: float


def _evaluate(scenario: Scenario, base: DispatchSolution, tech: Tech, size: float,
              duration: float, node: str, valuation: ValuationConfig) -> SweepRow:
    zone = scenario.network.zone_of(node)
    try:
        asset = make_storage(tech, node, size, duration)
        test = solve_dispatch(scenario.with_storage(asset))
    except (ScenarioError, RuntimeError) as exc:
        return SweepRow(tech.value, size, zone, node, error=f"{type(exc).__name__}: {exc}")
    cost_delta = bm_cost(test) - bm_cost(base)
    emissions = emission_delta(base, test)
    kappa = k_fraction(test, asset)

    month_scale = valuation.month_scale
    if month_scale is None:
        month_scale = HOURS_PER_MONTH / scenario.horizon_hours
    nbb = valuation.nbb_multiplier * month_scale * -cost_delta
    rev = RevenueInputs(nbb, kappa, valuation.cm_price, valuation.dc_price, size,
                        valuation.dc_hours_per_year, valuation.cm_derating)
    factors = tuple(dict.fromkeys((1.0, 0.7, 0.3) + tuple(valuation.capex_factors)))
    results = dict(capex_sensitivity(rev, table2_defaults(tech, size), factors))
    return SweepRow(
        tech.value, size, zone, node,
        cost_delta=cost_delta,
        emission_rate=emissions.rate,
        kappa=kappa,
        npv=results[1.0].npv,
        npv_capex_70=results[0.7].npv,
        npv_capex_30=results[0.3].npv,
        nbb_per_year=nbb,
        cmr=rev.cmr,
        dcr=(1.0 - kappa) * rev.dcr,
    )


def _evaluate_job(args: tuple) -> SweepRow:
    return _evaluate(*args)


def run_sweep(config: SweepConfig, scenario: Scenario | None = None) -> SweepResult:
    """Solve the base case once, then every (technology, size, node) case."""
    if scenario is None:
        scenario = load_scenario(config.scenario)
    if scenario.storage_fleet:
        raise ScenarioError("sweep scenarios must not already contain storage")
    nodes = candidate_nodes(config, scenario)

    base = solve_dispatch(scenario)
    log.info("base case solved: cost %.2f GBP", base.objective_cost)
    jobs = [(scenario, base, tech, float(size), config.duration, node, config.valuation)
            for tech in config.technologies for size in config.sizes for node in nodes]

    if config.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            rows = list(pool.map(_evaluate_job, jobs))
    else:
        rows = [_evaluate_job(job) for job in jobs]
    for row in rows:
        if row.error:
            log.warning("case %s failed: %s", row.key, row.error)
    rows.sort(key=lambda r: r.key)
    return SweepResult(tuple(rows), bm_cost(base), scenario.horizon_hours)


SWEEP_COLUMNS = ["tech", "size_mw", "zone", "node", "cost_delta_gbp", "emission_rate_kgco2_per_h",
                 "kappa", "npv_gbp", "npv_capex_0.7_gbp", "npv_capex_0.3_gbp", "error"]


def _num(value: float) -> str:
    return "" if math.isnan(value) else repr(float(value))


def _sweep_record(row: SweepRow) -> list[str]:
    return [row.tech, _num(row.size), row.zone, row.node, _num(row.cost_delta),
            _num(row.emission_rate), _num(row.kappa), _num(row.npv), _num(row.npv_capex_70),
            _num(row.npv_capex_30), row.error]


def _best_by_zone(rows: Sequence[SweepRow]) -> list[list[str]]:
    ok = [r for r in rows if not r.error]
    table = []
    for size in sorted({r.size for r in ok}):
        sized = [r for r in ok if r.size == size]
        zones = sorted({r.zone for r in sized})
        best_cost = {z: min((r for r in sized if r.zone == z), key=lambda r: (r.cost_delta, r.key))
                     for z in zones}
        best_emis = {z: min((r for r in sized if r.zone == z), key=lambda r: (r.emission_rate, r.key))
                     for z in zones}
        cost_rank = {z: k for k, z in enumerate(sorted(zones, key=lambda z: (best_cost[z].cost_delta, z)), 1)}
        emis_rank = {z: k for k, z in enumerate(sorted(zones, key=lambda z: (best_emis[z].emission_rate, z)), 1)}
        for z in zones:
            c, e = best_cost[z], best_emis[z]
            table.append([z, _num(size), c.tech, c.node, _num(c.cost_delta), str(cost_rank[z]),
                          e.tech, e.node, _num(e.emission_rate), str(emis_rank[z])])
    return table


BY_ZONE_COLUMNS = ["zone", "size_mw", "best_cost_tech", "best_cost_node", "best_cost_delta_gbp",
                   "cost_rank", "best_emission_tech", "best_emission_node",
                   "best_emission_rate_kgco2_per_h", "emission_rank"]


def summarize(rows: Sequence[SweepRow]) -> dict:
    summary: dict = {}
    for tech in sorted({r.tech for r in rows}):
        mine = [r for r in rows if r.tech == tech]
        ok = [r for r in mine if not r.error]
        entry = {"cases": len(mine), "failed": len(mine) - len(ok)}
        for name, attr in (("cost_delta_gbp", "cost_delta"),
                           ("emission_rate_kgco2_per_h", "emission_rate"),
                           ("npv_gbp", "npv")):
            values = [getattr(r, attr) for r in ok]
            entry[name] = {"min": min(values), "max": max(values)} if values else None
        summary[tech] = entry
    return summary


def emit_reports(result: SweepResult, directory: str | os.PathLike) -> list[Path]:
    """Write ``sweep.csv``, ``by_zone.csv``, ``summary.json`` and ``valuation.json``."""
    if not result.rows:
        raise ValueError("nothing to report: the sweep has no rows")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    def write_csv(name: str, header: list[str], records) -> Path:
        path = out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(records)
        return path

    def write_json(name: str, payload) -> Path:
        path = out / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    valuations = [{
        "tech": r.tech, "node": r.node, "zone": r.zone, "size_mw": r.size, "kappa": r.kappa,
        "nbb_per_year": r.nbb_per_year, "cmr": r.cmr, "dcr": r.dcr, "npv": r.npv,
        "sensitivity": [{"factor": 1.0, "npv": r.npv}, {"factor": 0.7, "npv": r.npv_capex_70},
                        {"factor": 0.3, "npv": r.npv_capex_30}],
    } for r in result.rows if not r.error]

    return [
        write_csv("sweep.csv", SWEEP_COLUMNS, map(_sweep_record, result.rows)),
        write_csv("by_zone.csv", BY_ZONE_COLUMNS, _best_by_zone(result.rows)),
        write_json("summary.json", summarize(result.rows)),
        write_json("valuation.json", valuations),
    ]
