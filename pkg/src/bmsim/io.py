"""Reading and writing scenario directories.

A scenario directory holds::

    network.csv     node,zone rows / blank line / from,to,susceptance_pu,capacity_mw rows
    units.csv       id,node,fuel,p_min,p_max
    fpn.csv         unit,period,mw
    ladders.csv     unit,side,rank,price_gbp_per_mwh,volume_mw   (side is offer or bid)
    storage.json    [{technology, node, rated_power_mw, duration_h, overrides?}, ...]
    imbalance.csv   node,period,mw

Periods are numbered from 1.  The first node listed in ``network.csv`` is the
angle reference.  ``storage.json`` may be absent, meaning an empty fleet.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Iterator, Mapping

from .model import (BmUnit, Line, Network, Node, Scenario, ScenarioError, StorageAsset,
                    make_storage)

FILES = {
    "network": "network.csv",
    "units": "units.csv",
    "fpn": "fpn.csv",
    "ladders": "ladders.csv",
    "storage": "storage.json",
    "imbalance": "imbalance.csv",
}

NODE_HEADER = ["node", "zone"]
LINE_HEADER = ["from", "to", "susceptance_pu", "capacity_mw"]
UNIT_HEADER = ["id", "node", "fuel", "p_min", "p_max"]
FPN_HEADER = ["unit", "period", "mw"]
LADDER_HEADER = ["unit", "side", "rank", "price_gbp_per_mwh", "volume_mw"]
IMBALANCE_HEADER = ["node", "period", "mw"]

_STORAGE_OVERRIDES = ("eta_charge", "eta_discharge", "degradation_tariff", "soc_initial", "name")


def _rows(text: str, header: list[str], source: str, first_line: int = 1) -> Iterator[tuple[int, dict]]:
    reader = csv.reader(io.StringIO(text))
    try:
        found = next(reader)
    except StopIteration:
        raise ScenarioError(f"{source}: missing header {','.join(header)}") from None
    if [h.strip() for h in found] != header:
        raise ScenarioError(f"{source} row {first_line}: expected header {','.join(header)}, "
                            f"got {','.join(found)}")
    for offset, values in enumerate(reader, start=1):
        if not values or all(not v.strip() for v in values):
            continue
        row_no = first_line + offset
        if len(values) != len(header):
            raise ScenarioError(f"{source} row {row_no}: expected {len(header)} columns, got {len(values)}")
        yield row_no, {k: v.strip() for k, v in zip(header, values)}


def _number(row: dict, column: str, source: str, row_no: int) -> float:
    raw = row[column]
    try:
        value = float(raw)
    except ValueError:
        raise ScenarioError(f"{source} row {row_no}: column '{column}' is not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ScenarioError(f"{source} row {row_no}: column '{column}' must be finite")
    return value


def _integer(row: dict, column: str, source: str, row_no: int) -> int:
    raw = row[column]
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"{source} row {row_no}: column '{column}' is not an integer: {raw!r}") from None


def _read(path: Path) -> str:
    if not path.is_file():
        raise FileNotFoundError(f"missing scenario file: {path}")
    return path.read_text(encoding="utf-8")


def read_network(path: Path) -> Network:
    source = path.name
    lines = _read(path).splitlines()
    try:
        split = next(i for i, line in enumerate(lines) if not line.strip())
    except StopIteration:
        raise ScenarioError(f"{source}: expected a blank line between the node and line sections") from None
    node_text = "\n".join(lines[:split])
    rest = lines[split:]
    skip = next((i for i, line in enumerate(rest) if line.strip()), len(rest))
    line_text = "\n".join(rest[skip:])

    nodes = []
    for row_no, row in _rows(node_text, NODE_HEADER, source):
        if not row["node"]:
            raise ScenarioError(f"{source} row {row_no}: column 'node' is empty")
        nodes.append(Node(row["node"], row["zone"]))
    edges = []
    for row_no, row in _rows(line_text, LINE_HEADER, source, first_line=split + skip + 1):
        edges.append(Line(row["from"], row["to"],
                          _number(row, "susceptance_pu", source, row_no),
                          _number(row, "capacity_mw", source, row_no)))
    if not nodes:
        raise ScenarioError(f"{source}: no nodes listed")
    return Network(tuple(nodes), tuple(edges), nodes[0].id)


def _by_period(entries: dict[str, dict[int, float]], names: list[str], horizon: int,
               source: str, what: str) -> dict[str, tuple[float, ...]]:
    out = {}
    for name in names:
        got = entries.get(name, {})
        missing = [t for t in range(1, horizon + 1) if t not in got]
        if missing:
            raise ScenarioError(f"{source}: {what} {name} has no value for period {missing[0]}")
        out[name] = tuple(got[t] for t in range(1, horizon + 1))
    return out


def _period_table(text: str, header: list[str], key: str, source: str,
                  known: set[str], what: str) -> dict[str, dict[int, float]]:
    table: dict[str, dict[int, float]] = {}
    for row_no, row in _rows(text, header, source):
        name = row[key]
        if name not in known:
            raise ScenarioError(f"{source} row {row_no}: unknown {what} {name!r}")
        period = _integer(row, "period", source, row_no)
        if period < 1:
            raise ScenarioError(f"{source} row {row_no}: periods are numbered from 1")
        if period in table.setdefault(name, {}):
            raise ScenarioError(f"{source} row {row_no}: duplicate {what} {name} period {period}")
        table[name][period] = _number(row, "mw", source, row_no)
    return table


def read_storage(path: Path) -> list[StorageAsset]:
    source = path.name
    try:
        entries = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON ({exc})") from None
    if not isinstance(entries, list):
        raise ScenarioError(f"{source}: expected a JSON array")
    fleet = []
    for k, entry in enumerate(entries):
        where = f"{source} entry {k}"
        try:
            tech, node = entry["technology"], entry["node"]
            power, duration = float(entry["rated_power_mw"]), float(entry["duration_h"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"{where}: missing or invalid field {exc}") from None
        overrides = entry.get("overrides") or {}
        try:
            fleet.append(make_storage(tech, node, power, duration, **overrides))
        except ScenarioError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
        except TypeError as exc:
            raise ScenarioError(f"{where}: invalid override ({exc})") from None
    return fleet


def load_scenario(paths: str | os.PathLike | Mapping[str, str | os.PathLike]) -> Scenario:
    """Load and validate a scenario.

    ``paths`` is either a directory holding the standard file names or a
    mapping from the keys of ``FILES`` to individual file paths.
    """
    if isinstance(paths, Mapping):
        files = {k: Path(v) for k, v in paths.items()}
        name = ""
    else:
        root = Path(paths)
        if not root.is_dir():
            raise FileNotFoundError(f"scenario directory not found: {root}")
        files = {k: root / v for k, v in FILES.items()}
        name = root.name
    for key in ("network", "units", "fpn", "ladders", "imbalance"):
        if key not in files:
            raise ScenarioError(f"no path given for {key}")

    network = read_network(files["network"])
    node_ids = set(network.node_ids)

    src = files["units"].name
    unit_rows = []
    for row_no, row in _rows(_read(files["units"]), UNIT_HEADER, src):
        if row["node"] not in node_ids:
            raise ScenarioError(f"{src} row {row_no}: unknown node {row['node']!r}")
        unit_rows.append((row_no, row))
    unit_ids = [row["id"] for _, row in unit_rows]
    if len(set(unit_ids)) != len(unit_ids):
        raise ScenarioError(f"{src}: unit ids must be unique")

    imbalance = _period_table(_read(files["imbalance"]), IMBALANCE_HEADER, "node",
                              files["imbalance"].name, node_ids, "node")
    horizon = max((max(p) for p in imbalance.values() if p), default=0)
    if horizon < 1:
        raise ScenarioError(f"{files['imbalance'].name}: no imbalance rows")
    imbalance_rows = _by_period(imbalance, network.node_ids, horizon, files["imbalance"].name, "node")

    fpn = _period_table(_read(files["fpn"]), FPN_HEADER, "unit", files["fpn"].name,
                        set(unit_ids), "unit")
    for unit, periods in fpn.items():
        if max(periods) > horizon:
            raise ScenarioError(f"{files['fpn'].name}: unit {unit} has periods beyond the horizon {horizon}")
    fpn_rows = _by_period(fpn, unit_ids, horizon, files["fpn"].name, "unit")

    src = files["ladders"].name
    bands: dict[tuple[str, str], dict[int, tuple[float, float]]] = {}
    for row_no, row in _rows(_read(files["ladders"]), LADDER_HEADER, src):
        if row["unit"] not in fpn_rows:
            raise ScenarioError(f"{src} row {row_no}: unknown unit {row['unit']!r}")
        side = row["side"]
        if side not in ("offer", "bid"):
            raise ScenarioError(f"{src} row {row_no}: column 'side' must be offer or bid, got {side!r}")
        rank = _integer(row, "rank", src, row_no)
        slot = bands.setdefault((row["unit"], side), {})
        if rank in slot:
            raise ScenarioError(f"{src} row {row_no}: duplicate rank {rank} for {row['unit']} {side}")
        slot[rank] = (_number(row, "price_gbp_per_mwh", src, row_no),
                      _number(row, "volume_mw", src, row_no))

    units_src = files["units"].name
    units = []
    for row_no, row in unit_rows:
        uid = row["id"]
        offers = bands.get((uid, "offer"), {})
        bids = bands.get((uid, "bid"), {})
        units.append(BmUnit(
            id=uid, node=row["node"], fuel=row["fuel"], fpn=fpn_rows[uid],
            offer_ladder=tuple(offers[r] for r in sorted(offers)),
            bid_ladder=tuple(bids[r] for r in sorted(bids)),
            p_min=_number(row, "p_min", units_src, row_no),
            p_max=_number(row, "p_max", units_src, row_no),
        ))

    storage_path = files.get("storage")
    fleet = read_storage(storage_path) if storage_path is not None and storage_path.exists() else []

    return Scenario(network, tuple(units), tuple(fleet),
                    tuple(imbalance_rows[n] for n in network.node_ids), horizon, name=name)


def _fmt(value: float) -> str:
    return repr(float(value))


def storage_entry(asset: StorageAsset) -> dict:
    """JSON entry for ``asset``; only fields that differ from the defaults are overridden."""
    default = make_storage(asset.technology, asset.node, asset.rated_power, asset.duration)
    overrides = {k: getattr(asset, k) for k in _STORAGE_OVERRIDES
                 if getattr(asset, k) != getattr(default, k)}
    entry = {"technology": asset.technology.value, "node": asset.node,
             "rated_power_mw": asset.rated_power, "duration_h": asset.duration}
    if overrides:
        entry["overrides"] = overrides
    return entry


def save_scenario(scenario: Scenario, directory: str | os.PathLike) -> Path:
    """Write ``scenario`` in the directory layout read by :func:`load_scenario`."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    net = scenario.network
    if net.node_ids[0] != net.reference_node:
        raise ScenarioError("the reference node must be listed first to survive a round trip")

    def write(name: str, header: list[str], rows) -> None:
        with open(root / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    with open(root / FILES["network"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODE_HEADER)
        w.writerows([n.id, n.zone] for n in net.nodes)
        fh.write("\n")
        w.writerow(LINE_HEADER)
        w.writerows([ln.from_node, ln.to_node, _fmt(ln.susceptance), _fmt(ln.capacity)] for ln in net.lines)

    write(FILES["units"], UNIT_HEADER,
          ([u.id, u.node, u.fuel.value, _fmt(u.p_min), _fmt(u.p_max)] for u in scenario.units))
    write(FILES["fpn"], FPN_HEADER,
          ([u.id, t, _fmt(mw)] for u in scenario.units for t, mw in enumerate(u.fpn, start=1)))
    write(FILES["ladders"], LADDER_HEADER,
          ([u.id, side, r, _fmt(p), _fmt(v)]
           for u in scenario.units
           for side, ladder in (("offer", u.offer_ladder), ("bid", u.bid_ladder))
           for r, (p, v) in enumerate(ladder, start=1)))
    write(FILES["imbalance"], IMBALANCE_HEADER,
          ([node, t, _fmt(mw)] for node, row in zip(net.node_ids, scenario.imbalance)
           for t, mw in enumerate(row, start=1)))
    with open(root / FILES["storage"], "w", encoding="utf-8") as fh:
        json.dump([storage_entry(a) for a in scenario.storage_fleet], fh, indent=2)
        fh.write("\n")
    return root
