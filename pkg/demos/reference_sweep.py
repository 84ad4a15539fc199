"""Sweep every technology, size and node of the bundled five-node scenario.

    python3 demos/reference_sweep.py [OUT_DIR]

The same run is available as ``bmsim run --config data/reference/sweep.json``.
"""

import sys
from dataclasses import replace
from pathlib import Path

from bmsim import emit_reports, load_config, run_sweep

CONFIG = Path(__file__).resolve().parents[1] / "data" / "reference" / "sweep.json"

if __name__ == "__main__":
    config = load_config(CONFIG)
    if len(sys.argv) > 1:
        config = replace(config, out=Path(sys.argv[1]))
    result = run_sweep(config)
    print(f"base balancing cost £{result.base_cost:,.2f} over {result.horizon_hours:g} h")
    print(f"{'tech':>4} {'MW':>5} {'node':>4} {'saving £':>10} {'kgCO2/h':>9} {'kappa':>6}")
    for row in result.rows:
        print(f"{row.tech:>4} {row.size:5g} {row.node:>4} {0.0 - row.cost_delta:10.2f} "
              f"{row.emission_rate + 0.0:+9.1f} {row.kappa:6.3f}")
    for path in emit_reports(result, config.out):
        print("wrote", path)
