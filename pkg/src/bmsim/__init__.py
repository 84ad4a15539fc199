"""Desk-scale balancing-mechanism redispatch with grid storage.

Dispatch is a DC-linearised pay-as-bid linear programme solved by the
package's own bounded revised simplex (``bmsim.lp``).  Emission and NPV
valuation sit on top of the dispatch results.
"""

from .carbon import EmissionDelta, IntensityTable, default_intensities, emission_delta, write_emission_csv
from .dispatch import (DispatchError, DispatchSolution, InfeasibleDispatch, bm_cost, build_dispatch_problem,
                       dispatch_report, k_fraction, solve_dispatch, storage_delta_run, write_solution_csv)
from .io import load_scenario, save_scenario
from .lp import LpProblem, LpSolution, MalformedProblem, Sense, Status, solve_lp
from .model import (BmUnit, FuelType, Line, Network, Node, Scenario, ScenarioError, StorageAsset, Tech,
                    make_storage)
from .sweep import SweepConfig, ValuationConfig, emit_reports, load_config, run_sweep
from .valuation import (NpvResult, RevenueInputs, TechEconomics, annual_cash_flow, annualize_nbb,
                        capex_sensitivity, npv, residual_value, table2_defaults)

__version__ = "0.1.0"
