"""Net present value of a storage asset with revenue stacking.

Yearly cash flow combines the share ``kappa`` of net balancing benefit, the
de-rated Capacity Market payment, the Dynamic Containment payment earned by the
remaining ``1 - kappa`` share of capacity, less fixed O&M.  The NPV sums those
flows over years ``0..Y``, subtracts the undiscounted CAPEX and adds back a
residual value ``lambda_rv * capex`` discounted to year ``Y + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .model import Tech, _tech

DISCOUNT_RATE = 0.08
CM_DERATING = 0.20
RESIDUAL_FRACTION = {Tech.LIB: 0.20, Tech.VRFB: 0.40, Tech.PSH: 0.20, Tech.HES: 0.05}

# (capex £, fixed O&M £/yr) at 1 MW and at 100 MW, all 2-hour duration; life in years
_COST_ROWS = {
    Tech.LIB: ((539_348.37, 2_563.0), (41_895_060.23, 206_969.0), 11),
    Tech.VRFB: ((753_820.03, 4_527.0), (60_452_744.77, 358_962.0), 12),
    Tech.PSH: ((912_765.79, 6_468.0), (91_276_578.54, 646_778.0), 60),
    Tech.HES: ((2_344_571.11, 18_595.0), (234_457_110.52, 1_859_487.0), 30),
}

# Placeholder market prices: the real CM/DC series are proprietary.
PLACEHOLDER_CM_PRICE = 60_000.0  # £/MW/year
PLACEHOLDER_DC_PRICE = 5.0  # £/MW/h


@dataclass(frozen=True)
class TechEconomics:
    capex: float
    fixed_om: float
    life_years: int
    lambda_rv: float
    discount_rate: float = DISCOUNT_RATE

    def __post_init__(self) -> None:
        if self.capex < 0:
            raise ValueError("capex must be nonnegative")
        if not 0 <= self.lambda_rv <= 1:
            raise ValueError("residual fraction must lie in [0, 1]")
        if self.life_years < 1:
            raise ValueError("operational life must be at least one year")
        if self.discount_rate <= -1:
            raise ValueError("discount rate must exceed -100%")


@dataclass(frozen=True)
class RevenueInputs:
    nbb_per_year: float  # £, annualised net balancing benefit
    kappa: float
    cm_price: float  # £/MW/year
    dc_price: float  # £/MW/h
    rated_power: float  # MW
    dc_hours_per_year: float = 8760.0
    cm_derating: float = CM_DERATING

    def __post_init__(self) -> None:
        if not 0 <= self.kappa <= 1:
            raise ValueError("kappa must lie in [0, 1]")
        if min(self.cm_price, self.dc_price, self.dc_hours_per_year) < 0:
            raise ValueError("prices and hours must be nonnegative")
        if not 0 <= self.cm_derating <= 1:
            raise ValueError("de-rating factor must lie in [0, 1]")

    @property
    def cmr(self) -> float:
        return self.cm_derating * self.rated_power * self.cm_price

    @property
    def dcr(self) -> float:
        """Full-capacity DC revenue, before the ``1 - kappa`` split."""
        return self.rated_power * self.dc_price * self.dc_hours_per_year


@dataclass(frozen=True)
class NpvResult:
    npv: float
    cash_flows: np.ndarray  # £, years 0..Y
    residual_value: float


def table2_defaults(tech: Tech | str, rated_power: float) -> TechEconomics:
    """Economics for a 2-hour asset; sizes other than 1 and 100 MW interpolate linearly."""
    tech = _tech(tech)
    (capex1, om1), (capex100, om100), life = _COST_ROWS[tech]
    if rated_power == 1:
        capex, om = capex1, om1
    elif rated_power == 100:
        capex, om = capex100, om100
    else:
        w = (rated_power - 1.0) / 99.0
        capex = capex1 + w * (capex100 - capex1)
        om = om1 + w * (om100 - om1)
    return TechEconomics(capex, om, life, RESIDUAL_FRACTION[tech])


def residual_value(capex: float, lambda_rv: float) -> float:
    return lambda_rv * capex


def annual_cash_flow(rev: RevenueInputs, econ: TechEconomics) -> float:
    return (rev.kappa * rev.nbb_per_year + rev.cmr + (1.0 - rev.kappa) * rev.dcr
            - econ.fixed_om)


def npv(cash_per_year: float | Sequence[float], econ: TechEconomics) -> NpvResult:
    years = econ.life_years + 1
    if np.ndim(cash_per_year) == 0:
        flows = np.full(years, float(cash_per_year))
    else:
        flows = np.asarray(cash_per_year, dtype=float)
        if flows.shape != (years,):
            raise ValueError(f"expected {years} yearly cash flows, got {flows.shape}")
    discount = (1.0 + econ.discount_rate) ** -np.arange(years)
    rv = residual_value(econ.capex, econ.lambda_rv)
    value = float(flows @ discount) - econ.capex + rv / (1.0 + econ.discount_rate) ** years
    return NpvResult(value, flows, rv)


def capex_sensitivity(rev: RevenueInputs, econ: TechEconomics,
                      factors: Sequence[float] = (1.0, 0.7, 0.3)) -> list[tuple[float, NpvResult]]:
    """NPV with CAPEX (and so the residual value) scaled by each factor."""
    cash = annual_cash_flow(rev, econ)
    out = []
    for f in factors:
        if not 0 < f <= 1:
            raise ValueError(f"CAPEX factor {f} must lie in (0, 1]")
        out.append((f, npv(cash, replace(econ, capex=econ.capex * f))))
    return out


def annualize_nbb(monthly_savings: Sequence[float], multiplier: float | None = None) -> float:
    """Yearly net balancing benefit from representative monthly savings.

    Each simulated month stands for ``12 / len(monthly_savings)`` months unless
    a multiplier is given, so a January/July pair is scaled by six.
    """
    if len(monthly_savings) == 0:
        raise ValueError("need at least one monthly saving")
    if multiplier is None:
        multiplier = 12.0 / len(monthly_savings)
    return multiplier * math.fsum(monthly_savings)


def valuation_report(tech: Tech | str, node: str, zone: str, rev: RevenueInputs,
                     sensitivity: list[tuple[float, NpvResult]]) -> dict:
    base = next((r for f, r in sensitivity if f == 1.0), sensitivity[0][1])
    return {
        "tech": _tech(tech).value,
        "node": node,
        "zone": zone,
        "kappa": rev.kappa,
        "nbb_per_year": rev.nbb_per_year,
        "cmr": rev.cmr,
        "dcr": (1.0 - rev.kappa) * rev.dcr,
        "npv": base.npv,
        "sensitivity": [{"factor": f, "npv": r.npv} for f, r in sensitivity],
    }
