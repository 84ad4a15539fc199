"""Stacking balancing savings with capacity-market and frequency-response income.

Market prices here are illustrative placeholders.

    python3 demos/npv_stacking.py
"""

from bmsim import RevenueInputs, Tech, annual_cash_flow, annualize_nbb, capex_sensitivity, table2_defaults

# balancing savings for one January and one July simulation, £ per month per MW
MONTHLY_SAVINGS = {Tech.LIB: (2500.0, 2000.0), Tech.VRFB: (2300.0, 1800.0),
                   Tech.PSH: (2400.0, 1900.0), Tech.HES: (300.0, 200.0)}
KAPPA = 0.3
CM_PRICE = 60_000.0  # £/MW/yr
DC_PRICE = 5.0  # £/MW/h

if __name__ == "__main__":
    print(f"{'tech':>4} {'stack':>14} {'cash/yr':>12} {'NPV':>14} {'NPV @70% capex':>16} {'NPV @30% capex':>16}")
    for tech, months in MONTHLY_SAVINGS.items():
        econ = table2_defaults(tech, 1.0)
        nbb = annualize_nbb(months)
        for label, dc in (("BM + CM", 0.0), ("BM + CM + DC", DC_PRICE)):
            rev = RevenueInputs(nbb, KAPPA, CM_PRICE, dc, rated_power=1.0)
            results = dict(capex_sensitivity(rev, econ))
            print(f"{tech.value:>4} {label:>14} {annual_cash_flow(rev, econ):12,.0f} "
                  f"{results[1.0].npv:14,.0f} {results[0.7].npv:16,.0f} {results[0.3].npv:16,.0f}")
