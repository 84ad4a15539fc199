"""Cheaper balancing can still be dirtier.

A battery charges from gas when gas is cheap and later displaces expensive,
zero-carbon hydro.  The operator saves money while emissions rise.

    python3 demos/carbon_divergence.py
"""

from bmsim import BmUnit, Network, Node, Scenario, bm_cost, emission_delta, make_storage, solve_dispatch


def gas_and_hydro():
    net = Network([Node("N1", "A")], [], "N1")
    units = (
        BmUnit("gas", "N1", "CCGT", (0.0, 0.0), ((30.0, 20.0),), (), 0, 20),
        BmUnit("hydro", "N1", "NPSHYD", (0.0, 0.0), ((150.0, 20.0),), (), 0, 20),
    )
    return Scenario(net, units, (), ((0.0, 30.0),), horizon=2)


if __name__ == "__main__":
    base_scenario = gas_and_hydro()
    base = solve_dispatch(base_scenario)
    test = solve_dispatch(base_scenario.with_storage(make_storage("LIB", "N1", 1.0, 2.0)))
    delta = emission_delta(base, test)
    print(f"balancing cost without storage £{bm_cost(base):.2f}, with a 1 MW battery £{bm_cost(test):.2f}")
    for fuel, mwh in delta.per_fuel_mwh.items():
        if mwh:
            print(f"  {fuel.value:>7}: {mwh:+.3f} MWh, {delta.per_fuel[fuel]:+.1f} kgCO2")
    print(f"total {delta.total:+.1f} kgCO2 over {base_scenario.horizon_hours:g} h "
          f"({delta.rate:+.1f} kgCO2/h)")
