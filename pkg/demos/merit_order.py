"""Clearing a shortfall from two offer ladders, then splitting it across a congested line.

    python3 demos/merit_order.py
"""

from bmsim import BmUnit, Line, Network, Node, Scenario, dispatch_report, solve_dispatch


def single_bus():
    net = Network([Node("N1", "A")], [], "N1")
    units = (
        BmUnit("ccgt", "N1", "CCGT", (100.0,), offer_ladder=((40.0, 10.0),), bid_ladder=(), p_min=0, p_max=200),
        BmUnit("ocgt", "N1", "OCGT", (0.0,), offer_ladder=((60.0, 20.0),), bid_ladder=(), p_min=0, p_max=50),
    )
    return Scenario(net, units, (), ((15.0,),), horizon=1)


def two_bus(capacity):
    net = Network([Node("north", "A"), Node("south", "B")], [Line("north", "south", 10.0, capacity)], "north")
    units = (
        BmUnit("gas_north", "north", "CCGT", (0.0,), ((20.0, 30.0),), (), 0, 30),
        BmUnit("peaker_south", "south", "OCGT", (0.0,), ((80.0, 30.0),), (), 0, 30),
    )
    return Scenario(net, units, (), ((0.0,), (12.0,)), horizon=1)


if __name__ == "__main__":
    sol = solve_dispatch(single_bus())
    print("15 MW short for half an hour at one bus")
    for uid, acc in sol.accepted_offer.items():
        print(f"  {uid:>5}: {acc[0, 0]:5.1f} MW accepted")
    print(f"  cost £{sol.objective_cost:.2f}  (10 MW at £40 then 5 MW at £60, for 0.5 h)\n")

    print("12 MW short in the south; cheap offers sit in the north")
    for cap in (50.0, 5.0):
        sol = solve_dispatch(two_bus(cap))
        north = sol.accepted_offer["gas_north"][0, 0]
        south = sol.accepted_offer["peaker_south"][0, 0]
        print(f"  line rating {cap:4.0f} MW: north {north:4.1f} MW, south {south:4.1f} MW, "
              f"flow {sol.flow[0, 0]:4.1f} MW, cost £{sol.objective_cost:.2f}")
    report = dispatch_report(sol)
    print("  energy by fuel (MWh):", {f.value: float(e.sum()) for f, e in report.fuel_energy.items()})
