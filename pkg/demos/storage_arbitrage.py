"""A surplus followed by a shortfall, with each storage technology in turn.

The operator can take cheap bids in period 1 and pay dear offers in period 2,
or shift energy through a store.  How much a store saves depends on its
round-trip efficiency and wear tariff.

    python3 demos/storage_arbitrage.py
"""

from bmsim import BmUnit, Network, Node, Scenario, Tech, k_fraction, make_storage, storage_delta_run


def surplus_then_shortfall(bid_price, offer_price):
    net = Network([Node("N1", "A")], [], "N1")
    units = (
        BmUnit("flex_demand", "N1", "CCGT", (20.0, 20.0), (), ((bid_price, 20.0),), 0, 20),
        BmUnit("peaker", "N1", "OCGT", (0.0, 0.0), ((offer_price, 20.0),), (), 0, 20),
    )
    return Scenario(net, units, (), ((-5.0, 5.0),), horizon=2)


if __name__ == "__main__":
    for bid, offer in ((10.0, 100.0), (50.0, 120.0)):
        print(f"bids at £{bid:.0f}/MWh in period 1, offers at £{offer:.0f}/MWh in period 2")
        base_scenario = surplus_then_shortfall(bid, offer)
        base = None
        for tech in Tech:
            asset = make_storage(tech, "N1", rated_power=1.0, duration=2.0)
            base, test, delta = storage_delta_run(base_scenario, asset, base)
            s = test.storage_index(asset)
            print(f"  {tech.value:>4} (round trip {asset.round_trip:.2f}): "
                  f"charge {test.storage_charge[s].round(3)} MW, discharge {test.storage_discharge[s].round(3)} MW, "
                  f"saving £{0.0 - delta:7.3f}, kappa {k_fraction(test, asset):.3f}")
        print()
