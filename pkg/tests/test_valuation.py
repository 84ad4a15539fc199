from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmsim.model import Tech
from bmsim.valuation import (RESIDUAL_FRACTION, RevenueInputs, TechEconomics, annual_cash_flow, annualize_nbb,
                             capex_sensitivity, npv, residual_value, table2_defaults, valuation_report)

# capex 1 MW, capex 100 MW, O&M 1 MW, O&M 100 MW, life
COST_ROWS = {
    "LIB": ("539348.37", "41895060.23", 2563, 206969, 11),
    "VRFB": ("753820.03", "60452744.77", 4527, 358962, 12),
    "PSH": ("912765.79", "91276578.54", 6468, 646778, 60),
    "HES": ("2344571.11", "234457110.52", 18595, 1859487, 30),
}


def exact_npv(cash, capex, life, lam, rate) -> Fraction:
    """Year-by-year discounting in rational arithmetic."""
    cash, capex, lam, rate = (Fraction(str(v)) for v in (cash, capex, lam, rate))
    total = -capex
    factor = Fraction(1)
    for _ in range(life + 1):
        total += cash * factor
        factor /= 1 + rate
    return total + lam * capex * factor


def lib_1mw() -> TechEconomics:
    return table2_defaults("LIB", 1)


def revenue(**kw) -> RevenueInputs:
    base = dict(nbb_per_year=0.0, kappa=0.0, cm_price=0.0, dc_price=0.0, rated_power=1.0)
    base.update(kw)
    return RevenueInputs(**base)


class TestResidualValue:
    def test_lib(self):
        assert residual_value(539348.37, 0.20) == pytest.approx(107869.674, abs=1e-6)

    def test_zero_fraction(self):
        assert residual_value(12345.0, 0.0) == 0.0

    def test_hes(self):
        assert residual_value(234457110.52, 0.05) == pytest.approx(11722855.526, abs=1e-6)

    @given(st.floats(0, 1e9), st.floats(0, 1e9), st.floats(0, 1), st.floats(0, 1))
    def test_linear(self, c1, c2, l1, l2):
        assert residual_value(c1 + c2, l1) == pytest.approx(residual_value(c1, l1) + residual_value(c2, l1))
        assert residual_value(c1, l1 + l2) == pytest.approx(residual_value(c1, l1) + residual_value(c1, l2))


class TestCashFlow:
    def test_om_only(self):
        assert annual_cash_flow(revenue(), lib_1mw()) == pytest.approx(-2563.0)

    def test_capacity_market(self):
        econ = TechEconomics(0, 0, 1, 0)
        assert annual_cash_flow(revenue(cm_price=30000, rated_power=100), econ) == pytest.approx(600000.0)

    def test_dynamic_containment(self):
        econ = TechEconomics(0, 0, 1, 0)
        rev = revenue(kappa=0.5, dc_price=5, rated_power=100)
        assert annual_cash_flow(rev, econ) == pytest.approx(2190000.0)

    def test_balancing_share(self):
        econ = TechEconomics(0, 0, 1, 0)
        assert annual_cash_flow(revenue(kappa=0.4, nbb_per_year=1000.0), econ) == pytest.approx(400.0)

    @pytest.mark.parametrize("kw", [dict(kappa=1.5), dict(kappa=-0.1), dict(cm_price=-1), dict(cm_derating=2)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            revenue(**kw)


class TestNpv:
    def test_zero_cash_lib(self):
        got = npv(0.0, lib_1mw()).npv
        expected = -539348.37 + 107869.674 / 1.08 ** 12
        assert got == pytest.approx(expected, abs=1.0)
        assert got == pytest.approx(float(exact_npv(0, "539348.37", 11, "0.2", "0.08")), abs=1.0)
        assert round(got) == -496512

    def test_undiscounted_sum(self):
        assert npv(100.0, TechEconomics(0, 0, 1, 0, 0.0)).npv == 200.0

    def test_full_residual(self):
        assert npv(0.0, TechEconomics(100, 0, 1, 1.0, 0.0)).npv == 0.0

    def test_yearly_sequence(self):
        econ = TechEconomics(1000, 0, 2, 0.1, 0.05)
        flows = [100.0, 200.0, 300.0]
        assert npv(flows, econ).npv == pytest.approx(float(exact_npv(0, 1000, 2, "0.1", "0.05"))
                                                     + 100 + 200 / 1.05 + 300 / 1.05 ** 2)
        with pytest.raises(ValueError, match="expected 3"):
            npv([1.0, 2.0], econ)

    def test_result_fields(self):
        res = npv(-2563.0, lib_1mw())
        assert res.cash_flows.shape == (12,)
        assert res.residual_value == pytest.approx(107869.674)
        rediscounted = (res.cash_flows / 1.08 ** np.arange(12)).sum() - 539348.37 + res.residual_value / 1.08 ** 12
        assert res.npv == pytest.approx(rediscounted, abs=1e-4)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1e6, 1e6), st.floats(0, 1e8), st.integers(1, 60), st.floats(0, 1), st.floats(0, 0.3))
    def test_matches_exact_oracle(self, cash, capex, life, lam, rate):
        got = npv(cash, TechEconomics(capex, 0, life, lam, rate)).npv
        want = float(exact_npv(cash, capex, life, lam, rate))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-4)

    @given(st.lists(st.floats(-1e5, 1e5), min_size=2, max_size=40), st.floats(0, 1e7))
    def test_discount_identity(self, flows, capex):
        econ = TechEconomics(capex, 0, len(flows) - 1, 0.0, 0.0)
        assert npv(flows, econ).npv == pytest.approx(sum(flows) - capex, abs=1e-6)

    @pytest.mark.parametrize("kw", [dict(capex=-1), dict(lambda_rv=1.1), dict(life_years=0),
                                    dict(discount_rate=-1)])
    def test_invalid_economics(self, kw):
        base = dict(capex=1.0, fixed_om=0.0, life_years=1, lambda_rv=0.1)
        base.update(kw)
        with pytest.raises(ValueError):
            TechEconomics(**base)


class TestSensitivity:
    def test_identity_factor(self):
        rev = revenue(nbb_per_year=5000.0, kappa=0.5, cm_price=60000, dc_price=5)
        results = dict(capex_sensitivity(rev, lib_1mw()))
        assert results[1.0].npv == npv(annual_cash_flow(rev, lib_1mw()), lib_1mw()).npv

    def test_zero_cash_scales_linearly(self):
        econ = TechEconomics(539348.37, 0, 11, 0.2)
        results = dict(capex_sensitivity(revenue(), econ))
        expected = -0.3 * 539348.37 + 0.3 * 107869.674 / 1.08 ** 12
        assert results[0.3].npv == pytest.approx(expected, abs=1.0)
        assert round(results[0.3].npv) == -148954
        for f in (0.7, 0.3):
            assert results[f].npv == pytest.approx(f * results[1.0].npv, abs=1.0)

    @pytest.mark.parametrize("tech", list(Tech))
    @pytest.mark.parametrize("size", [1, 100])
    def test_cheaper_capex_raises_npv(self, tech, size):
        econ = table2_defaults(tech, size)
        assert econ.lambda_rv < (1 + econ.discount_rate) ** (econ.life_years + 1)
        values = [r.npv for _, r in capex_sensitivity(revenue(rated_power=size), econ, (1.0, 0.7, 0.3))]
        assert values[0] < values[1] < values[2]

    @pytest.mark.parametrize("factor", [0.0, 1.2, -0.5])
    def test_factor_range(self, factor):
        with pytest.raises(ValueError, match="must lie in"):
            capex_sensitivity(revenue(), lib_1mw(), (factor,))


class TestCostDefaults:
    @pytest.mark.parametrize("tech", sorted(COST_ROWS))
    def test_rows(self, tech):
        capex1, capex100, om1, om100, life = COST_ROWS[tech]
        small, large = table2_defaults(tech, 1), table2_defaults(tech, 100)
        assert small.capex == float(capex1) and large.capex == float(capex100)
        assert small.fixed_om == om1 and large.fixed_om == om100
        assert small.life_years == large.life_years == life
        assert small.discount_rate == 0.08

    def test_residual_fractions(self):
        assert RESIDUAL_FRACTION == {Tech.LIB: 0.20, Tech.VRFB: 0.40, Tech.PSH: 0.20, Tech.HES: 0.05}

    @pytest.mark.parametrize("tech", ["PSH", "HES"])
    def test_small_rows_are_hundredths(self, tech):
        small, large = table2_defaults(tech, 1), table2_defaults(tech, 100)
        # the table rounds each row to pence and whole pounds independently
        assert abs(small.capex - large.capex / 100) <= 0.005
        assert abs(small.fixed_om - large.fixed_om / 100) <= 0.5

    def test_interpolation(self):
        mid = table2_defaults("HES", 30)
        lo, hi = table2_defaults("HES", 1), table2_defaults("HES", 100)
        assert lo.capex < mid.capex < hi.capex
        assert mid.capex == pytest.approx(lo.capex + 29 / 99 * (hi.capex - lo.capex))
        assert mid.life_years == 30

    def test_unknown_technology(self):
        with pytest.raises(ValueError):
            table2_defaults("CAES", 1)


class TestProperties:
    revenues = st.fixed_dictionaries({
        "nbb_per_year": st.floats(-1e5, 1e6), "kappa": st.floats(0, 1), "cm_price": st.floats(0, 1e5),
        "dc_price": st.floats(0, 50), "rated_power": st.floats(0.1, 200)})

    @given(revenues, st.sampled_from(list(Tech)), st.floats(0, 1e5))
    def test_monotone_in_revenue(self, kw, tech, bump):
        econ = table2_defaults(tech, 1)
        base = npv(annual_cash_flow(RevenueInputs(**kw), econ), econ).npv
        for key in ("cm_price", "dc_price"):
            more = dict(kw, **{key: kw[key] + bump})
            assert npv(annual_cash_flow(RevenueInputs(**more), econ), econ).npv >= base - 1e-6
        if kw["kappa"] > 0:
            more = dict(kw, nbb_per_year=kw["nbb_per_year"] + bump)
            assert npv(annual_cash_flow(RevenueInputs(**more), econ), econ).npv >= base - 1e-6

    @given(revenues, st.sampled_from(list(Tech)), st.floats(0, 1e6))
    def test_monotone_in_costs(self, kw, tech, bump):
        econ = table2_defaults(tech, 1)
        rev = RevenueInputs(**kw)
        base = npv(annual_cash_flow(rev, econ), econ).npv
        for field in ("capex", "fixed_om"):
            dearer = TechEconomics(**{**econ.__dict__, field: getattr(econ, field) + bump})
            assert npv(annual_cash_flow(rev, dearer), dearer).npv <= base + 1e-6

    @given(revenues, st.sampled_from(list(Tech)))
    def test_dc_stacking_never_hurts(self, kw, tech):
        econ = table2_defaults(tech, 1)
        with_dc = npv(annual_cash_flow(RevenueInputs(**kw), econ), econ).npv
        without = npv(annual_cash_flow(RevenueInputs(**dict(kw, dc_price=0.0)), econ), econ).npv
        assert without <= with_dc + 1e-6

    def test_dc_stacking_turns_lib_positive(self):
        econ = table2_defaults("LIB", 1)
        rev = revenue(nbb_per_year=4000.0, kappa=0.5, cm_price=60000, dc_price=12)
        assert npv(annual_cash_flow(rev, econ), econ).npv > 0
        no_dc = revenue(nbb_per_year=4000.0, kappa=0.5, cm_price=60000)
        assert npv(annual_cash_flow(no_dc, econ), econ).npv < 0


class TestAnnualize:
    def test_two_months(self):
        assert annualize_nbb([100.0, 50.0]) == 900.0

    def test_explicit_multiplier(self):
        assert annualize_nbb([100.0], multiplier=12) == 1200.0

    def test_empty(self):
        with pytest.raises(ValueError):
            annualize_nbb([])


def test_report_layout():
    rev = revenue(nbb_per_year=1000.0, kappa=0.25, cm_price=60000, dc_price=5)
    sens = capex_sensitivity(rev, lib_1mw())
    report = valuation_report("LIB", "N1", "A", rev, sens)
    assert set(report) == {"tech", "node", "zone", "kappa", "nbb_per_year", "cmr", "dcr", "npv", "sensitivity"}
    assert report["dcr"] == pytest.approx(0.75 * 5 * 8760)
    assert report["cmr"] == pytest.approx(0.2 * 60000)
    assert [s["factor"] for s in report["sensitivity"]] == [1.0, 0.7, 0.3]
    assert report["npv"] == sens[0][1].npv
