"""Regulatory ratio tests: NSFR, TCE/RWA, schedule fidelity, compliance."""

import numpy as np
import pytest

from baselcost import (
    BANGLADESH_SCHEDULE,
    BalanceSheetSnapshot,
    CapitalPosition,
    DataError,
    NegativeTceWarning,
    NsfrWeights,
    check_compliance,
    compute_nsfr,
    compute_tce_rwa,
    nsfr_to_ltd_delta,
    required_deltas,
)

WORKED = BalanceSheetSnapshot(
    "B01", 2014,
    common_equity=100, debt_ge_1y=50, stable_deposits_lt_1y=200,
    less_stable_deposits_lt_1y=100, govt_debt=100, corp_loans_lt_1y=300,
    retail_loans_lt_1y=100, other_assets_ex_cash_interbank=100,
    intangibles=10, goodwill=5, rwa=850,
)


def random_sheet(rng) -> BalanceSheetSnapshot:
    v = rng.uniform(0.0, 500.0, size=9)
    # keep some required funding so the ratio stays defined
    return BalanceSheetSnapshot(
        "R", 2014,
        common_equity=v[0], debt_ge_1y=v[1], other_liabilities_ge_1y=v[2],
        stable_deposits_lt_1y=v[3], less_stable_deposits_lt_1y=v[4],
        govt_debt=v[5], corp_loans_lt_1y=v[6], retail_loans_lt_1y=v[7],
        other_assets_ex_cash_interbank=v[8] + 1.0,
    )


class TestNsfr:
    def test_worked_example(self):
        # ASF = 150 + 0.85*200 + 0.70*100 = 390; RSF = 5 + 150 + 85 + 100 = 340
        assert compute_nsfr(WORKED) == pytest.approx(390.0 / 340.0, abs=1e-12)

    def test_zero_required_funding_is_an_error(self):
        empty_assets = BalanceSheetSnapshot("B", 2014, common_equity=100.0)
        with pytest.raises(DataError, match="undefined NSFR"):
            compute_nsfr(empty_assets)

    def test_unit_weights_symmetry(self):
        ones = NsfrWeights(1, 1, 1, 1, 1, 1, 1)
        bs = BalanceSheetSnapshot(
            "B", 2014,
            common_equity=100, stable_deposits_lt_1y=50, less_stable_deposits_lt_1y=50,
            govt_debt=80, corp_loans_lt_1y=60, retail_loans_lt_1y=40,
            other_assets_ex_cash_interbank=20,
        )
        assert compute_nsfr(bs, ones) == pytest.approx(1.0, abs=1e-12)

    def test_default_weight_constants(self):
        w = NsfrWeights()
        assert (w.asf_ge_1y, w.asf_stable_deposits, w.asf_less_stable_deposits) == \
            (1.00, 0.85, 0.70)
        assert (w.rsf_govt_debt, w.rsf_corp_loans, w.rsf_retail_loans,
                w.rsf_other_assets) == (0.05, 0.50, 0.85, 1.00)

    def test_weight_range_validated(self):
        with pytest.raises(DataError):
            NsfrWeights(asf_ge_1y=1.5)

    def test_homogeneous_of_degree_zero(self):
        rng = np.random.default_rng(101)
        base = random_sheet(rng)
        for lam in (0.25, 3.0, 1e6):
            scaled = BalanceSheetSnapshot(
                "R", 2014,
                **{
                    f: getattr(base, f) * lam
                    for f in (
                        "common_equity", "debt_ge_1y", "other_liabilities_ge_1y",
                        "stable_deposits_lt_1y", "less_stable_deposits_lt_1y",
                        "govt_debt", "corp_loans_lt_1y", "retail_loans_lt_1y",
                        "other_assets_ex_cash_interbank",
                    )
                },
            )
            assert compute_nsfr(scaled) == pytest.approx(compute_nsfr(base), rel=1e-12)

    def test_monotone_in_components(self):
        rng = np.random.default_rng(202)
        bs = random_sheet(rng)
        base = compute_nsfr(bs)
        up_asf = BalanceSheetSnapshot(
            "R", 2014, common_equity=bs.common_equity + 10.0,
            debt_ge_1y=bs.debt_ge_1y, other_liabilities_ge_1y=bs.other_liabilities_ge_1y,
            stable_deposits_lt_1y=bs.stable_deposits_lt_1y,
            less_stable_deposits_lt_1y=bs.less_stable_deposits_lt_1y,
            govt_debt=bs.govt_debt, corp_loans_lt_1y=bs.corp_loans_lt_1y,
            retail_loans_lt_1y=bs.retail_loans_lt_1y,
            other_assets_ex_cash_interbank=bs.other_assets_ex_cash_interbank,
        )
        up_rsf = BalanceSheetSnapshot(
            "R", 2014, common_equity=bs.common_equity,
            debt_ge_1y=bs.debt_ge_1y, other_liabilities_ge_1y=bs.other_liabilities_ge_1y,
            stable_deposits_lt_1y=bs.stable_deposits_lt_1y,
            less_stable_deposits_lt_1y=bs.less_stable_deposits_lt_1y,
            govt_debt=bs.govt_debt, corp_loans_lt_1y=bs.corp_loans_lt_1y + 10.0,
            retail_loans_lt_1y=bs.retail_loans_lt_1y,
            other_assets_ex_cash_interbank=bs.other_assets_ex_cash_interbank,
        )
        assert compute_nsfr(up_asf) >= base
        assert compute_nsfr(up_rsf) <= base

    def test_negative_component_rejected(self):
        with pytest.raises(DataError, match="non-negative"):
            BalanceSheetSnapshot("B", 2014, common_equity=-1.0)


class TestTceRwa:
    def test_worked_example(self):
        assert compute_tce_rwa(WORKED) == pytest.approx(0.10, abs=1e-12)

    def test_reduces_to_simple_ratio(self):
        bs = BalanceSheetSnapshot("B", 2014, common_equity=120.0, rwa=960.0,
                                  other_assets_ex_cash_interbank=1.0)
        assert compute_tce_rwa(bs) == pytest.approx(0.125, abs=1e-12)

    def test_negative_tce_reported_with_warning(self):
        bs = BalanceSheetSnapshot("B", 2014, common_equity=10.0, intangibles=8.0,
                                  goodwill=8.0, rwa=100.0)
        with pytest.warns(NegativeTceWarning):
            value = compute_tce_rwa(bs)
        assert value == pytest.approx(-0.06, abs=1e-12)

    def test_zero_rwa_rejected(self):
        bs = BalanceSheetSnapshot("B", 2014, common_equity=10.0)
        with pytest.raises(DataError, match="rwa"):
            compute_tce_rwa(bs)


class TestLtdBridge:
    def test_unit_slope(self):
        assert nsfr_to_ltd_delta(1.0) == pytest.approx(-0.46, abs=1e-12)

    def test_zero(self):
        assert nsfr_to_ltd_delta(0.0) == 0.0

    def test_linear_extrapolation(self):
        assert nsfr_to_ltd_delta(-2.0) == pytest.approx(0.92, abs=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError):
            nsfr_to_ltd_delta(float("inf"))


# Transitional arrangements, typed independently of the implementation;
# cells in percent except the NSFR floor (a ratio).
EXPECTED_SCHEDULE = {
    2015: (4.50, 0.0, 4.50, 5.50, 10.00, 10.00, 20.0, 20.0, 3.0, 100.0, 1.0),
    2016: (4.50, 0.625, 5.125, 5.50, 10.00, 10.625, 40.0, 40.0, 3.0, 100.0, 1.0),
    2017: (4.50, 1.25, 5.75, 6.00, 10.00, 11.25, 60.0, 60.0, 3.0, 100.0, 1.0),
    2018: (4.50, 1.875, 6.375, 6.00, 10.00, 11.875, 80.0, 80.0, 3.0, 100.0, 1.0),
    2019: (4.50, 2.50, 7.00, 6.00, 10.00, 12.50, 100.0, 100.0, 3.0, 100.0, 1.0),
}

FIELD_ORDER = (
    "min_cet1_pct", "conservation_buffer_pct", "cet1_plus_buffer_pct",
    "min_tier1_pct", "min_total_pct", "total_plus_buffer_pct",
    "cet1_deduction_phase_pct", "rr_deduction_phase_pct",
    "leverage_min_pct", "lcr_min_pct", "nsfr_min",
)


class TestSchedule:
    def test_every_cell(self):
        for req in BANGLADESH_SCHEDULE.years:
            expected = EXPECTED_SCHEDULE[req.year]
            for fname, want in zip(FIELD_ORDER, expected):
                assert getattr(req, fname) == want, f"{req.year} {fname}"

    def test_buffer_nondecreasing(self):
        buffers = [r.conservation_buffer_pct for r in BANGLADESH_SCHEDULE.years]
        assert buffers == sorted(buffers)

    def test_deduction_phase_steps(self):
        assert [r.cet1_deduction_phase_pct for r in BANGLADESH_SCHEDULE.years] == \
            [20.0, 40.0, 60.0, 80.0, 100.0]

    def test_nsfr_binds_from_september_first_year_only(self):
        flags = [r.nsfr_from_september for r in BANGLADESH_SCHEDULE.years]
        assert flags == [True, False, False, False, False]


def position(year, cet1, tier1, total, lev, lcr, nsfr, entity="B01"):
    return CapitalPosition(entity, year, cet1, tier1, total, lev, lcr, nsfr)


class TestCompliance:
    def test_2019_all_pass(self):
        report = check_compliance(position(2019, 7.0, 9.0, 12.5, 3.0, 1.0, 1.01))
        assert report.overall_pass
        assert all(c.passed for c in report.checks)
        assert not report.steady_state

    def test_2016_cet1_buffer_shortfall(self):
        report = check_compliance(position(2016, 5.0, 6.5, 11.0, 3.5, 1.1, 1.05))
        by_name = {c.name: c for c in report.checks}
        assert by_name["cet1_plus_buffer"].shortfall == pytest.approx(0.125)
        assert not by_name["cet1_plus_buffer"].passed
        assert not report.overall_pass

    def test_2017_boundary_inclusive(self):
        report = check_compliance(position(2017, 5.75, 6.0, 11.25, 3.0, 1.0, 1.0))
        assert report.overall_pass

    def test_2015_nsfr_is_advisory(self):
        report = check_compliance(position(2015, 4.5, 5.5, 10.0, 3.0, 1.0, 0.5))
        by_name = {c.name: c for c in report.checks}
        assert by_name["nsfr"].advisory
        assert not by_name["nsfr"].passed
        # failing an advisory check must not fail the year
        assert report.overall_pass

    def test_outside_years_use_terminal_rules(self):
        report = check_compliance(position(2024, 7.0, 9.0, 12.5, 3.0, 1.0, 1.01))
        assert report.steady_state
        assert report.schedule_year == 2019
        assert report.overall_pass

    def test_pass_iff_zero_shortfalls(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            pos = position(
                int(rng.integers(2015, 2020)),
                cet1=float(rng.uniform(3, 9)), tier1=float(rng.uniform(4, 11)),
                total=float(rng.uniform(8, 14)), lev=float(rng.uniform(2, 5)),
                lcr=float(rng.uniform(0.8, 1.4)), nsfr=float(rng.uniform(0.8, 1.4)),
            )
            report = check_compliance(pos)
            binding = [c for c in report.checks if not c.advisory]
            assert report.overall_pass == all(c.shortfall == 0.0 for c in binding)


class TestRequiredDeltas:
    def test_full_phase_in(self):
        deltas = required_deltas(2015, 2019)
        assert deltas["total_plus_buffer_pct"] == pytest.approx(2.50)
        assert deltas["cet1_plus_buffer_pct"] == pytest.approx(2.50)
        assert deltas["min_total_pct"] == 0.0

    def test_single_step_buffer(self):
        assert required_deltas(2016, 2017)["conservation_buffer_pct"] == \
            pytest.approx(0.625)

    def test_same_year_is_zero(self):
        assert all(v == 0.0 for v in required_deltas(2017, 2017).values())

    def test_outside_schedule_rejected(self):
        with pytest.raises(DataError):
            required_deltas(2014, 2019)
