"""Regulatory ratio calculators and the Bangladesh Basel III phase-in schedule.

Implements the two balance-sheet ratios used throughout the toolkit:

* NSFR = ASF / RSF under the December-2009 BCBS weighting (the definition
  that allows comparison across impact studies). ASF counts equity, debt and
  other liabilities of >= 1 year maturity in full, stable deposits under one
  year at 85%, and less stable deposits at 70%. RSF weights government debt
  at 5%, corporate loans under one year at 50%, retail loans at 85%, and
  remaining assets (excluding cash and interbank loans) at 100%.
* TCE/RWA = (common equity - intangibles - goodwill) / risk-weighted assets.

The phase-in schedule reproduces the Bangladesh Bank transitional
arrangements (BRPD circular 18/2014): national minima are stricter than the
global floors, with a 10% minimum total capital ratio throughout and the
conservation buffer phased in by 0.625 pp steps to 2.5% in 2019.

A Wong-et-al-style linear bridge converts NSFR changes into loans-to-deposits
changes: each +1 pp of NSFR maps to -0.46 pp of L/D.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, fields

from .errors import DataError, NegativeTceWarning

LTD_PER_NSFR_PP = -0.46  # loans-to-deposits response per +1pp NSFR (Wong et al. 2010)


@dataclass(frozen=True)
class BalanceSheetSnapshot:
    """Per-bank-year balance-sheet components, all non-negative, one currency.

    `other_assets_ex_cash_interbank` excludes cash and interbank loans; `rwa`
    only needs to be positive when TCE/RWA is requested.
    """

    entity: str
    year: int
    common_equity: float = 0.0
    debt_ge_1y: float = 0.0
    other_liabilities_ge_1y: float = 0.0
    stable_deposits_lt_1y: float = 0.0
    less_stable_deposits_lt_1y: float = 0.0
    govt_debt: float = 0.0
    corp_loans_lt_1y: float = 0.0
    retail_loans_lt_1y: float = 0.0
    other_assets_ex_cash_interbank: float = 0.0
    intangibles: float = 0.0
    goodwill: float = 0.0
    rwa: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.type == "float":
                v = getattr(self, f.name)
                if not math.isfinite(v) or v < 0:
                    raise DataError(
                        f"{self.entity} {self.year}: component {f.name} must be a "
                        f"non-negative finite amount, got {v!r}"
                    )


@dataclass(frozen=True)
class NsfrWeights:
    """ASF/RSF weights; defaults are the December-2009 proposal constants."""

    asf_ge_1y: float = 1.00
    asf_stable_deposits: float = 0.85
    asf_less_stable_deposits: float = 0.70
    rsf_govt_debt: float = 0.05
    rsf_corp_loans: float = 0.50
    rsf_retail_loans: float = 0.85
    rsf_other_assets: float = 1.00

    def __post_init__(self) -> None:
        for f in fields(self):
            w = getattr(self, f.name)
            if not 0.0 <= w <= 1.0:
                raise DataError(f"weight {f.name} must lie in [0, 1], got {w!r}")

    @classmethod
    def from_json(cls, path: str) -> "NsfrWeights":
        """Load an override file: {"asf": {...}, "rsf": {...}} keyed as below."""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read weights file {path}: {exc}") from exc
        asf = raw.get("asf", {})
        rsf = raw.get("rsf", {})
        try:
            return cls(
                asf_ge_1y=asf.get("ge_1y", 1.00),
                asf_stable_deposits=asf.get("stable_deposits", 0.85),
                asf_less_stable_deposits=asf.get("less_stable_deposits", 0.70),
                rsf_govt_debt=rsf.get("govt_debt", 0.05),
                rsf_corp_loans=rsf.get("corp_loans", 0.50),
                rsf_retail_loans=rsf.get("retail_loans", 0.85),
                rsf_other_assets=rsf.get("other_assets", 1.00),
            )
        except TypeError as exc:
            raise DataError(f"malformed weights file {path}: {exc}") from exc


DEFAULT_WEIGHTS = NsfrWeights()


def compute_nsfr(bs: BalanceSheetSnapshot, w: NsfrWeights = DEFAULT_WEIGHTS) -> float:
    """Net stable funding ratio ASF/RSF for one balance sheet.

    Raises DataError when required stable funding is zero (a bank with no
    funded assets has no defined NSFR).
    """
    asf = (
        w.asf_ge_1y * (bs.common_equity + bs.debt_ge_1y + bs.other_liabilities_ge_1y)
        + w.asf_stable_deposits * bs.stable_deposits_lt_1y
        + w.asf_less_stable_deposits * bs.less_stable_deposits_lt_1y
    )
    rsf = (
        w.rsf_govt_debt * bs.govt_debt
        + w.rsf_corp_loans * bs.corp_loans_lt_1y
        + w.rsf_retail_loans * bs.retail_loans_lt_1y
        + w.rsf_other_assets * bs.other_assets_ex_cash_interbank
    )
    if rsf <= 0.0:
        raise DataError(
            f"{bs.entity} {bs.year}: undefined NSFR, required stable funding is zero"
        )
    return asf / rsf


def compute_tce_rwa(bs: BalanceSheetSnapshot) -> float:
    """Tangible common equity over risk-weighted assets.

    Negative tangible equity (intangibles plus goodwill exceeding common
    equity) is reported with its sign and a NegativeTceWarning, not clamped.
    """
    if bs.rwa <= 0.0:
        raise DataError(f"{bs.entity} {bs.year}: TCE/RWA needs rwa > 0, got {bs.rwa}")
    tce = bs.common_equity - bs.intangibles - bs.goodwill
    if tce < 0:
        warnings.warn(
            f"{bs.entity} {bs.year}: tangible common equity is negative ({tce})",
            NegativeTceWarning,
            stacklevel=2,
        )
    return tce / bs.rwa


def nsfr_to_ltd_delta(delta_nsfr: float) -> float:
    """Implied loans-to-deposits change (pp) for an NSFR change (pp)."""
    if not math.isfinite(delta_nsfr):
        raise DataError(f"delta_nsfr must be finite, got {delta_nsfr!r}")
    return LTD_PER_NSFR_PP * delta_nsfr


# -- phase-in schedule -------------------------------------------------------


@dataclass(frozen=True)
class YearRequirements:
    """One year's minima. Percent units except nsfr_min, which is a ratio."""

    year: int
    min_cet1_pct: float
    conservation_buffer_pct: float
    cet1_plus_buffer_pct: float
    min_tier1_pct: float
    min_total_pct: float
    total_plus_buffer_pct: float
    cet1_deduction_phase_pct: float
    rr_deduction_phase_pct: float
    leverage_min_pct: float
    lcr_min_pct: float
    nsfr_min: float
    leverage_note: str = ""
    nsfr_from_september: bool = False
    lcr_from_september: bool = False


@dataclass(frozen=True)
class PhaseInSchedule:
    """Year-keyed transitional requirements, 2015 through 2019."""

    years: tuple[YearRequirements, ...]

    def __post_init__(self) -> None:
        if not self.years:
            raise DataError("schedule must contain at least one year")
        ys = [r.year for r in self.years]
        if ys != sorted(ys) or len(set(ys)) != len(ys):
            raise DataError("schedule years must be strictly increasing")

    @property
    def first_year(self) -> int:
        return self.years[0].year

    @property
    def last_year(self) -> int:
        return self.years[-1].year

    def for_year(self, year: int) -> tuple[YearRequirements, bool]:
        """Requirements applying in `year`.

        Outside the phase-in window the terminal (last-year) requirements
        apply; the second element flags that steady-state fallback.
        """
        for req in self.years:
            if req.year == year:
                return req, False
        return self.years[-1], True


BANGLADESH_SCHEDULE = PhaseInSchedule(
    years=(
        YearRequirements(2015, 4.50, 0.0, 4.50, 5.50, 10.00, 10.00, 20.0, 20.0,
                         3.0, 100.0, 1.0,
                         nsfr_from_september=True, lcr_from_september=True),
        YearRequirements(2016, 4.50, 0.625, 5.125, 5.50, 10.00, 10.625, 40.0, 40.0,
                         3.0, 100.0, 1.0),
        YearRequirements(2017, 4.50, 1.25, 5.75, 6.00, 10.00, 11.25, 60.0, 60.0,
                         3.0, 100.0, 1.0, leverage_note="readjustment"),
        YearRequirements(2018, 4.50, 1.875, 6.375, 6.00, 10.00, 11.875, 80.0, 80.0,
                         3.0, 100.0, 1.0, leverage_note="migration to Pillar 1"),
        YearRequirements(2019, 4.50, 2.50, 7.00, 6.00, 10.00, 12.50, 100.0, 100.0,
                         3.0, 100.0, 1.0, leverage_note="migration to Pillar 1"),
    )
)


@dataclass(frozen=True)
class CapitalPosition:
    """A bank's reported ratios for one year. Percent units; lcr/nsfr are ratios."""

    entity: str
    year: int
    cet1_ratio_pct: float
    tier1_ratio_pct: float
    total_car_pct: float
    leverage_pct: float
    lcr: float
    nsfr: float

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.type == "float":
                v = getattr(self, f.name)
                if not math.isfinite(v) or v < 0:
                    raise DataError(
                        f"{self.entity} {self.year}: {f.name} must be non-negative, got {v!r}"
                    )


@dataclass(frozen=True)
class RequirementCheck:
    """Outcome of one requirement: required level, actual, shortfall, status."""

    name: str
    required: float
    actual: float
    shortfall: float
    passed: bool
    advisory: bool = False
    note: str = ""


@dataclass(frozen=True)
class ComplianceReport:
    entity: str
    year: int
    schedule_year: int
    steady_state: bool
    checks: tuple[RequirementCheck, ...]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks if not c.advisory)

    def to_dict(self) -> dict:
        return {
            "entity": self.entity,
            "year": self.year,
            "schedule_year": self.schedule_year,
            "steady_state": self.steady_state,
            "overall_pass": self.overall_pass,
            "checks": [
                {
                    "name": c.name,
                    "required": c.required,
                    "actual": c.actual,
                    "shortfall": c.shortfall,
                    "passed": c.passed,
                    "advisory": c.advisory,
                    "note": c.note,
                }
                for c in self.checks
            ],
        }


def _check(name: str, required: float, actual: float,
           advisory: bool = False, note: str = "") -> RequirementCheck:
    # comparisons are inclusive: meeting the floor exactly passes
    shortfall = max(0.0, required - actual)
    return RequirementCheck(name, required, actual, shortfall, actual >= required,
                            advisory, note)


def check_compliance(
    pos: CapitalPosition, sched: PhaseInSchedule = BANGLADESH_SCHEDULE
) -> ComplianceReport:
    """Check one capital position against the schedule for its year.

    Shortfalls are reported in the requirement's own units, floored at zero.
    The NSFR requirement only binds from September of the schedule's first
    year, so in that year it is reported as advisory and does not affect the
    overall verdict.
    """
    req, steady = sched.for_year(pos.year)
    checks = (
        _check("cet1", req.min_cet1_pct, pos.cet1_ratio_pct),
        _check("cet1_plus_buffer", req.cet1_plus_buffer_pct, pos.cet1_ratio_pct),
        _check("tier1", req.min_tier1_pct, pos.tier1_ratio_pct),
        _check("total", req.min_total_pct, pos.total_car_pct),
        _check("total_plus_buffer", req.total_plus_buffer_pct, pos.total_car_pct),
        _check("leverage", req.leverage_min_pct, pos.leverage_pct, note=req.leverage_note),
        _check("lcr", req.lcr_min_pct, pos.lcr * 100.0),
        _check(
            "nsfr", req.nsfr_min, pos.nsfr,
            advisory=req.nsfr_from_september,
            note="applies from September" if req.nsfr_from_september else "",
        ),
    )
    return ComplianceReport(pos.entity, pos.year, req.year, steady, checks)


REQUIREMENT_FIELDS = (
    "min_cet1_pct",
    "conservation_buffer_pct",
    "cet1_plus_buffer_pct",
    "min_tier1_pct",
    "min_total_pct",
    "total_plus_buffer_pct",
    "leverage_min_pct",
    "lcr_min_pct",
    "nsfr_min",
)


def required_deltas(
    from_year: int, to_year: int, sched: PhaseInSchedule = BANGLADESH_SCHEDULE
) -> dict[str, float]:
    """Per-requirement change between two schedule years (to minus from).

    The result is a shock vector suitable for the scenario engine, e.g.
    required_deltas(2015, 2019)["total_plus_buffer_pct"] == 2.5.
    """
    start, steady_a = sched.for_year(from_year)
    end, steady_b = sched.for_year(to_year)
    if steady_a or steady_b:
        raise DataError(
            f"both years must lie in the schedule "
            f"({sched.first_year}-{sched.last_year}); got {from_year}, {to_year}"
        )
    return {f: getattr(end, f) - getattr(start, f) for f in REQUIREMENT_FIELDS}


# -- CSV ingestion ------------------------------------------------------------

BALANCE_SHEET_COLUMNS = (
    "common_equity",
    "debt_ge_1y",
    "other_liabilities_ge_1y",
    "stable_deposits_lt_1y",
    "less_stable_deposits_lt_1y",
    "govt_debt",
    "corp_loans_lt_1y",
    "retail_loans_lt_1y",
    "other_assets",
    "intangibles",
    "goodwill",
    "rwa",
)

POSITION_COLUMNS = (
    "cet1_ratio_pct",
    "tier1_ratio_pct",
    "total_car_pct",
    "leverage_pct",
    "lcr",
    "nsfr",
)


def _read_rows(path: str, value_columns: tuple[str, ...],
               required: tuple[str, ...]) -> list[dict]:
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, expected a header row")
        names = [n.strip() for n in reader.fieldnames]
        if "bank_id" not in names or "year" not in names:
            raise DataError(f"{path}: header must include bank_id and year")
        missing = [c for c in required if c not in names]
        if missing:
            raise DataError(f"{path}: missing required column(s): {missing}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            rec: dict = {"entity": (raw.get("bank_id") or "").strip()}
            if not rec["entity"]:
                raise DataError(f"{path}:{lineno}: empty bank_id")
            try:
                rec["year"] = int((raw.get("year") or "").strip())
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad year {raw.get('year')!r}") from None
            for col in value_columns:
                if col not in names:
                    continue
                cell = (raw.get(col) or "").strip()
                if cell == "":
                    rec[col] = 0.0
                    continue
                try:
                    rec[col] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: cannot parse {cell!r} in column {col!r}"
                    ) from None
            rows.append(rec)
    return rows


def load_balance_sheets(path: str, require_rwa: bool = True) -> list[BalanceSheetSnapshot]:
    """Read balance-sheet CSV rows into snapshots.

    Set require_rwa=False when only NSFR is wanted and the capital columns
    (rwa, intangibles, goodwill) are absent from the file.
    """
    required: tuple[str, ...] = tuple(c for c in BALANCE_SHEET_COLUMNS
                                      if c not in ("intangibles", "goodwill", "rwa"))
    if require_rwa:
        required = required + ("rwa",)
    rows = _read_rows(path, BALANCE_SHEET_COLUMNS, required)
    out = []
    for rec in rows:
        out.append(
            BalanceSheetSnapshot(
                entity=rec["entity"],
                year=rec["year"],
                common_equity=rec.get("common_equity", 0.0),
                debt_ge_1y=rec.get("debt_ge_1y", 0.0),
                other_liabilities_ge_1y=rec.get("other_liabilities_ge_1y", 0.0),
                stable_deposits_lt_1y=rec.get("stable_deposits_lt_1y", 0.0),
                less_stable_deposits_lt_1y=rec.get("less_stable_deposits_lt_1y", 0.0),
                govt_debt=rec.get("govt_debt", 0.0),
                corp_loans_lt_1y=rec.get("corp_loans_lt_1y", 0.0),
                retail_loans_lt_1y=rec.get("retail_loans_lt_1y", 0.0),
                other_assets_ex_cash_interbank=rec.get("other_assets", 0.0),
                intangibles=rec.get("intangibles", 0.0),
                goodwill=rec.get("goodwill", 0.0),
                rwa=rec.get("rwa", 0.0),
            )
        )
    return out


def load_positions(path: str) -> list[CapitalPosition]:
    """Read capital-position CSV rows (header: bank_id,year,<POSITION_COLUMNS>)."""
    rows = _read_rows(path, POSITION_COLUMNS, POSITION_COLUMNS)
    return [
        CapitalPosition(
            entity=rec["entity"],
            year=rec["year"],
            cet1_ratio_pct=rec["cet1_ratio_pct"],
            tier1_ratio_pct=rec["tier1_ratio_pct"],
            total_car_pct=rec["total_car_pct"],
            leverage_pct=rec["leverage_pct"],
            lcr=rec["lcr"],
            nsfr=rec["nsfr"],
        )
        for rec in rows
    ]
