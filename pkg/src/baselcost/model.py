"""Three-equation long-run system and the shock-propagation engine.

The system links bank liquidity (LIQ, log NSFR) and capital (CAP, log Tier 1
ratio) to the interest-rate spread, lending, and profitability:

    spread  = g0 + g_liq * LIQ + g_cap * CAP
    lending = b0 + b_gdp * GDP + b_spread * spread
    ROE     = d0 + d_lgdp * (lending - GDP) + d_liq * LIQ + d_cap * CAP

All variables except the spread are in logarithms, so slope coefficients
read as elasticities. A built-in reference preset carries long-run
estimates for a 2010-2014 panel of Bangladeshi private commercial banks;
coefficient sets can also be fitted from data (within estimator with
Driscoll-Kraay errors) or supplied by the user as JSON.

Shock propagation chains the equations: a capital/liquidity requirement
increase raises the spread, the spread lowers lending (GDP held fixed), and
the lending-to-GDP decline together with the direct liquidity and capital
terms lowers ROE. The system is linear, so scenario results are additive
and scale exactly with the shock.

Canonical column names used throughout: liq, cap, gdp, spread, lending,
lgdp (= lending - gdp), roe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .estimation import FitResult, RegressionSpec, fit_within_dk
from .panel import PanelDataset
from .ratios import BANGLADESH_SCHEDULE, PhaseInSchedule

SYSTEM_COLUMNS = ("liq", "cap", "gdp", "spread", "lending", "lgdp", "roe")
SCENARIO_MODES = ("chained", "exogenous")
PROVENANCES = ("paper-preset", "fitted", "user")


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of the three long-run equations plus their provenance."""

    spread_const: float
    spread_liq: float
    spread_cap: float
    lending_const: float
    lending_gdp: float
    lending_spread: float
    roe_const: float
    roe_lgdp: float
    roe_liq: float
    roe_cap: float
    provenance: str = "user"

    def __post_init__(self) -> None:
        for name in (
            "spread_const", "spread_liq", "spread_cap",
            "lending_const", "lending_gdp", "lending_spread",
            "roe_const", "roe_lgdp", "roe_liq", "roe_cap",
        ):
            if not math.isfinite(getattr(self, name)):
                raise DataError(f"coefficient {name} must be finite")
        if self.provenance not in PROVENANCES:
            raise DataError(
                f"provenance must be one of {PROVENANCES}, got {self.provenance!r}"
            )

    def to_dict(self) -> dict:
        return {
            "spread": {
                "const": self.spread_const,
                "liq": self.spread_liq,
                "cap": self.spread_cap,
            },
            "lending": {
                "const": self.lending_const,
                "gdp": self.lending_gdp,
                "spread": self.lending_spread,
            },
            "roe": {
                "const": self.roe_const,
                "lgdp": self.roe_lgdp,
                "liq": self.roe_liq,
                "cap": self.roe_cap,
            },
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "CoefficientSet":
        try:
            return cls(
                spread_const=float(raw["spread"]["const"]),
                spread_liq=float(raw["spread"]["liq"]),
                spread_cap=float(raw["spread"]["cap"]),
                lending_const=float(raw["lending"]["const"]),
                lending_gdp=float(raw["lending"]["gdp"]),
                lending_spread=float(raw["lending"]["spread"]),
                roe_const=float(raw["roe"]["const"]),
                roe_lgdp=float(raw["roe"]["lgdp"]),
                roe_liq=float(raw["roe"]["liq"]),
                roe_cap=float(raw["roe"]["cap"]),
                provenance=raw.get("provenance", "user"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed coefficient set: {exc!r}") from exc

    @classmethod
    def from_json(cls, path: str) -> "CoefficientSet":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read coefficient file {path}: {exc}") from exc
        return cls.from_dict(raw)

    def to_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# Reference long-run estimates (Bangladesh private commercial banks,
# 2010-2014). The ROE intercept is not separately identified in the source
# estimates and is fixed at 0 by convention; scenarios only ever use deltas,
# so it never enters primary outputs.
PAPER_PRESET = CoefficientSet(
    spread_const=1.617,
    spread_liq=0.639,
    spread_cap=0.169,
    lending_const=3.29,
    lending_gdp=1.352,
    lending_spread=-0.306,
    roe_const=0.0,
    roe_lgdp=1.36,
    roe_liq=-1.06,
    roe_cap=-0.49,
    provenance="paper-preset",
)


@dataclass(frozen=True)
class ScenarioInput:
    """A capital/liquidity shock in percentage points.

    mode "chained" maps the lending response one-for-one into the
    lending-to-GDP ratio (GDP held fixed); mode "exogenous" uses the
    caller-supplied delta_lgdp instead.
    """

    delta_cap: float = 0.0
    delta_liq: float = 0.0
    mode: str = "chained"
    delta_lgdp: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_cap) and math.isfinite(self.delta_liq)):
            raise DataError("shock inputs must be finite")
        if self.mode not in SCENARIO_MODES:
            raise DataError(f"mode must be one of {SCENARIO_MODES}, got {self.mode!r}")
        if self.mode == "exogenous":
            if self.delta_lgdp is None or not math.isfinite(self.delta_lgdp):
                raise DataError("exogenous mode needs a finite delta_lgdp")
        elif self.delta_lgdp is not None:
            raise DataError("delta_lgdp is only meaningful in exogenous mode")


@dataclass(frozen=True)
class ScenarioResult:
    """Propagated responses. delta_spread is in percentage points; the
    lending/ROE responses are log-point responses read as percent."""

    delta_spread: float
    delta_lending: float
    delta_lgdp: float
    delta_roe: float
    provenance: str
    trace: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "delta_spread": self.delta_spread,
            "delta_lending": self.delta_lending,
            "delta_lgdp": self.delta_lgdp,
            "delta_roe": self.delta_roe,
            "provenance": self.provenance,
            "trace": list(self.trace),
            "note": (
                "shock units follow the scenario narrative: 1 = one percentage "
                "point of the requirement ratio, even though LIQ/CAP enter the "
                "fitted equations in logarithms"
            ),
        }


def propagate_shock(coeffs: CoefficientSet, shock: ScenarioInput) -> ScenarioResult:
    """Chain a capital/liquidity shock through the three equations."""
    d_spread = coeffs.spread_liq * shock.delta_liq + coeffs.spread_cap * shock.delta_cap
    d_lending = coeffs.lending_spread * d_spread
    d_lgdp = d_lending if shock.mode == "chained" else float(shock.delta_lgdp)
    d_roe = (
        coeffs.roe_lgdp * d_lgdp
        + coeffs.roe_liq * shock.delta_liq
        + coeffs.roe_cap * shock.delta_cap
    )
    trace = (
        {
            "step": "spread",
            "formula": "d_spread = spread_liq*d_liq + spread_cap*d_cap",
            "terms": {
                "spread_liq*d_liq": coeffs.spread_liq * shock.delta_liq,
                "spread_cap*d_cap": coeffs.spread_cap * shock.delta_cap,
            },
            "value": d_spread,
        },
        {
            "step": "lending",
            "formula": "d_lending = lending_spread*d_spread (GDP held fixed)",
            "terms": {"lending_spread*d_spread": d_lending},
            "value": d_lending,
        },
        {
            "step": "lending_to_gdp",
            "formula": (
                "d_lgdp = d_lending" if shock.mode == "chained" else "d_lgdp exogenous"
            ),
            "terms": {"d_lgdp": d_lgdp},
            "value": d_lgdp,
        },
        {
            "step": "roe",
            "formula": "d_roe = roe_lgdp*d_lgdp + roe_liq*d_liq + roe_cap*d_cap",
            "terms": {
                "roe_lgdp*d_lgdp": coeffs.roe_lgdp * d_lgdp,
                "roe_liq*d_liq": coeffs.roe_liq * shock.delta_liq,
                "roe_cap*d_cap": coeffs.roe_cap * shock.delta_cap,
            },
            "value": d_roe,
        },
    )
    return ScenarioResult(
        delta_spread=d_spread,
        delta_lending=d_lending,
        delta_lgdp=d_lgdp,
        delta_roe=d_roe,
        provenance=coeffs.provenance,
        trace=trace,
    )


@dataclass(frozen=True)
class PhaseInScenario:
    """Year-by-year scenario series plus the cumulative total."""

    steps: tuple[tuple[int, ScenarioResult], ...]
    cumulative: ScenarioResult

    def to_dict(self) -> dict:
        return {
            "steps": [{"year": y, **r.to_dict()} for y, r in self.steps],
            "cumulative": self.cumulative.to_dict(),
        }


def phase_in_scenario(
    coeffs: CoefficientSet,
    sched: PhaseInSchedule = BANGLADESH_SCHEDULE,
    from_year: int = 2015,
    to_year: int = 2019,
    delta_liq_per_year: float = 0.0,
) -> PhaseInScenario:
    """Feed the schedule's capital tightening year-by-year through the system.

    Each step's capital shock is that year's increment of the
    total-capital-plus-buffer requirement; the liquidity shock per year is
    caller-supplied (default 0). Results are linear in the shocks, so the
    yearly deltas sum exactly to the cumulative ones.
    """
    if from_year > to_year:
        raise DataError(f"from_year {from_year} must not exceed to_year {to_year}")
    for y in (from_year, to_year):
        _, steady = sched.for_year(y)
        if steady:
            raise DataError(
                f"year {y} is outside the schedule ({sched.first_year}-{sched.last_year})"
            )
    steps = []
    total_cap = 0.0
    for year in range(from_year, to_year):
        req_now, _ = sched.for_year(year)
        req_next, _ = sched.for_year(year + 1)
        d_cap = req_next.total_plus_buffer_pct - req_now.total_plus_buffer_pct
        total_cap += d_cap
        shock = ScenarioInput(delta_cap=d_cap, delta_liq=delta_liq_per_year)
        steps.append((year + 1, propagate_shock(coeffs, shock)))
    total_liq = delta_liq_per_year * len(steps)
    cumulative = propagate_shock(
        coeffs, ScenarioInput(delta_cap=total_cap, delta_liq=total_liq)
    )
    return PhaseInScenario(steps=tuple(steps), cumulative=cumulative)


# -- synthetic panels and system fitting --------------------------------------


def simulate_panel(
    coeffs: CoefficientSet,
    n_banks: int,
    n_years: int,
    noise_sd: float,
    seed: int,
    first_year: int = 2010,
) -> PanelDataset:
    """Generate a synthetic bank-year panel satisfying the system equations.

    Exogenous drivers get persistent bank-level differences (entity effects
    in LIQ, CAP, and the bank-level GDP measure) plus year-to-year variation;
    the structural equations then produce spread, lending, and ROE with iid
    Gaussian disturbances of scale noise_sd. Equation-level entity effects
    are drawn at the same scale and recentred to mean zero, so the supplied
    intercepts remain the identified ones. With noise_sd = 0 the generated
    columns satisfy the equations exactly.

    Deterministic for a given seed.
    """
    if n_banks < 2:
        raise DataError(f"n_banks must be >= 2, got {n_banks}")
    if n_years < 3:
        raise DataError(f"n_years must be >= 3, got {n_years}")
    if not (math.isfinite(noise_sd) and noise_sd >= 0):
        raise DataError(f"noise_sd must be a non-negative number, got {noise_sd!r}")

    rng = np.random.default_rng(seed)
    nb, ny = n_banks, n_years
    t_idx = np.arange(ny)

    gdp_common = 3.0 + 0.04 * t_idx + rng.normal(0.0, 0.03, ny)
    gdp = gdp_common + rng.normal(0.0, 0.10, (nb, 1)) + rng.normal(0.0, 0.08, (nb, ny))
    liq = 0.10 + rng.normal(0.0, 0.25, (nb, 1)) + rng.normal(0.0, 0.15, (nb, ny))
    cap = -2.30 + rng.normal(0.0, 0.25, (nb, 1)) + rng.normal(0.0, 0.15, (nb, ny))

    def entity_effects() -> np.ndarray:
        a = rng.normal(0.0, noise_sd, (nb, 1))
        return a - a.mean()

    spread = (
        coeffs.spread_const
        + coeffs.spread_liq * liq
        + coeffs.spread_cap * cap
        + entity_effects()
        + rng.normal(0.0, noise_sd, (nb, ny))
    )
    lending = (
        coeffs.lending_const
        + coeffs.lending_gdp * gdp
        + coeffs.lending_spread * spread
        + entity_effects()
        + rng.normal(0.0, noise_sd, (nb, ny))
    )
    lgdp = lending - gdp
    roe = (
        coeffs.roe_const
        + coeffs.roe_lgdp * lgdp
        + coeffs.roe_liq * liq
        + coeffs.roe_cap * cap
        + entity_effects()
        + rng.normal(0.0, noise_sd, (nb, ny))
    )

    entities = tuple(f"B{i + 1:02d}" for i in range(nb))
    periods = tuple(range(first_year, first_year + ny))
    return PanelDataset(
        entities,
        periods,
        {
            "liq": liq, "cap": cap, "gdp": gdp,
            "spread": spread, "lending": lending, "lgdp": lgdp, "roe": roe,
        },
    )


@dataclass(frozen=True)
class SystemFit:
    """Fitted system: the assembled coefficient set plus per-equation results."""

    coefficients: CoefficientSet | None
    spread_fit: FitResult
    lending_fit: FitResult
    roe_fit: FitResult

    @property
    def fits(self) -> tuple[FitResult, FitResult, FitResult]:
        return (self.spread_fit, self.lending_fit, self.roe_fit)


def fit_system(
    ds: PanelDataset,
    dk_bandwidth: int | str = 0,
    small_sample: bool = True,
    roe_form: str = "estimated",
) -> SystemFit:
    """Fit the three equations by fixed-effects least squares with DK errors.

    Expects the canonical columns liq, cap, gdp, spread, lending, lgdp, roe
    (post-transform). The default bandwidth is 0 rather than "auto": the
    target panels are only a few years long, too short to support kernel
    lags; pass "auto" or an explicit lag count to override.

    roe_form "estimated" regresses ROE on lgdp, liq, cap (the form the
    scenario engine consumes). roe_form "levels" is a sensitivity variant
    regressing ROE on lending and spread; no CoefficientSet is assembled
    for it because the scenario engine has no slot for those slopes.
    """
    if roe_form not in ("estimated", "levels"):
        raise DataError(f"roe_form must be 'estimated' or 'levels', got {roe_form!r}")
    needed = SYSTEM_COLUMNS if roe_form == "estimated" else tuple(
        c for c in SYSTEM_COLUMNS if c != "lgdp"
    )
    missing = [c for c in needed if c not in ds.columns]
    if missing:
        raise DataError(f"dataset lacks system column(s) {missing}; apply transforms first")

    def make_spec(dep: str, regs: Sequence[str]) -> RegressionSpec:
        return RegressionSpec(
            dependent=dep,
            regressors=tuple(regs),
            include_intercept=True,
            fixed_effects=True,
            dk_bandwidth=dk_bandwidth,
            small_sample=small_sample,
        )

    spread_fit = fit_within_dk(ds, make_spec("spread", ("liq", "cap")))
    lending_fit = fit_within_dk(ds, make_spec("lending", ("gdp", "spread")))
    if roe_form == "levels":
        roe_fit = fit_within_dk(ds, make_spec("roe", ("lending", "spread")))
        return SystemFit(None, spread_fit, lending_fit, roe_fit)

    roe_fit = fit_within_dk(ds, make_spec("roe", ("lgdp", "liq", "cap")))
    coeffs = CoefficientSet(
        spread_const=spread_fit.coef("const"),
        spread_liq=spread_fit.coef("liq"),
        spread_cap=spread_fit.coef("cap"),
        lending_const=lending_fit.coef("const"),
        lending_gdp=lending_fit.coef("gdp"),
        lending_spread=lending_fit.coef("spread"),
        roe_const=roe_fit.coef("const"),
        roe_lgdp=roe_fit.coef("lgdp"),
        roe_liq=roe_fit.coef("liq"),
        roe_cap=roe_fit.coef("cap"),
        provenance="fitted",
    )
    return SystemFit(coeffs, spread_fit, lending_fit, roe_fit)


def resolve_coefficients(source: str) -> CoefficientSet:
    """Map a CLI-style coefficient source ("paper" or a JSON path) to a set."""
    if source == "paper":
        return PAPER_PRESET
    return CoefficientSet.from_json(source)
