"""Command-line front end for batch runs.

Five subcommands tie the toolkit together:

    ratios    per-bank-year NSFR and TCE/RWA from a balance-sheet CSV
    phasein   the phase-in schedule, compliance checks, requirement deltas
    unitroot  Harris-Tzavalis test per panel variable
    fit       within/DK regressions (single equation or the full system)
    simulate  shock scenarios, schedule series, synthetic panel generation

Exit codes are a stable contract: 0 success, 2 input or configuration
error, 3 estimation error. Output formats: aligned text (default), json
(full precision, deterministic byte-for-byte for identical invocations),
or csv where a flat table makes sense. No environment variables are read;
flags only, for reproducibility.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from typing import Sequence

from . import __version__
from .errors import DataError, EstimationError
from .estimation import RegressionSpec, fit_within_dk
from .model import (
    ScenarioInput,
    fit_system,
    phase_in_scenario,
    propagate_shock,
    resolve_coefficients,
    simulate_panel,
)
from .panel import load_panel, load_schema, write_panel
from .ratios import (
    BANGLADESH_SCHEDULE,
    NsfrWeights,
    REQUIREMENT_FIELDS,
    check_compliance,
    compute_nsfr,
    compute_tce_rwa,
    load_balance_sheets,
    load_positions,
    required_deltas,
)
from .unitroot import harris_tzavalis

MODEL_EQUATIONS = {
    "spread": ("spread", ("liq", "cap")),
    "lending": ("lending", ("gdp", "spread")),
    "roe": ("roe", ("lgdp", "liq", "cap")),
}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    lines = [fmt.format(*headers), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in rows]
    return "\n".join(lines)


def _csv_text(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(headers)]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines)


def _read_panel(args):
    schema = load_schema(args.schema) if args.schema else []
    return load_panel(args.panel, schema)


# -- ratios --------------------------------------------------------------------


def cmd_ratios(args) -> int:
    weights = NsfrWeights.from_json(args.weights) if args.weights else NsfrWeights()
    sheets = load_balance_sheets(args.balance_sheets, require_rwa=args.tce)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        for bs in sheets:
            rec = {"bank_id": bs.entity, "year": bs.year, "nsfr": compute_nsfr(bs, weights)}
            if args.tce:
                rec["tce_rwa"] = compute_tce_rwa(bs)
            rows.append(rec)

    headers = ["bank_id", "year", "nsfr"] + (["tce_rwa"] if args.tce else [])
    str_rows = [
        [r["bank_id"], str(r["year"]), f"{r['nsfr']:.5f}"]
        + ([f"{r['tce_rwa']:.5f}"] if args.tce else [])
        for r in rows
    ]
    if args.format == "json":
        _emit(_json_text({"rows": rows}), args.out)
    elif args.format == "csv":
        _emit(_csv_text(headers, str_rows), args.out)
    else:
        _emit(_table(headers, str_rows), args.out)
    return 0


# -- phasein -------------------------------------------------------------------


def _schedule_payload() -> list[dict]:
    payload = []
    for req in BANGLADESH_SCHEDULE.years:
        payload.append(
            {
                "year": req.year,
                "min_cet1_pct": req.min_cet1_pct,
                "conservation_buffer_pct": req.conservation_buffer_pct,
                "cet1_plus_buffer_pct": req.cet1_plus_buffer_pct,
                "min_tier1_pct": req.min_tier1_pct,
                "min_total_pct": req.min_total_pct,
                "total_plus_buffer_pct": req.total_plus_buffer_pct,
                "cet1_deduction_phase_pct": req.cet1_deduction_phase_pct,
                "rr_deduction_phase_pct": req.rr_deduction_phase_pct,
                "leverage_min_pct": req.leverage_min_pct,
                "leverage_note": req.leverage_note,
                "lcr_min_pct": req.lcr_min_pct,
                "nsfr_min": req.nsfr_min,
            }
        )
    return payload


def _parse_year_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise DataError(f"expected FROM:TO years, got {text!r}") from None


def cmd_phasein(args) -> int:
    if args.deltas:
        frm, to = _parse_year_range(args.deltas)
        deltas = required_deltas(frm, to)
        if args.format == "json":
            _emit(_json_text({"from_year": frm, "to_year": to, "deltas": deltas}), args.out)
        else:
            rows = [[k, f"{v:+.4g}"] for k, v in deltas.items()]
            _emit(_table(["requirement", "delta"], rows), args.out)
        return 0

    if args.positions:
        reports = [check_compliance(p) for p in load_positions(args.positions)]
        if args.format == "json":
            _emit(_json_text({"reports": [r.to_dict() for r in reports]}), args.out)
        else:
            blocks = []
            for r in reports:
                rows = [
                    [
                        c.name,
                        f"{c.required:.4g}",
                        f"{c.actual:.4g}",
                        f"{c.shortfall:.4g}",
                        ("advisory" if c.advisory else ("pass" if c.passed else "FAIL")),
                    ]
                    for c in r.checks
                ]
                head = (
                    f"{r.entity} {r.year}"
                    + (f" (steady state: {r.schedule_year} rules)" if r.steady_state else "")
                    + f" -> {'PASS' if r.overall_pass else 'FAIL'}"
                )
                blocks.append(
                    head + "\n" + _table(["requirement", "required", "actual",
                                          "shortfall", "status"], rows)
                )
            _emit("\n\n".join(blocks), args.out)
        return 0

    payload = _schedule_payload()
    if args.format == "json":
        _emit(_json_text({"schedule": payload}), args.out)
        return 0
    headers = ["year"] + [f for f in REQUIREMENT_FIELDS] + ["cet1_deduction_phase_pct",
                                                            "rr_deduction_phase_pct"]
    rows = [
        [str(p["year"])]
        + [f"{p[f]:g}" for f in REQUIREMENT_FIELDS]
        + [f"{p['cet1_deduction_phase_pct']:g}", f"{p['rr_deduction_phase_pct']:g}"]
        for p in payload
    ]
    _emit(_table(headers, rows), args.out)
    return 0


# -- unitroot ------------------------------------------------------------------


def cmd_unitroot(args) -> int:
    ds = _read_panel(args)
    names = [v.strip() for v in args.vars.split(",") if v.strip()]
    if not names:
        raise DataError("no variables requested; pass --vars a,b,c")
    results = [harris_tzavalis(ds, name) for name in names]
    if args.format == "json":
        _emit(_json_text({"results": [r.to_dict() for r in results]}), args.out)
    else:
        rows = [
            [r.variable, f"{r.rho_hat:.4f}", f"{r.z_stat:.4f}", f"{r.p_value:.4f}"]
            for r in results
        ]
        table = _table(["variable", "rho", "z", "p_value"], rows)
        note = (f"H0: unit root; small p favours stationarity "
                f"({results[0].case}, N={results[0].n_entities}, "
                f"T={results[0].n_periods})")
        _emit(table + "\n" + note, args.out)
    return 0


# -- fit -----------------------------------------------------------------------


def _resolve_lags(value: str | None, default: int | str) -> int | str:
    if value is None:
        return default
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise DataError(f"--dk-lags must be 'auto' or an integer, got {value!r}") from None


def cmd_fit(args) -> int:
    ds = _read_panel(args)
    small_sample = not args.plain_cov

    if args.model == "all":
        lags = _resolve_lags(args.dk_lags, default=0)
        system = fit_system(ds, dk_bandwidth=lags, small_sample=small_sample)
        if args.coeffs_out and system.coefficients is not None:
            system.coefficients.to_json(args.coeffs_out)
        payload = {
            "coefficients": system.coefficients.to_dict(),
            "equations": {
                "spread": system.spread_fit.to_dict(),
                "lending": system.lending_fit.to_dict(),
                "roe": system.roe_fit.to_dict(),
            },
        }
        if args.format == "json":
            _emit(_json_text(payload), args.out)
        else:
            blocks = [
                f"== {name} ==\n{fit.summary()}"
                for name, fit in zip(("spread", "lending", "roe"), system.fits)
            ]
            _emit("\n\n".join(blocks), args.out)
        return 0

    if args.model == "custom":
        if not args.dep or not args.regressors:
            raise DataError("--model custom needs --dep and --regressors")
        dep = args.dep
        regs = tuple(r.strip() for r in args.regressors.split(",") if r.strip())
    else:
        dep, regs = MODEL_EQUATIONS[args.model]

    spec = RegressionSpec(
        dependent=dep,
        regressors=regs,
        include_intercept=True,
        fixed_effects=not args.no_fe,
        dk_bandwidth=_resolve_lags(args.dk_lags, default="auto"),
        small_sample=small_sample,
    )
    fit = fit_within_dk(ds, spec)
    if args.format == "json":
        _emit(_json_text({"model": args.model, "fit": fit.to_dict()}), args.out)
    else:
        _emit(f"== {args.model}: {dep} ~ {' + '.join(regs)} ==\n{fit.summary()}", args.out)
    return 0


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.make_panel:
        coeffs = resolve_coefficients(args.coeffs)
        ds = simulate_panel(coeffs, args.banks, args.years, args.noise, args.seed)
        if not args.out:
            raise DataError("--make-panel needs --out PATH for the generated CSV")
        write_panel(ds, args.out)
        print(f"wrote {ds.n_entities}x{ds.n_periods} synthetic panel to {args.out}")
        return 0

    coeffs = resolve_coefficients(args.coeffs)

    if args.phase_in:
        frm, to = _parse_year_range(args.phase_in)
        series = phase_in_scenario(
            coeffs, BANGLADESH_SCHEDULE, frm, to, delta_liq_per_year=args.phase_liq
        )
        if args.format == "json":
            _emit(_json_text(series.to_dict()), args.out)
        elif args.format == "csv":
            rows = [
                [str(y), repr(r.delta_spread), repr(r.delta_lending), repr(r.delta_roe)]
                for y, r in series.steps
            ]
            rows.append(
                ["cumulative", repr(series.cumulative.delta_spread),
                 repr(series.cumulative.delta_lending), repr(series.cumulative.delta_roe)]
            )
            _emit(_csv_text(["year", "delta_spread", "delta_lending", "delta_roe"], rows),
                  args.out)
        else:
            rows = [
                [str(y), f"{r.delta_spread:.4g}", f"{r.delta_lending:.4g}",
                 f"{r.delta_roe:.4g}"]
                for y, r in series.steps
            ]
            rows.append(
                ["cumulative", f"{series.cumulative.delta_spread:.4g}",
                 f"{series.cumulative.delta_lending:.4g}",
                 f"{series.cumulative.delta_roe:.4g}"]
            )
            table = _table(["year", "d_spread", "d_lending", "d_roe"], rows)
            _emit(table + "\n" + _units_note(), args.out)
        return 0

    shock = ScenarioInput(
        delta_cap=args.dcap,
        delta_liq=args.dliq,
        mode=args.mode,
        delta_lgdp=args.dlgdp,
    )
    result = propagate_shock(coeffs, shock)
    if args.format == "json":
        _emit(_json_text(result.to_dict()), args.out)
    elif args.format == "csv":
        _emit(
            _csv_text(
                ["delta_spread", "delta_lending", "delta_lgdp", "delta_roe"],
                [[repr(result.delta_spread), repr(result.delta_lending),
                  repr(result.delta_lgdp), repr(result.delta_roe)]],
            ),
            args.out,
        )
    else:
        lines = [
            f"shock: d_liq={args.dliq:+.4g} pp, d_cap={args.dcap:+.4g} pp "
            f"({args.mode}, coefficients: {result.provenance})"
        ]
        for step in result.trace:
            terms = ", ".join(f"{k} = {v:+.6g}" for k, v in step["terms"].items())
            lines.append(f"  {step['step']:<15} {step['formula']}")
            lines.append(f"  {'':<15} {terms}  ->  {step['value']:+.6g}")
        lines.append(
            f"result: d_spread={result.delta_spread:+.4g} pp, "
            f"d_lending={result.delta_lending:+.4g}%, d_roe={result.delta_roe:+.4g}%"
        )
        lines.append(_units_note())
        _emit("\n".join(lines), args.out)
    return 0


def _units_note() -> str:
    return ("note: shocks are percentage points of the requirement ratios; "
            "responses are read as percent, although LIQ/CAP enter the fitted "
            "equations in logs")


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="baselcost",
        description="Basel III cost toolkit: ratios, panel econometrics, scenarios",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--out", help="write output to this path instead of stdout")

    p = sub.add_parser("ratios", help="NSFR and TCE/RWA per bank-year")
    p.add_argument("--balance-sheets", required=True, help="balance-sheet CSV")
    p.add_argument("--weights", help="JSON file overriding the NSFR weights")
    p.add_argument("--tce", action=argparse.BooleanOptionalAction, default=True,
                   help="include TCE/RWA (needs rwa column; default on)")
    add_common(p)
    p.set_defaults(func=cmd_ratios)

    p = sub.add_parser("phasein", help="phase-in schedule, compliance, deltas")
    p.add_argument("--positions", help="capital-position CSV to check")
    p.add_argument("--deltas", metavar="FROM:TO",
                   help="print per-requirement changes between two years")
    add_common(p)
    p.set_defaults(func=cmd_phasein)

    p = sub.add_parser("unitroot", help="Harris-Tzavalis test per variable")
    p.add_argument("--panel", required=True, help="wide panel CSV")
    p.add_argument("--schema", help="JSON schema of declared variables")
    p.add_argument("--vars", required=True, help="comma-separated variable names")
    add_common(p)
    p.set_defaults(func=cmd_unitroot)

    p = sub.add_parser("fit", help="within/DK regression (equation or system)")
    p.add_argument("--panel", required=True, help="wide panel CSV")
    p.add_argument("--schema", help="JSON schema of declared variables")
    p.add_argument("--model", required=True,
                   choices=("spread", "lending", "roe", "all", "custom"))
    p.add_argument("--dep", help="dependent variable (custom model)")
    p.add_argument("--regressors", help="comma-separated regressors (custom model)")
    p.add_argument("--dk-lags", help="'auto' or lag count (default: auto; 0 for --model all)")
    p.add_argument("--no-fe", action="store_true", help="pooled fit, no fixed effects")
    p.add_argument("--plain-cov", action="store_true",
                   help="textbook DK covariance without small-sample adjustment")
    p.add_argument("--coeffs-out", help="write the fitted CoefficientSet JSON (model=all)")
    add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="shock scenarios and synthetic panels")
    p.add_argument("--coeffs", default="paper",
                   help="'paper' for the built-in preset or a CoefficientSet JSON path")
    p.add_argument("--dliq", type=float, default=0.0, help="liquidity shock (pp)")
    p.add_argument("--dcap", type=float, default=0.0, help="capital shock (pp)")
    p.add_argument("--mode", choices=("chained", "exogenous"), default="chained")
    p.add_argument("--dlgdp", type=float, default=None,
                   help="exogenous lending-to-GDP change (exogenous mode)")
    p.add_argument("--phase-in", metavar="FROM:TO",
                   help="run the schedule series between two years")
    p.add_argument("--phase-liq", type=float, default=0.0,
                   help="liquidity shock per phase-in year")
    p.add_argument("--make-panel", action="store_true",
                   help="write a synthetic panel CSV instead of running a scenario")
    p.add_argument("--banks", type=int, default=22, help="banks for --make-panel")
    p.add_argument("--years", type=int, default=5, help="years for --make-panel")
    p.add_argument("--noise", type=float, default=0.05, help="noise sd for --make-panel")
    p.add_argument("--seed", type=int, default=20140622, help="seed for --make-panel")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
