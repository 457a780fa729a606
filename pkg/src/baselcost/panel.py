"""Bank-year panel data model, CSV ingestion, and variable construction.

The substrate for everything else in the package: a rectangular entity x
period dataset of named numeric columns with explicit missing values.
Datasets are immutable; every operation returns a new dataset, so shared
read access is safe.

Input format is wide CSV, one row per (bank_id, year):

    bank_id,year,roe,liq,cap
    B01,2010,12.5,1.02,0.091
    B01,2011,,1.05,0.094      <- empty cell = missing

Variable transforms (logs), derived series (interest spread, real rate,
log ratios), entity demeaning, and within-entity lags are provided as
pure functions over datasets.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

TRANSFORMS = ("none", "log")
RECIPE_KINDS = ("spread", "real_rate", "ratio_log")


@dataclass(frozen=True)
class VariableSpec:
    """Declares one panel variable: its name, transform, and documentation."""

    name: str
    transform: str = "none"
    role: str = ""
    units: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise DataError("variable name must be non-empty")
        if self.transform not in TRANSFORMS:
            raise DataError(
                f"unknown transform {self.transform!r} for variable {self.name!r}; "
                f"expected one of {TRANSFORMS}"
            )


@dataclass(frozen=True)
class DerivedSeriesRecipe:
    """Recipe for a derived column.

    Kinds:
      spread    -- inputs (r, i), output r - i
      real_rate -- inputs (i, pi), output i - pi
      ratio_log -- inputs (a, b), output log(a) - log(b); both must be positive
    """

    output: str
    kind: str
    inputs: tuple[str, str]

    def __post_init__(self) -> None:
        if self.kind not in RECIPE_KINDS:
            raise DataError(f"unknown recipe kind {self.kind!r}; expected one of {RECIPE_KINDS}")
        if len(self.inputs) != 2:
            raise DataError(f"recipe {self.output!r} needs exactly 2 input columns")
        if not self.output:
            raise DataError("recipe output name must be non-empty")


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)  # always copy so caller arrays stay writable
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PanelDataset:
    """Rectangular bank-year panel.

    columns maps variable name -> (n_entities, n_periods) float matrix with
    NaN for missing cells. Entity order follows first appearance in the
    source; periods are strictly increasing integers.
    """

    entities: tuple[str, ...]
    periods: tuple[int, ...]
    columns: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.entities)) != len(self.entities):
            raise DataError("entity ids must be unique")
        if any(b <= a for a, b in zip(self.periods, self.periods[1:])):
            raise DataError("periods must be strictly increasing")
        shape = (len(self.entities), len(self.periods))
        frozen = {}
        for name, mat in self.columns.items():
            mat = np.asarray(mat, dtype=float)
            if mat.shape != shape:
                raise DataError(
                    f"column {name!r} has shape {mat.shape}, expected {shape}"
                )
            if np.any(np.isinf(mat)):
                raise DataError(f"column {name!r} contains non-finite values")
            frozen[name] = _freeze(mat)
        object.__setattr__(self, "columns", frozen)

    # -- introspection ----------------------------------------------------

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_periods(self) -> int:
        return len(self.periods)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"no column named {name!r}; have {sorted(self.columns)}") from None

    def is_balanced(self, columns: Iterable[str] | None = None) -> bool:
        """True iff no missing entries in any of the selected columns."""
        names = list(columns) if columns is not None else list(self.columns)
        return all(not np.any(np.isnan(self.column(n))) for n in names)

    def observation_count(self, columns: Iterable[str] | None = None) -> int:
        """Number of (entity, period) cells observed in all selected columns."""
        names = list(columns) if columns is not None else list(self.columns)
        if not names:
            return self.n_entities * self.n_periods
        ok = np.ones((self.n_entities, self.n_periods), dtype=bool)
        for n in names:
            ok &= ~np.isnan(self.column(n))
        return int(ok.sum())

    # -- construction helpers ---------------------------------------------

    def with_column(self, name: str, values: np.ndarray) -> "PanelDataset":
        """New dataset with `name` added or replaced."""
        cols = dict(self.columns)
        cols[name] = np.asarray(values, dtype=float)
        return PanelDataset(self.entities, self.periods, cols)

    def subset(
        self,
        entities: Sequence[str] | None = None,
        periods: Sequence[int] | None = None,
    ) -> "PanelDataset":
        """Restrict to the given entities and/or periods (order preserved)."""
        ents = tuple(entities) if entities is not None else self.entities
        pers = tuple(periods) if periods is not None else self.periods
        for e in ents:
            if e not in self.entities:
                raise DataError(f"unknown entity {e!r}")
        for p in pers:
            if p not in self.periods:
                raise DataError(f"unknown period {p!r}")
        ei = [self.entities.index(e) for e in ents]
        pi = [self.periods.index(p) for p in pers]
        cols = {n: m[np.ix_(ei, pi)] for n, m in self.columns.items()}
        return PanelDataset(ents, pers, cols)


# -- schema files ----------------------------------------------------------


def load_schema(path: str) -> list[VariableSpec]:
    """Read a JSON schema file: {"variables": [{"name": ..., "transform": ...}, ...]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read schema file {path}: {exc}") from exc
    entries = raw.get("variables") if isinstance(raw, dict) else None
    if not isinstance(entries, list):
        raise DataError(f"schema file {path} must contain a 'variables' list")
    specs = []
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry:
            raise DataError(f"malformed schema entry in {path}: {entry!r}")
        specs.append(
            VariableSpec(
                name=entry["name"],
                transform=entry.get("transform", "none"),
                role=entry.get("role", ""),
                units=entry.get("units", ""),
            )
        )
    return specs


# -- loading / writing ------------------------------------------------------


def load_panel(path: str, schema: Sequence[VariableSpec]) -> PanelDataset:
    """Load a wide-format CSV into a PanelDataset.

    The header must start with `bank_id,year`; every variable declared in
    `schema` must be present. Transforms declared in the schema are NOT
    applied here (raw storage); use apply_transform afterwards.

    Raises DataError on duplicate (bank_id, year) keys, unparseable cells,
    or missing declared columns, naming the offending location.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open panel file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if header[:2] != ["bank_id", "year"]:
            raise DataError(f"{path}: header must start with 'bank_id,year', got {header[:2]}")
        var_names = header[2:]
        if len(set(var_names)) != len(var_names):
            raise DataError(f"{path}: duplicate column names in header")
        declared = [s.name for s in schema]
        missing_cols = [n for n in declared if n not in var_names]
        if missing_cols:
            raise DataError(f"{path}: declared column(s) missing from header: {missing_cols}")

        entities: list[str] = []
        periods: set[int] = set()
        cells: dict[tuple[str, int], list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            bank = row[0].strip()
            if not bank:
                raise DataError(f"{path}:{lineno}: empty bank_id")
            try:
                year = int(row[1].strip())
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: year {row[1]!r} is not an integer"
                ) from None
            key = (bank, year)
            if key in cells:
                raise DataError(f"{path}:{lineno}: duplicate observation for {key}")
            values = []
            for col_name, cell in zip(var_names, row[2:]):
                cell = cell.strip()
                if cell == "":
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: cannot parse value {cell!r} in column {col_name!r}"
                    ) from None
            cells[key] = values
            if bank not in entities:
                entities.append(bank)
            periods.add(year)

    ordered_periods = tuple(sorted(periods))
    n_e, n_p = len(entities), len(ordered_periods)
    mats = {name: np.full((n_e, n_p), np.nan) for name in var_names}
    e_index = {e: i for i, e in enumerate(entities)}
    p_index = {p: j for j, p in enumerate(ordered_periods)}
    for (bank, year), values in cells.items():
        i, j = e_index[bank], p_index[year]
        for name, v in zip(var_names, values):
            mats[name][i, j] = v
    return PanelDataset(tuple(entities), ordered_periods, mats)


def write_panel(ds: PanelDataset, path: str) -> None:
    """Emit the dataset back to wide CSV (missing cells become empty)."""
    names = list(ds.columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_id", "year", *names])
        for i, bank in enumerate(ds.entities):
            for j, year in enumerate(ds.periods):
                row = [bank, str(year)]
                for name in names:
                    v = ds.columns[name][i, j]
                    row.append("" if math.isnan(v) else repr(float(v)))
                writer.writerow(row)


# -- variable construction ---------------------------------------------------


def _log_column(ds: PanelDataset, name: str) -> np.ndarray:
    src = ds.column(name)
    bad = (src <= 0) & ~np.isnan(src)
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise DataError(
            f"cannot take log of column {name!r}: value {src[i, j]} "
            f"for entity {ds.entities[i]!r} in period {ds.periods[j]} is not positive"
        )
    with np.errstate(invalid="ignore"):
        return np.where(np.isnan(src), np.nan, np.log(src))


def apply_transform(ds: PanelDataset, spec: VariableSpec) -> PanelDataset:
    """Apply a declared transform; log adds `<name>__log` keeping the original.

    Missing values stay missing. A non-positive value under log is a hard
    error naming the entity, period, and value: silently dropping rows would
    bias anything estimated downstream.
    """
    if spec.transform == "none":
        return ds
    return ds.with_column(f"{spec.name}__log", _log_column(ds, spec.name))


def derive_series(ds: PanelDataset, recipe: DerivedSeriesRecipe) -> PanelDataset:
    """Construct a derived column; missing values propagate elementwise."""
    a, b = (ds.column(n) for n in recipe.inputs)
    if recipe.kind in ("spread", "real_rate"):
        out = a - b
    else:  # ratio_log
        out = _log_column(ds, recipe.inputs[0]) - _log_column(ds, recipe.inputs[1])
    return ds.with_column(recipe.output, out)


def within_demean(ds: PanelDataset, columns: Sequence[str]) -> PanelDataset:
    """Subtract each entity's own mean (over its observed periods) in place.

    Every entity needs at least 2 observed periods per column, otherwise the
    demeaned value carries no information and the caller almost certainly has
    a data problem.
    """
    out = ds
    for name in columns:
        mat = np.array(ds.column(name))
        counts = np.sum(~np.isnan(mat), axis=1)
        thin = np.nonzero(counts < 2)[0]
        if thin.size:
            raise DataError(
                f"entity {ds.entities[int(thin[0])]!r} has fewer than 2 observed "
                f"periods in column {name!r}; cannot demean"
            )
        with np.errstate(invalid="ignore"):
            means = np.nanmean(mat, axis=1, keepdims=True)
        out = out.with_column(name, mat - means)
    return out


def lag(ds: PanelDataset, column: str, k: int) -> PanelDataset:
    """Add `<column>__lag<k>`: values shifted k periods within each entity.

    The first k periods are missing; entity boundaries are never crossed.
    """
    if k < 1:
        raise DataError(f"lag order must be >= 1, got {k}")
    if k >= ds.n_periods:
        raise DataError(
            f"lag order {k} must be smaller than the number of periods ({ds.n_periods})"
        )
    src = ds.column(column)
    out = np.full_like(src, np.nan)
    out[:, k:] = src[:, :-k]
    return ds.with_column(f"{column}__lag{k}", out)
