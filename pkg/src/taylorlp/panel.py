"""Country-year panel data model and calendar-aware transformations.

Missing values are stored as NaN. Every transformation returns a new
:class:`PanelDataset`; arrays held by a dataset are read-only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .exceptions import DataError

REGION_CODES = ("EDA", "EDE", "LAC", "SSA")
KEY_COLUMNS = ("country", "year")

# role name -> human label, used by VariableRole validation
ROLES = (
    "interest_rate",
    "gdp_growth",
    "gdp_growth_forecast",
    "inflation",
    "inflation_forecast",
    "reserves_change",
    "outcome",
    "control",
)


@dataclass(frozen=True)
class VariableRole:
    role_name: str
    column: str

    def __post_init__(self):
        if self.role_name not in ROLES:
            raise DataError(f"unknown variable role {self.role_name!r}")

    def check(self, panel: "PanelDataset") -> None:
        if self.column not in panel.variables:
            raise DataError(f"role {self.role_name!r} bound to missing column {self.column!r}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Rectangular country-year panel.

    ``keys`` holds one ``(country_id, year)`` per row; rows of a country are
    contiguous and strictly increasing in year. ``data`` maps each variable
    stored in the registry to a float column aligned with ``keys``.
    """

    keys: tuple[tuple[str, int], ...]
    data: Mapping[str, np.ndarray]
    units: Mapping[str, str] = field(default_factory=dict)
    regions: Mapping[str, str] | None = None

    def __post_init__(self):
        keys = tuple((str(c), int(y)) for c, y in self.keys)
        object.__setattr__(self, "keys", keys)
        data = {}
        for name, col in self.data.items():
            col = np.asarray(col, dtype=np.float64)
            if col.shape != (len(keys),):
                raise DataError(f"column {name!r} has length {col.shape[0]}, expected {len(keys)}")
            data[name] = _readonly(col)
        object.__setattr__(self, "data", data)
        units = {name: str(self.units.get(name, "")) for name in data}
        extra = set(self.units) - set(data)
        if extra:
            raise DataError(f"units given for unknown variables: {sorted(extra)}")
        object.__setattr__(self, "units", units)
        if self.regions is not None:
            bad = {c: r for c, r in self.regions.items() if r not in REGION_CODES}
            if bad:
                raise DataError(f"invalid region codes: {bad}")
            object.__setattr__(self, "regions", dict(self.regions))

        order: dict[str, int] = {}
        codes = np.empty(len(keys), dtype=np.int64)
        years = np.empty(len(keys), dtype=np.int64)
        prev = None
        for i, (c, y) in enumerate(keys):
            if c not in order:
                order[c] = len(order)
            elif c != prev[0]:
                raise DataError(f"rows of country {c!r} are not contiguous")
            elif y <= prev[1]:
                if y == prev[1]:
                    raise DataError(f"duplicate (country, year) pair {(c, y)!r}")
                raise DataError(f"years of country {c!r} are not increasing at {y}")
            codes[i] = order[c]
            years[i] = y
            prev = (c, y)
        codes.setflags(write=False)
        years.setflags(write=False)
        object.__setattr__(self, "_order", tuple(order))
        object.__setattr__(self, "_codes", codes)
        object.__setattr__(self, "_years", years)

    @classmethod
    def from_rows(cls, keys, data, units=None, regions=None) -> "PanelDataset":
        """Build a panel from rows in any order; countries keep first-appearance order."""
        keys = [(str(c), int(y)) for c, y in keys]
        first: dict[str, int] = {}
        for c, _ in keys:
            first.setdefault(c, len(first))
        seen = set()
        for k in keys:
            if k in seen:
                raise DataError(f"duplicate (country, year) pair {k!r}")
            seen.add(k)
        perm = sorted(range(len(keys)), key=lambda i: (first[keys[i][0]], keys[i][1]))
        data = {n: np.asarray(v, dtype=np.float64)[perm] for n, v in data.items()}
        return cls(tuple(keys[i] for i in perm), data, units or {}, regions)

    # -- accessors ---------------------------------------------------------

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.data)

    @property
    def country_ids(self) -> tuple[str, ...]:
        return self._order

    @property
    def country_codes(self) -> np.ndarray:
        return self._codes

    @property
    def years(self) -> np.ndarray:
        return self._years

    @property
    def countries(self) -> np.ndarray:
        return np.array([k[0] for k in self.keys], dtype=object)

    @property
    def n_rows(self) -> int:
        return len(self.keys)

    def __len__(self) -> int:
        return len(self.keys)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[name]
        except KeyError:
            raise DataError(f"unknown variable {name!r}") from None

    def value(self, country: str, year: int, name: str) -> float:
        idx = self.row_index(country, year)
        return float(self.column(name)[idx])

    def row_index(self, country: str, year: int) -> int:
        idx = getattr(self, "_index", None)
        if idx is None:
            idx = {k: i for i, k in enumerate(self.keys)}
            object.__setattr__(self, "_index", idx)
        try:
            return idx[(country, int(year))]
        except KeyError:
            raise DataError(f"no row for {(country, year)!r}") from None

    def shifted(self, name: str, k: int) -> np.ndarray:
        """Values of ``name`` at calendar year ``t - k`` (k < 0 looks ahead)."""
        col = self.column(name)
        idx = kernels.shift_index(self._codes, self._years, int(k)) if len(col) else np.empty(0, np.int64)
        out = np.full(len(col), np.nan)
        hit = idx >= 0
        out[hit] = col[idx[hit]]
        return out

    def with_column(self, name: str, values, unit: str = "") -> "PanelDataset":
        if name in self.data or name in KEY_COLUMNS:
            raise DataError(f"column {name!r} already exists")
        data = dict(self.data)
        data[name] = np.asarray(values, dtype=np.float64)
        units = dict(self.units)
        units[name] = unit
        return PanelDataset(self.keys, data, units, self.regions)

    def with_regions(self, regions: Mapping[str, str]) -> "PanelDataset":
        return PanelDataset(self.keys, self.data, self.units, dict(regions))

    def take_rows(self, mask: np.ndarray) -> "PanelDataset":
        mask = np.asarray(mask, dtype=bool)
        keys = tuple(k for k, m in zip(self.keys, mask) if m)
        data = {n: v[mask] for n, v in self.data.items()}
        return PanelDataset(keys, data, self.units, self.regions)

    def select_countries(self, countries: Iterable[str]) -> "PanelDataset":
        wanted = set(countries)
        return self.take_rows(np.array([k[0] in wanted for k in self.keys], dtype=bool))

    def equals(self, other: "PanelDataset") -> bool:
        """Same keys, registry, units and bitwise-equal values (NaN == NaN)."""
        if self.keys != other.keys or self.variables != other.variables or self.units != other.units:
            return False
        for n in self.variables:
            a, b = self.data[n], other.data[n]
            if not np.array_equal(a.view(np.uint64), b.view(np.uint64)):
                if not np.array_equal(a, b, equal_nan=True):
                    return False
        return True


# -- CSV ingestion / serialization -------------------------------------------


def _parse_real(text: str, row: int, col: str) -> float:
    text = text.strip()
    if text == "":
        return math.nan
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"unparseable numeric cell at row {row}, column {col!r}: {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"non-finite numeric cell at row {row}, column {col!r}: {text!r}")
    return v


def load_csv(source, schema: Sequence[tuple[str, str]] | None = None, *, units=None) -> PanelDataset:
    """Read a panel CSV from a path, text stream or byte stream.

    ``schema`` lists ``(column, parse_kind)`` with kind ``"real"`` or
    ``"string"``; columns not listed are parsed as reals. String columns other
    than ``country`` are not panel variables and must be declared to be
    skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif hasattr(source, "read"):
        raw = source.read()
    else:
        raw = bytes(source)
    text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty CSV: missing header row") from None
    for key in KEY_COLUMNS:
        if key not in header:
            raise DataError(f"CSV header lacks mandatory column {key!r}")
    if len(set(header)) != len(header):
        raise DataError("CSV header has duplicate column names")
    kinds = {name: "real" for name in header if name not in KEY_COLUMNS}
    for name, kind in schema or ():
        if kind not in ("real", "string"):
            raise DataError(f"unknown parse kind {kind!r} for column {name!r}")
        if name in KEY_COLUMNS:
            continue
        if name not in kinds:
            raise DataError(f"schema column {name!r} not in CSV header")
        kinds[name] = kind
    real_cols = [n for n in header if kinds.get(n) == "real"]
    ci, yi = header.index("country"), header.index("year")
    pos = {n: header.index(n) for n in real_cols}

    keys = []
    cols = {n: [] for n in real_cols}
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not v.strip() for v in rec):
            continue
        if len(rec) != len(header):
            raise DataError(f"row {lineno} has {len(rec)} cells, header has {len(header)}")
        country = rec[ci].strip()
        if not country:
            raise DataError(f"row {lineno}: empty country")
        try:
            year = int(rec[yi].strip())
        except ValueError:
            raise DataError(f"unparseable year at row {lineno}: {rec[yi]!r}") from None
        keys.append((country, year))
        for n in real_cols:
            cols[n].append(_parse_real(rec[pos[n]], lineno, n))
    return PanelDataset.from_rows(keys, cols, units)


def format_real(v: float) -> str:
    if math.isnan(v):
        return ""
    return format(float(v), ".17g")


def to_csv(panel: PanelDataset, target=None) -> str:
    """Canonical CSV: key columns, then variables in registry order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["country", "year", *panel.variables])
    cols = [panel.data[n] for n in panel.variables]
    for i, (c, y) in enumerate(panel.keys):
        w.writerow([c, y, *(format_real(col[i]) for col in cols)])
    text = buf.getvalue()
    if target is not None:
        Path(target).write_text(text, encoding="utf-8")
    return text


def load_regions(source=None) -> dict[str, str]:
    """Read a ``country,region`` sidecar; defaults to the bundled country list."""
    if source is None:
        text = resources.files("taylorlp").joinpath("data/regions.csv").read_text(encoding="utf-8")
    elif isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8-sig")
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"country", "region"} <= set(reader.fieldnames):
        raise DataError("region sidecar needs columns 'country' and 'region'")
    out: dict[str, str] = {}
    for rec in reader:
        c, r = rec["country"].strip(), rec["region"].strip()
        if r not in REGION_CODES:
            raise DataError(f"country {c!r} has invalid region code {r!r}")
        if c in out:
            raise DataError(f"country {c!r} listed twice in region sidecar")
        out[c] = r
    return out


# -- transformations ----------------------------------------------------------


def _new_name(panel: PanelDataset, name: str) -> str:
    if name in panel.data:
        raise DataError(f"output column {name!r} collides with an existing column")
    return name


def lag(panel: PanelDataset, var: str, k: int = 1, *, name: str | None = None) -> PanelDataset:
    if k < 1:
        raise DataError(f"lag order must be >= 1, got {k}")
    out = _new_name(panel, name or f"{var}_lag{k}")
    return panel.with_column(out, panel.shifted(var, k), panel.units.get(var, ""))


def lead(panel: PanelDataset, var: str, h: int = 1, *, name: str | None = None) -> PanelDataset:
    if h < 0:
        raise DataError(f"lead must be >= 0, got {h}")
    out = _new_name(panel, name or f"{var}_lead{h}")
    return panel.with_column(out, panel.shifted(var, -h), panel.units.get(var, ""))


def diff(panel: PanelDataset, var: str, *, name: str | None = None) -> PanelDataset:
    out = _new_name(panel, name or f"{var}_diff")
    return panel.with_column(out, panel.column(var) - panel.shifted(var, 1), panel.units.get(var, ""))


def gender_gap(panel: PanelDataset, women_var: str, men_var: str, out: str) -> PanelDataset:
    """Women minus men, elementwise; missing if either side is missing."""
    gap = panel.column(women_var) - panel.column(men_var)
    return panel.with_column(_new_name(panel, out), gap, panel.units.get(women_var, ""))


def filter_min_years(panel: PanelDataset, var: str, min_years: int = 5) -> PanelDataset:
    if min_years < 1:
        raise DataError(f"min_years must be >= 1, got {min_years}")
    col = panel.column(var)
    counts = np.bincount(panel.country_codes, weights=np.isfinite(col), minlength=len(panel.country_ids))
    keep = counts[panel.country_codes] >= min_years
    return panel.take_rows(keep)


def count_years(panel: PanelDataset, var: str) -> dict[str, int]:
    col = panel.column(var)
    counts = np.bincount(panel.country_codes, weights=np.isfinite(col), minlength=len(panel.country_ids))
    return {c: int(n) for c, n in zip(panel.country_ids, counts)}


def subset_region(panel: PanelDataset, region: str) -> PanelDataset:
    if region not in REGION_CODES:
        raise DataError(f"unknown region code {region!r}")
    regions = panel.regions or {}
    missing = [c for c in panel.country_ids if c not in regions]
    if missing:
        raise DataError(f"countries without region assignment: {missing}")
    return panel.select_countries(c for c in panel.country_ids if regions[c] == region)
