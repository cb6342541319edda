"""Country-by-country Taylor-rule estimation and standardized policy shocks.

The augmented rule regresses the change in the policy rate on next-year
forecasts of growth and inflation and on last year's growth, inflation,
reserve change and rate level, each country separately and with an
intercept. Forecast columns are stored at the year they refer to, so the
forecast entering the row for year ``t`` is read from year ``t + 1``.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .exceptions import DataError, EstimationError, RankDeficientError
from .panel import PanelDataset, format_real
from .regress import (
    DesignMatrix,
    RegressionFit,
    cluster_robust_cov,
    country_clusters,
    ols,
    within_twoway,
)

# Regressor labels in table row order.
TABLE_ORDER = (
    "lagged_gdp_growth",
    "forecast_gdp_growth",
    "lagged_inflation",
    "forecast_inflation",
    "lagged_reserves_change",
    "lagged_interest_rate",
)
TABLE_LABELS = {
    "lagged_gdp_growth": "Lagged GDP growth",
    "forecast_gdp_growth": "Forecasted GDP growth",
    "lagged_inflation": "Lagged inflation rate",
    "forecast_inflation": "Forecasted inflation rate",
    "lagged_reserves_change": "Lagged changes in reserves",
    "lagged_interest_rate": "Lagged nominal interest rate",
}
# Coefficient order of the rule as written (after the intercept).
RULE_ORDER = (
    "forecast_gdp_growth",
    "forecast_inflation",
    "lagged_gdp_growth",
    "lagged_inflation",
    "lagged_reserves_change",
    "lagged_interest_rate",
)


@dataclass(frozen=True)
class TaylorSpec:
    interest_rate: str
    gdp_growth: str
    gdp_growth_forecast: str
    inflation: str
    inflation_forecast: str
    reserves_change: str
    min_obs: int = 8

    def __post_init__(self):
        cols = self.columns()
        if len(set(cols.values())) != len(cols):
            raise DataError(f"Taylor roles must bind distinct columns: {cols}")
        if self.min_obs < 8:
            raise DataError(f"min_obs must be at least 8, got {self.min_obs}")

    def columns(self) -> dict[str, str]:
        return {
            "interest_rate": self.interest_rate,
            "gdp_growth": self.gdp_growth,
            "gdp_growth_forecast": self.gdp_growth_forecast,
            "inflation": self.inflation,
            "inflation_forecast": self.inflation_forecast,
            "reserves_change": self.reserves_change,
        }

    def check(self, panel: PanelDataset) -> None:
        missing = [c for c in self.columns().values() if c not in panel.variables]
        if missing:
            raise DataError(f"Taylor-rule columns missing from panel: {missing}")


def taylor_columns(panel: PanelDataset, spec: TaylorSpec, forecast_errors: bool = False):
    """Build ``(dependent, {label: regressor})`` arrays aligned to panel rows."""
    spec.check(panel)
    i = panel.column(spec.interest_rate)
    dep = i - panel.shifted(spec.interest_rate, 1)
    g_f = panel.shifted(spec.gdp_growth_forecast, -1)
    pi_f = panel.shifted(spec.inflation_forecast, -1)
    if forecast_errors:
        g_f = panel.shifted(spec.gdp_growth, -1) - g_f
        pi_f = panel.shifted(spec.inflation, -1) - pi_f
    regs = {
        "forecast_gdp_growth": g_f,
        "forecast_inflation": pi_f,
        "lagged_gdp_growth": panel.shifted(spec.gdp_growth, 1),
        "lagged_inflation": panel.shifted(spec.inflation, 1),
        "lagged_reserves_change": panel.shifted(spec.reserves_change, 1),
        "lagged_interest_rate": panel.shifted(spec.interest_rate, 1),
    }
    if forecast_errors:
        rename = {"forecast_gdp_growth": "gdp_growth_forecast_error", "forecast_inflation": "inflation_forecast_error"}
        regs = {rename.get(k, k): v for k, v in regs.items()}
    return dep, regs


class TaylorEstimates(Mapping):
    """Per-country fits, plus the countries that could not be estimated and why."""

    def __init__(self, fits: dict[str, RegressionFit], skipped: dict[str, str], specification: str):
        self.fits = fits
        self.skipped = skipped
        self.specification = specification

    def __getitem__(self, country):
        return self.fits[country]

    def __iter__(self):
        return iter(self.fits)

    def __len__(self):
        return len(self.fits)

    def diagnostics(self) -> str:
        lines = [f"{c}: {r}" for c, r in self.skipped.items()]
        return "\n".join(lines) + ("\n" if lines else "")


def estimate_taylor(panel: PanelDataset, spec: TaylorSpec, *, forecast_errors: bool = False) -> TaylorEstimates:
    dep, regs = taylor_columns(panel, spec, forecast_errors)
    X = np.column_stack(list(regs.values()))
    labels = tuple(regs)
    complete = np.isfinite(dep) & np.all(np.isfinite(X), axis=1)
    fits: dict[str, RegressionFit] = {}
    skipped: dict[str, str] = {}
    codes = panel.country_codes
    for code, country in enumerate(panel.country_ids):
        rows = np.flatnonzero((codes == code) & complete)
        if len(rows) < spec.min_obs:
            skipped[country] = f"insufficient_obs: {len(rows)} complete rows < min_obs {spec.min_obs}"
            continue
        keys = tuple(panel.keys[r] for r in rows)
        design = DesignMatrix(X[rows], labels, keys)
        try:
            fits[country] = ols(design, dep[rows], intercept=True)
        except RankDeficientError as exc:
            skipped[country] = f"rank_deficient: dependent columns {list(exc.columns)}"
    kind = "forecast_error" if forecast_errors else "baseline"
    return TaylorEstimates(fits, skipped, kind)


@dataclass(frozen=True)
class CountryStats:
    mean: float
    sd: float
    count: int


@dataclass(frozen=True, eq=False)
class ShockSeries:
    keys: tuple[tuple[str, int], ...]
    raw: np.ndarray
    standardized: np.ndarray
    stats: dict[str, CountryStats]
    skipped: dict[str, str] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.keys)

    def as_dict(self, standardized: bool = True) -> dict[tuple[str, int], float]:
        vals = self.standardized if standardized else self.raw
        return {k: float(v) for k, v in zip(self.keys, vals)}

    def countries(self) -> tuple[str, ...]:
        return tuple(self.stats)

    def pooled_sd(self) -> float:
        return float(np.std(self.standardized, ddof=1))

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["country", "year", "raw_residual", "standardized_shock"])
        for (c, y), r, s in zip(self.keys, self.raw, self.standardized):
            w.writerow([c, y, format_real(r), format_real(s)])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def diagnostics(self) -> str:
        return "".join(f"{c}: {r}\n" for c, r in self.skipped.items())


def extract_standardized_shocks(fits, panel: PanelDataset | None = None) -> ShockSeries:
    """Divide each country's residuals by their sample sd (n - 1 denominator)."""
    keys, raw, std = [], [], []
    stats: dict[str, CountryStats] = {}
    skipped = dict(getattr(fits, "skipped", {}))
    for country, fit in fits.items():
        e = np.asarray(fit.residuals, dtype=np.float64)
        if e.size < 2:
            skipped[country] = f"too_few_residuals: {e.size}"
            continue
        sd = float(np.std(e, ddof=1))
        if not sd > 0:
            skipped[country] = "zero_variance: residual standard deviation is 0"
            continue
        z = e / sd
        keys.extend(fit.row_keys)
        raw.extend(e)
        std.extend(z)
        stats[country] = CountryStats(float(np.mean(z)), float(np.std(z, ddof=1)), int(e.size))
    if panel is not None:
        order = {k: i for i, k in enumerate(panel.keys)}
        perm = sorted(range(len(keys)), key=lambda i: order[keys[i]])
        keys = [keys[i] for i in perm]
        raw = [raw[i] for i in perm]
        std = [std[i] for i in perm]
    meta = {"specification": getattr(fits, "specification", "baseline")}
    return ShockSeries(tuple(keys), np.array(raw), np.array(std), stats, skipped, meta)


def taylor_shocks(panel: PanelDataset, spec: TaylorSpec) -> ShockSeries:
    return extract_standardized_shocks(estimate_taylor(panel, spec), panel)


def forecast_error_shocks(panel: PanelDataset, spec: TaylorSpec) -> ShockSeries:
    """Alternative shocks: forecasts replaced by realized-minus-forecast errors."""
    fits = estimate_taylor(panel, spec, forecast_errors=True)
    shocks = extract_standardized_shocks(fits, panel)
    shocks.metadata.update(
        specification="forecast_error",
        interpretation="regressor_replacement: growth and inflation forecasts replaced by "
        "forecast errors (realized t+1 minus forecast for t+1)",
    )
    return shocks


def attach_shocks(panel: PanelDataset, shocks: ShockSeries, name: str = "shock", *, raw: bool = False) -> PanelDataset:
    """Add the shock series as a panel column dated at the shock year."""
    col = np.full(panel.n_rows, np.nan)
    vals = shocks.raw if raw else shocks.standardized
    for k, v in zip(shocks.keys, vals):
        col[panel.row_index(*k)] = v
    return panel.with_column(name, col)


# -- pooled panel version ------------------------------------------------------


def pooled_taylor_fe(panel: PanelDataset, spec: TaylorSpec, time_dummies: bool = False) -> RegressionFit:
    """Pooled rule with country FE (within), optional year dummies, country clusters."""
    dep, regs = taylor_columns(panel, spec)
    regs = {k: regs[k] for k in TABLE_ORDER}
    design, y = within_twoway(panel, dep, regs, country_fe=True, time_fe=time_dummies)
    fit = ols(design, y, intercept=False)
    clusters = country_clusters(fit)
    if len(set(clusters)) < 2:
        # one country: nothing to cluster over, keep the classical covariance
        return fit
    return fit.with_covariance(cluster_robust_cov(fit, clusters), "cluster_country")


def significance_stars(coef: float, se: float) -> str:
    if not se > 0:
        return ""
    p = 2 * (1 - NormalDist().cdf(abs(coef) / se))
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


@dataclass(frozen=True)
class TableRow:
    label: str
    coefficient: float
    se: float
    stars: str

    def cell(self) -> str:
        return f"{_sig3(self.coefficient)}{self.stars} ({self.se:.3f})"


def _sig3(x: float) -> str:
    if x == 0 or not math.isfinite(x):
        return f"{x:g}"
    digits = max(3 - int(math.floor(math.log10(abs(x)))) - 1, 0)
    return f"{x:.{digits}f}"


def table_a1(fit: RegressionFit) -> list[TableRow]:
    """Six regressor rows in display order with clustered SE and stars."""
    se = fit.se
    rows = []
    for key in TABLE_ORDER:
        j = fit.index(key)
        b, s = float(fit.coefficients[j]), float(se[j])
        rows.append(TableRow(TABLE_LABELS[key], b, s, significance_stars(b, s)))
    return rows


def format_table_a1(fits: Mapping[str, RegressionFit]) -> str:
    """Render one column per fit, e.g. ``{"(1)": no_dummies, "(2)": with_dummies}``."""
    names = list(fits)
    tables = {n: table_a1(f) for n, f in fits.items()}
    lines = ["Dependent variable: Changes in the nominal interest rate", "\t" + "\t".join(names)]
    for i, key in enumerate(TABLE_ORDER):
        lines.append(TABLE_LABELS[key] + "\t" + "\t".join(tables[n][i].cell() for n in names))
    dummies = ["Yes" if any(lab.startswith("year_") for lab in fits[n].column_labels) else "No" for n in names]
    lines.append("Time dummies\t" + "\t".join(dummies))
    lines.append("Observations\t" + "\t".join(str(fits[n].n_obs) for n in names))
    lines.append("Nb. of countries\t" + "\t".join(str(len({k[0] for k in fits[n].row_keys})) for n in names))
    lines.append("*, ** and *** denote significance at the 10%, 5% and 1% level; "
                 "standard errors clustered by country in parentheses.")
    return "\n".join(lines) + "\n"
