"""Seeded data-generating processes with planted Taylor rules and responses.

Draw order (part of the reproducibility contract), all from one
:class:`~taylorlp.rng.Xoshiro256` stream:

1. year effects for women's then men's outcome, ``n_years`` normals each;
2. per country, in order: offsets for mean growth, inflation and reserve
   change, outcome effects for women and men (5 normals); innovations for
   growth, inflation and reserves, forecast noise for growth and inflation,
   and the unit policy shocks (``burn_in + n_years + 2`` normals each, in
   that order); outcome noise for women then men (``n_years`` normals each);
3. one uniform per (row, variable) in row-major registry order, used only
   when ``missing_rate > 0``.

Exogenous series are AR(1) around a country mean with persistence
``persistence``. Forecasts are realizations plus independent noise. The
interest rate follows the augmented rule with shock ``rule_noise_sd * u``,
and outcomes load on the lagged unit shocks ``u``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .exceptions import DataError
from .localproj import normalize_state, transition_weight
from .panel import REGION_CODES, PanelDataset
from .rng import Xoshiro256

# Intercept then the six slopes in rule order.
DEFAULT_ALPHAS = (1.352, -0.0344, 0.125, 0.0253, 0.0204, -0.0073, -0.185)
DEFAULT_IRF = {0: 0.1, 1: 0.3, 2: 0.5, 3: 0.4, 4: 0.2, 5: 0.0}

VARIABLES = ("i", "g", "g_f", "pi", "pi_f", "f", "emp_women", "emp_men")
UNITS = {
    "i": "percent",
    "g": "percent",
    "g_f": "percent",
    "pi": "percent",
    "pi_f": "percent",
    "f": "percent",
    "emp_women": "percent",
    "emp_men": "percent",
}


@dataclass(frozen=True)
class RegimeSplit:
    beta_low: Mapping[int, float]
    beta_high: Mapping[int, float]
    # difference in mean growth between high- and low-state countries
    state_gap: float = 6.0
    eta: float = 1.5


@dataclass(frozen=True)
class DgpConfig:
    n_countries: int = 99
    n_years: int = 13
    start_year: int = 2009
    taylor_alphas: Sequence[float] = DEFAULT_ALPHAS
    true_irf: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_IRF))
    men_irf: Mapping[int, float] | None = None
    rule_noise_sd: float = 0.72
    outcome_noise_sd: float = 0.5
    missing_rate: float = 0.0
    regime_split: RegimeSplit | None = None
    seed: int = 0
    burn_in: int = 30
    persistence: float = 0.5
    growth_mean: float = 3.03
    growth_sd: float = 3.0
    inflation_mean: float = 5.67
    inflation_sd: float = 3.0
    reserves_mean: float = 7.36
    reserves_sd: float = 15.0
    country_mean_sd: float = 1.5
    forecast_noise_sd: float = 1.0
    women_level: float = 46.18
    men_level: float = 67.43
    country_effect_sd: float = 10.0
    year_effect_sd: float = 0.5

    def __post_init__(self):
        if self.n_countries < 2:
            raise DataError("n_countries must be at least 2")
        hmax = max(self.true_irf) if self.true_irf else 0
        if self.n_years < 8 + hmax:
            raise DataError(f"n_years must be at least 8 + max horizon ({8 + hmax})")
        if not 0 <= self.missing_rate < 0.5:
            raise DataError("missing_rate must lie in [0, 0.5)")
        if len(self.taylor_alphas) != 7:
            raise DataError("taylor_alphas needs 7 entries (intercept + 6 slopes)")
        if self.rule_noise_sd < 0 or self.outcome_noise_sd < 0:
            raise DataError("noise standard deviations must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise DataError("seed must be a 64-bit unsigned integer")
        if self.regime_split is not None and self.n_countries < 2:
            raise DataError("regime split needs at least 2 countries")


@dataclass
class GroundTruth:
    alphas: dict[str, float]
    irf_women: dict[int, float]
    irf_men: dict[int, float]
    shocks: dict[tuple[str, int], float]
    country_effects: dict[str, dict[str, float]]
    year_effects: dict[int, dict[str, float]]
    state_values: dict[str, float] = field(default_factory=dict)
    regime_weights: dict[str, float] = field(default_factory=dict)
    regime_irf: dict[str, dict[int, float]] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def shock_series(self, panel: PanelDataset | None = None):
        """Planted unit shocks as a ShockSeries (standardized == raw)."""
        from .shocks import CountryStats, ShockSeries

        items = list(self.shocks.items())
        if panel is not None:
            items = [(k, v) for k, v in items if _has_row(panel, k)]
        keys = tuple(k for k, _ in items)
        vals = np.array([v for _, v in items])
        stats = {}
        for c in dict.fromkeys(k[0] for k in keys):
            z = np.array([v for k, v in items if k[0] == c])
            stats[c] = CountryStats(float(z.mean()), float(z.std(ddof=1)) if z.size > 1 else float("nan"), z.size)
        return ShockSeries(keys, vals.copy(), vals.copy(), stats, {}, {"specification": "planted"})

    def to_json(self, target=None) -> str:
        doc = {
            "alphas": self.alphas,
            "irf_women": {str(h): v for h, v in self.irf_women.items()},
            "irf_men": {str(h): v for h, v in self.irf_men.items()},
            "regime_irf": {k: {str(h): v for h, v in p.items()} for k, p in self.regime_irf.items()},
            "state_values": self.state_values,
            "regime_weights": self.regime_weights,
            "country_effects": self.country_effects,
            "year_effects": {str(y): v for y, v in self.year_effects.items()},
            "shocks": [[c, y, v] for (c, y), v in self.shocks.items()],
            "config": self.config,
        }
        text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
        if target is not None:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _has_row(panel, key):
    try:
        panel.row_index(*key)
        return True
    except DataError:
        return False


def country_name(c: int) -> str:
    return f"C{c:03d}"


def _ar1(rng: Xoshiro256, mean: float, sd: float, rho: float, n: int) -> np.ndarray:
    e = rng.normal(n)
    x = np.empty(n)
    prev = mean
    for t in range(n):
        prev = mean + rho * (prev - mean) + sd * e[t]
        x[t] = prev
    return x


def generate_panel(config: DgpConfig) -> tuple[PanelDataset, GroundTruth]:
    cfg = config
    rng = Xoshiro256(cfg.seed)
    T, B = cfg.n_years, cfg.burn_in
    P = B + T + 1
    a = np.asarray(cfg.taylor_alphas, dtype=np.float64)
    horizons = sorted(cfg.true_irf)
    irf_w = {h: float(cfg.true_irf[h]) for h in horizons}
    irf_m = {h: float((cfg.men_irf or {}).get(h, 0.0)) for h in horizons}

    ye_w = cfg.year_effect_sd * rng.normal(T)
    ye_m = cfg.year_effect_sd * rng.normal(T)
    years = [cfg.start_year + t for t in range(T)]

    names = [country_name(c) for c in range(cfg.n_countries)]
    state_values: dict[str, float] = {}
    weights: dict[str, float] = {}
    regime_irf: dict[str, dict[int, float]] = {}
    if cfg.regime_split is not None:
        rs = cfg.regime_split
        # alternate low/high; planted state is the country's mean growth
        planted = {n: cfg.growth_mean + (rs.state_gap / 2 if c % 2 else -rs.state_gap / 2)
                   for c, n in enumerate(names)}
        z = normalize_state(planted)
        weights = {n: transition_weight(z[n], rs.eta) for n in names}
        regime_irf = {
            "low_state": {h: float(rs.beta_low.get(h, 0.0)) for h in horizons},
            "high_state": {h: float(rs.beta_high.get(h, 0.0)) for h in horizons},
        }

    keys = []
    cols = {v: [] for v in VARIABLES}
    shocks: dict[tuple[str, int], float] = {}
    ceffects: dict[str, dict[str, float]] = {}
    for c, name in enumerate(names):
        off = rng.normal(5)
        g_mean = cfg.growth_mean + cfg.country_mean_sd * off[0]
        if cfg.regime_split is not None:
            g_mean = planted[name] + 0.25 * cfg.country_mean_sd * off[0]
            state_values[name] = planted[name]
        pi_mean = cfg.inflation_mean + cfg.country_mean_sd * off[1]
        f_mean = cfg.reserves_mean + cfg.country_mean_sd * off[2]
        fe_w = cfg.women_level + cfg.country_effect_sd * off[3]
        fe_m = cfg.men_level + cfg.country_effect_sd * off[4]
        ceffects[name] = {"emp_women": float(fe_w), "emp_men": float(fe_m),
                          "growth_mean": float(g_mean)}

        g = _ar1(rng, g_mean, cfg.growth_sd, cfg.persistence, P + 1)
        pi = _ar1(rng, pi_mean, cfg.inflation_sd, cfg.persistence, P + 1)
        f = _ar1(rng, f_mean, cfg.reserves_sd, cfg.persistence, P + 1)
        g_f = g + cfg.forecast_noise_sd * rng.normal(P + 1)
        pi_f = pi + cfg.forecast_noise_sd * rng.normal(P + 1)
        u = rng.normal(P + 1)
        nw = cfg.outcome_noise_sd * rng.normal(T)
        nm = cfg.outcome_noise_sd * rng.normal(T)

        # steady state of the rule at the country means
        lvl = -(a[0] + (a[1] + a[3]) * g_mean + (a[2] + a[4]) * pi_mean + a[5] * f_mean) / a[6] \
            if a[6] != 0 else 10.0
        i = np.empty(P + 1)
        i[0] = lvl
        for t in range(1, P):
            di = (a[0] + a[1] * g_f[t + 1] + a[2] * pi_f[t + 1] + a[3] * g[t - 1] + a[4] * pi[t - 1]
                  + a[5] * f[t - 1] + a[6] * i[t - 1] + cfg.rule_noise_sd * u[t])
            i[t] = i[t - 1] + di
        i[P] = np.nan

        if cfg.regime_split is not None:
            w = weights[name]
            resp_w = {h: w * regime_irf["low_state"][h] + (1 - w) * regime_irf["high_state"][h] for h in horizons}
        else:
            resp_w = irf_w
        for t in range(T):
            s = B + t
            yw = fe_w + ye_w[t] + nw[t]
            ym = fe_m + ye_m[t] + nm[t]
            for h in horizons:
                # outcome at s responds to the shock dated s - 1 - h
                yw += resp_w[h] * u[s - 1 - h]
                ym += irf_m[h] * u[s - 1 - h]
            keys.append((name, years[t]))
            for var, val in zip(VARIABLES, (i[s], g[s], g_f[s], pi[s], pi_f[s], f[s], yw, ym)):
                cols[var].append(float(val))
            shocks[(name, years[t])] = float(u[s])

    data = {v: np.array(cols[v]) for v in VARIABLES}
    if cfg.missing_rate > 0:
        n = len(keys)
        draws = rng.uniform(n * len(VARIABLES)).reshape(n, len(VARIABLES))
        for j, v in enumerate(VARIABLES):
            data[v] = np.where(draws[:, j] < cfg.missing_rate, np.nan, data[v])

    panel = PanelDataset(tuple(keys), data, dict(UNITS))
    labels = ("const", "forecast_gdp_growth", "forecast_inflation", "lagged_gdp_growth",
              "lagged_inflation", "lagged_reserves_change", "lagged_interest_rate")
    truth = GroundTruth(
        alphas={k: float(v) for k, v in zip(labels, a)},
        irf_women=irf_w,
        irf_men=irf_m,
        shocks=shocks,
        country_effects=ceffects,
        year_effects={y: {"emp_women": float(w), "emp_men": float(m)} for y, w, m in zip(years, ye_w, ye_m)},
        state_values=state_values,
        regime_weights=weights,
        regime_irf=regime_irf,
        config=_config_echo(cfg),
    )
    return panel, truth


def _config_echo(cfg: DgpConfig) -> dict:
    d = asdict(cfg)
    d["taylor_alphas"] = list(cfg.taylor_alphas)
    d["true_irf"] = {str(h): v for h, v in cfg.true_irf.items()}
    if cfg.men_irf is not None:
        d["men_irf"] = {str(h): v for h, v in cfg.men_irf.items()}
    if cfg.regime_split is not None:
        d["regime_split"] = {
            "beta_low": {str(h): v for h, v in cfg.regime_split.beta_low.items()},
            "beta_high": {str(h): v for h, v in cfg.regime_split.beta_high.items()},
            "state_gap": cfg.regime_split.state_gap,
            "eta": cfg.regime_split.eta,
        }
    return d


def synthetic_regions(panel: PanelDataset) -> dict[str, str]:
    """Round-robin region codes for synthetic countries."""
    return {c: REGION_CODES[k % len(REGION_CODES)] for k, c in enumerate(panel.country_ids)}


def regions_csv(regions: Mapping[str, str]) -> str:
    return "country,region\n" + "".join(f"{c},{r}\n" for c, r in regions.items())
