"""Run configuration: an INI-style file with sections.

Example::

    [inputs]
    panel = panel.csv            ; relative to this file
    regions = regions.csv        ; optional, defaults to the bundled list

    [taylor]
    interest_rate = i
    gdp_growth = g
    gdp_growth_forecast = g_f
    inflation = pi
    inflation_forecast = pi_f
    reserves_change = f
    min_obs = 8
    min_years = 5

    [outcomes]
    ; name = men column, women column
    employment_15plus = emp_men, emp_women

    [lp]
    horizons = 0-5
    ci_level = 0.90
    growth = g
    labor_conditions = bargaining, pay_gap, informal
    eta = 1.5
    common_sample = false
    regimed_outcomes = employment_15plus, employment_youth, participation, unemployment
    regimed_all_outcomes = false

    [run]
    analyses = baseline, with_growth

    [synth]
    n_countries = 99
    n_years = 13
    seed = 0
    missing_rate = 0.0

    [plot]
    table = results/baseline/employment_15plus/women.csv

Environment variables are never consulted.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError
from .shocks import TaylorSpec

ANALYSES = ("baseline", "with_growth", "with_labor_conditions", "regimed", "sign_split", "by_region", "alt_shocks")
HEADLINE_OUTCOMES = ("employment_15plus", "employment_youth", "participation", "unemployment")


@dataclass(frozen=True)
class OutcomeBinding:
    name: str
    men: str
    women: str


@dataclass(frozen=True)
class RunConfig:
    panel_path: Path | None
    regions_path: Path | None
    taylor: TaylorSpec | None
    outcomes: tuple[OutcomeBinding, ...]
    horizons: tuple[int, ...] = tuple(range(6))
    ci_level: float = 0.90
    growth: str | None = None
    labor_conditions: tuple[str, ...] = ()
    eta: float = 1.5
    common_sample: bool = False
    regimed_outcomes: tuple[str, ...] = HEADLINE_OUTCOMES
    regimed_all_outcomes: bool = False
    min_years: int = 5
    analyses: tuple[str, ...] = ("baseline",)
    synth: dict = field(default_factory=dict)
    plot_table: Path | None = None
    plot_title: str | None = None
    source: Path | None = None
    raw: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = list(self.taylor.columns().values()) if self.taylor else []
        for o in self.outcomes:
            cols += [o.men, o.women]
        if self.growth:
            cols.append(self.growth)
        cols += list(self.labor_conditions)
        return list(dict.fromkeys(cols))


def _list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.replace("\n", ",").split(",") if x.strip())


def _horizons(text: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        if "-" in text and "," not in text:
            a, b = text.split("-")
            return tuple(range(int(a), int(b) + 1))
        return tuple(int(x) for x in _list(text))
    except ValueError:
        raise ConfigError(f"cannot parse horizons {text!r}") from None


def _bool(sec, key, default):
    try:
        return sec.getboolean(key, fallback=default)
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} must be a boolean") from None


def _num(sec, key, default, kind=float):
    if key not in sec:
        return default
    try:
        return kind(sec[key])
    except ValueError:
        raise ConfigError(f"[{sec.name}] {key} must be {kind.__name__}, got {sec[key]!r}") from None


def load_config(path, *, require_inputs: bool = True) -> RunConfig:
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    base = path.parent

    def rel(p):
        return (base / p).resolve() if p else None

    inputs = cp["inputs"] if cp.has_section("inputs") else {}
    panel_path = rel(inputs.get("panel"))
    if require_inputs and panel_path is None:
        raise ConfigError("[inputs] panel is required")
    regions_path = rel(inputs.get("regions"))

    taylor = None
    min_years = 5
    if cp.has_section("taylor"):
        t = cp["taylor"]
        roles = ("interest_rate", "gdp_growth", "gdp_growth_forecast", "inflation", "inflation_forecast", "reserves_change")
        missing = [r for r in roles if r not in t]
        if missing:
            raise ConfigError(f"[taylor] missing bindings: {missing}")
        try:
            taylor = TaylorSpec(**{r: t[r].strip() for r in roles}, min_obs=_num(t, "min_obs", 8, int))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        min_years = _num(t, "min_years", 5, int)
    elif require_inputs:
        raise ConfigError("[taylor] section is required")

    outcomes = []
    if cp.has_section("outcomes"):
        for name, val in cp["outcomes"].items():
            cols = _list(val)
            if len(cols) != 2:
                raise ConfigError(f"[outcomes] {name} needs 'men_column, women_column'")
            outcomes.append(OutcomeBinding(name, cols[0], cols[1]))

    lp = cp["lp"] if cp.has_section("lp") else None
    kw = {}
    if lp is not None:
        if "horizons" in lp:
            kw["horizons"] = _horizons(lp["horizons"])
        kw["ci_level"] = _num(lp, "ci_level", 0.90)
        if not 0 < kw["ci_level"] < 1:
            raise ConfigError("[lp] ci_level must lie in (0, 1)")
        kw["growth"] = lp.get("growth", "").strip() or None
        kw["labor_conditions"] = _list(lp.get("labor_conditions", ""))
        kw["eta"] = _num(lp, "eta", 1.5)
        if not kw["eta"] > 0:
            raise ConfigError("[lp] eta must be positive")
        kw["common_sample"] = _bool(lp, "common_sample", False)
        if "regimed_outcomes" in lp:
            kw["regimed_outcomes"] = _list(lp["regimed_outcomes"])
        kw["regimed_all_outcomes"] = _bool(lp, "regimed_all_outcomes", False)
    if kw.get("growth") is None and taylor is not None:
        kw["growth"] = taylor.gdp_growth

    analyses = ("baseline",)
    if cp.has_section("run") and "analyses" in cp["run"]:
        analyses = _list(cp["run"]["analyses"])
        bad = [a for a in analyses if a not in ANALYSES]
        if bad or not analyses:
            raise ConfigError(f"[run] unknown or empty analyses: {bad}; choose from {ANALYSES}")

    synth = dict(cp["synth"]) if cp.has_section("synth") else {}
    plot = cp["plot"] if cp.has_section("plot") else {}

    raw = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(
        panel_path=panel_path,
        regions_path=regions_path,
        taylor=taylor,
        outcomes=tuple(outcomes),
        min_years=min_years,
        analyses=analyses,
        synth=synth,
        plot_table=rel(plot.get("table")),
        plot_title=plot.get("title"),
        source=path,
        raw=raw,
        **kw,
    )
