"""Batch command line front end.

Every subcommand writes into a private staging directory next to ``--out``
and renames it into place only after all artifacts and the manifest are
complete. On failure the first stderr line is ``error: <class>`` and
nothing is promoted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .config import HEADLINE_OUTCOMES, OutcomeBinding, RunConfig, load_config
from .exceptions import ConfigError, DataError, TaylorLPError
from .kernels import BACKEND
from .localproj import (
    LPSpec,
    TransitionConfig,
    build_irf_table,
    country_means,
    estimate_lp,
    estimate_lp_regimed,
    irf_to_csv,
    irf_to_json,
    read_irf_csv,
)
from .panel import REGION_CODES, PanelDataset, count_years, gender_gap, load_csv, load_regions, to_csv
from .plot import PlotStyle, emit_irf_plot
from .shocks import attach_shocks, forecast_error_shocks, format_table_a1, pooled_taylor_fe, taylor_shocks
from .synthetic import DgpConfig, generate_panel, regions_csv, synthetic_regions

LP_ANALYSES = ("baseline", "with_growth", "with_labor_conditions", "alt_shocks")
SEX_ORDER = ("men", "women", "gap")


# -- helpers ------------------------------------------------------------------


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class Run:
    """Collects artifacts in a staging directory and the manifest contents."""

    def __init__(self, command: str, out: Path):
        self.command = command
        self.out = out
        self.stage = Path(tempfile.mkdtemp(prefix=f".{out.name}.staging-", dir=out.parent))
        self.manifest: dict = {
            "software": {"name": "taylorlp", "version": __version__, "kernel_backend": BACKEND},
            "command": command,
        }
        self.inputs: dict[str, Path] = {}
        self.checksums: dict[str, dict[str, str]] = {}

    def path(self, *parts) -> Path:
        p = self.stage.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write(self, rel: str, text: str) -> None:
        with open(self.path(*rel.split("/")), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)

    def add_input(self, role: str, path: Path) -> None:
        self.inputs[role] = path
        self.checksums[role] = {"path": str(path), "sha256_before": sha256(path)}

    def finish(self) -> None:
        for role, path in self.inputs.items():
            after = sha256(path)
            self.checksums[role]["sha256_after"] = after
            if after != self.checksums[role]["sha256_before"]:
                raise DataError(f"input {path} changed during the run")
        self.manifest["inputs"] = self.checksums
        files = sorted(p.relative_to(self.stage).as_posix() for p in self.stage.rglob("*") if p.is_file())
        self.manifest["artifacts"] = files
        self.write("manifest.json", json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        self._promote()

    def _promote(self) -> None:
        old = None
        if self.out.exists():
            if not self.out.is_dir():
                raise ConfigError(f"--out {self.out} exists and is not a directory")
            old = Path(tempfile.mkdtemp(prefix=f".{self.out.name}.old-", dir=self.out.parent))
            os.rmdir(old)
            os.replace(self.out, old)
        os.replace(self.stage, self.out)
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)

    def abort(self) -> None:
        shutil.rmtree(self.stage, ignore_errors=True)


def _load(run: Run, cfg: RunConfig) -> PanelDataset:
    if cfg.panel_path is None or not cfg.panel_path.is_file():
        raise ConfigError(f"panel file not found: {cfg.panel_path}")
    run.add_input("panel", cfg.panel_path)
    panel = load_csv(cfg.panel_path)
    missing = [c for c in cfg.columns() if c not in panel.data]
    if missing:
        raise ConfigError(f"unknown column(s) in bindings: {missing}; panel has {list(panel.variables)}")
    if cfg.regions_path is not None:
        if not cfg.regions_path.is_file():
            raise ConfigError(f"region file not found: {cfg.regions_path}")
        run.add_input("regions", cfg.regions_path)
        regions = load_regions(cfg.regions_path)
    else:
        regions = load_regions()
    run.manifest["config"] = cfg.raw
    return panel.with_regions(regions)


class Pipeline:
    def __init__(self, run: Run, cfg: RunConfig, panel: PanelDataset):
        self.run, self.cfg, self.panel = run, cfg, panel
        self.status = {c: None for c in panel.country_ids}
        self.samples: dict[str, dict] = {}
        self._shocked: dict[str, PanelDataset] = {}

    # shocks

    def shocked(self, kind: str = "baseline") -> PanelDataset:
        if kind in self._shocked:
            return self._shocked[kind]
        cfg = self.cfg
        series = (forecast_error_shocks if kind == "alt_shocks" else taylor_shocks)(self.panel, cfg.taylor)
        p = attach_shocks(self.panel, series)
        years = count_years(p, "shock")
        keep = [c for c in p.country_ids if years[c] >= cfg.min_years]
        for c in p.country_ids:
            if kind != "baseline":
                continue
            if c in series.skipped:
                self.status[c] = series.skipped[c]
            elif years[c] < cfg.min_years:
                self.status[c] = f"min_years: {years[c]} shock years < {cfg.min_years}"
        p = p.select_countries(keep)
        name = "shocks.csv" if kind == "baseline" else "shocks_forecast_error.csv"
        self.run.write(name, series.to_csv())
        if series.skipped:
            self.run.write(name.replace(".csv", "_skipped.txt"), series.diagnostics())
        self.samples[f"shocks/{kind}"] = {
            "countries_estimated": len(series.stats),
            "countries_kept": len(keep),
            "shock_observations": int(np.isfinite(p.column("shock")).sum()),
        }
        self._shocked[kind] = p
        return p

    def finish_countries(self) -> None:
        used = set()
        for kind, p in self._shocked.items():
            used |= set(p.country_ids)
        out = {}
        for c in self.panel.country_ids:
            if c in used:
                out[c] = {"status": "used"}
            else:
                out[c] = {"status": "skipped", "reason": self.status[c] or "not in any estimation sample"}
        self.run.manifest["countries"] = out
        self.run.manifest["samples"] = self.samples

    # local projections

    def _with_gap(self, p: PanelDataset, o: OutcomeBinding) -> tuple[PanelDataset, dict[str, str]]:
        gap = f"{o.name}__gap"
        if gap not in p.data:
            p = gender_gap(p, o.women, o.men, gap)
        return p, {"men": o.men, "women": o.women, "gap": gap}

    def _spec(self, outcome: str, controls) -> LPSpec:
        cfg = self.cfg
        return LPSpec(
            outcome=outcome,
            horizons=cfg.horizons,
            controls=tuple(controls),
            ci_level=cfg.ci_level,
            common_sample=cfg.common_sample,
        )

    def _emit(self, prefix: str, outcome: str, irfs: dict[str, list], title: str) -> None:
        """irfs maps sex -> list of ImpulseResponse (one per label)."""
        tables = []
        for sex in SEX_ORDER:
            rs = irfs[sex]
            table = build_irf_table(rs)
            self.run.write(f"{prefix}/{outcome}/{sex}.csv", irf_to_csv(table))
            self.run.write(f"{prefix}/{outcome}/{sex}.json", irf_to_json(table))
            for r in rs:
                self.samples.setdefault(f"{prefix}/{outcome}", {})[r.label] = {
                    str(h): (int(r.estimates[h].n_obs) if r.estimates[h] else 0) for h in r.horizons
                }
                if r.diagnostics:
                    self.samples[f"{prefix}/{outcome}"][r.label + ":diagnostics"] = list(r.diagnostics)
            tables.append(table)
        combined = pd.concat(tables, ignore_index=True)
        self.run.write(f"{prefix}/{outcome}/irf.svg", emit_irf_plot(combined, PlotStyle(title=f"{outcome}: {title}")))

    def linear(self, analysis: str, prefix: str | None = None, panel: PanelDataset | None = None) -> None:
        cfg = self.cfg
        prefix = prefix or analysis
        kind = "alt_shocks" if analysis == "alt_shocks" else "baseline"
        p = panel if panel is not None else self.shocked(kind)
        controls = []
        if analysis != "baseline":
            controls.append(cfg.growth)
        if analysis == "with_labor_conditions":
            if not cfg.labor_conditions:
                raise ConfigError("with_labor_conditions needs [lp] labor_conditions")
            controls += list(cfg.labor_conditions)
        for o in cfg.outcomes:
            q, cols = self._with_gap(p, o)
            irfs = {}
            for sex in SEX_ORDER:
                irfs[sex] = [estimate_lp(q, self._spec(cols[sex], controls), label=f"{o.name}:{sex}")]
            if analysis == "with_labor_conditions":
                ref = estimate_lp(q, self._spec(cols["women"], controls[:1]))
                full = {str(h): (int(ref.estimates[h].n_obs) if ref.estimates[h] else 0) for h in ref.horizons}
                cut = irfs["women"][0]
                self.samples.setdefault("sample_reduction", {})[o.name] = {
                    "with_growth_n_obs": full,
                    "with_labor_conditions_n_obs": {
                        str(h): (int(cut.estimates[h].n_obs) if cut.estimates[h] else 0) for h in cut.horizons
                    },
                }
            self._emit(prefix, o.name, irfs, prefix.replace("/", " "))

    def regimed(self, mode: str) -> None:
        cfg = self.cfg
        p = self.shocked()
        prefix = "regimed" if mode == "smooth_state" else "sign_split"
        outcomes = cfg.outcomes
        if mode == "smooth_state" and not cfg.regimed_all_outcomes:
            outcomes = tuple(o for o in outcomes if o.name in cfg.regimed_outcomes)
            if not outcomes:
                raise ConfigError(
                    f"no configured outcome is eligible for the regimed analysis; eligible: {list(cfg.regimed_outcomes)}"
                )
        if mode == "smooth_state":
            tc = TransitionConfig(eta=cfg.eta, state_values=country_means(p, cfg.growth))
        else:
            tc = TransitionConfig(eta=cfg.eta, mode="sign_dummy")
        for o in outcomes:
            q, cols = self._with_gap(p, o)
            irfs = {}
            for sex in SEX_ORDER:
                a, b = estimate_lp_regimed(q, self._spec(cols[sex], [cfg.growth]), tc, label=f"{o.name}:{sex}")
                irfs[sex] = [a, b]
            self._emit(prefix, o.name, irfs, prefix.replace("_", " "))

    def by_region(self) -> None:
        p = self.shocked()
        regions = p.regions or {}
        unassigned = [c for c in p.country_ids if c not in regions]
        for c in unassigned:
            self.samples.setdefault("by_region/unassigned", []).append(c)
        present = [r for r in REGION_CODES if any(regions.get(c) == r for c in p.country_ids)]
        for r in present:
            sub = p.select_countries(c for c in p.country_ids if regions.get(c) == r)
            self.samples[f"by_region/{r}/countries"] = list(sub.country_ids)
            self.linear("with_growth", prefix=f"by_region/{r}", panel=sub)


# -- subcommands ---------------------------------------------------------------


def _cfg(args, require_inputs=True) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required")
    return load_config(args.config, require_inputs=require_inputs)


def _check_outcomes(cfg: RunConfig) -> None:
    if not cfg.outcomes:
        raise ConfigError("[outcomes] must bind at least one outcome")


def cmd_shocks(run: Run, args) -> None:
    cfg = _cfg(args)
    pipe = Pipeline(run, cfg, _load(run, cfg))
    pipe.shocked()
    if "alt_shocks" in cfg.analyses:
        pipe.shocked("alt_shocks")
    fit = pooled_taylor_fe(pipe.panel, cfg.taylor)
    fit_t = pooled_taylor_fe(pipe.panel, cfg.taylor, time_dummies=True)
    run.write("table_a1.txt", format_table_a1({"(1)": fit, "(2)": fit_t}))
    pipe.finish_countries()


def cmd_lp(run: Run, args) -> None:
    cfg = _cfg(args)
    _check_outcomes(cfg)
    pipe = Pipeline(run, cfg, _load(run, cfg))
    selected = [a for a in cfg.analyses if a in LP_ANALYSES] or ["baseline"]
    for a in selected:
        pipe.linear(a)
    run.manifest["analyses"] = selected
    pipe.finish_countries()


def cmd_regimed(run: Run, args, mode="smooth_state") -> None:
    cfg = _cfg(args)
    _check_outcomes(cfg)
    pipe = Pipeline(run, cfg, _load(run, cfg))
    pipe.regimed(mode)
    run.manifest["analyses"] = ["regimed" if mode == "smooth_state" else "sign_split"]
    pipe.finish_countries()


def cmd_signsplit(run: Run, args) -> None:
    cmd_regimed(run, args, mode="sign_dummy")


def cmd_regions(run: Run, args) -> None:
    cfg = _cfg(args)
    _check_outcomes(cfg)
    pipe = Pipeline(run, cfg, _load(run, cfg))
    pipe.by_region()
    run.manifest["analyses"] = ["by_region"]
    pipe.finish_countries()


_SYNTH_KEYS = {
    "n_countries": int,
    "n_years": int,
    "start_year": int,
    "seed": int,
    "missing_rate": float,
    "rule_noise_sd": float,
    "outcome_noise_sd": float,
}


def cmd_synth(run: Run, args) -> None:
    opts = {}
    if args.config is not None:
        cfg = load_config(args.config, require_inputs=False)
        run.manifest["config"] = cfg.raw
        for k, v in cfg.synth.items():
            if k not in _SYNTH_KEYS:
                raise ConfigError(f"[synth] unknown key {k!r}; known: {sorted(_SYNTH_KEYS)}")
            try:
                opts[k] = _SYNTH_KEYS[k](v)
            except ValueError:
                raise ConfigError(f"[synth] {k} must be {_SYNTH_KEYS[k].__name__}, got {v!r}") from None
    if args.seed is not None:
        opts["seed"] = args.seed
    try:
        dgp = DgpConfig(**opts)
    except DataError as exc:
        raise ConfigError(str(exc)) from None
    panel, truth = generate_panel(dgp)
    run.write("panel.csv", to_csv(panel))
    run.write("regions.csv", regions_csv(synthetic_regions(panel)))
    run.write("truth.json", truth.to_json())
    run.write(
        "config.ini",
        "[inputs]\npanel = panel.csv\nregions = regions.csv\n\n"
        "[taylor]\ninterest_rate = i\ngdp_growth = g\ngdp_growth_forecast = g_f\n"
        "inflation = pi\ninflation_forecast = pi_f\nreserves_change = f\n\n"
        f"[outcomes]\n{HEADLINE_OUTCOMES[0]} = emp_men, emp_women\n\n"
        "[lp]\nhorizons = 0-5\nci_level = 0.90\n\n[run]\nanalyses = baseline\n",
    )
    run.manifest["synthetic"] = {"seed": dgp.seed, "n_countries": dgp.n_countries, "n_years": dgp.n_years}
    run.manifest["countries"] = {c: {"status": "generated"} for c in panel.country_ids}


def cmd_plot(run: Run, args) -> None:
    cfg = _cfg(args, require_inputs=False)
    run.manifest["config"] = cfg.raw
    if cfg.plot_table is None or not cfg.plot_table.is_file():
        raise ConfigError(f"[plot] table not found: {cfg.plot_table}")
    run.add_input("table", cfg.plot_table)
    table = read_irf_csv(cfg.plot_table)
    run.write("irf.svg", emit_irf_plot(table, PlotStyle(title=cfg.plot_title)))


COMMANDS = {
    "shocks": cmd_shocks,
    "lp": cmd_lp,
    "regimed": cmd_regimed,
    "signsplit": cmd_signsplit,
    "regions": cmd_regions,
    "synth": cmd_synth,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="taylorlp", description="Taylor-rule shocks and local projections.")
    ap.add_argument("--version", action="version", version=f"taylorlp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "synth")
        sp.add_argument("--out", type=Path, required=True)
        if name == "synth":
            sp.add_argument("--seed", type=int)
    return ap


def _error(kind: str, msg: str) -> int:
    print(f"error: {kind}", file=sys.stderr)
    print(msg, file=sys.stderr)
    return 2 if kind == "config_error" else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out.resolve()
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        run = Run(args.command, out)
    except OSError as exc:
        return _error("config_error", f"cannot prepare output directory {out}: {exc}")
    try:
        COMMANDS[args.command](run, args)
        run.finish()
    except TaylorLPError as exc:
        run.abort()
        return _error(exc.kind, str(exc))
    except OSError as exc:
        run.abort()
        return _error("io_error", str(exc))
    except BaseException:
        run.abort()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
