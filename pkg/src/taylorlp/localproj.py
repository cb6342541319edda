"""Horizon-by-horizon fixed-effects local projections.

For each horizon ``h`` the outcome at ``t + h`` is regressed on the shock
dated ``t - 1``, the outcome at ``t - 1`` and any controls at ``t - 1``,
with country and year fixed effects. Regime variants split the shock
coefficient with a logistic weight in a country-level state, or with a
positive-shock indicator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .exceptions import DataError, EstimationError
from .panel import PanelDataset, format_real
from .regress import (
    RegressionFit,
    cluster_robust_cov,
    confidence_interval,
    country_clusters,
    ols,
    within_twoway,
)

IRF_FIELDS = ("label", "horizon", "beta", "se", "ci_low", "ci_high", "n_obs", "n_countries")


@dataclass(frozen=True)
class LPSpec:
    outcome: str
    shock: str = "shock"
    horizons: Sequence[int] = tuple(range(6))
    controls: Sequence[str] = ()
    include_lagged_outcome: bool = True
    cluster_by: str = "country"
    ci_level: float = 0.90
    country_fe: bool = True
    time_fe: bool = True
    # restrict every horizon to rows complete at the longest horizon
    common_sample: bool = False

    def __post_init__(self):
        hs = tuple(sorted({int(h) for h in self.horizons}))
        if not hs:
            raise DataError("horizons must be nonempty")
        if hs[0] < 0 or hs[-1] > 10:
            raise DataError(f"horizons must lie in 0..10, got {hs}")
        if not 0 < self.ci_level < 1:
            raise DataError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.cluster_by != "country":
            raise DataError(f"only country clustering is supported, got {self.cluster_by!r}")
        object.__setattr__(self, "horizons", hs)
        object.__setattr__(self, "controls", tuple(self.controls))


@dataclass(frozen=True)
class HorizonEstimate:
    horizon: int
    beta: float
    se: float
    ci_low: float
    ci_high: float
    n_obs: int
    n_countries: int


@dataclass(eq=False)
class ImpulseResponse:
    label: str
    horizons: tuple[int, ...]
    estimates: dict[int, HorizonEstimate | None]
    diagnostics: list[str] = field(default_factory=list)
    fits: dict[int, RegressionFit] = field(default_factory=dict, repr=False)

    def _get(self, attr):
        return np.array([getattr(self.estimates[h], attr) if self.estimates[h] else np.nan for h in self.horizons])

    @property
    def beta(self) -> np.ndarray:
        return self._get("beta")

    @property
    def se(self) -> np.ndarray:
        return self._get("se")

    @property
    def n_obs(self) -> np.ndarray:
        return self._get("n_obs")

    def present(self) -> list[int]:
        return [h for h in self.horizons if self.estimates[h] is not None]


@dataclass(frozen=True)
class TransitionConfig:
    eta: float = 1.5
    state_values: Mapping[str, float] = field(default_factory=dict)
    mode: str = "smooth_state"

    def __post_init__(self):
        if not self.eta > 0:
            raise DataError(f"eta must be positive, got {self.eta}")
        if self.mode not in ("smooth_state", "sign_dummy"):
            raise DataError(f"unknown transition mode {self.mode!r}")
        if self.mode == "smooth_state" and not self.state_values:
            raise DataError("smooth_state mode needs country state values")


def transition_weight(z, eta: float = 1.5):
    """Logistic regime weight ``exp(-eta z) / (1 + exp(-eta z))``.

    Evaluated as ``e / (1 + e)`` or ``1 / (1 + e)`` with ``e = exp(-eta |z|)``
    so no exponent is ever positive.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    za = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(za)):
        raise ValueError("transition_weight needs finite z")
    a = eta * za
    e = np.exp(-np.abs(a))
    out = np.where(a >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def normalize_state(country_means: Mapping[str, float]) -> dict[str, float]:
    if len(country_means) < 2:
        raise DataError("state normalization needs at least 2 countries")
    x = np.array([float(v) for v in country_means.values()])
    if not np.all(np.isfinite(x)):
        raise DataError("state values must be finite")
    sd = float(np.std(x, ddof=1))
    if not sd > 0:
        raise DataError("state values have zero cross-country variance")
    z = (x - x.mean()) / sd
    return {c: float(v) for c, v in zip(country_means, z)}


def country_means(panel: PanelDataset, var: str) -> dict[str, float]:
    col = panel.column(var)
    out = {}
    for code, c in enumerate(panel.country_ids):
        v = col[(panel.country_codes == code) & np.isfinite(col)]
        if v.size:
            out[c] = float(v.mean())
    return out


# -- estimation -----------------------------------------------------------------


def _regressors(panel: PanelDataset, spec: LPSpec) -> dict[str, np.ndarray]:
    cols = {}
    if spec.include_lagged_outcome:
        cols["lagged_outcome"] = panel.shifted(spec.outcome, 1)
    for c in spec.controls:
        cols[f"{c}_lag1"] = panel.shifted(c, 1)
    return cols


def _horizon_mask(panel: PanelDataset, spec: LPSpec) -> np.ndarray | None:
    if not spec.common_sample:
        return None
    return np.isfinite(panel.shifted(spec.outcome, -max(spec.horizons)))


def _estimate(panel, spec, impulses: dict[str, np.ndarray], labels: dict[str, str]):
    """Shared horizon loop; ``impulses`` maps regressor name -> column."""
    for name in (spec.outcome, spec.shock, *spec.controls):
        panel.column(name)
    controls = _regressors(panel, spec)
    mask = _horizon_mask(panel, spec)
    out = {name: ImpulseResponse(labels[name], spec.horizons, {}) for name in impulses}
    for h in spec.horizons:
        y = panel.shifted(spec.outcome, -h)
        base = np.isfinite(y)
        for v in (*impulses.values(), *controls.values()):
            base &= np.isfinite(v)
        if mask is not None:
            base &= mask
        active = {}
        for name, col in impulses.items():
            if base.any() and np.all(col[base] == 0):
                out[name].diagnostics.append(f"h={h}: regressor {name} is identically zero in sample; path absent")
            else:
                active[name] = col
        if not base.any() or not active:
            for name in impulses:
                out[name].estimates[h] = None
            if not base.any():
                for r in out.values():
                    r.diagnostics.append(f"h={h}: empty estimation sample")
            continue
        try:
            design, yv = within_twoway(
                panel, y, {**active, **controls}, country_fe=spec.country_fe, time_fe=spec.time_fe, mask=base
            )
            fit = ols(design, yv, intercept=False)
            fit = fit.with_covariance(cluster_robust_cov(fit, country_clusters(fit)), "cluster_country")
        except EstimationError as exc:
            for name in impulses:
                out[name].estimates[h] = None
                out[name].diagnostics.append(f"h={h}: {exc}")
            continue
        n_c = len({k[0] for k in fit.row_keys})
        for name in impulses:
            if name not in active:
                out[name].estimates[h] = None
                continue
            j = fit.index(name)
            lo, hi = confidence_interval(fit, fit.covariance, j, spec.ci_level)
            out[name].estimates[h] = HorizonEstimate(
                h, float(fit.coefficients[j]), float(math.sqrt(fit.covariance[j, j])), lo, hi, fit.n_obs, n_c
            )
            out[name].fits[h] = fit
    if all(e is None for r in out.values() for e in r.estimates.values()):
        raise EstimationError("no horizon could be estimated: " + "; ".join(next(iter(out.values())).diagnostics))
    return out


def estimate_lp(panel: PanelDataset, spec: LPSpec, label: str | None = None) -> ImpulseResponse:
    shock = panel.shifted(spec.shock, 1)
    res = _estimate(panel, spec, {"shock": shock}, {"shock": label or spec.outcome})
    return res["shock"]


REGIME_LABELS = {
    "smooth_state": ("low_state", "high_state"),
    "sign_dummy": ("positive_shock", "negative_shock"),
}


def regime_weights(panel: PanelDataset, spec: LPSpec, tconfig: TransitionConfig) -> np.ndarray:
    """Row-aligned weight G used to split the lagged shock."""
    shock = panel.shifted(spec.shock, 1)
    if tconfig.mode == "sign_dummy":
        return np.where(np.isfinite(shock), (shock > 0).astype(np.float64), np.nan)
    in_sample = {k[0] for k, s in zip(panel.keys, shock) if np.isfinite(s)}
    missing = sorted(in_sample - set(tconfig.state_values))
    if missing:
        raise DataError(f"countries without a state value: {missing}")
    z = normalize_state(tconfig.state_values)
    g = {c: transition_weight(v, tconfig.eta) for c, v in z.items()}
    return np.array([g.get(k[0], np.nan) for k in panel.keys])


def estimate_lp_regimed(panel: PanelDataset, spec: LPSpec, tconfig: TransitionConfig, label: str | None = None):
    """Return ``(irf_on_shock_times_G, irf_on_shock_times_one_minus_G)``.

    In smooth-state mode G falls with the normalized state, so the first
    path weights below-average (low-state) countries. In sign-dummy mode G
    is one for strictly positive lagged shocks.
    """
    shock = panel.shifted(spec.shock, 1)
    g = regime_weights(panel, spec, tconfig)
    lo_lab, hi_lab = REGIME_LABELS[tconfig.mode]
    base = label or spec.outcome
    impulses = {"shock_G": shock * g, "shock_1mG": shock * (1.0 - g)}
    labels = {"shock_G": f"{base}:{lo_lab}", "shock_1mG": f"{base}:{hi_lab}"}
    res = _estimate(panel, spec, impulses, labels)
    return res["shock_G"], res["shock_1mG"]


# -- tables and export ----------------------------------------------------------


def build_irf_table(irfs, labels: Sequence[str] | None = None) -> pd.DataFrame:
    """Long-format table, one row per (label, present horizon)."""
    if isinstance(irfs, ImpulseResponse):
        irfs = [irfs]
    irfs = list(irfs)
    if not irfs:
        raise DataError("no impulse responses given")
    labels = list(labels) if labels is not None else [r.label for r in irfs]
    if len(labels) != len(irfs):
        raise DataError("one label per impulse response required")
    hs = irfs[0].horizons
    if any(r.horizons != hs for r in irfs):
        raise DataError("impulse responses have mismatched horizon ranges")
    rows = []
    for lab, r in zip(labels, irfs):
        for h in r.horizons:
            e = r.estimates.get(h)
            if e is None:
                continue
            rows.append((lab, h, e.beta, e.se, e.ci_low, e.ci_high, e.n_obs, e.n_countries))
    df = pd.DataFrame(rows, columns=list(IRF_FIELDS))
    return df.astype({"horizon": "int64", "n_obs": "int64", "n_countries": "int64"})


def irf_to_csv(table: pd.DataFrame, target=None) -> str:
    lines = [",".join(IRF_FIELDS)]
    for rec in table.itertuples(index=False):
        cells = [str(rec.label), str(int(rec.horizon))]
        cells += [format_real(v) for v in (rec.beta, rec.se, rec.ci_low, rec.ci_high)]
        cells += [str(int(rec.n_obs)), str(int(rec.n_countries))]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if target is not None:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def irf_to_json(table: pd.DataFrame, target=None) -> str:
    recs = []
    for rec in table.itertuples(index=False):
        recs.append(
            {
                "label": str(rec.label),
                "horizon": int(rec.horizon),
                "beta": float(rec.beta),
                "se": float(rec.se),
                "ci_low": float(rec.ci_low),
                "ci_high": float(rec.ci_high),
                "n_obs": int(rec.n_obs),
                "n_countries": int(rec.n_countries),
            }
        )
    text = json.dumps(recs, indent=2) + "\n"
    if target is not None:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_irf_csv(source) -> pd.DataFrame:
    df = pd.read_csv(source, dtype={"label": str}, float_precision="round_trip")
    missing = [f for f in IRF_FIELDS if f not in df.columns]
    if missing:
        raise DataError(f"IRF table lacks columns {missing}")
    return df[list(IRF_FIELDS)]
