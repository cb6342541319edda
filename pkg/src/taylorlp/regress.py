"""Least squares, two-way fixed effects and cluster-robust covariance."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from statistics import NormalDist
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from . import kernels
from .exceptions import DataError, EstimationError, RankDeficientError

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    values: np.ndarray
    column_labels: tuple[str, ...]
    row_keys: tuple[tuple[str, int], ...]
    # fixed-effect groups absorbed by demeaning; counted against df_resid
    absorbed: int = 0
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DataError("design matrix must be two-dimensional")
        if v.shape[1] != len(self.column_labels):
            raise DataError("column label count does not match design width")
        if self.row_keys and v.shape[0] != len(self.row_keys):
            raise DataError("row key count does not match design height")
        if not np.all(np.isfinite(v)):
            raise DataError("design matrix contains missing or non-finite entries")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        object.__setattr__(self, "row_keys", tuple(self.row_keys))

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def from_array(cls, values, labels=None, row_keys=()):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        labels = labels or [f"x{j}" for j in range(values.shape[1])]
        return cls(values, tuple(labels), tuple(row_keys))


@dataclass(frozen=True, eq=False)
class RegressionFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    covariance: np.ndarray
    n_obs: int
    df_resid: int
    column_labels: tuple[str, ...]
    row_keys: tuple[tuple[str, int], ...]
    design: np.ndarray = field(repr=False)
    bread: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    cov_type: str = "classical"
    diagnostics: tuple[str, ...] = ()

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def fitted(self) -> np.ndarray:
        return self.y - self.residuals

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    def index(self, label: str) -> int:
        try:
            return self.column_labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def coef(self, label: str) -> float:
        return float(self.coefficients[self.index(label)])

    def with_covariance(self, cov: np.ndarray, cov_type: str) -> "RegressionFit":
        return replace(self, covariance=cov, cov_type=cov_type)


def _dependent_columns(X: np.ndarray, labels: Sequence[str]) -> list[str]:
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    null = vt[rank:]
    if null.size == 0:
        return []
    weight = np.abs(null).max(axis=0)
    return [lab for lab, w in zip(labels, weight) if w > 1e-8]


def check_rank(X: np.ndarray, labels: Sequence[str]) -> None:
    """Raise :class:`RankDeficientError` if a singular value falls below the relative threshold."""
    if X.shape[1] == 0:
        return
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] <= RANK_RTOL * s[0] or len(s) < X.shape[1]:
        cols = _dependent_columns(X, labels)
        raise RankDeficientError(f"design is rank deficient; dependent columns: {cols}", cols)


def ols(X, y, intercept: bool = True) -> RegressionFit:
    """Least squares through a Householder QR factorization.

    The default covariance is the classical ``s^2 (X'X)^-1`` with
    ``s^2 = RSS / df_resid``; if ``df_resid`` is zero the covariance is NaN.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix.from_array(X)
    y = np.asarray(y, dtype=np.float64)
    values, labels = X.values, X.column_labels
    if y.shape != (values.shape[0],):
        raise DataError(f"y has length {y.shape[0]}, design has {values.shape[0]} rows")
    if not np.all(np.isfinite(y)):
        raise DataError("outcome contains missing or non-finite values")
    if intercept:
        values = np.column_stack([np.ones(values.shape[0]), values])
        labels = ("const", *labels)
    n, p = values.shape
    if n < p:
        raise EstimationError(f"n_obs={n} is smaller than the number of parameters {p}")
    check_rank(values, labels)

    q, r = np.linalg.qr(values, mode="reduced")
    beta = scipy.linalg.solve_triangular(r, q.T @ y)
    resid = y - values @ beta
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p))
    bread = r_inv @ r_inv.T
    bread = 0.5 * (bread + bread.T)
    df = n - p - X.absorbed
    sigma2 = float(resid @ resid) / df if df > 0 else np.nan
    return RegressionFit(
        coefficients=beta,
        residuals=resid,
        covariance=sigma2 * bread,
        n_obs=n,
        df_resid=df,
        column_labels=tuple(labels),
        row_keys=X.row_keys,
        design=values,
        bread=bread,
        y=y,
        diagnostics=X.diagnostics,
    )


def _codes(ids) -> tuple[np.ndarray, int]:
    _, inv = np.unique(np.asarray(ids), return_inverse=True)
    inv = inv.astype(np.int64).ravel()
    return inv, int(inv.max()) + 1 if inv.size else 0


def cluster_robust_cov(fit: RegressionFit, cluster_of_row) -> np.ndarray:
    """CR1 sandwich with factor ``G/(G-1) * (n-1)/(n-p)``."""
    clusters = list(cluster_of_row)
    n, p = fit.design.shape
    if len(clusters) != n:
        raise DataError(f"{len(clusters)} cluster ids for {n} rows")
    codes, g = _codes(clusters)
    if g < 2:
        raise EstimationError("cluster-robust covariance needs at least 2 clusters")
    scores = np.ascontiguousarray(fit.design * fit.residuals[:, None])
    sums = kernels.cluster_score_sums(scores, codes, g)
    meat = sums.T @ sums
    cov = fit.bread @ meat @ fit.bread
    cov *= (g / (g - 1)) * ((n - 1) / (n - p))
    return 0.5 * (cov + cov.T)


def country_clusters(fit: RegressionFit) -> list[str]:
    return [k[0] for k in fit.row_keys]


def normal_quantile(level: float) -> float:
    if not 0 < level < 1:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return NormalDist().inv_cdf(0.5 + level / 2)


def confidence_interval(fit: RegressionFit, cov: np.ndarray | None, coef_index: int, level: float = 0.90):
    cov = fit.covariance if cov is None else cov
    var = float(cov[coef_index, coef_index])
    if var < 0:
        raise EstimationError(f"negative variance {var:.3e} for coefficient {fit.column_labels[coef_index]!r}")
    q = normal_quantile(level)
    b = float(fit.coefficients[coef_index])
    half = q * np.sqrt(var)
    return b - half, b + half


# -- fixed effects -------------------------------------------------------------


def within_arrays(
    y: np.ndarray,
    X: np.ndarray,
    labels: Sequence[str],
    row_keys: Sequence[tuple[str, int]],
    *,
    country_fe: bool = True,
    time_fe: bool = True,
) -> tuple[DesignMatrix, np.ndarray]:
    """Two-way FE design for complete rows.

    Country effects are swept out by demeaning. Time effects enter as year
    indicators (earliest year dropped) that are demeaned along with the rest,
    so slopes equal those of the full dummy-variable regression.
    """
    n = len(row_keys)
    if n == 0:
        raise EstimationError("empty estimation sample")
    countries = [k[0] for k in row_keys]
    years = np.array([k[1] for k in row_keys], dtype=np.int64)
    diag = []
    labels = list(labels)
    blocks = [np.asarray(X, dtype=np.float64).reshape(n, -1)]
    n_dummies = 0
    if time_fe:
        uy = np.unique(years)
        d = (years[:, None] == uy[None, 1:]).astype(np.float64)
        blocks.append(d)
        labels += [f"year_{t}" for t in uy[1:]]
        n_dummies = d.shape[1]
        yc = np.bincount(np.searchsorted(uy, years), minlength=len(uy))
        single = [int(t) for t, c in zip(uy, yc) if c == 1]
        if single:
            diag.append(f"single-observation year groups: {single}")
    Z = np.hstack(blocks)
    yv = np.asarray(y, dtype=np.float64)
    absorbed = 0
    if country_fe:
        codes, g = _codes(countries)
        both = np.ascontiguousarray(np.column_stack([yv, Z]))
        both = kernels.group_demean(both, codes, g)
        yv, Z = both[:, 0], both[:, 1:]
        absorbed = g
        cc = np.bincount(codes, minlength=g)
        uniq = np.unique(np.asarray(countries))
        single = [str(c) for c, k in zip(uniq, cc) if k == 1]
        if single:
            diag.append(f"single-observation country groups: {single}")
    else:
        Z = np.column_stack([np.ones(n), Z])
        labels = ["const", *labels]

    if n_dummies:
        # Drop year indicators made redundant by demeaning (e.g. a year seen only
        # in singleton countries); the slopes of interest are unaffected.
        start = Z.shape[1] - n_dummies
        block = Z[:, start:]
        if block.size:
            _, r, piv = scipy.linalg.qr(block, mode="economic", pivoting=True)
            dr = np.abs(np.diag(r))
            keep = np.zeros(block.shape[1], dtype=bool)
            if dr.size and dr[0] > 0:
                keep[: dr.size] = dr > RANK_RTOL * dr[0]
            if not keep.all():
                drop = sorted(piv[~keep])
                diag.append(f"dropped redundant year indicators: {[labels[start + j] for j in drop]}")
                mask = np.ones(Z.shape[1], dtype=bool)
                mask[[start + j for j in drop]] = False
                Z = Z[:, mask]
                labels = [lab for lab, m in zip(labels, mask) if m]
    design = DesignMatrix(Z, tuple(labels), tuple(row_keys), absorbed=absorbed, diagnostics=tuple(diag))
    return design, yv


def within_twoway(
    panel,
    y: str | np.ndarray,
    x_vars: Sequence[str] | Mapping[str, np.ndarray],
    *,
    country_fe: bool = True,
    time_fe: bool = True,
    mask: np.ndarray | None = None,
) -> tuple[DesignMatrix, np.ndarray]:
    """Listwise-delete incomplete rows of ``panel`` and build the FE design.

    ``y`` and ``x_vars`` are column names or arrays aligned with the panel
    rows. The returned design is meant for ``ols(..., intercept=False)``.
    """
    yv = panel.column(y) if isinstance(y, str) else np.asarray(y, dtype=np.float64)
    if isinstance(x_vars, Mapping):
        labels = list(x_vars)
        cols = [np.asarray(v, dtype=np.float64) for v in x_vars.values()]
    else:
        labels = list(x_vars)
        cols = [panel.column(v) for v in labels]
    X = np.column_stack(cols) if cols else np.empty((len(yv), 0))
    ok = np.isfinite(yv) & np.all(np.isfinite(X), axis=1)
    if mask is not None:
        ok &= np.asarray(mask, dtype=bool)
    if not ok.any():
        raise EstimationError("empty estimation sample after listwise deletion")
    keys = [k for k, m in zip(panel.keys, ok) if m]
    return within_arrays(yv[ok], X[ok], labels, keys, country_fe=country_fe, time_fe=time_fe)


def fe_ols(panel, y, x_vars, *, country_fe=True, time_fe=True, mask=None, cluster: str | None = "country"):
    """Convenience: FE design, OLS and (by default) country-clustered covariance."""
    design, yv = within_twoway(panel, y, x_vars, country_fe=country_fe, time_fe=time_fe, mask=mask)
    fit = ols(design, yv, intercept=False)
    if cluster == "country":
        fit = fit.with_covariance(cluster_robust_cov(fit, country_clusters(fit)), "cluster_country")
    elif cluster is not None:
        raise ValueError(f"unsupported clustering {cluster!r}")
    return fit
