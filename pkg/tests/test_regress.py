from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_panel
from oracles import cluster_loop, dummy_ols, normal_equations
from taylorlp.exceptions import EstimationError, RankDeficientError
from taylorlp.panel import PanelDataset
from taylorlp.regress import (
    DesignMatrix,
    cluster_robust_cov,
    confidence_interval,
    country_clusters,
    fe_ols,
    normal_quantile,
    ols,
    within_twoway,
)


# -- ols -----------------------------------------------------------------------


def test_exact_fit():
    x = np.arange(10.0)
    fit = ols(x[:, None], 2 * x)
    assert fit.coef("const") == pytest.approx(0, abs=1e-12)
    assert fit.coef("x0") == pytest.approx(2, abs=1e-12)
    assert np.max(np.abs(fit.residuals)) < 1e-12


def test_constant_outcome():
    X = np.random.default_rng(1).normal(size=(20, 3))
    fit = ols(X, np.full(20, 4.2))
    assert fit.coefficients[0] == pytest.approx(4.2, abs=1e-12)
    assert np.max(np.abs(fit.coefficients[1:])) < 1e-12


def test_matches_normal_equations():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(50, 3))
    y = X @ [1.0, -2.0, 0.5] + rng.normal(size=50)
    fit = ols(X, y, intercept=False)
    np.testing.assert_allclose(fit.coefficients, normal_equations(X, y), atol=1e-10)
    assert fit.df_resid == 47


def test_residuals_are_exact_and_covariance_symmetric():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    fit = ols(X, y)
    assert np.array_equal(fit.residuals, y - fit.design @ fit.coefficients)
    np.testing.assert_allclose(fit.covariance, fit.covariance.T, rtol=1e-12)


def test_rank_deficiency_names_columns():
    rng = np.random.default_rng(2)
    a = rng.normal(size=12)
    X = DesignMatrix(np.column_stack([a, 2 * a, rng.normal(size=12)]), ("a", "b", "c"), ())
    with pytest.raises(RankDeficientError) as exc:
        ols(X, rng.normal(size=12))
    assert set(exc.value.columns) == {"a", "b"}


def test_too_few_rows():
    with pytest.raises(EstimationError):
        ols(np.ones((2, 3)), np.ones(2))


def test_zero_df_gives_nan_covariance():
    X = np.array([[1.0], [2.0]])
    fit = ols(X, np.array([1.0, 3.0]))
    assert fit.df_resid == 0
    assert np.all(np.isnan(fit.covariance))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(-1e3, 1e3), scale=st.floats(0.01, 100))
def test_shift_and_scale(seed, c, scale):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, 3))
    y = rng.normal(size=25)
    base = ols(X, y)
    shifted = ols(X, y + c)
    np.testing.assert_allclose(shifted.coefficients[1:], base.coefficients[1:], atol=1e-10 * (1 + abs(c)))
    Xs = X.copy()
    Xs[:, 1] *= scale
    scaled = ols(Xs, y)
    assert scaled.coefficients[2] * scale == pytest.approx(base.coefficients[2], abs=1e-9)
    np.testing.assert_allclose(scaled.fitted, base.fitted, atol=1e-10 * (1 + np.abs(y).max()))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_orthogonality(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 4)) * rng.uniform(0.1, 10, size=4)
    y = rng.normal(size=40) * 5
    fit = ols(X, y)
    scale = np.abs(fit.design).max() * np.abs(y).max() * len(y)
    assert np.max(np.abs(fit.design.T @ fit.residuals)) < 1e-8 * scale


# -- confidence intervals ------------------------------------------------------


def _fit_with(beta, var):
    fit = ols(np.arange(5.0)[:, None], np.arange(5.0), intercept=False)
    return replace(fit, coefficients=np.array([beta]), covariance=np.array([[var]]))


def test_interval_standard_normal():
    lo, hi = confidence_interval(_fit_with(0.0, 1.0), None, 0, 0.90)
    assert (lo, hi) == pytest.approx((-1.6449, 1.6449), abs=1e-4)


def test_interval_table_coefficient():
    assert normal_quantile(0.95) == pytest.approx(1.9600, abs=1e-4)
    lo, hi = confidence_interval(_fit_with(0.125, 0.062**2), None, 0, 0.95)
    assert lo == pytest.approx(0.0035, abs=5e-5)
    assert hi == pytest.approx(0.2465, abs=5e-5)


def test_interval_degenerate_and_negative():
    fit = _fit_with(2.5, 0.0)
    assert confidence_interval(fit, None, 0) == (2.5, 2.5)
    with pytest.raises(EstimationError):
        confidence_interval(fit, np.array([[-1.0]]), 0)


@given(a=st.floats(0.01, 0.98), b=st.floats(0.01, 0.98))
def test_interval_width_monotone(a, b):
    lo_level, hi_level = sorted((a, b))
    assert normal_quantile(lo_level) <= normal_quantile(hi_level)


# -- fixed effects -------------------------------------------------------------


def test_fe_absorbs_country_constants():
    rng = np.random.default_rng(3)
    keys, x, y = [], [], []
    for c in range(6):
        a = rng.normal(0, 10)
        for t in range(8):
            xv = rng.normal()
            keys.append((f"C{c}", 2000 + t))
            x.append(xv)
            y.append(3 * xv + a)
    panel = PanelDataset.from_rows(keys, {"x": np.array(x), "y": np.array(y)})
    design, yv = within_twoway(panel, "y", ["x"], time_fe=False)
    fit = ols(design, yv, intercept=False)
    assert fit.coef("x") == pytest.approx(3, abs=1e-10)
    assert fit.df_resid == len(keys) - 1 - 6


def test_fe_matches_dummy_ols_with_missingness():
    panel = random_panel(np.random.default_rng(4), 8, 6, missing=0.2)
    design, yv = within_twoway(panel, "y", ["x0", "x1"])
    fit = ols(design, yv, intercept=False)
    np.testing.assert_allclose(fit.coefficients[:2], dummy_ols(panel, "y", ["x0", "x1"]), atol=1e-8)


def test_single_country_time_dummies_only():
    # one country with year dummies leaves no variation, so compare with time FE off
    panel = random_panel(np.random.default_rng(5), 1, 10)
    design, yv = within_twoway(panel, "y", ["x0", "x1"], time_fe=False)
    fit = ols(design, yv, intercept=False)
    np.testing.assert_allclose(fit.coefficients, dummy_ols(panel, "y", ["x0", "x1"], time_fe=False), atol=1e-8)
    design, yv = within_twoway(panel, "y", ["x0", "x1"], time_fe=True)
    with pytest.raises(EstimationError):
        ols(design, yv, intercept=False)


def test_no_country_fe_adds_constant():
    panel = random_panel(np.random.default_rng(6), 4, 6)
    design, yv = within_twoway(panel, "y", ["x0"], country_fe=False, time_fe=True)
    assert design.column_labels[0] == "const"
    fit = ols(design, yv, intercept=False)
    np.testing.assert_allclose(fit.coefficients[1], dummy_ols(panel, "y", ["x0"], country_fe=False)[0], atol=1e-8)


def test_redundant_year_dropped_with_diagnostic():
    # year 2015 appears only for a singleton country
    keys = [(c, 2009 + t) for c in ("A", "B", "C") for t in range(6)] + [("D", 2015)]
    rng = np.random.default_rng(9)
    panel = PanelDataset.from_rows(keys, {"y": rng.normal(size=len(keys)), "x": rng.normal(size=len(keys))})
    design, yv = within_twoway(panel, "y", ["x"])
    assert "year_2015" not in design.column_labels
    assert any("redundant" in d for d in design.diagnostics)
    assert any("single-observation country" in d for d in design.diagnostics)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-50, 50))
def test_fe_invariant_to_country_and_year_constants(seed, shift):
    rng = np.random.default_rng(seed)
    panel = random_panel(rng, 5, 7, missing=0.1)
    base = fe_ols(panel, "y", ["x0", "x1"])
    add = np.array([shift * (int(k[0][1:]) % 7) + 0.5 * shift * (k[1] % 3) for k in panel.keys])
    moved = fe_ols(panel, panel.column("y") + add, ["x0", "x1"])
    np.testing.assert_allclose(moved.coefficients[:2], base.coefficients[:2], atol=1e-9 * (1 + abs(shift)))


# -- cluster covariance --------------------------------------------------------


def test_cluster_matches_loop():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(60, 3))
    y = X @ [1, 2, 3] + rng.normal(size=60)
    clusters = [f"g{i % 5}" for i in range(60)]
    fit = ols(DesignMatrix(X, ("a", "b", "c"), tuple((c, i) for i, c in enumerate(clusters))), y)
    np.testing.assert_allclose(cluster_robust_cov(fit, clusters), cluster_loop(fit, clusters), atol=1e-10)
    assert country_clusters(fit) == clusters


def test_singleton_clusters_equal_hc1_style():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(40, 2))
    y = rng.normal(size=40)
    fit = ols(X, y)
    n, p = fit.design.shape
    e = fit.residuals
    hc = fit.bread @ (fit.design.T * e**2) @ fit.design @ fit.bread
    factor = (n / (n - 1)) * ((n - 1) / (n - p))
    np.testing.assert_allclose(cluster_robust_cov(fit, range(n)), factor * hc, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), perm_seed=st.integers(0, 1000))
def test_cluster_relabeling_invariant(seed, perm_seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 2))
    fit = ols(X, rng.normal(size=30))
    ids = rng.integers(0, 6, size=30)
    if len(set(ids)) < 2:
        ids[0], ids[1] = 0, 1
    relabel = np.random.default_rng(perm_seed).permutation(6) + 100
    a = cluster_robust_cov(fit, ids)
    b = cluster_robust_cov(fit, relabel[ids])
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(a)) > -1e-12 * np.abs(a).max()


def test_cluster_needs_two_groups():
    fit = ols(np.random.default_rng(0).normal(size=(10, 1)), np.arange(10.0))
    with pytest.raises(EstimationError):
        cluster_robust_cov(fit, ["a"] * 10)


def test_cluster_se_close_to_classical_under_iid():
    rng = np.random.default_rng(12)
    ratios = []
    for _ in range(200):
        X = rng.normal(size=(400, 2))
        y = X @ [1.0, -1.0] + rng.normal(size=400)
        fit = ols(X, y)
        cl = cluster_robust_cov(fit, np.arange(400) % 40)
        ratios.append(np.sqrt(np.diag(cl))[1:] / fit.se[1:])
    assert abs(np.mean(ratios) - 1) < 0.15
