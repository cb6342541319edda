import numpy as np
import pytest

from taylorlp.panel import PanelDataset
from taylorlp.shocks import (
    RULE_ORDER,
    TABLE_ORDER,
    TaylorSpec,
    attach_shocks,
    estimate_taylor,
    extract_standardized_shocks,
    forecast_error_shocks,
    format_table_a1,
    pooled_taylor_fe,
    significance_stars,
    table_a1,
    taylor_columns,
    taylor_shocks,
)
from taylorlp.exceptions import DataError
from taylorlp.synthetic import DgpConfig, generate_panel

SPEC = TaylorSpec("i", "g", "g_f", "pi", "pi_f", "f")


@pytest.fixture(scope="module")
def synth():
    return generate_panel(DgpConfig(n_countries=12, seed=1))


class _Fit:
    def __init__(self, resid, keys):
        self.residuals = np.asarray(resid, dtype=float)
        self.row_keys = tuple(keys)


def test_spec_invariants():
    with pytest.raises(DataError):
        TaylorSpec("i", "i", "g_f", "pi", "pi_f", "f")
    with pytest.raises(DataError):
        TaylorSpec("i", "g", "g_f", "pi", "pi_f", "f", min_obs=7)


def test_noiseless_recovery():
    panel, truth = generate_panel(DgpConfig(n_countries=5, rule_noise_sd=0.0, seed=2))
    fits = estimate_taylor(panel, SPEC)
    assert len(fits) == 5
    for fit in fits.values():
        for label, value in truth.alphas.items():
            assert fit.coef(label) == pytest.approx(value, abs=1e-9)


def test_residuals_match_projection_oracle():
    panel, _ = generate_panel(DgpConfig(n_countries=3, rule_noise_sd=0.5, seed=3))
    dep, regs = taylor_columns(panel, SPEC)
    X = np.column_stack([np.ones(panel.n_rows)] + [regs[k] for k in RULE_ORDER])
    for code, (country, fit) in enumerate(estimate_taylor(panel, SPEC).items()):
        rows = (panel.country_codes == code) & np.isfinite(dep) & np.all(np.isfinite(X), axis=1)
        Xc, yc = X[rows], dep[rows]
        hat = Xc @ np.linalg.inv(Xc.T @ Xc) @ Xc.T
        np.testing.assert_allclose(fit.residuals, yc - hat @ yc, atol=1e-10)
        assert abs(fit.residuals.mean()) < 1e-10
        scale = np.abs(Xc).max() * np.abs(yc).max() * len(yc)
        assert np.abs(Xc.T @ fit.residuals).max() < 1e-8 * scale


def test_insufficient_rows_skipped():
    panel, _ = generate_panel(DgpConfig(n_countries=2, n_years=13, seed=4))
    # keep 9 years of one country: 7 complete rows after the lag and lead
    keep = np.array([not (k[0] == "C000" and k[1] >= 2018) for k in panel.keys])
    fits = estimate_taylor(panel.take_rows(keep), SPEC)
    assert "C000" not in fits
    assert fits.skipped["C000"].startswith("insufficient_obs: 7")
    assert "C000" in fits.diagnostics()


def test_standardization_examples():
    s = extract_standardized_shocks({"A": _Fit([1, -1, 2, -2], [("A", 2000 + t) for t in range(4)])})
    assert np.std([1, -1, 2, -2], ddof=1) == pytest.approx(1.8257, abs=1e-4)
    np.testing.assert_allclose(s.standardized, [0.5477, -0.5477, 1.0954, -1.0954], atol=1e-4)
    t = extract_standardized_shocks({"B": _Fit([3.7, -3.7], [("B", 1), ("B", 2)])})
    np.testing.assert_allclose(t.standardized, [0.7071, -0.7071], atol=1e-4)


def test_standardization_skips():
    s = extract_standardized_shocks({"A": _Fit([1.0], [("A", 1)]), "B": _Fit([0.0, 0.0], [("B", 1), ("B", 2)])})
    assert len(s) == 0
    assert s.skipped["A"].startswith("too_few_residuals")
    assert s.skipped["B"].startswith("zero_variance")


def test_per_country_moments_and_pooled_sd():
    panel, _ = generate_panel(DgpConfig(seed=5))
    s = taylor_shocks(panel, SPEC)
    for st in s.stats.values():
        assert abs(st.mean) < 1e-10
        assert abs(st.sd - 1) < 1e-10
    assert 0.9 <= s.pooled_sd() <= 1.0


def test_unit_rescaling_invariance(synth):
    panel, _ = synth
    data = dict(panel.data)
    data["i"] = panel.column("i") * 100
    scaled = PanelDataset(panel.keys, data, panel.units)
    a, b = taylor_shocks(panel, SPEC), taylor_shocks(scaled, SPEC)
    assert np.max(np.abs(a.standardized - b.standardized)) < 1e-10


def test_separability(synth):
    panel, _ = synth
    full = taylor_shocks(panel, SPEC).as_dict()
    part = taylor_shocks(panel.select_countries(c for c in panel.country_ids if c != "C003"), SPEC).as_dict()
    assert all(abs(full[k] - v) < 1e-12 for k, v in part.items())
    assert not any(k[0] == "C003" for k in part)


def test_shock_csv_schema(synth):
    text = taylor_shocks(synth[0], SPEC).to_csv()
    head, first = text.splitlines()[:2]
    assert head == "country,year,raw_residual,standardized_shock"
    assert first.startswith("C000,2010,")


def test_attach_dates_at_shock_year(synth):
    panel, _ = synth
    s = taylor_shocks(panel, SPEC)
    p = attach_shocks(panel, s)
    (c, y), v = s.keys[0], s.standardized[0]
    assert p.value(c, y, "shock") == v


# -- alternative shocks --------------------------------------------------------


def test_forecast_error_coincides_with_realized_regressors(synth):
    panel, _ = synth
    zero = dict(panel.data, g_f=np.zeros(panel.n_rows), pi_f=np.zeros(panel.n_rows))
    real = dict(panel.data, g_f=panel.column("g"), pi_f=panel.column("pi"))
    a = forecast_error_shocks(PanelDataset(panel.keys, zero), SPEC)
    b = taylor_shocks(PanelDataset(panel.keys, real), SPEC)
    assert a.keys == b.keys
    assert np.array_equal(a.raw, b.raw)
    assert a.metadata["interpretation"].startswith("regressor_replacement")


def test_perfect_forecasts_rank_deficient(synth):
    panel, _ = synth
    perfect = PanelDataset(panel.keys, dict(panel.data, g_f=panel.column("g"), pi_f=panel.column("pi")))
    s = forecast_error_shocks(perfect, SPEC)
    assert len(s) == 0
    assert all(r.startswith("rank_deficient") for r in s.skipped.values())


def test_forecast_error_coefficients_null_when_rule_ignores_forecasts():
    # the rule reacts only to lagged data, so forecast errors are pure noise
    alphas = (1.352, 0.0, 0.0, 0.0253, 0.0204, -0.0073, -0.185)
    inside = total = 0
    for rep in range(200):
        panel, _ = generate_panel(DgpConfig(n_countries=2, n_years=30, taylor_alphas=alphas, seed=1000 + rep))
        fit = estimate_taylor(panel, SPEC, forecast_errors=True)["C000"]
        for lab in ("gdp_growth_forecast_error", "inflation_forecast_error"):
            inside += abs(fit.coef(lab)) < 2 * fit.se[fit.index(lab)]
            total += 1
    assert inside / total >= 0.9


def test_forecast_error_shocks_track_baseline():
    corr = []
    # residuals of two short regressions on different regressor sets decorrelate
    # at small T, so this runs on longer country histories
    for rep in range(10):
        panel, _ = generate_panel(DgpConfig(n_countries=10, n_years=60, seed=2000 + rep))
        a = taylor_shocks(panel, SPEC).as_dict()
        b = forecast_error_shocks(panel, SPEC).as_dict()
        common = sorted(set(a) & set(b))
        corr.append(np.corrcoef([a[k] for k in common], [b[k] for k in common])[0, 1])
    assert np.mean(corr) > 0.8


# -- pooled rule and table -----------------------------------------------------


def test_table_rows_and_stars(synth):
    fit = pooled_taylor_fe(synth[0], SPEC)
    rows = table_a1(fit)
    assert [r.label for r in rows] == [
        "Lagged GDP growth",
        "Forecasted GDP growth",
        "Lagged inflation rate",
        "Forecasted inflation rate",
        "Lagged changes in reserves",
        "Lagged nominal interest rate",
    ]
    assert fit.cov_type == "cluster_country"
    for r in rows:
        assert r.stars == significance_stars(r.coefficient, r.se)
    text = format_table_a1({"(1)": fit, "(2)": pooled_taylor_fe(synth[0], SPEC, time_dummies=True)})
    assert "Time dummies\tNo\tYes" in text


@pytest.mark.parametrize("z, stars", [(0.5, ""), (1.7, "*"), (2.0, "**"), (3.0, "***")])
def test_star_thresholds(z, stars):
    assert significance_stars(z, 1.0) == stars
    assert significance_stars(-z, 1.0) == stars


def test_pooled_single_country_equals_country_ols(synth):
    panel, _ = synth
    one = panel.select_countries(["C002"])
    pooled = pooled_taylor_fe(one, SPEC)
    country = estimate_taylor(one, SPEC)["C002"]
    for k in TABLE_ORDER:
        assert pooled.coef(k) == pytest.approx(country.coef(k), abs=1e-8)


@pytest.mark.xfail(strict=True, reason="within estimator of a dynamic rule has O(1/T) lagged-level bias")
def test_pooled_monte_carlo_homogeneous():
    est = []
    for rep in range(200):
        panel, truth = generate_panel(DgpConfig(n_countries=30, seed=5000 + rep))
        fit = pooled_taylor_fe(panel, SPEC)
        est.append([fit.coef(k) for k in TABLE_ORDER])
    est = np.array(est)
    mcse = est.std(axis=0, ddof=1) / np.sqrt(len(est))
    bias = est.mean(axis=0) - [truth.alphas[k] for k in TABLE_ORDER]
    assert np.all(np.abs(bias) < 2 * mcse)
