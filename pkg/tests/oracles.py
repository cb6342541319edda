"""Independent reference computations used by the tests."""

import numpy as np


def normal_equations(X, y):
    """Explicit (X'X)^-1 X'y."""
    return np.linalg.inv(X.T @ X) @ (X.T @ y)


def dummy_ols(panel, y, xs, country_fe=True, time_fe=True):
    """Slopes from the full dummy-variable regression, no demeaning."""
    yv = panel.column(y)
    X = np.column_stack([panel.column(v) for v in xs])
    ok = np.isfinite(yv) & np.all(np.isfinite(X), axis=1)
    keys = [k for k, m in zip(panel.keys, ok) if m]
    blocks = [X[ok]]
    if country_fe:
        cs = sorted({k[0] for k in keys})
        blocks.append(np.array([[k[0] == c for c in cs] for k in keys], dtype=float))
    else:
        blocks.append(np.ones((len(keys), 1)))
    if time_fe:
        ys = sorted({k[1] for k in keys})[1:]
        if ys:
            blocks.append(np.array([[k[1] == t for t in ys] for k in keys], dtype=float))
    Z = np.hstack(blocks)
    beta, *_ = np.linalg.lstsq(Z, yv[ok], rcond=None)
    return beta[: len(xs)]


def cluster_loop(fit, clusters):
    """Per-cluster score outer products summed one at a time."""
    X, e = fit.design, fit.residuals
    n, p = X.shape
    meat = np.zeros((p, p))
    ids = sorted(set(clusters))
    for g in ids:
        rows = [i for i, c in enumerate(clusters) if c == g]
        s = X[rows].T @ e[rows]
        meat += np.outer(s, s)
    bread = np.linalg.inv(X.T @ X)
    G = len(ids)
    return (G / (G - 1)) * ((n - 1) / (n - p)) * bread @ meat @ bread
