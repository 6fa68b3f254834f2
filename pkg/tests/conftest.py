"""Shared fixtures and independent reference implementations.

Every helper here solves the same quantities as the package but by a
different route (normal equations, explicit projectors, pseudo-inverse)
so the tests are not circular.
"""

import numpy as np
import pytest

from rai import standardize


def ols_fit(cols, y):
    """Least squares of y on [1, cols]; returns (intercept, slopes, fitted)."""
    cols = np.atleast_2d(np.asarray(cols, dtype=float))
    if cols.shape[0] == len(y):
        A = cols
    else:
        A = cols.T
    design = np.column_stack([np.ones(len(y)), A])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    return beta[0], beta[1:], design @ beta


def ols_r2(cols, y):
    """R-squared of the with-intercept fit, straight from residuals."""
    _, _, fitted = ols_fit(cols, y)
    y = np.asarray(y, dtype=float)
    ss_res = np.sum((y - fitted) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return 1.0 - ss_res / ss_tot


def ols_t_stats(cols, y):
    """Slope t-statistics from the classical covariance formula."""
    cols = np.asarray(cols, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    n = len(y)
    design = np.column_stack([np.ones(n), cols])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    dof = n - design.shape[1]
    sigma2 = resid @ resid / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.diag(cov))
    return (beta / se)[1:]


def projector_r2(dataset, subset):
    """1 - ||(I - H_S) y||^2 with H_S built from an explicit pseudo-inverse."""
    if not subset:
        return 0.0
    A = dataset.columns[:, list(subset)]
    H = A @ np.linalg.pinv(A)
    resid = dataset.response - H @ dataset.response
    return 1.0 - float(resid @ resid)


def projected_gain(dataset, T, S):
    """R-squared of y on the S-adjusted T columns, via explicit projectors."""
    y = dataset.response
    if S:
        A = dataset.columns[:, list(S)]
        P = np.eye(dataset.n) - A @ np.linalg.pinv(A)
    else:
        P = np.eye(dataset.n)
    Tm = P @ dataset.columns[:, list(T)]
    H = Tm @ np.linalg.pinv(Tm)
    fitted = H @ y
    return float(fitted @ fitted)


def random_raw(seed, n, p, correlated=False):
    """Raw design and response with planted signal on the first columns."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    if correlated:
        # common factor mixed into every column
        f = rng.normal(size=(n, 1))
        X = 0.6 * X + 0.8 * f
    k = min(3, p)
    beta = rng.normal(size=k) * 1.5
    y = X[:, :k] @ beta + rng.normal(size=n)
    return X, y


@pytest.fixture
def small_dataset():
    X, y = random_raw(101, 60, 6)
    return standardize(X, y)


@pytest.fixture
def correlated_dataset():
    X, y = random_raw(202, 50, 8, correlated=True)
    return standardize(X, y)
