"""Standardized regression data and incremental least-squares state.

Everything downstream works on a fixed standardized view of the data:
predictor columns and the response are centered and scaled to unit
Euclidean norm.  On that scale squared correlations are R^2 increments,
so partial correlations, t-statistics and fit gains all come from plain
inner products against an orthonormal basis of the selected columns.

The orthonormal basis is grown one column at a time by modified
Gram-Schmidt with one reorthogonalization sweep, which keeps the basis
orthogonal to ~1e-8 without ever refactoring from scratch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllColumnsConstant,
    CollinearFeature,
    ConstantResponse,
    InsufficientDf,
    SingularSubset,
)

# Columns whose S-adjusted norm falls at or below this are treated as
# lying in span(S): untestable, removable without an alpha charge.
COLLINEARITY_TOL = 1e-8

# Stand-in for an infinite t-statistic when a candidate explains the
# residual exactly (rho^2 == 1).  Larger than any usable threshold.
T_STAT_MAX = 1e18


def _unit_centered(col: np.ndarray) -> tuple[np.ndarray, float, float] | None:
    """Center and scale one column to unit norm.

    Returns (standardized, mean, scale), or None for a constant column.
    """
    mean = float(col.mean())
    centered = col - mean
    scale = float(np.linalg.norm(centered))
    if scale <= 1e-12 * math.sqrt(col.size) * (1.0 + abs(mean)):
        return None
    return centered / scale, mean, scale


@dataclass(eq=False)
class Dataset:
    """Immutable standardized design.

    `columns` holds only the surviving (non-constant) predictors; `names`
    maps them back to the caller's labels.  `raw` keeps the matching
    uncentered columns so higher-order terms can be formed on the
    original scale before standardizing.
    """

    columns: np.ndarray          # (n, p), each column centered, unit norm
    response: np.ndarray         # (n,), centered, unit norm
    names: tuple[str, ...]
    raw_means: np.ndarray        # (p,)
    raw_scales: np.ndarray       # (p,)
    response_mean: float
    response_scale: float
    raw: np.ndarray              # (n, p), original uncentered columns

    def __post_init__(self) -> None:
        for arr in (self.columns, self.response, self.raw_means,
                    self.raw_scales, self.raw):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def p(self) -> int:
        return self.columns.shape[1]


def standardize(raw_matrix: np.ndarray, raw_response: np.ndarray,
                names: list[str] | None = None) -> Dataset:
    """Build a Dataset from an uncentered design and response.

    Constant predictor columns are dropped with a warning.  Raises
    AllColumnsConstant when nothing survives and ConstantResponse when
    the response has no variance.
    """
    X = np.asarray(raw_matrix, dtype=float)
    y = np.asarray(raw_response, dtype=float)
    if X.ndim != 2:
        raise ValueError("raw_matrix must be 2-dimensional")
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("response length does not match the design")
    if n < 3:
        raise ValueError("need at least 3 observations")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("design and response must be finite")
    if names is None:
        names = [f"X{j + 1}" for j in range(p)]
    elif len(names) != p:
        raise ValueError("names length does not match the design")

    resp = _unit_centered(y)
    if resp is None:
        raise ConstantResponse("response is constant")
    y_std, y_mean, y_scale = resp

    kept_cols, kept_names, kept_raw = [], [], []
    means, scales = [], []
    dropped = []
    for j in range(p):
        out = _unit_centered(X[:, j])
        if out is None:
            dropped.append(names[j])
            continue
        col, mean, scale = out
        kept_cols.append(col)
        kept_names.append(names[j])
        kept_raw.append(X[:, j])
        means.append(mean)
        scales.append(scale)
    if not kept_cols:
        raise AllColumnsConstant("every predictor column is constant")
    if dropped:
        warnings.warn(f"dropped constant columns: {', '.join(dropped)}",
                      stacklevel=2)

    return Dataset(
        columns=np.column_stack(kept_cols),
        response=y_std,
        names=tuple(kept_names),
        raw_means=np.asarray(means),
        raw_scales=np.asarray(scales),
        response_mean=y_mean,
        response_scale=y_scale,
        raw=np.column_stack(kept_raw),
    )


def _t_from_rho(rho: float, df: int) -> float:
    if abs(rho) >= 1.0:
        return math.copysign(T_STAT_MAX, rho)
    t = rho * math.sqrt(df) / math.sqrt(1.0 - rho * rho)
    if abs(t) > T_STAT_MAX:
        return math.copysign(T_STAT_MAX, t)
    return t


class ModelState:
    """Selected set, orthonormal basis, residual and R^2 for one model.

    Instances are values: `add_feature`/`add_adjusted` return a new
    state and never mutate the receiver, so traces can hold snapshots.
    `selected` is an ordered list of whatever labels the caller adds
    (column indices here, feature terms in the selection engine).
    """

    __slots__ = ("dataset", "selected", "basis", "residual", "r_squared")

    def __init__(self, dataset: Dataset, selected: tuple, basis: tuple,
                 residual: np.ndarray, r_squared: float):
        self.dataset = dataset
        self.selected = selected
        self.basis = basis
        self.residual = residual
        self.r_squared = r_squared

    @classmethod
    def empty(cls, dataset: Dataset) -> "ModelState":
        return cls(dataset, (), (), dataset.response, 0.0)

    @property
    def size(self) -> int:
        return len(self.selected)

    @property
    def df(self) -> int:
        """Residual degrees of freedom for the next candidate test."""
        return self.dataset.n - self.size - 2

    # -- projections ---------------------------------------------------

    def adjusted_vector(self, x: np.ndarray) -> np.ndarray:
        """x minus its projection onto the basis, reorthogonalized once."""
        v = np.array(x, dtype=float)
        for _ in range(2):
            for q in self.basis:
                v -= np.dot(v, q) * q
        return v

    def adjusted_column(self, j: int) -> np.ndarray:
        return self.adjusted_vector(self.dataset.columns[:, j])

    def score_vector(self, x: np.ndarray) -> tuple[float, float, float]:
        """(adjusted norm, partial correlation, t) for a candidate column.

        No error checking: callers gate on the norm and on df themselves.
        With an exhausted residual the correlation is defined as 0.
        """
        adj = self.adjusted_vector(x)
        nrm = float(np.linalg.norm(adj))
        if nrm <= 0.0:
            return 0.0, 0.0, 0.0
        rnorm = float(np.linalg.norm(self.residual))
        if rnorm < 1e-15:
            return nrm, 0.0, 0.0
        rho = float(np.dot(self.residual, adj) / (rnorm * nrm))
        rho = min(1.0, max(-1.0, rho))
        return nrm, rho, _t_from_rho(rho, self.df)

    def partial_correlation(self, j: int) -> float:
        """Correlation of the residual with the S-adjusted column j.

        Its square is the R^2 gain of adding j divided by (1 - R^2).
        """
        nrm, rho, _ = self.score_vector(self.dataset.columns[:, j])
        if nrm <= COLLINEARITY_TOL:
            raise CollinearFeature(f"column {j} is collinear with the model")
        return rho

    def t_statistic(self, j: int) -> float:
        """t-statistic for candidate j against the current residual,
        on n - |S| - 2 degrees of freedom."""
        if self.df < 1:
            raise InsufficientDf(f"df = {self.df} with |S| = {self.size}")
        nrm, rho, t = self.score_vector(self.dataset.columns[:, j])
        if nrm <= COLLINEARITY_TOL:
            raise CollinearFeature(f"column {j} is collinear with the model")
        return t

    # -- updates -------------------------------------------------------

    def add_adjusted(self, adj: np.ndarray, label) -> "ModelState":
        """Extend the basis with an already-adjusted column."""
        nrm = float(np.linalg.norm(adj))
        if nrm <= COLLINEARITY_TOL:
            raise CollinearFeature("adjusted column is numerically zero")
        q = adj / nrm
        c = float(np.dot(self.residual, q))
        residual = self.residual - c * q
        r2 = 1.0 - float(np.dot(residual, residual))
        return ModelState(self.dataset, self.selected + (label,),
                          self.basis + (q,), residual, r2)

    def add_feature(self, j: int) -> "ModelState":
        return self.add_adjusted(self.adjusted_column(j), j)


# -- whole-subset operations, by fresh orthogonalization ----------------

def r_squared_of(dataset: Dataset, subset) -> float:
    """R^2 of the subset, recomputed from scratch (no incremental state)."""
    S = list(subset)
    if not S:
        return 0.0
    M = dataset.columns[:, S]
    q, r = np.linalg.qr(M)
    if np.min(np.abs(np.diag(r))) <= COLLINEARITY_TOL:
        raise SingularSubset(f"columns {S} are rank deficient")
    proj = q.T @ dataset.response
    return float(min(1.0, np.dot(proj, proj)))


def gain(dataset: Dataset, S, A) -> float:
    """R^2(S u A) - R^2(S).  Non-negative up to roundoff."""
    S = list(S)
    union = S + [a for a in A if a not in S]
    return r_squared_of(dataset, union) - r_squared_of(dataset, S)


def coefficients(dataset: Dataset, subset) -> tuple[np.ndarray, float]:
    """Least-squares coefficients for the subset on the original scale.

    Returns (slopes aligned with `subset`, intercept).
    """
    S = list(subset)
    if not S:
        return np.zeros(0), dataset.response_mean
    M = dataset.columns[:, S]
    q, r = np.linalg.qr(M)
    if np.min(np.abs(np.diag(r))) <= COLLINEARITY_TOL:
        raise SingularSubset(f"columns {S} are rank deficient")
    b = np.linalg.solve(r, q.T @ dataset.response)
    slopes = dataset.response_scale * b / dataset.raw_scales[S]
    intercept = dataset.response_mean - float(
        np.dot(slopes, dataset.raw_means[S]))
    return slopes, intercept
