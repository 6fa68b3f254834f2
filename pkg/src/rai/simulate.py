"""Synthetic benchmark scenarios and the replication runner.

Designs are gaussian with column means redrawn every replication, so
interactions carry signal into their own factors at strengths that vary
from replication to replication.  True-model coefficients are rescaled
per replication so the sample signal fraction hits the requested R^2
exactly, which keeps the scenarios comparable across n and p.

Per-replication RNG streams are derived from (base seed, replication,
purpose), so any replication can be regenerated alone and shards of a
study can be merged in any order.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .engine import RaiConfig, run_rai
from .errors import DegenerateTerms, LengthMismatch, RaiError
from .kernel import Dataset, ModelState, standardize
from .oracles import forward_stepwise
from .terms import FeatureTerm
from .wealth import MfdrCounts, mfdr_estimate

SCENARIOS = ("four_interactions", "single_interaction", "global_null")
METHODS = ("rai", "rai_interactions", "stepwise_aic", "mean_model",
           "true_model")

_FOUR_TERMS = (
    FeatureTerm.from_exponents({0: 1, 1: 1}),            # X1*X2
    FeatureTerm.from_exponents({2: 1, 3: 2}),            # X3*X4^2
    FeatureTerm.from_exponents({4: 1, 5: 3}),            # X5*X6^3
    FeatureTerm.from_exponents({6: 1, 7: 1, 8: 1, 9: 1}),  # X7*X8*X9*X10
)
_SINGLE_TERM = (FeatureTerm.from_exponents({0: 1, 1: 1}),)


@dataclass(frozen=True)
class SimSpec:
    """One benchmark configuration."""

    n: int
    p: int
    scenario: str
    replications: int
    base_seed: int = 0
    target_r2: float = 0.83

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.n < 3 or self.replications < 1:
            raise ValueError("n and replications must be positive")
        need = {"four_interactions": 10, "single_interaction": 2,
                "global_null": 1}[self.scenario]
        if self.p < need:
            raise ValueError(
                f"scenario {self.scenario} needs at least {need} columns")
        if not 0.0 < self.target_r2 < 1.0:
            raise ValueError("target_r2 must lie in (0, 1)")


def true_terms(spec: SimSpec) -> tuple[FeatureTerm, ...]:
    """Monomials carrying coefficients in the scenario's mean surface."""
    if spec.scenario == "four_interactions":
        return _FOUR_TERMS
    if spec.scenario == "single_interaction":
        return _SINGLE_TERM
    return ()


def recovery_targets(spec: SimSpec) -> tuple[FeatureTerm, ...]:
    """Terms a full recovery must select.

    For the single-interaction scenario that is the interaction plus
    both of its factors, since factors must enter before their product
    can even be streamed.
    """
    if spec.scenario == "single_interaction":
        return (FeatureTerm.marginal(0), FeatureTerm.marginal(1),
                _SINGLE_TERM[0])
    return true_terms(spec)


def signal_support(spec: SimSpec) -> frozenset[int]:
    """Feature indices the mean surface depends on.

    Columns outside the support are independent of mu, so any rejected
    term touching one is a false rejection.  Terms built only from
    support columns correlate with mu through the nonzero column means
    and are not counted against the procedure.
    """
    return frozenset(j for t in true_terms(spec) for j in t.indices)


def _rng(spec: SimSpec, rep: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((spec.base_seed, rep, purpose)))


def gen_design(spec: SimSpec, rep: int) -> np.ndarray:
    """Raw design: column j is N(tau_j, 1) with tau_j ~ N(0, 4)."""
    rng = _rng(spec, rep, 0)
    tau = rng.normal(0.0, 2.0, spec.p)
    return rng.normal(tau, 1.0, (spec.n, spec.p))


def _term_raw_column(term: FeatureTerm, X: np.ndarray) -> np.ndarray:
    col = np.ones(X.shape[0])
    for j, p in term.powers:
        col = col * X[:, j] ** p
    return col


def calibrate_beta(X: np.ndarray, terms, target_r2: float) -> np.ndarray:
    """Coefficients c / ||centered term column|| with c tuned so the
    sample signal fraction Var(mu) / (Var(mu) + 1) equals target_r2."""
    cols = [_term_raw_column(t, X) for t in terms]
    norms = np.array([np.linalg.norm(c - c.mean()) for c in cols])
    if np.any(norms <= 1e-12):
        raise DegenerateTerms("a true-model term column is constant")
    base = np.sum([c / nm for c, nm in zip(cols, norms)], axis=0)
    v = float(np.var(base, ddof=1))
    if v <= 0.0:
        raise DegenerateTerms("true-model mean surface is constant")

    def frac(c):
        return c * c * v / (c * c * v + 1.0) - target_r2

    hi = 2.0 * np.sqrt(target_r2 / ((1.0 - target_r2) * v)) + 1.0
    c = brentq(frac, 0.0, hi, xtol=1e-12, rtol=8.9e-16)
    return c / norms


def gen_response(X: np.ndarray, spec: SimSpec,
                 rep: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Response, mean surface and coefficients for one replication."""
    rng = _rng(spec, rep, 1)
    eps = rng.normal(0.0, 1.0, X.shape[0])
    terms = true_terms(spec)
    if not terms:
        mu = np.zeros(X.shape[0])
        return eps.copy(), mu, np.zeros(0)
    beta = calibrate_beta(X, terms, spec.target_r2)
    cols = np.column_stack([_term_raw_column(t, X) for t in terms])
    mu = cols @ beta
    return mu + eps, mu, beta


def risk(mu: np.ndarray, yhat: np.ndarray) -> float:
    """Squared distance between the fitted values and the true mean."""
    if mu.shape != yhat.shape:
        raise LengthMismatch(f"{mu.shape} vs {yhat.shape}")
    diff = mu - yhat
    return float(np.dot(diff, diff))


def _ols_t_stats(cols: np.ndarray, y: np.ndarray) -> list[float]:
    """t-statistics of each column in the OLS fit with an intercept."""
    n = y.size
    A = np.column_stack([np.ones(n), cols])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = n - A.shape[1]
    sigma2 = float(np.dot(resid, resid)) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    se = np.sqrt(np.diag(cov))
    return [float(t) for t in (coef / se)[1:]]


def _fitted_from_state(dataset: Dataset, state) -> np.ndarray:
    # yhat_std = y_std - residual, mapped back to the original scale
    return (dataset.response_mean
            + dataset.response_scale * (dataset.response - state.residual))


def _run_method(method: str, dataset: Dataset, X, y, spec: SimSpec,
                truth_cols: np.ndarray | None):
    """Returns (yhat, selected_terms, passes, wealth_spent, rejections)."""
    if method in ("rai", "rai_interactions"):
        config = RaiConfig(interactions=(method == "rai_interactions"))
        state, trace = run_rai(dataset, config)
        return (_fitted_from_state(dataset, state), list(state.selected),
                trace.passes_traversed, trace.ledger.total_spent(),
                trace.n_rejections())
    if method == "stepwise_aic":
        path = forward_stepwise(dataset, None)
        state = ModelState.empty(dataset)
        for j in path:
            state = state.add_feature(j)
        terms = [FeatureTerm.marginal(j) for j in path]
        return _fitted_from_state(dataset, state), terms, 0, 0.0, len(path)
    if method == "mean_model":
        yhat = np.full(y.size, float(y.mean()))
        return yhat, [], 0, 0.0, 0
    if method == "true_model":
        A = np.column_stack([np.ones(y.size), truth_cols])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return A @ coef, [], 0, 0.0, 0
    raise ValueError(f"unknown method {method!r}")


def _quartiles(values) -> dict:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {"mean": float(arr.mean()), "median": float(med),
            "q1": float(q1), "q3": float(q3)}


def _spec_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_experiment(spec: SimSpec, method: str, out_path=None,
                   include_timing: bool = False) -> dict:
    """Run every replication of a scenario under one method.

    Returns {"manifest", "rows", "summary"}; with `out_path` the same
    records are written as line-delimited JSON, manifest first.  Timing
    fields are opt-in so reruns of the same study are byte-identical.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    truth = true_terms(spec)
    targets = recovery_targets(spec)
    target_keys = {t.key for t in targets}
    truth_keys = {t.key for t in truth}
    support = signal_support(spec)
    names = [f"X{j + 1}" for j in range(spec.p)]

    rows = []
    counts = MfdrCounts()
    for rep in range(spec.replications):
        t0 = time.perf_counter()
        X = gen_design(spec, rep)
        y, mu, _beta = gen_response(X, spec, rep)
        dataset = standardize(X, y, names)
        truth_cols = (np.column_stack(
            [_term_raw_column(t, X) for t in truth]) if truth else None)
        try:
            yhat, selected, passes, spent, rejections = _run_method(
                method, dataset, X, y, spec, truth_cols)
        except (RaiError, np.linalg.LinAlgError) as exc:
            # a broken replication must not sink the rest of the study
            rows.append({"kind": "replication", "rep": rep,
                         "error": f"{type(exc).__name__}: {exc}"})
            continue
        selected_keys = {t.key for t in selected}
        if method in ("mean_model", "true_model"):
            false_rej = 0
        else:
            false_rej = sum(1 for t in selected
                            if not set(t.indices) <= support)
        row = {
            "kind": "replication",
            "rep": rep,
            "risk": risk(mu, yhat),
            "model_size": len(selected),
            "selected": [t.display(names) for t in selected],
            "n_true_selected": len(selected_keys & truth_keys),
            "all_targets_selected": bool(target_keys <= selected_keys),
            "passes": passes,
            "wealth_spent": spent,
            "rejections": rejections,
            "false_rejections": false_rej,
            "true_term_t": (_ols_t_stats(truth_cols, y)
                            if truth_cols is not None else []),
        }
        if include_timing:
            row["wall_time_s"] = time.perf_counter() - t0
        rows.append(row)
        counts = counts.merge(MfdrCounts(false_rej, rejections, 1))

    ok_rows = [r for r in rows if "error" not in r]
    summary = {"kind": "summary", "replications": spec.replications,
               "failed": len(rows) - len(ok_rows)}
    if ok_rows:
        for field_name in ("risk", "model_size", "passes", "wealth_spent"):
            stats = _quartiles([r[field_name] for r in ok_rows])
            for stat_name, value in stats.items():
                summary[f"{field_name}_{stat_name}"] = value
        summary["recovery_rate"] = float(
            np.mean([r["all_targets_selected"] for r in ok_rows]))
    summary["rejections_total"] = counts.rejections
    summary["false_rejections_total"] = counts.false_rejections
    summary["mfdr_estimate"] = mfdr_estimate(counts)

    spec_payload = {**asdict(spec), "method": method}
    manifest = {
        "kind": "manifest",
        "spec": asdict(spec),
        "method": method,
        "version": __version__,
        "spec_hash": _spec_hash(spec_payload),
    }
    result = {"manifest": manifest, "rows": rows, "summary": summary}
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(json.dumps(manifest) + "\n")
            for row in rows:
                fh.write(json.dumps(row) + "\n")
            fh.write(json.dumps(summary) + "\n")
    return result
