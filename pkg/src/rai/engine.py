"""Multi-pass thresholded selection with alpha-investing.

The engine streams candidate terms repeatedly.  Pass s tests every
remaining candidate against the threshold tlvl = sqrt(n) * 2**(-s/2),
spending that pass's alpha from the wealth ledger before each compare.
A cleared threshold adds the term to the model, earns the payout,
refreshes the residual, and (with interactions on) appends products of
the new term with the model to the tail of the stream, where they are
reachable within the same pass.

A pass that rejects nothing leaves every remaining |t| unchanged, so
the engine can jump straight to the first future pass whose threshold
some candidate clears, as long as it pays for every test it skips over.
The jump charges the ledger candidate by candidate in stream order so
that a skipping run and a literal pass-by-pass run hold identical
wealth at every point.

Runs end when a candidate cannot be paid for, when the pass budget is
exhausted, or when the stream runs dry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantInteraction, NoFinitePass
from .kernel import COLLINEARITY_TOL, Dataset, ModelState, _t_from_rho
from .terms import (FeatureTerm, generate_candidates, realize_with_stats,
                    term_column)
from .wealth import (DEFAULT_INITIAL_WEALTH, DEFAULT_PAYOUT, WealthLedger,
                     pass_parameters)

REJECTED = "rejected"
NOT_REJECTED = "not_rejected"
REMOVED_COLLINEAR = "removed_collinear"
HALTED_WEALTH = "halted_wealth"

TERMINATED_WEALTH = "wealth_exhausted"
TERMINATED_PASSES = "max_passes"
TERMINATED_STREAM = "stream_exhausted"

_UNRESOLVED = object()


@dataclass(frozen=True)
class RaiConfig:
    """Knobs for one selection run.

    max_passes of None resolves to ceil(log2(n)) + 2 at run time.  The
    seed is carried for reproducibility plumbing only; the engine itself
    draws no random numbers.
    """

    initial_wealth: float = DEFAULT_INITIAL_WEALTH
    payout: float = DEFAULT_PAYOUT
    max_passes: int | None = None
    collinearity_tol: float = COLLINEARITY_TOL
    interactions: bool = False
    max_interaction_order: int | None = None
    skip_passes: bool = True
    seed: int | None = None

    def resolve_max_passes(self, n: int) -> int:
        if self.max_passes is not None:
            if self.max_passes < 1:
                raise ValueError("max_passes must be positive")
            return self.max_passes
        return math.ceil(math.log2(n)) + 2


@dataclass(frozen=True)
class TestRecord:
    pass_index: int
    term: FeatureTerm
    t_abs: float | None
    tlvl: float
    alpha: float
    wealth_before: float
    wealth_after: float
    decision: str


@dataclass(frozen=True)
class SkipRecord:
    from_pass: int
    to_pass: int
    n_candidates: int
    alpha_charged: float
    wealth_before: float
    wealth_after: float
    halted: bool


@dataclass
class SelectionTrace:
    tests: list[TestRecord] = field(default_factory=list)
    skips: list[SkipRecord] = field(default_factory=list)
    termination: str = ""
    passes_traversed: int = 0
    ledger: WealthLedger | None = None

    def first_rejection_pass(self) -> int | None:
        for rec in self.tests:
            if rec.decision == REJECTED:
                return rec.pass_index
        return None

    def n_rejections(self) -> int:
        return sum(1 for rec in self.tests if rec.decision == REJECTED)


class FeatureStream:
    """Ordered candidate queue with a permanent no-repeat memory."""

    def __init__(self, initial_terms=()):
        self.queue: list[FeatureTerm] = []
        self.seen: set = set()
        for t in initial_terms:
            self.append(t)

    def append(self, term: FeatureTerm) -> bool:
        if term.key in self.seen:
            return False
        self.seen.add(term.key)
        self.queue.append(term)
        return True

    def remove_at(self, i: int) -> FeatureTerm:
        return self.queue.pop(i)

    def __len__(self) -> int:
        return len(self.queue)


def test_candidate(state: ModelState, ledger: WealthLedger,
                   term: FeatureTerm, tlvl: float, alpha: float,
                   pass_index: int = 0, column=_UNRESOLVED,
                   collinearity_tol: float = COLLINEARITY_TOL):
    """Run one candidate through the gate-spend-compare sequence.

    Returns (decision, state, |t| or None).  The spend always precedes
    the threshold comparison; a candidate is only attempted when wealth
    covers its alpha, a collinear or constant candidate is dropped
    without spending, and the threshold itself is strict.
    `column=None` marks a term whose realized column is constant.
    """
    if ledger.wealth < alpha:
        return HALTED_WEALTH, state, None
    if column is _UNRESOLVED:
        try:
            column = term_column(state.dataset, term)
        except ConstantInteraction:
            column = None
    if column is None:
        return REMOVED_COLLINEAR, state, None
    adj = state.adjusted_vector(column)
    nrm = float(np.linalg.norm(adj))
    if nrm <= collinearity_tol:
        return REMOVED_COLLINEAR, state, None
    ledger.spend(alpha, term.key, pass_index)
    rnorm = float(np.linalg.norm(state.residual))
    if rnorm < 1e-15:
        rho = 0.0
    else:
        rho = float(np.dot(state.residual, adj) / (rnorm * nrm))
        rho = min(1.0, max(-1.0, rho))
    t = _t_from_rho(rho, state.df)
    if abs(t) > tlvl:
        ledger.earn(term.key)
        return REJECTED, state.add_adjusted(adj, term), abs(t)
    return NOT_REJECTED, state, abs(t)


# keep pytest from collecting the public gate function as a test
test_candidate.__test__ = False


def skip_passes(known_t, ledger: WealthLedger, s: int, n: int,
                max_passes: int) -> tuple[int, bool, float]:
    """Jump past passes no known |t| can clear, paying for each skipped test.

    `known_t` maps every remaining candidate to its |t| in stream order.
    Returns (next pass, halted, alpha charged); `halted` means wealth
    died mid-charge at the returned pass.  Raises NoFinitePass when all
    |t| are zero, since no finite threshold is ever cleared.
    """
    if not known_t:
        raise NoFinitePass("no candidates left")
    best = max(known_t.values())
    if best <= 0.0:
        raise NoFinitePass("every remaining |t| is zero")
    root_n = math.sqrt(n)
    target = math.floor(2.0 * math.log2(root_n / best)) + 1
    s_prime = max(s + 1, target)
    while root_n * 2.0 ** (-s_prime / 2.0) >= best:
        s_prime += 1
    charged = 0.0
    for u in range(s + 1, min(s_prime, max_passes + 1)):
        _, alpha_u = pass_parameters(n, u)
        # charge in stream order so a literal run replays bit for bit
        for term in known_t:
            if ledger.wealth < alpha_u:
                return u, True, charged
            ledger.spend(alpha_u, term.key, u)
            charged += alpha_u
    return s_prime, False, charged


def run_rai(dataset: Dataset, config: RaiConfig | None = None,
            generator=None) -> tuple[ModelState, SelectionTrace]:
    """Run the full multi-pass selection over the dataset's columns.

    `generator(selected_terms, newly_added)` is consulted after every
    rejection and may return extra candidate terms; passing
    config.interactions=True installs the product generator.  Returns
    the final model state (selected entries are FeatureTerms) and the
    full trace.
    """
    if config is None:
        config = RaiConfig()
    n = dataset.n
    max_passes = config.resolve_max_passes(n)
    ledger = WealthLedger(config.initial_wealth, config.payout)
    trace = SelectionTrace(ledger=ledger)
    stream = FeatureStream(FeatureTerm.marginal(j) for j in range(dataset.p))
    state = ModelState.empty(dataset)
    if generator is None and config.interactions:
        def generator(selected, newly_added):
            return generate_candidates(
                selected, newly_added,
                max_order=config.max_interaction_order)

    columns: dict = {}

    def column_for(term: FeatureTerm):
        if term.key not in columns:
            try:
                columns[term.key] = term_column(dataset, term)
            except ConstantInteraction:
                columns[term.key] = None
        return columns[term.key]

    termination = None
    s = 1
    while s <= max_passes:
        trace.passes_traversed = max(trace.passes_traversed, s)
        tlvl, alpha = pass_parameters(n, s)
        known_t: dict[FeatureTerm, float] = {}
        rejected_any = False
        i = 0
        while i < len(stream):
            if state.df < 1:
                # saturated model: nothing further is testable
                termination = TERMINATED_STREAM
                break
            term = stream.queue[i]
            before = ledger.wealth
            decision, state, t_abs = test_candidate(
                state, ledger, term, tlvl, alpha, pass_index=s,
                column=column_for(term),
                collinearity_tol=config.collinearity_tol)
            trace.tests.append(TestRecord(
                s, term, t_abs, tlvl, alpha, before, ledger.wealth, decision))
            if decision == HALTED_WEALTH:
                termination = TERMINATED_WEALTH
                break
            if decision == REMOVED_COLLINEAR:
                stream.remove_at(i)
                continue
            if decision == REJECTED:
                stream.remove_at(i)
                rejected_any = True
                if generator is not None:
                    for cand in generator(state.selected, term):
                        stream.append(cand)
                continue
            known_t[term] = t_abs
            i += 1
        if termination is not None:
            break
        if not len(stream):
            termination = TERMINATED_STREAM
            break
        if not rejected_any and config.skip_passes and s < max_passes:
            before = ledger.wealth
            try:
                s_next, halted, charged = skip_passes(
                    known_t, ledger, s, n, max_passes)
            except NoFinitePass:
                termination = TERMINATED_STREAM
                break
            if halted or s_next > s + 1:
                trace.skips.append(SkipRecord(
                    s, s_next, len(known_t), charged, before, ledger.wealth,
                    halted))
            if halted:
                trace.passes_traversed = max(trace.passes_traversed, s_next)
                termination = TERMINATED_WEALTH
                break
            trace.passes_traversed = max(
                trace.passes_traversed, min(s_next - 1, max_passes))
            s = s_next
        else:
            s += 1
    if termination is None:
        termination = TERMINATED_PASSES
    trace.termination = termination
    return state, trace


def fit_terms(dataset: Dataset,
              terms) -> tuple[np.ndarray, float]:
    """Least-squares fit of the response on arbitrary terms.

    Returns (slopes, intercept) on the original data scale, with slopes
    aligned to `terms`.  Used to report a selected model in units the
    caller supplied, including interaction terms.
    """
    terms = list(terms)
    if not terms:
        return np.zeros(0), dataset.response_mean
    cols, means, scales = [], [], []
    for term in terms:
        if term.order == 1:
            j = term.powers[0][0]
            cols.append(dataset.columns[:, j])
            means.append(dataset.raw_means[j])
            scales.append(dataset.raw_scales[j])
        else:
            col, mean, scale = realize_with_stats(term, dataset.raw)
            cols.append(col)
            means.append(mean)
            scales.append(scale)
    M = np.column_stack(cols)
    b, *_ = np.linalg.lstsq(M, dataset.response, rcond=None)
    slopes = dataset.response_scale * b / np.asarray(scales)
    intercept = dataset.response_mean - float(
        np.dot(slopes, np.asarray(means)))
    return slopes, intercept
