"""Generalized pairwise concordance estimator.

One engine evaluates every estimator variant in this package: it iterates
ordered subject pairs, classifies each pair into the case taxonomy of
:mod:`survconcord.data`, and accumulates

    denominator += W_i * comparable_weight(case)
    numerator   += W_i * comparable_weight(case) * credit(case)

under a :class:`ConcordancePolicy` that fixes the per-case weights, the tie
tolerance for predictions, the censoring-weight scheme, the time truncation
and a final folding rule.  Published estimators and software behaviours are
just different policies (see :mod:`survconcord.profiles`).

Ranking can come from a scalar risk per subject or, for the time-dependent
variant, from survival probabilities evaluated at the anchor subject's time.

Reductions are performed blockwise over anchor subjects and combined in fixed
subject order, so results are bit-identical regardless of block size or
thread settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .data import (
    CASE_INDEX,
    CASE_ORDER,
    ComputationError,
    InputError,
    PairCase,
    RankRelation,
    SurvivalDataset,
    SurvivalMatrix,
    as_risk_array,
    classify_pair,
)
from .km import (
    WEIGHT_SCHEMES,
    WEIGHT_UNIFORM,
    WEIGHT_UNO_SQUARED,
    StepFunction,
    ipcw_weights,
    km_fit,
)

TRUNC_NONE = "none"
TRUNC_VALUE = "value"
TRUNC_MAX_UNCENSORED = "max_uncensored"

FOLD_IDENTITY = "identity"
FOLD_MAX_COMPLEMENT = "max_with_complement"

G_SOURCE_TEST_SET = "test_set"
G_SOURCE_PROVIDED = "provided"

#: Cases that no estimator may count: the ordering is either uninformative or
#: already counted through the opposite pair orientation.
ALWAYS_EXCLUDED = (PairCase.C3, PairCase.C4, PairCase.C8)

_REL_CODES = (RankRelation.GREATER, RankRelation.LESS, RankRelation.TIED)

# (sign+1, delta_i, delta_j, rel) -> case index; single source of truth is
# classify_pair, evaluated once over the full grid.
_CASE_LOOKUP = np.empty((3, 2, 2, 3), dtype=np.int8)
for _s, (_ti, _tj) in enumerate(((0.0, 1.0), (1.0, 1.0), (1.0, 0.0))):
    for _di in (0, 1):
        for _dj in (0, 1):
            for _r, _rel in enumerate(_REL_CODES):
                _CASE_LOOKUP[_s, _di, _dj, _r] = CASE_INDEX[
                    classify_pair(_ti, _di, _tj, _dj, _rel)
                ]


@dataclass(frozen=True)
class Truncation:
    """Restriction of comparable pairs to anchors with T_i strictly below tau."""

    mode: str = TRUNC_NONE
    value: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in (TRUNC_NONE, TRUNC_VALUE, TRUNC_MAX_UNCENSORED):
            raise InputError(f"unknown truncation mode {self.mode!r}")
        if self.mode == TRUNC_VALUE:
            if self.value is None or not math.isfinite(self.value):
                raise InputError("truncation value must be a finite number")
        elif self.value is not None:
            raise InputError(f"truncation mode {self.mode!r} takes no value")

    def resolve(self, ds: SurvivalDataset) -> float | None:
        """Concrete tau for this dataset, or None when no truncation applies."""
        if self.mode == TRUNC_NONE:
            return None
        if self.mode == TRUNC_VALUE:
            return float(self.value)  # type: ignore[arg-type]
        uncensored = ds.times[ds.events == 1]
        if uncensored.size == 0:
            raise ComputationError(
                "cannot resolve truncation: dataset has no uncensored times"
            )
        return float(uncensored.max())


NO_TRUNCATION = Truncation()


@dataclass(frozen=True)
class CaseRule:
    """Contribution of one pair case: comparability weight and concordance credit."""

    comparable_weight: float
    credit: float = 0.0


def _normalize_case_table(
    table: Mapping[PairCase, CaseRule | tuple[float, float]]
) -> dict[PairCase, CaseRule]:
    full: dict[PairCase, CaseRule] = {}
    for case in CASE_ORDER:
        rule = table.get(case)
        if rule is None:
            full[case] = CaseRule(0.0, 0.0)
        elif isinstance(rule, CaseRule):
            full[case] = rule
        else:
            full[case] = CaseRule(*rule)
    return full


@dataclass(frozen=True)
class ConcordancePolicy:
    """Complete specification of pair inclusion, credit, weighting and truncation.

    ``case_table`` maps each pair case to a comparability weight (>= 0, with
    0 meaning excluded) and a credit in [0, 1].  Predictions are tied when
    their absolute difference is at most ``tie_tolerance``.
    ``final_fold="max_with_complement"`` reports max(C, 1 - C).
    """

    case_table: Mapping[PairCase, CaseRule]
    tie_tolerance: float = 0.0
    weight_scheme: str = WEIGHT_UNIFORM
    g_source: str = G_SOURCE_TEST_SET
    truncation: Truncation = NO_TRUNCATION
    final_fold: str = FOLD_IDENTITY

    def __post_init__(self) -> None:
        table = _normalize_case_table(self.case_table)
        for case, rule in table.items():
            if rule.comparable_weight < 0 or not math.isfinite(rule.comparable_weight):
                raise InputError(f"case {case.value}: comparable weight must be >= 0")
            if rule.comparable_weight > 0 and not 0.0 <= rule.credit <= 1.0:
                raise InputError(f"case {case.value}: credit must lie in [0, 1]")
        for case in ALWAYS_EXCLUDED:
            if table[case].comparable_weight != 0:
                raise InputError(f"case {case.value} cannot be comparable")
        object.__setattr__(self, "case_table", MappingProxyType(table))
        if self.tie_tolerance < 0:
            raise InputError("tie tolerance must be nonnegative")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            raise InputError(f"unknown weight scheme {self.weight_scheme!r}")
        if self.g_source not in (G_SOURCE_TEST_SET, G_SOURCE_PROVIDED):
            raise InputError(f"unknown g_source {self.g_source!r}")
        if self.final_fold not in (FOLD_IDENTITY, FOLD_MAX_COMPLEMENT):
            raise InputError(f"unknown final fold {self.final_fold!r}")

    @cached_property
    def _comparable_by_case(self) -> np.ndarray:
        return np.array(
            [self.case_table[c].comparable_weight for c in CASE_ORDER], dtype=float
        )

    @cached_property
    def _credit_by_case(self) -> np.ndarray:
        return np.array([self.case_table[c].credit for c in CASE_ORDER], dtype=float)

    def replace(self, **changes) -> "ConcordancePolicy":
        fields = dict(
            case_table=self.case_table,
            tie_tolerance=self.tie_tolerance,
            weight_scheme=self.weight_scheme,
            g_source=self.g_source,
            truncation=self.truncation,
            final_fold=self.final_fold,
        )
        fields.update(changes)
        return ConcordancePolicy(**fields)


def tie_weighted_policy(
    omega_o: float,
    omega_p: float,
    *,
    tie_tolerance: float = 0.0,
    weight_scheme: str = WEIGHT_UNIFORM,
    g_source: str = G_SOURCE_TEST_SET,
    truncation: Truncation = NO_TRUNCATION,
    final_fold: str = FOLD_IDENTITY,
) -> ConcordancePolicy:
    """Policy for the classical tie-weight family.

    ``omega_o`` is the comparability weight of tied-time pairs where the
    anchor's event was observed and the other subject is censored;
    ``omega_p`` is the credit granted to tied predictions.  ``omega_o = 0``
    and ``omega_p = 0`` give the plain ignore-all-ties estimator.
    """
    if omega_o < 0:
        raise InputError("omega_o must be nonnegative")
    if not 0.0 <= omega_p <= 1.0:
        raise InputError("omega_p must lie in [0, 1]")
    table = {
        PairCase.C1A: (1.0, 1.0),
        PairCase.C1B: (1.0, 0.0),
        PairCase.C1C: (1.0, omega_p),
        PairCase.C2A: (1.0, 1.0),
        PairCase.C2B: (1.0, 0.0),
        PairCase.C2C: (1.0, omega_p),
        PairCase.C6A: (omega_o, 1.0),
        PairCase.C6B: (omega_o, 0.0),
        PairCase.C6C: (omega_o, omega_p),
    }
    return ConcordancePolicy(
        case_table=table,
        tie_tolerance=tie_tolerance,
        weight_scheme=weight_scheme,
        g_source=g_source,
        truncation=truncation,
        final_fold=final_fold,
    )


def antolini_policy(adjusted: bool = False) -> ConcordancePolicy:
    """Case table for distribution-based ranking at the anchor's time.

    The plain variant counts tied-time pairs only when the anchor's event was
    observed against a censored partner, and gives tied survival values no
    credit.  The adjusted variant additionally credits tied predictions with
    0.5, includes tied-time event/event pairs and tied-time pairs whose
    anchor is the censored member (crediting the pair when the censored
    subject is ranked less risky).
    """
    if adjusted:
        table = {
            PairCase.C1A: (1.0, 1.0),
            PairCase.C1B: (1.0, 0.0),
            PairCase.C1C: (1.0, 0.5),
            PairCase.C2A: (1.0, 1.0),
            PairCase.C2B: (1.0, 0.0),
            PairCase.C2C: (1.0, 0.5),
            PairCase.C5A: (1.0, 0.5),
            PairCase.C5B: (1.0, 0.5),
            PairCase.C5C: (1.0, 1.0),
            PairCase.C6A: (1.0, 1.0),
            PairCase.C6B: (1.0, 0.0),
            PairCase.C6C: (1.0, 0.5),
            PairCase.C7A: (1.0, 0.0),
            PairCase.C7B: (1.0, 1.0),
            PairCase.C7C: (1.0, 0.5),
        }
    else:
        table = {
            PairCase.C1A: (1.0, 1.0),
            PairCase.C1B: (1.0, 0.0),
            PairCase.C1C: (1.0, 0.0),
            PairCase.C2A: (1.0, 1.0),
            PairCase.C2B: (1.0, 0.0),
            PairCase.C2C: (1.0, 0.0),
            PairCase.C6A: (1.0, 1.0),
            PairCase.C6B: (1.0, 0.0),
            PairCase.C6C: (1.0, 0.0),
        }
    return ConcordancePolicy(case_table=table)


@dataclass(frozen=True)
class PairTally:
    """Per-case pair counts and weighted sums behind one estimate.

    ``case_counts`` holds raw (unweighted) pair counts per case after
    truncation, excluding self-pairs and pairs dropped for undefined weights;
    counts are kept even for cases the policy excludes so that decompositions
    can be computed afterwards.  ``numerator``/``denominator`` are the
    weighted credit and comparability totals.
    """

    case_counts: Mapping[str, int]
    case_comparable: Mapping[str, float]
    case_credit: Mapping[str, float]
    numerator: float
    denominator: float
    dropped_pairs: int
    anchors_beyond_grid: int
    policy: ConcordancePolicy

    def count(self, *labels: str) -> int:
        return sum(self.case_counts.get(lab, 0) for lab in labels)

    def to_dict(self) -> dict:
        per_case = {
            lab: {
                "pairs": self.case_counts[lab],
                "comparable": self.case_comparable[lab],
                "credit": self.case_credit[lab],
            }
            for lab in self.case_counts
            if self.case_counts[lab] > 0 or self.case_comparable[lab] > 0
        }
        return {
            "per_case": per_case,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "dropped_pairs": self.dropped_pairs,
            "anchors_beyond_grid": self.anchors_beyond_grid,
        }


_DEFAULT_BLOCK = 512
_BLOCK_CELL_BUDGET = 1 << 22  # cap anchor-block width so temporaries stay modest


def _block_size(n: int, block: int | None) -> int:
    if block is not None:
        return block
    return int(np.clip(_BLOCK_CELL_BUDGET // max(n, 1), 8, _DEFAULT_BLOCK))


def _rank_codes(diff: np.ndarray, tol: float) -> np.ndarray:
    """Map anchor-minus-other risk differences to rel codes 0/1/2."""
    return np.where(diff > tol, 0, np.where(diff < -tol, 1, 2)).astype(np.int8)


def _accumulate_pairs(
    times: np.ndarray,
    events: np.ndarray,
    policy: ConcordancePolicy,
    anchor_weights: np.ndarray,
    rel_block: Callable[[int, int], np.ndarray],
    tau: float | None,
    anchors_beyond_grid: int = 0,
    block: int | None = None,
) -> PairTally:
    n = times.size
    block = _block_size(n, block)
    n_cases = len(CASE_ORDER)
    counts = np.zeros(n_cases, dtype=np.int64)
    comp = np.zeros(n_cases)
    cred = np.zeros(n_cases)
    dropped = 0

    cw = policy._comparable_by_case
    credit = policy._credit_by_case
    ev = events.astype(np.intp)
    active_anchor = np.ones(n, dtype=bool) if tau is None else times < tau
    weight_undefined = np.isnan(anchor_weights)

    for a0 in range(0, n, block):
        a1 = min(a0 + block, n)
        ti = times[a0:a1, None]
        sign_idx = np.where(
            ti < times[None, :], 0, np.where(ti > times[None, :], 2, 1)
        ).astype(np.intp)
        rel = rel_block(a0, a1).astype(np.intp)
        case_idx = _CASE_LOOKUP[sign_idx, ev[a0:a1, None], ev[None, :], rel].astype(
            np.intp
        )

        active = np.ones(case_idx.shape, dtype=bool)
        rows = np.arange(a0, a1)
        active[rows - a0, rows] = False  # no self-pairs
        active &= active_anchor[a0:a1, None]

        cw_pair = cw[case_idx]
        contributing = active & (cw_pair > 0)
        nan_rows = weight_undefined[a0:a1, None]
        dropped_mask = contributing & nan_rows
        dropped += int(np.count_nonzero(dropped_mask))

        counted = active & ~dropped_mask
        counts += np.bincount(case_idx[counted], minlength=n_cases)

        ok = contributing & ~nan_rows
        if np.any(ok):
            idx_ok = case_idx[ok]
            w_pair = np.broadcast_to(
                anchor_weights[a0:a1, None], case_idx.shape
            )[ok] * cw_pair[ok]
            comp += np.bincount(idx_ok, weights=w_pair, minlength=n_cases)
            cred += np.bincount(
                idx_ok, weights=w_pair * credit[idx_ok], minlength=n_cases
            )

    labels = [c.value for c in CASE_ORDER]
    return PairTally(
        case_counts=MappingProxyType({lab: int(v) for lab, v in zip(labels, counts)}),
        case_comparable=MappingProxyType(
            {lab: float(v) for lab, v in zip(labels, comp)}
        ),
        case_credit=MappingProxyType({lab: float(v) for lab, v in zip(labels, cred)}),
        numerator=float(cred.sum()),
        denominator=float(comp.sum()),
        dropped_pairs=dropped,
        anchors_beyond_grid=anchors_beyond_grid,
        policy=policy,
    )


def _resolve_weights(
    ds: SurvivalDataset, policy: ConcordancePolicy, g: StepFunction | None
) -> np.ndarray:
    if policy.weight_scheme == WEIGHT_UNIFORM:
        return np.ones(ds.n)
    if g is None:
        if policy.g_source == G_SOURCE_PROVIDED:
            raise InputError(
                "policy requires an externally fitted censoring distribution"
            )
        g = km_fit(ds, target="censoring")
    return ipcw_weights(g, ds, policy.weight_scheme)


def _finalize(numerator: float, denominator: float, final_fold: str) -> float:
    if denominator == 0:
        raise ComputationError("no comparable pairs")
    estimate = numerator / denominator
    if final_fold == FOLD_MAX_COMPLEMENT:
        return max(estimate, 1.0 - estimate)
    return estimate


def concordance(
    ds: SurvivalDataset,
    risks,
    policy: ConcordancePolicy,
    g: StepFunction | None = None,
) -> tuple[float, PairTally]:
    """Concordance estimate for scalar risks under a policy.

    ``g`` optionally supplies a fitted censoring survivor function; when the
    policy weights pairs and ``g`` is omitted, the censoring distribution is
    fitted on ``ds`` itself (``g_source="test_set"``), or an error is raised
    for policies that require an external fit.
    """
    m = as_risk_array(risks, ds.n)
    weights = _resolve_weights(ds, policy, g)
    tau = policy.truncation.resolve(ds)
    tol = policy.tie_tolerance

    def rel_block(a0: int, a1: int) -> np.ndarray:
        return _rank_codes(m[a0:a1, None] - m[None, :], tol)

    tally = _accumulate_pairs(ds.times, ds.events, policy, weights, rel_block, tau)
    return _finalize(tally.numerator, tally.denominator, policy.final_fold), tally


def concordance_td(
    ds: SurvivalDataset, sm: SurvivalMatrix, variant: str = "antolini"
) -> tuple[float, PairTally]:
    """Time-dependent concordance ranking by survival at the anchor's time.

    For each ordered pair the predicted curves of both subjects are evaluated
    at the anchor's observed time via step lookup on the grid; the subject
    with the smaller survival value is ranked riskier.  ``variant`` selects
    the plain or the tie-adjusted case table (see :func:`antolini_policy`).
    Anchor times beyond the grid evaluate at the last grid point and are
    flagged in the tally.
    """
    if variant not in ("antolini", "adj_antolini"):
        raise InputError(f"unknown variant {variant!r}")
    if sm.n != ds.n:
        raise InputError("survival matrix is not aligned with the dataset")
    policy = antolini_policy(adjusted=variant == "adj_antolini")

    grid = sm.grid.points
    col = np.searchsorted(grid, ds.times, side="right") - 1
    beyond = int(np.count_nonzero(ds.times > grid[-1]))
    below = col < 0
    col_clipped = np.clip(col, 0, grid.size - 1)
    weights = np.ones(ds.n)

    def rel_block(a0: int, a1: int) -> np.ndarray:
        # s_others[r, j] = S(T_anchor | x_j); curves before the grid start at 1.
        s_others = sm.probs[:, col_clipped[a0:a1]].T.copy()
        s_others[below[a0:a1], :] = 1.0
        s_own = s_others[np.arange(a1 - a0), np.arange(a0, a1)]
        return _rank_codes(s_others - s_own[:, None], policy.tie_tolerance)

    tally = _accumulate_pairs(
        ds.times, ds.events, policy, weights, rel_block, tau=None,
        anchors_beyond_grid=beyond,
    )
    return _finalize(tally.numerator, tally.denominator, policy.final_fold), tally


@dataclass(frozen=True)
class DecompositionReport:
    """Weighted-average breakdown of a tie-weighted estimate.

    The estimate splits into a strict-ordering block (pairs where the anchor
    fails strictly first) and a tied-time block (anchor event observed, other
    censored), mixed with weight ``alpha``.  Each block separates the fully
    concordant share from the tied-prediction share that ``omega_p``
    credits.  Blocks without pairs are reported as None and contribute
    nothing.
    """

    alpha: float
    strict_concordant: float | None
    strict_tied_predictions: float | None
    tied_time_concordant: float | None
    tied_time_tied_predictions: float | None
    omega_o: float
    omega_p: float
    recombined: float


def decompose(tally: PairTally, omega_p: float) -> DecompositionReport:
    """Split a uniform-weight tie-family tally into its weighted-average blocks.

    Requires a tally produced with uniform weights by a policy of the
    :func:`tie_weighted_policy` family whose tied-prediction credit equals
    ``omega_p``; recombining the blocks reproduces the original estimate.
    """
    policy = tally.policy
    if policy.weight_scheme != WEIGHT_UNIFORM:
        raise InputError("decomposition is defined for uniform weights only")
    omega_o = policy.case_table[PairCase.C6A].comparable_weight
    expected = tie_weighted_policy(omega_o, omega_p)
    for case in CASE_ORDER:
        got, want = policy.case_table[case], expected.case_table[case]
        bad_weight = got.comparable_weight != want.comparable_weight
        bad_credit = want.comparable_weight > 0 and got.credit != want.credit
        if bad_weight or bad_credit:
            raise InputError(
                "tally was not produced by a tie-weighted policy matching omega_p"
            )

    sum_a = tally.count("1A", "1B", "1C", "2A", "2B", "2C")
    sum_ac = tally.count("1A", "2A")
    sum_ad = tally.count("1C", "2C")
    sum_b = tally.count("6A", "6B", "6C")
    sum_bc = tally.count("6A")
    sum_bd = tally.count("6C")

    denom = sum_a + omega_o * sum_b
    if denom == 0:
        raise ComputationError("no comparable pairs")
    alpha = sum_a / denom

    strict_c = sum_ac / sum_a if sum_a else None
    strict_d = sum_ad / sum_a if sum_a else None
    tied_c = sum_bc / sum_b if sum_b else None
    tied_d = sum_bd / sum_b if sum_b else None

    block_strict = (strict_c + omega_p * strict_d) if sum_a else 0.0
    block_tied = (tied_c + omega_p * tied_d) if sum_b else 0.0
    recombined = alpha * block_strict + (1.0 - alpha) * block_tied

    return DecompositionReport(
        alpha=alpha,
        strict_concordant=strict_c,
        strict_tied_predictions=strict_d,
        tied_time_concordant=tied_c,
        tied_time_tied_predictions=tied_d,
        omega_o=omega_o,
        omega_p=omega_p,
        recombined=recombined,
    )


BRUTE_FORCE_LIMIT = 2000


def brute_force_oracle(
    ds: SurvivalDataset,
    risks,
    policy: ConcordancePolicy,
    g: StepFunction | None = None,
) -> float:
    """Reference implementation: plain double loop over ordered pairs.

    Kept deliberately naive (scalar classification and accumulation, no
    shared intermediates with the vectorized path) so it can serve as an
    independent check; guarded to small inputs.
    """
    if ds.n > BRUTE_FORCE_LIMIT:
        raise InputError(f"brute force reference is limited to n <= {BRUTE_FORCE_LIMIT}")
    m = as_risk_array(risks, ds.n)
    tau = policy.truncation.resolve(ds)
    tol = policy.tie_tolerance

    if policy.weight_scheme == WEIGHT_UNIFORM:
        g = None
    elif g is None:
        if policy.g_source == G_SOURCE_PROVIDED:
            raise InputError(
                "policy requires an externally fitted censoring distribution"
            )
        g = km_fit(ds, target="censoring")

    rules = {case: policy.case_table[case] for case in CASE_ORDER}
    times, events = ds.times, ds.events
    num = 0.0
    den = 0.0
    for i in range(ds.n):
        ti, di, mi = float(times[i]), int(events[i]), m[i]
        if tau is not None and not ti < tau:
            continue
        if g is None:
            wi = 1.0
        else:
            g_at = g.evaluate(ti)
            if policy.weight_scheme == WEIGHT_UNO_SQUARED:
                denom_w = g_at * g_at
            else:
                denom_w = g.evaluate_left(ti) * g_at
            wi = 1.0 / denom_w if denom_w > 0 else math.nan
        for j in range(ds.n):
            if i == j:
                continue
            diff = mi - m[j]
            if diff > tol:
                rel = RankRelation.GREATER
            elif diff < -tol:
                rel = RankRelation.LESS
            else:
                rel = RankRelation.TIED
            rule = rules[classify_pair(ti, di, float(times[j]), int(events[j]), rel)]
            if rule.comparable_weight == 0 or math.isnan(wi):
                continue
            den += wi * rule.comparable_weight
            num += wi * rule.comparable_weight * rule.credit
    return _finalize(num, den, policy.final_fold)
