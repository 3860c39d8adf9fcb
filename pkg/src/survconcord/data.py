"""Core domain types for right-censored survival data and the ordered-pair taxonomy.

Every concordance estimator in this package is driven by the same
classification of ordered subject pairs (i, j): the sign of T_i - T_j, the
two event indicators, and the rank relation of the model predictions jointly
determine a case label. Policies then attach a comparability weight and a
concordance credit to each label.

Subject order is the canonical alignment key: datasets, risk vectors and
survival matrices are matched positionally, never by id.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class InputError(ValueError):
    """Raised for malformed or inconsistent user input."""


class ComputationError(RuntimeError):
    """Raised when an estimator cannot produce a value (e.g. no comparable pairs)."""


class RankRelation(enum.Enum):
    """Risk ordering of a pair: is the anchor subject predicted riskier?

    For scalar risks this is the ordering of M(x_i) vs M(x_j).  For
    distribution-based ranking it is derived from survival probabilities
    evaluated at the anchor's time, where *smaller survival means greater
    risk*.
    """

    GREATER = "greater"
    LESS = "less"
    TIED = "tied"


class PairCase(enum.Enum):
    """Ordered-pair case labels.

    Cases 1x/2x: anchor fails strictly first and is uncensored, split by the
    other subject's status and the prediction rank (A: anchor riskier,
    B: anchor less risky, C: tied predictions).  Cases 3/4: the pair carries
    no usable ordering anchored at i; pairs whose anchor has the *later*
    time also land here so that each unordered pair is counted at most once,
    via its earlier subject.  Cases 5x/6x/7x/8: tied observed times, split by
    the status pattern (1,1) / (1,0) / (0,1) / (0,0) and the rank.
    """

    C1A = "1A"
    C1B = "1B"
    C1C = "1C"
    C2A = "2A"
    C2B = "2B"
    C2C = "2C"
    C3 = "3"
    C4 = "4"
    C5A = "5A"
    C5B = "5B"
    C5C = "5C"
    C6A = "6A"
    C6B = "6B"
    C6C = "6C"
    C7A = "7A"
    C7B = "7B"
    C7C = "7C"
    C8 = "8"


#: Fixed case order used for array-backed policy lookups and tallies.
CASE_ORDER: tuple[PairCase, ...] = tuple(PairCase)
CASE_INDEX: dict[PairCase, int] = {case: k for k, case in enumerate(CASE_ORDER)}

_SUFFIX = {RankRelation.GREATER: "A", RankRelation.LESS: "B", RankRelation.TIED: "C"}


def classify_pair(
    ti: float, di: int, tj: float, dj: int, rel: RankRelation
) -> PairCase:
    """Classify the ordered pair (i, j) anchored at subject i.

    ``rel`` is the prediction rank of i relative to j (greater = riskier).
    Pairs with ``ti > tj`` map to case 3 when the earlier subject's event was
    observed (the pair is counted through the opposite ordering) and to
    case 4 otherwise; both are excluded by every shipped policy.
    """
    if ti < tj:
        if di == 1:
            family = "1" if dj == 1 else "2"
            return PairCase(family + _SUFFIX[rel])
        return PairCase.C3 if dj == 1 else PairCase.C4
    if ti > tj:
        return PairCase.C3 if dj == 1 else PairCase.C4
    # Tied observed times.
    if di == 1 and dj == 1:
        return PairCase("5" + _SUFFIX[rel])
    if di == 1 and dj == 0:
        return PairCase("6" + _SUFFIX[rel])
    if di == 0 and dj == 1:
        return PairCase("7" + _SUFFIX[rel])
    return PairCase.C8


@dataclass(frozen=True)
class SurvivalRecord:
    """One subject: observed time and event indicator (1 = event, 0 = censored)."""

    subject_id: str
    time: float
    event: int

    def violations(self) -> list[str]:
        out = []
        if not math.isfinite(self.time):
            out.append(f"subject {self.subject_id!r}: non-finite time {self.time!r}")
        elif self.time < 0:
            out.append(f"subject {self.subject_id!r}: negative time {self.time!r}")
        if self.event not in (0, 1):
            out.append(f"subject {self.subject_id!r}: non-binary event {self.event!r}")
        return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SurvivalDataset:
    """Aligned arrays of observed times, event indicators and optional covariates.

    Immutable after construction; all downstream code relies on positional
    alignment with risk vectors and survival matrices.
    """

    times: np.ndarray
    events: np.ndarray
    subject_ids: tuple[str, ...] = ()
    covariates: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = _readonly(np.asarray(self.times, dtype=float).copy())
        events = _readonly(np.asarray(self.events, dtype=np.int8).copy())
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "events", events)
        if times.ndim != 1 or events.shape != times.shape:
            raise InputError("times and events must be 1-d arrays of equal length")
        if not self.subject_ids:
            object.__setattr__(
                self, "subject_ids", tuple(str(k) for k in range(times.size))
            )
        elif len(self.subject_ids) != times.size:
            raise InputError("subject_ids length does not match times")
        if self.covariates is not None:
            cov = np.asarray(self.covariates, dtype=float)
            if cov.ndim != 2 or cov.shape[0] != times.size:
                raise InputError("covariates must be an (n, p) array aligned with times")
            object.__setattr__(self, "covariates", _readonly(cov.copy()))

    @classmethod
    def from_records(
        cls,
        records: Iterable[SurvivalRecord],
        covariates: np.ndarray | None = None,
    ) -> "SurvivalDataset":
        records = list(records)
        return cls(
            times=np.array([r.time for r in records], dtype=float),
            events=np.array([r.event for r in records], dtype=np.int8),
            subject_ids=tuple(r.subject_id for r in records),
            covariates=covariates,
        )

    @property
    def n(self) -> int:
        return int(self.times.size)

    def __len__(self) -> int:
        return self.n

    @property
    def n_events(self) -> int:
        return int(np.sum(self.events == 1))

    def records(self) -> list[SurvivalRecord]:
        return [
            SurvivalRecord(sid, float(t), int(e))
            for sid, t, e in zip(self.subject_ids, self.times, self.events)
        ]

    def subset(self, indices: np.ndarray) -> "SurvivalDataset":
        """Positional subset (used by resampling); preserves covariates."""
        indices = np.asarray(indices, dtype=int)
        return SurvivalDataset(
            times=self.times[indices],
            events=self.events[indices],
            subject_ids=tuple(self.subject_ids[i] for i in indices),
            covariates=None if self.covariates is None else self.covariates[indices],
        )


@dataclass(frozen=True)
class ValidationReport:
    """List of human-readable violations; an empty list means the input is accepted."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_dataset(ds: SurvivalDataset) -> ValidationReport:
    """Check record-level invariants without raising.

    Flags negative or non-finite times, non-binary event indicators and
    covariate dimension mismatches.
    """
    out: list[str] = []
    for rec in ds.records():
        out.extend(rec.violations())
    if ds.covariates is not None and not np.all(np.isfinite(ds.covariates)):
        out.append("covariates contain non-finite values")
    return ValidationReport(tuple(out))


def validate_covariate_rows(rows: Sequence[Sequence[float]]) -> list[str]:
    """Report dimension mismatches for raw per-subject covariate rows."""
    dims = {len(r) for r in rows}
    if len(dims) > 1:
        return [f"covariate dimension mismatch: found dimensions {sorted(dims)}"]
    return []


@dataclass(frozen=True)
class RiskVector:
    """One finite scalar risk per subject, higher meaning riskier."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).copy()
        if values.ndim != 1:
            raise InputError("risk values must be a 1-d array")
        if not np.all(np.isfinite(values)):
            raise InputError("risk values must all be finite")
        object.__setattr__(self, "values", _readonly(values))

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return int(self.values.size)


def as_risk_array(risks, n: int) -> np.ndarray:
    """Coerce a RiskVector or array-like to a validated float array of length n."""
    values = np.asarray(risks, dtype=float)
    if values.ndim != 1 or values.size != n:
        raise InputError(f"risk vector must have length {n}, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InputError("risk vector contains non-finite values")
    return values


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, finite, nonnegative evaluation times."""

    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).copy()
        if points.ndim != 1 or points.size == 0:
            raise InputError("grid must be a non-empty 1-d array")
        if not np.all(np.isfinite(points)):
            raise InputError("grid contains non-finite values")
        if points[0] < 0:
            raise InputError("grid must start at a nonnegative time")
        if points.size > 1 and not np.all(np.diff(points) > 0):
            raise InputError("grid must be strictly increasing")
        object.__setattr__(self, "points", _readonly(points))

    def __len__(self) -> int:
        return int(self.points.size)

    @classmethod
    def regular(cls, stop: float, step: float = 1.0, start: float = 0.0) -> "TimeGrid":
        """Grid {start, start+step, ...} up to and including stop (when hit exactly)."""
        if step <= 0:
            raise InputError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-12)) + 1
        if count < 1:
            raise InputError("grid stop precedes start")
        return cls(start + step * np.arange(count))


# Rows of a survival matrix must be nonincreasing; wiggle up to this tolerance
# (e.g. from upstream interpolation) is clamped, anything larger is rejected
# because distribution-based ranking assumes monotone curves.
MONOTONICITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SurvivalMatrix:
    """Per-subject survival probabilities over a shared time grid.

    ``probs[i, k]`` is the predicted probability that subject i survives past
    ``grid.points[k]``.  Rows are validated to be within [0, 1] and
    nonincreasing up to ``MONOTONICITY_TOLERANCE``.
    """

    grid: TimeGrid
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).copy()
        if probs.ndim != 2 or probs.shape[1] != len(self.grid):
            raise InputError(
                f"probs must be (n, {len(self.grid)}) to match the grid, "
                f"got shape {probs.shape}"
            )
        if not np.all(np.isfinite(probs)):
            raise InputError("survival probabilities contain non-finite values")
        tol = MONOTONICITY_TOLERANCE
        if probs.size and (probs.min() < -tol or probs.max() > 1.0 + tol):
            raise InputError("survival probabilities outside [0, 1]")
        probs = np.clip(probs, 0.0, 1.0)
        if probs.shape[1] > 1:
            rises = np.diff(probs, axis=1)
            worst = rises.max(initial=0.0)
            if worst > tol:
                rows = np.unique(np.nonzero(rises > tol)[0])
                raise InputError(
                    f"survival rows increase over time beyond tolerance "
                    f"(worst rise {worst:.3e}, rows {rows[:5].tolist()})"
                )
            probs = np.minimum.accumulate(probs, axis=1)
        object.__setattr__(self, "probs", _readonly(probs))

    @property
    def n(self) -> int:
        return int(self.probs.shape[0])

    def step_lookup(self, t: float | np.ndarray) -> np.ndarray:
        """Evaluate every row at time(s) t with previous-point step lookup.

        Times before the first grid point evaluate to 1 (curves are anchored
        at S(0) = 1); times beyond the last grid point carry the last value
        forward.
        """
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.grid.points, t, side="right") - 1
        scalar = idx.ndim == 0
        idx = np.atleast_1d(idx)
        before = idx < 0
        idx = np.clip(idx, 0, len(self.grid) - 1)
        out = self.probs[:, idx]
        if np.any(before):
            out = out.copy()
            out[:, before] = 1.0
        return out[:, 0] if scalar else out
