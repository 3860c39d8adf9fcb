"""Semi-synthetic survival data generation and ground-truth concordance.

Event times follow a Weibull proportional-hazards model and are drawn by
inverse-transform sampling.  Censoring times come from one of three
mechanisms whose intensity is controlled by a scaling factor epsilon:
a scaled Weibull hazard, an age-informed Weibull hazard, or a uniform
distribution capped at a quantile of the event times.

Randomness is fully reproducible: every draw uses a PCG64 generator on a
named child stream of the caller's seed (events and censoring never share a
stream), and subject i always consumes the i-th variate of its stream.
Dataset-level parallelism therefore only needs per-dataset seeds, available
via :func:`subseed`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import InputError, SurvivalDataset, SurvivalMatrix, TimeGrid
from .engine import ConcordancePolicy, PairCase, concordance, tie_weighted_policy
from .transforms import neg_rmst

_STREAMS = {"events": 0, "censoring": 1}


def _rng(seed: int, stream: str) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAMS[stream],))
    return np.random.Generator(np.random.PCG64(ss))


def subseed(seed: int, *path: int) -> int:
    """Derive a reproducible child seed, e.g. one per generated dataset."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class WeibullPHParams:
    """Weibull proportional-hazards model h(t|x) = shape * t^(shape-1) * scale * e^(x.b)."""

    shape: float
    scale: float
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise InputError("shape must be a positive finite number")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InputError("scale must be a positive finite number")
        beta = np.asarray(self.coefficients, dtype=float).reshape(-1).copy()
        if not np.all(np.isfinite(beta)):
            raise InputError("coefficients must be finite")
        beta.setflags(write=False)
        object.__setattr__(self, "coefficients", beta)

    def linear_predictor(self, covariates: np.ndarray) -> np.ndarray:
        x = np.asarray(covariates, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.coefficients.size:
            raise InputError(
                f"covariates must be (n, {self.coefficients.size}), got {x.shape}"
            )
        return (x * self.coefficients).sum(axis=1)

    def survival_matrix(self, grid: TimeGrid, covariates: np.ndarray) -> SurvivalMatrix:
        """True model curves S(t|x) = exp(-scale * t^shape * e^(x.b)) on a grid."""
        rate = self.scale * np.exp(self.linear_predictor(covariates))
        probs = np.exp(-rate[:, None] * grid.points[None, :] ** self.shape)
        return SurvivalMatrix(grid=grid, probs=probs)


@dataclass(frozen=True)
class WeibullCensoring:
    """Covariate-free Weibull censoring hazard scaled by epsilon (0 = no censoring)."""

    shape: float
    scale: float
    epsilon: float

    def __post_init__(self) -> None:
        if self.shape <= 0 or self.scale <= 0:
            raise InputError("censoring shape and scale must be positive")
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")


@dataclass(frozen=True)
class AgeInformedCensoring:
    """Weibull censoring whose rate depends on one covariate column (e.g. age)."""

    shape: float
    scale: float
    beta_age: float
    epsilon: float
    age_column: int = 0

    def __post_init__(self) -> None:
        if self.shape <= 0 or self.scale <= 0:
            raise InputError("censoring shape and scale must be positive")
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")


@dataclass(frozen=True)
class UniformQuantileCensoring:
    """Uniform censoring on [min event time, (1 - epsilon) quantile of event times]."""

    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise InputError("epsilon must lie in [0, 1) for uniform censoring")


CensoringMechanism = WeibullCensoring | AgeInformedCensoring | UniformQuantileCensoring


def generate_event_times(
    params: WeibullPHParams, covariates: np.ndarray, rng_seed: int
) -> np.ndarray:
    """Uncensored event times by inverse-transform sampling of the Weibull PH model."""
    rng = _rng(rng_seed, "events")
    lp = params.linear_predictor(covariates)
    u = 1.0 - rng.random(lp.size)  # in (0, 1]; avoids log(0)
    return (-np.log(u) / (params.scale * np.exp(lp))) ** (1.0 / params.shape)


def generate_censoring(
    mechanism: CensoringMechanism,
    event_times: np.ndarray,
    covariates: np.ndarray | None,
    rng_seed: int,
) -> np.ndarray:
    """Censoring times under the chosen mechanism; may contain +inf (no censoring)."""
    event_times = np.asarray(event_times, dtype=float)
    n = event_times.size
    rng = _rng(rng_seed, "censoring")

    if isinstance(mechanism, WeibullCensoring):
        if mechanism.epsilon == 0:
            rng.random(n)  # keep the stream layout identical across epsilon values
            return np.full(n, np.inf)
        u = 1.0 - rng.random(n)
        rate = mechanism.epsilon * mechanism.scale
        return (-np.log(u) / rate) ** (1.0 / mechanism.shape)

    if isinstance(mechanism, AgeInformedCensoring):
        if covariates is None:
            raise InputError("age-informed censoring requires covariates")
        x = np.asarray(covariates, dtype=float)
        if x.ndim != 2 or not 0 <= mechanism.age_column < x.shape[1]:
            raise InputError("age column out of range for the given covariates")
        if mechanism.epsilon == 0:
            rng.random(n)
            return np.full(n, np.inf)
        u = 1.0 - rng.random(n)
        rate = (
            mechanism.epsilon
            * mechanism.scale
            * np.exp(mechanism.beta_age * x[:, mechanism.age_column])
        )
        return (-np.log(u) / rate) ** (1.0 / mechanism.shape)

    if isinstance(mechanism, UniformQuantileCensoring):
        lo = float(event_times.min())
        hi = float(np.quantile(event_times, 1.0 - mechanism.epsilon))
        if not hi > lo:
            raise InputError(
                "uniform censoring range is degenerate (all event times equal)"
            )
        return lo + (hi - lo) * rng.random(n)

    raise InputError(f"unknown censoring mechanism {type(mechanism).__name__}")


def assemble(
    event_times: np.ndarray,
    censor_times: np.ndarray,
    covariates: np.ndarray | None = None,
    subject_ids: tuple[str, ...] = (),
) -> SurvivalDataset:
    """Observed data: T = min(event, censoring), event observed iff it is strictly first."""
    event_times = np.asarray(event_times, dtype=float)
    censor_times = np.asarray(censor_times, dtype=float)
    if event_times.shape != censor_times.shape:
        raise InputError("event and censoring time arrays must have equal length")
    times = np.minimum(event_times, censor_times)
    events = (event_times < censor_times).astype(np.int8)
    return SurvivalDataset(
        times=times, events=events, subject_ids=subject_ids, covariates=covariates
    )


#: Handling of tied risk predictions inside the ground-truth concordance.
TIE_EXCLUDE = "exclude"        # tied-prediction pairs leave the comparable set
TIE_HALF_CREDIT = "half_credit"  # comparable with credit 0.5
TIE_ZERO_CREDIT = "zero_credit"  # comparable with credit 0


def _oracle_policy(tied_predictions: str) -> ConcordancePolicy:
    if tied_predictions == TIE_HALF_CREDIT:
        return tie_weighted_policy(0.0, 0.5)
    if tied_predictions == TIE_ZERO_CREDIT:
        return tie_weighted_policy(0.0, 0.0)
    if tied_predictions == TIE_EXCLUDE:
        policy = tie_weighted_policy(0.0, 0.0)
        table = dict(policy.case_table)
        table[PairCase.C1C] = (0.0, 0.0)
        table[PairCase.C2C] = (0.0, 0.0)
        return ConcordancePolicy(case_table=table)
    raise InputError(f"unknown tied-prediction mode {tied_predictions!r}")


def oracle_cindex(
    params: WeibullPHParams,
    covariates: np.ndarray,
    uncensored_times: np.ndarray,
    grid_step: float = 1.0,
    tied_predictions: str = TIE_EXCLUDE,
) -> float:
    """Ground-truth concordance from true model curves and uncensored times.

    Builds the true survival matrix on a step-spaced grid up to the maximum
    uncensored time, reduces it to negative restricted mean survival time,
    and scores it against the uncensored event times (no censoring, so
    weighting and truncation are irrelevant).  The value is a bias reference:
    it never sees censoring.

    With identical covariates the true curves tie exactly; by default such
    pairs are excluded so the result reads as the concordance probability
    among distinguishable pairs.  ``tied_predictions`` switches to half or
    zero credit instead.
    """
    uncensored_times = np.asarray(uncensored_times, dtype=float)
    t_star = float(uncensored_times.max())
    grid = TimeGrid.regular(t_star, step=grid_step)
    sm = params.survival_matrix(grid, covariates)
    risks = neg_rmst(sm, t_star)
    ds = SurvivalDataset(
        times=uncensored_times, events=np.ones(uncensored_times.size, dtype=np.int8)
    )
    estimate, _ = concordance(ds, risks, _oracle_policy(tied_predictions))
    return estimate
