"""Product-limit estimation of survival and censoring distributions.

The same Kaplan-Meier machinery estimates either the event-time survivor
function or, with the event indicator flipped, the censoring survivor
function G(t) = P(C > t) used for inverse-probability-of-censoring weights.
Left limits G(t-) are exposed because one weighting scheme needs the value
just before the observed time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .data import ComputationError, InputError, SurvivalDataset, _readonly

#: Allowed weighting schemes for pairwise estimators.
WEIGHT_UNIFORM = "uniform"
WEIGHT_UNO_SQUARED = "uno_squared"  # 1 / G(T_i)^2
WEIGHT_PEC_PRODUCT = "pec_product"  # 1 / (G(T_i-) * G(T_i))
WEIGHT_SCHEMES = (WEIGHT_UNIFORM, WEIGHT_UNO_SQUARED, WEIGHT_PEC_PRODUCT)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous nonincreasing step function equal to 1 before the first jump.

    ``values[k]`` applies on the half-open interval
    [jump_times[k], jump_times[k+1]); beyond the last jump the final value is
    carried forward.
    """

    jump_times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        jt = np.asarray(self.jump_times, dtype=float).copy()
        vals = np.asarray(self.values, dtype=float).copy()
        if jt.ndim != 1 or vals.shape != jt.shape:
            raise InputError("jump_times and values must be 1-d arrays of equal length")
        if jt.size and not np.all(np.diff(jt) > 0):
            raise InputError("jump times must be strictly increasing")
        if vals.size and (np.any(np.diff(vals) > 0) or vals.min() < 0 or vals.max() > 1):
            raise InputError("values must be nonincreasing within [0, 1]")
        object.__setattr__(self, "jump_times", _readonly(jt))
        object.__setattr__(self, "values", _readonly(vals))

    def evaluate(self, t):
        """Right-continuous value at t (vectorized)."""
        return self._eval(t, side="right")

    def evaluate_left(self, t):
        """Limit from below at t, i.e. the value just before t."""
        return self._eval(t, side="left")

    def _eval(self, t, side):
        t = np.asarray(t, dtype=float)
        if self.values.size == 0:
            out = np.ones_like(t)
        else:
            idx = np.searchsorted(self.jump_times, t, side=side) - 1
            out = np.where(idx < 0, 1.0, self.values[np.clip(idx, 0, None)])
        return float(out) if t.ndim == 0 else out


def km_fit(ds: SurvivalDataset, target: str = "event") -> StepFunction:
    """Kaplan-Meier product-limit fit.

    ``target="event"`` estimates the event-time survivor function;
    ``target="censoring"`` flips the event indicator so censorings act as the
    events, yielding the censoring survivor function G.  At tied times the
    risk set counts every subject with T >= t, so the fit on flipped
    indicators is exactly the flipped-target fit.
    """
    if ds.n == 0:
        raise ComputationError("no records")
    if target == "event":
        d = ds.events == 1
    elif target == "censoring":
        d = ds.events == 0
    else:
        raise InputError(f"unknown target {target!r}")

    order = np.argsort(ds.times, kind="stable")
    times = ds.times[order]
    d = d[order].astype(np.int64)

    uniq, start = np.unique(times, return_index=True)
    n = times.size
    # At-risk count just before each distinct time; events of the chosen kind at it.
    at_risk = n - start
    cum_d = np.concatenate([[0], np.cumsum(d)])
    end = np.concatenate([start[1:], [n]])
    d_at = cum_d[end] - cum_d[start]

    keep = d_at > 0
    if not np.any(keep):
        return StepFunction(np.empty(0), np.empty(0))
    # Exact rational accumulation: the estimate is a product of integer
    # ratios, so carrying it as a Fraction and rounding once per jump keeps
    # e.g. the no-censoring case identical to the empirical survivor function.
    surv = np.empty(int(keep.sum()))
    running = Fraction(1)
    for k, (d_k, n_k) in enumerate(zip(d_at[keep], at_risk[keep])):
        running *= Fraction(int(n_k) - int(d_k), int(n_k))
        surv[k] = float(running)
    return StepFunction(uniq[keep], surv)


def ipcw_weights(
    g: StepFunction, ds: SurvivalDataset, scheme: str
) -> np.ndarray:
    """Per-subject censoring weights from a fitted censoring survivor function.

    Returns 1/G(T_i)^2 for ``uno_squared`` or 1/(G(T_i-) G(T_i)) for
    ``pec_product``; ``uniform`` gives all ones.  Subjects whose weight would
    divide by G = 0 get NaN: their pairs are dropped (and counted) by the
    estimator instead of contributing unbounded weights.
    """
    if scheme == WEIGHT_UNIFORM:
        return np.ones(ds.n)
    g_at = np.asarray(g.evaluate(ds.times), dtype=float)
    if scheme == WEIGHT_UNO_SQUARED:
        denom = g_at * g_at
    elif scheme == WEIGHT_PEC_PRODUCT:
        denom = np.asarray(g.evaluate_left(ds.times), dtype=float) * g_at
    else:
        raise InputError(f"unknown weight scheme {scheme!r}")
    return np.where(denom > 0, 1.0 / np.where(denom > 0, denom, 1.0), np.nan)
