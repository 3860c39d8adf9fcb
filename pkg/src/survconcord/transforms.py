"""Reductions of survival matrices to scalar risks, and grid interpolation.

Scalar-risk estimators need the predicted survival distribution collapsed to
one number per subject.  Three reductions are provided: the event
probability at a fixed time, expected mortality (summed cumulative hazard
over the grid) and the negative restricted mean survival time.  Linear
interpolation onto a common grid makes predictions from models with
different native time resolutions comparable.
"""

from __future__ import annotations

import numpy as np

from .data import ComputationError, InputError, SurvivalMatrix, TimeGrid

#: Default evaluation horizon and common grid used for cross-model comparison;
#: both are overridable wherever they appear.
DEFAULT_HORIZON = 355.0


def default_common_grid() -> TimeGrid:
    return TimeGrid.regular(DEFAULT_HORIZON, step=1.0)


def interpolate(sm: SurvivalMatrix, dst: TimeGrid) -> SurvivalMatrix:
    """Linearly interpolate every row onto a new grid.

    Destination points below the source grid take the value 1 when the source
    grid starts after time zero (the curve is anchored at S(0) = 1) and the
    first source value otherwise; points beyond the source grid carry the
    last value forward.
    """
    if not isinstance(dst, TimeGrid):
        dst = TimeGrid(np.asarray(dst, dtype=float))
    src = sm.grid.points
    out = np.empty((sm.n, len(dst)))
    for i in range(sm.n):
        row = sm.probs[i]
        left = 1.0 if src[0] > 0 else row[0]
        out[i] = np.interp(dst.points, src, row, left=left, right=row[-1])
    return SurvivalMatrix(grid=dst, probs=out)


def risk_at_time(sm: SurvivalMatrix, t: float) -> np.ndarray:
    """Event probability by time t: 1 - S(t | x), with step lookup on the grid."""
    if t < 0:
        raise InputError("evaluation time must be nonnegative")
    return 1.0 - sm.step_lookup(float(t))


def expected_mortality(sm: SurvivalMatrix) -> np.ndarray:
    """Cumulative hazard summed over the grid: sum_t -log S(t | x).

    Zero survival entries would make the sum infinite; they are replaced by
    the smallest positive entry of the whole matrix so that rankings across
    subjects stay consistent.
    """
    probs = sm.probs
    positive = probs[probs > 0]
    if positive.size == 0:
        raise ComputationError("degenerate matrix: all survival probabilities are zero")
    eps = float(positive.min())
    adjusted = np.where(probs > 0, probs, eps)
    return -np.log(adjusted).sum(axis=1)


def neg_rmst(sm: SurvivalMatrix, t_star: float) -> np.ndarray:
    """Negative restricted mean survival time up to the horizon t_star.

    A left Riemann sum over [t0, t_star]: each grid point t < t_star
    contributes S(t | x) times the distance to the next grid point, clipped
    at t_star (the last grid point's rectangle extends to t_star).  Higher
    values mean higher risk, matching the direction of expected mortality.
    Supports non-uniform grids.
    """
    grid = sm.grid.points
    if not t_star > grid[0]:
        raise InputError("t_star must exceed the first grid point")
    nxt = np.append(grid[1:], np.inf)
    include = grid < t_star
    dt = np.minimum(nxt[include], t_star) - grid[include]
    return -(sm.probs[:, include] * dt).sum(axis=1)
