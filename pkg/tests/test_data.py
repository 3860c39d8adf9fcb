import numpy as np
import pytest

from survconcord import (
    InputError,
    PairCase,
    RankRelation,
    RiskVector,
    SurvivalDataset,
    SurvivalMatrix,
    SurvivalRecord,
    TimeGrid,
    classify_pair,
    validate_dataset,
)
from survconcord.data import validate_covariate_rows

GREATER, LESS, TIED = RankRelation.GREATER, RankRelation.LESS, RankRelation.TIED
ALL_RELS = (GREATER, LESS, TIED)


def test_known_case_labels():
    assert classify_pair(1, 1, 2, 1, GREATER) is PairCase.C1A
    assert classify_pair(1, 1, 2, 1, LESS) is PairCase.C1B
    assert classify_pair(1, 1, 2, 0, TIED) is PairCase.C2C
    assert classify_pair(3, 1, 3, 0, TIED) is PairCase.C6C
    assert classify_pair(3, 1, 3, 1, GREATER) is PairCase.C5A
    assert classify_pair(3, 0, 3, 1, LESS) is PairCase.C7B
    assert classify_pair(1, 0, 2, 1, GREATER) is PairCase.C3
    assert classify_pair(1, 0, 2, 0, GREATER) is PairCase.C4
    # Both censored with tied times: excluded for everyone, regardless of rank.
    for rel in ALL_RELS:
        assert classify_pair(5, 0, 5, 0, rel) is PairCase.C8


def test_classification_is_total():
    seen = set()
    for ti, tj in ((1.0, 2.0), (2.0, 2.0), (3.0, 2.0)):
        for di in (0, 1):
            for dj in (0, 1):
                for rel in ALL_RELS:
                    seen.add(classify_pair(ti, di, tj, dj, rel))
    assert seen == set(PairCase)


def test_swapped_pairs_never_double_counted():
    """For distinct times, the swap of a comparable (1x/2x) pair lands in {3, 4}."""
    comparable = {
        PairCase.C1A, PairCase.C1B, PairCase.C1C,
        PairCase.C2A, PairCase.C2B, PairCase.C2C,
    }
    swap_rel = {GREATER: LESS, LESS: GREATER, TIED: TIED}
    for di in (0, 1):
        for dj in (0, 1):
            for rel in ALL_RELS:
                fwd = classify_pair(1.0, di, 2.0, dj, rel)
                back = classify_pair(2.0, dj, 1.0, di, swap_rel[rel])
                if fwd in comparable:
                    assert back in (PairCase.C3, PairCase.C4)
                else:
                    assert fwd in (PairCase.C3, PairCase.C4)


def test_validate_dataset_examples():
    ok = SurvivalDataset.from_records(
        [SurvivalRecord("a", 1.0, 1), SurvivalRecord("b", 2.0, 0)]
    )
    assert validate_dataset(ok).ok

    bad_time = SurvivalDataset(times=[-1.0], events=[1])
    report = validate_dataset(bad_time)
    assert not report.ok
    assert "negative time" in report.violations[0]

    bad_event = SurvivalDataset(times=[1.0], events=[2])
    assert any("non-binary event" in v for v in validate_dataset(bad_event).violations)


def test_covariate_dimension_mismatch_reported():
    msgs = validate_covariate_rows([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0]])
    assert msgs and "covariate dimension mismatch" in msgs[0]
    assert validate_covariate_rows([[1.0], [2.0]]) == []


def test_dataset_structure_checks():
    with pytest.raises(InputError):
        SurvivalDataset(times=[1.0, 2.0], events=[1])
    with pytest.raises(InputError):
        SurvivalDataset(times=[1.0], events=[1], subject_ids=("a", "b"))
    ds = SurvivalDataset(times=[1.0, 2.0], events=[1, 0])
    assert ds.n == 2 and ds.n_events == 1
    with pytest.raises(ValueError):
        ds.times[0] = 5.0  # arrays are frozen


def test_risk_vector_invariants():
    rv = RiskVector([1.0, 2.0])
    assert np.asarray(rv).tolist() == [1.0, 2.0]
    with pytest.raises(InputError):
        RiskVector([1.0, np.nan])
    with pytest.raises(InputError):
        RiskVector([[1.0, 2.0]])


def test_time_grid_invariants():
    with pytest.raises(InputError):
        TimeGrid([1.0, 1.0])
    with pytest.raises(InputError):
        TimeGrid([-1.0, 2.0])
    grid = TimeGrid.regular(10.0, step=2.5)
    assert grid.points.tolist() == [0.0, 2.5, 5.0, 7.5, 10.0]


def test_survival_matrix_clamps_tiny_wiggle_and_rejects_rises():
    grid = TimeGrid([0.0, 1.0, 2.0])
    wiggle = SurvivalMatrix(grid=grid, probs=[[1.0, 0.5, 0.5 + 5e-10]])
    assert wiggle.probs[0, 2] == 0.5  # clamped to nonincreasing
    with pytest.raises(InputError, match="increase over time"):
        SurvivalMatrix(grid=grid, probs=[[1.0, 0.5, 0.6]])
    with pytest.raises(InputError, match="outside"):
        SurvivalMatrix(grid=grid, probs=[[1.2, 0.5, 0.4]])


def test_survival_matrix_step_lookup():
    sm = SurvivalMatrix(grid=TimeGrid([1.0, 2.0]), probs=[[0.8, 0.4]])
    assert sm.step_lookup(0.5) == pytest.approx(1.0)  # before the grid
    assert sm.step_lookup(1.0) == pytest.approx(0.8)
    assert sm.step_lookup(1.9) == pytest.approx(0.8)
    assert sm.step_lookup(50.0) == pytest.approx(0.4)  # carried forward
