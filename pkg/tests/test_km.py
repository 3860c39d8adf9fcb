import numpy as np
import pytest

from survconcord import (
    ComputationError,
    StepFunction,
    SurvivalDataset,
    ipcw_weights,
    km_fit,
)


def test_no_censoring_matches_empirical_survivor():
    ds = SurvivalDataset(times=[1.0, 2.0, 3.0], events=[1, 1, 1])
    f = km_fit(ds, "event")
    assert f.jump_times.tolist() == [1.0, 2.0, 3.0]
    assert f.values.tolist() == pytest.approx([2 / 3, 1 / 3, 0.0])


def test_mixed_fixture_hand_product_limit():
    # Risk sets 3, 2, 1; censoring at t=2 leaves no jump there.
    ds = SurvivalDataset(times=[1.0, 2.0, 3.0], events=[1, 0, 1])
    f = km_fit(ds, "event")
    assert abs(f.evaluate(1.0) - 2 / 3) < 1e-15
    assert abs(f.evaluate(2.0) - 2 / 3) < 1e-15
    assert abs(f.evaluate(3.0) - 0.0) < 1e-15


def test_censoring_target_equals_flipped_events():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        times = rng.integers(1, 10, n).astype(float)
        events = rng.integers(0, 2, n)
        ds = SurvivalDataset(times=times, events=events)
        flipped = SurvivalDataset(times=times, events=1 - events)
        g = km_fit(ds, "censoring")
        s = km_fit(flipped, "event")
        assert g.jump_times.tolist() == s.jump_times.tolist()
        assert g.values.tolist() == s.values.tolist()


def test_km_bounded_and_nonincreasing():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 50))
        ds = SurvivalDataset(
            times=rng.exponential(5.0, n), events=rng.integers(0, 2, n)
        )
        f = km_fit(ds, "event")
        if f.values.size:
            assert f.values.min() >= 0.0 and f.values.max() <= 1.0
            assert np.all(np.diff(f.values) <= 0)


def test_all_events_gives_constant_censoring_survivor():
    ds = SurvivalDataset(times=[1.0, 2.0], events=[1, 1])
    g = km_fit(ds, "censoring")
    assert g.jump_times.size == 0
    assert g.evaluate(0.0) == 1.0 and g.evaluate(100.0) == 1.0


def test_empty_dataset_rejected():
    with pytest.raises(ComputationError, match="no records"):
        km_fit(SurvivalDataset(times=[], events=[]), "event")


def test_matches_statsmodels_survival_function():
    sm_api = pytest.importorskip("statsmodels.api")
    rng = np.random.default_rng(19)
    for _ in range(10):
        n = int(rng.integers(5, 200))
        times = np.round(rng.exponential(5.0, n), 1)
        events = rng.integers(0, 2, n)
        if events.sum() == 0:
            continue
        ds = SurvivalDataset(times=times, events=events)
        ours = km_fit(ds, "event")
        theirs = sm_api.SurvfuncRight(times, events)
        expected = np.asarray(theirs.surv_prob)
        got = np.asarray(ours.evaluate(np.asarray(theirs.surv_times)))
        assert np.allclose(got, expected, atol=1e-12)


def test_step_evaluation_left_and_right():
    f = StepFunction(jump_times=[2.0], values=[0.5])
    assert f.evaluate(2.0) == 0.5
    assert f.evaluate_left(2.0) == 1.0
    assert f.evaluate(0.0) == 1.0
    assert f.evaluate(99.0) == 0.5  # constant beyond the last jump


def test_ipcw_schemes():
    ds = SurvivalDataset(times=[1.0, 2.0, 3.0], events=[1, 1, 1])
    g = km_fit(ds, "censoring")  # no censoring events: G == 1
    assert ipcw_weights(g, ds, "uniform").tolist() == [1.0, 1.0, 1.0]
    assert ipcw_weights(g, ds, "uno_squared").tolist() == [1.0, 1.0, 1.0]
    assert ipcw_weights(g, ds, "pec_product").tolist() == [1.0, 1.0, 1.0]

    # Single jump 1 -> 0.5 at t=2: G(2-) = 1, G(2) = 0.5.
    g2 = StepFunction(jump_times=[2.0], values=[0.5])
    at2 = SurvivalDataset(times=[2.0], events=[1])
    assert ipcw_weights(g2, at2, "pec_product")[0] == pytest.approx(2.0)
    assert ipcw_weights(g2, at2, "uno_squared")[0] == pytest.approx(4.0)

    # Where G is continuous (no jump at the time), both schemes agree.
    at3 = SurvivalDataset(times=[3.0], events=[1])
    assert ipcw_weights(g2, at3, "pec_product")[0] == pytest.approx(4.0)
    assert ipcw_weights(g2, at3, "uno_squared")[0] == pytest.approx(4.0)

    # G = 0 at the needed point: flagged as undefined, not infinite.
    g3 = StepFunction(jump_times=[2.0], values=[0.0])
    assert np.isnan(ipcw_weights(g3, at2, "uno_squared")[0])
