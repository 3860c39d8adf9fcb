import sys
from pathlib import Path

import numpy as np
import pytest

from survconcord import SurvivalDataset

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def four_subjects():
    """Hand-enumerated fixture: one censored subject sharing its time with an event."""
    ds = SurvivalDataset(
        times=[1.0, 2.0, 3.0, 3.0],
        events=[1, 1, 0, 1],
        subject_ids=("a", "b", "c", "d"),
    )
    risks = np.array([0.9, 0.5, 0.7, 0.2])
    return ds, risks


def random_instance(rng, n_max=200, tie_rich=False):
    """Random censored dataset and risks, with tied times and predictions."""
    n = int(np.exp(rng.uniform(np.log(2), np.log(n_max))))
    n = max(n, 2)
    if tie_rich:
        times = rng.integers(1, max(2, n // 4), n).astype(float)
        risks = np.round(rng.normal(size=n), 1)
    else:
        times = np.round(rng.exponential(10.0, n), 1)
        risks = rng.normal(size=n)
    events = (rng.random(n) < rng.uniform(0.3, 1.0)).astype(int)
    return SurvivalDataset(times=times, events=events), risks
