import numpy as np
import pytest
from hypothesis import settings

from dfo.core import RunTrace

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def sphere(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def assert_trace_consistent(trace: RunTrace):
    evals = [e for e, _ in trace.history]
    losses = [l for _, l in trace.history]
    assert all(a < b for a, b in zip(evals, evals[1:]))
    assert all(b <= a for a, b in zip(losses, losses[1:]))
    assert losses[-1] == trace.best.loss
    assert evals[-1] <= trace.total_evals


@pytest.fixture
def box2():
    from dfo.core import SearchSpace
    return SearchSpace.box(0.0, 1.0, 2)
