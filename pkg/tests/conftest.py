import math

import numpy as np
import pytest

from bigibbs.geometry import Configuration, TwoComponentConfiguration, Window, pt


@pytest.fixture
def unit_square():
    return Window((0.0, 0.0), (1.0, 1.0))


def two(plus_coords, minus_coords):
    return TwoComponentConfiguration(
        Configuration.from_coords(plus_coords), Configuration.from_coords(minus_coords)
    )


def conf(*coords):
    return Configuration([pt(*c) for c in coords])


def batch_se(values, n_batches=40):
    """Batch-means stderr for chain output, robust to autocorrelation."""
    arr = np.asarray(values, dtype=float)
    usable = (len(arr) // n_batches) * n_batches
    means = arr[:usable].reshape(n_batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(n_batches)
