import numpy as np
import pytest

from oversim import load_housing

from helpers import make_dataset


@pytest.fixture(scope="session")
def housing():
    return load_housing()


@pytest.fixture()
def tiny():
    """Six rows, two features (first sensitive), both classes present."""
    X_raw = np.array(
        [
            [0.0, 2.0],
            [1.0, -1.0],
            [2.0, 0.5],
            [3.0, -2.0],
            [4.0, 1.5],
            [5.0, -0.5],
        ]
    )
    y = np.array([0, 0, 1, 0, 1, 1])
    return make_dataset(X_raw, y, sensitive=(0,))
