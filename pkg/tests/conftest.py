import numpy as np
import pytest

from wte.data_model import ObservationSet


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n=200, d=3, both_arms=True):
    """Random dataset with no particular structure; both arms nonempty."""
    X = rng.normal(size=(n, d))
    z = (rng.random(n) < 0.5).astype(int)
    if both_arms:
        z[0], z[1] = 0, 1
    y = rng.normal(size=n) + z * X[:, 0]
    return ObservationSet(covariates=X, outcomes=y, treatments=z)
