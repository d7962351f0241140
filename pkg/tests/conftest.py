import numpy as np
import pytest

from nudgelab import PopulationPosterior, TaskInstance


@pytest.fixture
def two_member_posterior():
    """Tiny hand-enumerable posterior: members (1,0) and (-1,0), bias 0."""
    return PopulationPosterior(
        mean=[0.0, 0.0, 0.0],
        variance=[1.0, 1.0, 1.0],
        ensemble=np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
        seed=0,
    )


def singleton_posterior(weights, bias=0.0):
    row = np.append(np.asarray(weights, dtype=float), bias)
    return PopulationPosterior(
        mean=np.zeros(row.size),
        variance=np.ones(row.size),
        ensemble=row[None, :],
        seed=0,
    )


def random_posterior(rng, n_features, size=40):
    dim = n_features + 1
    mean = rng.normal(0.0, 1.0, dim)
    variance = rng.uniform(0.05, 0.8, dim)
    return PopulationPosterior.from_moments(
        mean, variance, size, seed=int(rng.integers(1 << 30))
    )


def random_task(rng, n_features):
    return TaskInstance(features=rng.random(n_features))
