import pytest
import numpy as np
from scipy import stats

import commgossip as lib

@pytest.fixture
def y():
    return np.random.default_rng(0).normal(size=(40, 6, 3))

def test_sem_from_moments(y):
    n, _, m2 = lib.np.moments(y, axis=0)
    assert np.allclose(lib.np.sem_from_moments(n, m2), stats.sem(y, axis=0, ddof=1))
    assert np.allclose(lib.np.sem_from_moments(n, m2, ddof=0), stats.sem(y, axis=0, ddof=0))

def test_sem_from_moments_single(y):
    n, _, m2 = lib.np.moments(y[:1], axis=0)
    sem = lib.np.sem_from_moments(n, m2)
    assert sem.shape == (6, 3) and np.isnan(sem).all()

def test_moments(y):
    n, mean, m2 = lib.np.moments(y, axis=0)
    assert n == 40
    assert np.allclose(mean, y.mean(axis=0))
    assert np.allclose(m2 / (n - 1), y.var(axis=0, ddof=1))

@pytest.mark.parametrize('splits', [[1], [20], [7, 19, 33], list(range(1, 40))])
def test_merge_moments(y, splits):
    result = (0, 0.0, 0.0)
    for batch in np.split(y, splits, axis=0):
        result = lib.np.merge_moments(result, lib.np.moments(batch, axis=0))
    n, mean, m2 = result
    n_ref, mean_ref, m2_ref = lib.np.moments(y, axis=0)
    assert n == n_ref
    assert np.allclose(mean, mean_ref, rtol=0, atol=1e-14)
    assert np.allclose(m2, m2_ref, rtol=0, atol=1e-12)
