import numpy as np

__all__ = [
    'moments',
    'merge_moments',
    'sem_from_moments',
]

def moments(x, axis=0):
    """
    Count, mean and sum of squared deviations from the mean (M2) of x along axis.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    mean = np.mean(x, axis=axis)
    m2 = np.sum((x - np.expand_dims(mean, axis))**2, axis=axis)
    return n, mean, m2

def merge_moments(a, b):
    """
    Merges two (count, mean, M2) triples computed on disjoint samples.
    The result does not depend on how the samples were split into batches
    beyond floating point rounding.

    Reference:
    Chan, Golub and LeVeque - Updating Formulae and a Pairwise Algorithm for Computing Sample Variances
    """
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    if n_a == 0:
        return b
    if n_b == 0:
        return a
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (n_b / n)
    m2 = m2_a + m2_b + delta**2 * (n_a * n_b / n)
    return n, mean, m2

def sem_from_moments(count, m2, ddof=1):
    """Standard error of the mean from a (count, M2) pair, NaN where count <= ddof."""
    m2 = np.asarray(m2, dtype=float)
    if count <= ddof:
        return np.full_like(m2, np.nan)
    return np.sqrt(m2 / (count - ddof) / count)
