import logging
import math

import pytest
import numpy as np
import scipy.stats as stats

import commgossip as lib
from commgossip import community_graph as cgraph

@pytest.fixture
def params():
    return cgraph.GraphParams(10, 0.8, 0.5, 0.1, 0.2)

@pytest.fixture
def graph(params):
    return cgraph.build_graph(params)

def random_params(rng):
    n = int(rng.integers(4, 200))
    n_regular = 2 * int(rng.integers(1, n // 2 + 1))
    return cgraph.GraphParams(n, n_regular / n, rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99), rng.uniform(0.01, 5.0))

def test_alpha_closed_form():
    rng = np.random.default_rng(0)
    for _ in range(50):
        params = random_params(rng)
        graph = cgraph.build_graph(params)
        assert graph.alpha == pytest.approx(cgraph.alpha_closed_form(params), rel=1e-12)

def test_layout(graph):
    assert (graph.n_regular, graph.n_stubborn, graph.half) == (8, 2, 4)
    assert [graph.community_of(i) for i in range(10)] == [1, 1, 1, 1, 2, 2, 2, 2, 0, 0]
    assert graph.is_regular(7) and not graph.is_regular(8)

def test_weights(graph):
    assert graph.a(0, 3) == graph.a(3, 0) == 0.5
    assert graph.a(0, 4) == graph.a(7, 2) == 0.1
    assert graph.a(5, 8) == graph.a(8, 5) == pytest.approx(0.1)
    assert graph.a(8, 9) == 0.0
    assert graph.a(2, 2) == 0.0
    assert np.allclose(graph.regular_weights().sum(axis=1), 0.2)

def test_degree(graph):
    for i in range(graph.n_regular):
        assert graph.degree(i) == pytest.approx(sum(graph.a(i, j) for j in range(graph.n)))
    with pytest.raises(ValueError):
        graph.degree(9)

def test_edges(graph):
    i, j, w = graph.edges
    assert (i < j).all() and (i < graph.n_regular).all()
    assert len(w) == 8 * 7 // 2 + 8 * 2
    assert w.sum() == pytest.approx(graph.alpha)
    with pytest.raises(ValueError):
        w[0] = 1.0

@pytest.mark.parametrize('kwargs', [
    dict(n=10, r0=0.7, ls=0.5, ld=0.1, stubborn_weights=0.2), # r0 n odd
    dict(n=10, r0=0.85, ls=0.5, ld=0.1, stubborn_weights=0.2), # r0 n not an integer
    dict(n=10, r0=0.8, ls=1.0, ld=0.1, stubborn_weights=0.2),
    dict(n=10, r0=0.8, ls=0.5, ld=0.0, stubborn_weights=0.2),
    dict(n=10, r0=0.8, ls=0.5, ld=0.1, stubborn_weights=0.0),
    dict(n=10, r0=0.8, ls=0.5, ld=0.1, stubborn_weights=0.2, cx=0.0),
    dict(n=1, r0=1.0, ls=0.5, ld=0.1, stubborn_weights=0.0),
])
def test_constraint_violation(kwargs):
    with pytest.raises(lib.exceptions.ConstraintViolation):
        cgraph.build_graph(cgraph.GraphParams(**kwargs))

def test_explicit_weights():
    matrix = np.array([[0.1, 0.1], [0.2, 0.0], [0.0, 0.2], [0.15, 0.05]] * 2)
    graph = cgraph.build_graph(cgraph.GraphParams(10, 0.8, 0.5, 0.1, cgraph.Explicit(matrix)))
    assert graph.l_total == pytest.approx(0.2)
    assert graph.a(1, 9) == 0.0
    assert len(graph.edges[2]) == 8 * 7 // 2 + 12 # zero entries are not edges

def test_unequal_row_sums():
    matrix = np.full((8, 2), 0.1)
    matrix[1] = [0.1, 0.2]
    with pytest.raises(lib.exceptions.ConstraintViolation, match='row 2'):
        cgraph.build_graph(cgraph.GraphParams(10, 0.8, 0.5, 0.1, cgraph.Explicit(matrix)))

def test_wrong_shape():
    with pytest.raises(lib.exceptions.ConstraintViolation):
        cgraph.build_graph(cgraph.GraphParams(10, 0.8, 0.5, 0.1, cgraph.Explicit(np.full((8, 3), 0.1))))

def test_no_stubborn_agents(caplog):
    with caplog.at_level(logging.WARNING):
        graph = cgraph.build_graph(cgraph.GraphParams(8, 1.0, 0.5, 0.1, 0.3))
    assert graph.l_total == 0.0 and graph.n_stubborn == 0
    assert 'no stubborn agents' in caplog.text
    assert graph.alpha == pytest.approx(cgraph.alpha_closed_form(graph.params))

def test_distribution(graph):
    dist = cgraph.interaction_distribution(graph)
    assert len(dist) == len(graph.edges[2])
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    for (i, j), p in zip(dist.pairs, dist.probs):
        assert dist.probability(i, j) == pytest.approx(p)
    assert dist.probability(8, 9) == 0.0

def test_alias_table(graph):
    dist = cgraph.interaction_distribution(graph)
    prob, alias = dist._prob, dist._alias
    size = len(prob)
    recovered = prob.copy()
    for k in range(size):
        if alias[k] != k:
            recovered[alias[k]] += 1.0 - prob[k]
    assert np.allclose(recovered / size, dist.probs, rtol=0, atol=1e-12)

def test_sampling_frequencies(graph):
    dist = cgraph.interaction_distribution(graph)
    rng = np.random.default_rng(1)
    size = 200000
    idx = dist.sample_index(rng, size=size)
    observed = np.bincount(idx, minlength=len(dist))
    result = stats.chisquare(observed, dist.probs * size)
    assert result.pvalue > 1e-4

    pairs = dist.sample(rng, size=(3, 5))
    assert pairs.shape == (3, 5, 2)
    assert (pairs[..., 0] < pairs[..., 1]).all()

def test_uniform_coercion():
    params = cgraph.GraphParams(10, 0.8, 0.5, 0.1, 0.2)
    assert params.stubborn_weights == cgraph.Uniform(0.2)
    assert params.n_regular == 8 and params.n_stubborn == 2
    assert math.isclose(params.s0, 0.2)
