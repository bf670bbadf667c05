"""
The two-community weighted complete graph with stubborn agents and the
edge-selection distribution of the gossip process.

Agents are indexed from 0. Community 1 holds indices 0..r0n/2-1, community 2
holds r0n/2..r0n-1 and the stubborn agents hold r0n..n-1. Regular agents form a
weighted complete graph (weight ls inside a community, ld across), every
regular agent is linked to the stubborn agents through one row of the
regular-stubborn block, and stubborn agents are not linked to each other.
"""
import collections
import logging
import math

import numpy as np

from . import cfg, exceptions

logger = logging.getLogger(__name__)

__all__ = [
    'COMMUNITY_1',
    'COMMUNITY_2',
    'STUBBORN',
    'Uniform',
    'Explicit',
    'GraphParams',
    'TwoCommunityGraph',
    'InteractionDistribution',
    'build_graph',
    'interaction_distribution',
    'verify_stubborn_row_sums',
    'alpha_closed_form',
]

COMMUNITY_1 = 1
COMMUNITY_2 = 2
STUBBORN = 0

Uniform = collections.namedtuple('Uniform', ('l_total',))

class Explicit:
    """Regular-stubborn weights given entry by entry, shape (r0n, s0n)."""
    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=float, ndmin=2)
        if matrix.ndim != 2:
            raise exceptions.ConstraintViolation(f"stubborn weight matrix must be 2D, but {matrix.ndim=}")
        matrix.flags.writeable = False
        self.matrix = matrix

    def __repr__(self):
        return f"Explicit(shape={self.matrix.shape})"

def _as_count(value, name):
    count = round(value)
    if not math.isclose(value, count, rel_tol=0.0, abs_tol=1e-9):
        raise exceptions.ConstraintViolation(f"{name} must be an integer, but {name}={value}")
    return int(count)

class GraphParams:
    def __init__(self, n, r0, ls, ld, stubborn_weights, cx=1.0):
        if not isinstance(stubborn_weights, (Uniform, Explicit)):
            stubborn_weights = Uniform(float(stubborn_weights))
        self.n = int(n)
        self.r0 = float(r0)
        self.ls = float(ls)
        self.ld = float(ld)
        self.stubborn_weights = stubborn_weights
        self.cx = float(cx)

    @property
    def n_regular(self):
        return _as_count(self.r0 * self.n, 'r0*n')

    @property
    def n_stubborn(self):
        return self.n - self.n_regular

    @property
    def s0(self):
        return 1.0 - self.r0

    def validate(self):
        if self.n < 2:
            raise exceptions.ConstraintViolation(f"n must be at least 2, but {self.n=}")
        if not 0.0 < self.r0 <= 1.0:
            raise exceptions.ConstraintViolation(f"r0 must lie in (0, 1], but {self.r0=}")
        n_regular = self.n_regular
        if n_regular <= 0 or n_regular % 2 != 0:
            raise exceptions.ConstraintViolation(f"r0*n must be an even positive integer, but r0*n={self.r0 * self.n}")
        for name, value in [('ls', self.ls), ('ld', self.ld)]:
            if not 0.0 < value < 1.0:
                raise exceptions.ConstraintViolation(f"{name} must lie in (0, 1), but {name}={value}")
        if not self.cx > 0.0:
            raise exceptions.ConstraintViolation(f"cx must be positive, but {self.cx=}")
        verify_stubborn_row_sums(self)
        return self

    def __repr__(self):
        return (f"GraphParams(n={self.n}, r0={self.r0}, ls={self.ls}, ld={self.ld}, "
                f"stubborn_weights={self.stubborn_weights}, cx={self.cx})")

def verify_stubborn_row_sums(params):
    """
    Returns the common row sum l_total of the regular-stubborn block.
    Without stubborn agents the row sum is 0 whatever total was requested.
    """
    n_regular, n_stubborn = params.n_regular, params.n_stubborn
    weights = params.stubborn_weights

    if isinstance(weights, Uniform):
        if n_stubborn == 0:
            if weights.l_total != 0.0:
                logger.warning(f"There are no stubborn agents, ignoring l_total={weights.l_total}.")
            return 0.0
        if not weights.l_total > 0.0:
            raise exceptions.ConstraintViolation(f"l_total must be positive when stubborn agents exist, but l_total={weights.l_total}")
        return weights.l_total

    matrix = weights.matrix
    if matrix.shape != (n_regular, n_stubborn):
        raise exceptions.ConstraintViolation(f"stubborn weight matrix must have shape {(n_regular, n_stubborn)}, but {matrix.shape=}")
    if n_stubborn == 0:
        return 0.0
    if (matrix < 0).any() or not np.isfinite(matrix).all():
        raise exceptions.ConstraintViolation("stubborn weights must be finite and nonnegative")

    row_sums = matrix.sum(axis=1)
    l_total = row_sums[0]
    tol = cfg['graph']['row_sum_tol']
    bad = np.flatnonzero(np.abs(row_sums - l_total) > tol)
    if len(bad) > 0:
        row = bad[0]
        raise exceptions.ConstraintViolation(
            f"stubborn weight rows must share one sum, but row {row + 1} sums to {row_sums[row]} while row 1 sums to {l_total}"
        )
    if not l_total > 0.0:
        raise exceptions.ConstraintViolation(f"stubborn weight rows must have a positive sum, but got {l_total}")
    return float(l_total)

def alpha_closed_form(params):
    """Total edge weight for uniform stubborn weights, in closed form."""
    r0n = params.n_regular
    l_total = verify_stubborn_row_sums(params)
    return r0n * ((params.ls + params.ld) * r0n + 4 * l_total - 2 * params.ls) / 4

class TwoCommunityGraph:
    """
    Immutable; the adjacency is never stored densely. a(i, j) is read off the
    community labels, the two regular weights and the regular-stubborn block.
    """
    def __init__(self, params, l_total, stubborn_block):
        self.params = params
        self.l_total = l_total
        self.n = params.n
        self.n_regular = params.n_regular
        self.n_stubborn = params.n_stubborn
        self.half = self.n_regular // 2

        stubborn_block = np.array(stubborn_block, dtype=float).reshape(self.n_regular, self.n_stubborn)
        stubborn_block.flags.writeable = False
        self._stubborn_block = stubborn_block

        communities = np.full(self.n, STUBBORN)
        communities[:self.half] = COMMUNITY_1
        communities[self.half:self.n_regular] = COMMUNITY_2
        communities.flags.writeable = False
        self.communities = communities

        self.edges = self._edges()
        self.alpha = float(self.edges[2].sum())

    @property
    def ls(self):
        return self.params.ls

    @property
    def ld(self):
        return self.params.ld

    @property
    def cx(self):
        return self.params.cx

    def community_of(self, i):
        return int(self.communities[i])

    def is_regular(self, i):
        return i < self.n_regular

    def regular_weights(self):
        """The regular-stubborn weight block, shape (r0n, s0n)."""
        return self._stubborn_block

    def a(self, i, j):
        if i == j:
            return 0.0
        i, j = min(i, j), max(i, j)
        if j < self.n_regular:
            return self.ls if self.communities[i] == self.communities[j] else self.ld
        if i < self.n_regular:
            return float(self._stubborn_block[i, j - self.n_regular])
        return 0.0

    def degree(self, i):
        """Sum of the weights of all edges at regular agent i."""
        if not self.is_regular(i):
            raise ValueError(f"degree is only defined for regular agents, but {i=}")
        return (self.half - 1) * self.ls + self.half * self.ld + float(self._stubborn_block[i].sum())

    def _edges(self):
        iu, ju = np.triu_indices(self.n_regular, k=1)
        same = (iu < self.half) == (ju < self.half)
        w_rr = np.where(same, self.ls, self.ld)

        ir, js = np.nonzero(self._stubborn_block > 0)
        w_rs = self._stubborn_block[ir, js]

        i = np.concatenate([iu, ir])
        j = np.concatenate([ju, js + self.n_regular])
        w = np.concatenate([w_rr, w_rs])
        for arr in (i, j, w):
            arr.flags.writeable = False
        return i, j, w

    def __repr__(self):
        return f"TwoCommunityGraph({self.params}, alpha={self.alpha})"

def build_graph(params):
    params.validate()
    l_total = verify_stubborn_row_sums(params)
    if isinstance(params.stubborn_weights, Explicit):
        block = params.stubborn_weights.matrix
    elif params.n_stubborn == 0:
        block = np.zeros((params.n_regular, 0))
    else:
        block = np.full((params.n_regular, params.n_stubborn), l_total / params.n_stubborn)

    graph = TwoCommunityGraph(params, l_total, block)
    logger.debug(f"Built {graph} with {len(graph.edges[2])} edges.")
    return graph

class InteractionDistribution:
    """
    Edge-selection distribution w_ij = a(i, j) / alpha over the positive-weight
    pairs i < j, sampled in constant time per draw with Vose's alias table.
    """
    def __init__(self, graph):
        self.graph = graph
        i, j, w = graph.edges
        self.pairs = np.stack([i, j], axis=1)
        self.pairs.flags.writeable = False
        self.probs = w / graph.alpha
        self.probs.flags.writeable = False

        total = self.probs.sum()
        if abs(total - 1.0) > cfg['graph']['prob_sum_tol']:
            raise exceptions.ConstraintViolation(f"edge probabilities must sum to 1, but they sum to {total}")

        self._prob, self._alias = self._alias_table(self.probs)
        logger.debug(f"Built alias table over {len(self.probs)} edges.")

    @staticmethod
    def _alias_table(probs):
        size = len(probs)
        scaled = probs * size
        prob = np.ones(size)
        alias = np.arange(size)

        small = [k for k in range(size) if scaled[k] < 1.0]
        large = [k for k in range(size) if scaled[k] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        # leftovers only differ from 1 by round-off
        for k in small + large:
            prob[k] = 1.0
            alias[k] = k

        prob.flags.writeable = False
        alias.flags.writeable = False
        return prob, alias

    def __len__(self):
        return len(self.probs)

    def probability(self, i, j):
        return self.graph.a(i, j) / self.graph.alpha

    def sample_index(self, rng, size=None):
        """Indices into self.pairs."""
        k = rng.integers(len(self.probs), size=size)
        u = rng.random(size=size)
        return np.where(u < self._prob[k], k, self._alias[k])

    def sample(self, rng, size=None):
        """Pairs (i, j) with i < j, shape (2,) or (*size, 2)."""
        return self.pairs[self.sample_index(rng, size=size)]

def interaction_distribution(graph):
    return InteractionDistribution(graph)
