"""
The randomized gossip process: at every tick one edge {i, j} is drawn from the
interaction distribution and each regular endpoint moves to the midpoint of the
two states. Stubborn agents never move.
"""
import logging

import numpy as np
from tqdm import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from . import cfg as package_cfg, exceptions
from .community_graph import interaction_distribution
from .np import stats

logger = logging.getLogger(__name__)

__all__ = [
    'SINGLE_RUN',
    'MC_MEAN',
    'EXACT_EXPECTATION',
    'REPLICATE_KEY',
    'INIT_KEY',
    'stream',
    'GossipState',
    'TrajectoryBundle',
    'RunConfig',
    'step',
    'update_matrix',
    'check_initial_state',
    'run',
    'monte_carlo_mean',
]

SINGLE_RUN = 'single_run'
MC_MEAN = 'mc_mean'
EXACT_EXPECTATION = 'exact_expectation'
KINDS = (SINGLE_RUN, MC_MEAN, EXACT_EXPECTATION)

# spawn keys of the seeded streams
REPLICATE_KEY = 0
INIT_KEY = 1

def stream(seed, *key):
    """
    Counter-based (Philox) generator keyed by (seed, *key). Streams with different
    keys are independent, and each one can be recreated on its own, so replicate r
    of a Monte Carlo estimate is stream(seed, REPLICATE_KEY, r) no matter how the
    replicates are batched.
    """
    if seed < 0:
        raise ValueError(f"seed must be a nonnegative 64-bit integer, but {seed=}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))

class GossipState:
    def __init__(self, x, zs, t=0):
        self.x = np.array(x, dtype=float)
        self.zs = np.array(zs, dtype=float)
        self.t = int(t)

    @property
    def z(self):
        return np.concatenate([self.x, self.zs])

    def __repr__(self):
        return f"GossipState(t={self.t}, n_regular={len(self.x)}, n_stubborn={len(self.zs)})"

def step(state, pair):
    """
    One gossip update. pair holds full-state indices (regular agents first,
    then stubborn agents); returns a new state.
    """
    n_regular = len(state.x)
    i, j = int(pair[0]), int(pair[1])
    z = state.z
    midpoint = 0.5 * (z[i] + z[j])
    x = state.x.copy()
    for k in (i, j):
        if k < n_regular:
            x[k] = midpoint
    return GossipState(x, state.zs, state.t + 1)

def update_matrix(graph, pair):
    """
    Rows of the one-step update matrix V^{ij} belonging to regular agents,
    i.e. [Q R] with shape (r0n, n).
    """
    n_regular = graph.n_regular
    v = np.eye(n_regular, graph.n)
    i, j = int(pair[0]), int(pair[1])
    for k in (i, j):
        if k < n_regular:
            v[k] = 0.0
            v[k, i] = v[k, j] = 0.5
    return v

class RunConfig:
    def __init__(self, horizon, seed=0, record_every=None, replicates=1):
        self.horizon = int(horizon)
        self.seed = int(seed)
        self.replicates = int(replicates)
        if record_every is None or record_every == 0:
            record_every = max(1, self.horizon // package_cfg['simulation']['max_records'])
        self.record_every = int(record_every)

        if self.horizon < 0:
            raise ValueError(f"horizon must be nonnegative, but {self.horizon=}")
        if not 1 <= self.record_every <= max(self.horizon, 1):
            raise ValueError(f"record_every must lie in [1, max(horizon, 1)], but {self.record_every=} and {self.horizon=}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be positive, but {self.replicates=}")

    def record_times(self):
        times = np.arange(0, self.horizon + 1, self.record_every)
        if times[-1] != self.horizon:
            times = np.append(times, self.horizon)
        return times

    def __repr__(self):
        return f"RunConfig(horizon={self.horizon}, seed={self.seed}, record_every={self.record_every}, replicates={self.replicates})"

class TrajectoryBundle:
    """
    Per-agent values of the regular agents at the recorded times.
    values has shape (len(times), r0n). For kind 'mc_mean', meta['stderr'] has the
    same shape as values.
    """
    def __init__(self, times, values, kind, meta=None):
        times = np.asarray(times, dtype=int)
        values = np.asarray(values, dtype=float)
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, but {kind=}")
        if times.ndim != 1 or (np.diff(times) <= 0).any():
            raise ValueError("times must be a strictly increasing 1D sequence")
        if values.ndim != 2 or values.shape[0] != len(times):
            raise exceptions.DimensionMismatch(f"values must have shape (len(times), r0n), but {values.shape=} and {len(times)=}")

        self.times = times
        self.values = values
        self.kind = kind
        self.meta = {} if meta is None else dict(meta)

    @property
    def n_agents(self):
        return self.values.shape[1]

    @property
    def stderr(self):
        return self.meta.get('stderr')

    def __len__(self):
        return len(self.times)

    def index_of(self, t):
        k = np.searchsorted(self.times, t)
        if k == len(self.times) or self.times[k] != t:
            raise KeyError(f"time {t} was not recorded")
        return k

    def at(self, t):
        return self.values[self.index_of(t)]

    def covers(self, times):
        return np.isin(times, self.times).all()

    def __repr__(self):
        return f"TrajectoryBundle(kind={self.kind}, records={len(self.times)}, n_agents={self.n_agents})"

def check_initial_state(graph, x0, zs):
    x0, zs = np.asarray(x0, dtype=float), np.asarray(zs, dtype=float)
    if x0.shape != (graph.n_regular,):
        raise exceptions.DimensionMismatch(f"x0 must have shape {(graph.n_regular,)}, but {x0.shape=}")
    if zs.shape != (graph.n_stubborn,):
        raise exceptions.DimensionMismatch(f"zs must have shape {(graph.n_stubborn,)}, but {zs.shape=}")
    for name, v in [('x0', x0), ('zs', zs)]:
        if len(v) > 0 and np.abs(v).max() > graph.cx:
            raise exceptions.ConstraintViolation(f"|{name}| must not exceed cx={graph.cx}, but max |{name}| = {np.abs(v).max()}")
    return x0, zs

def run(graph, x0, zs, cfg, replicate=0, distribution=None):
    x0, zs = check_initial_state(graph, x0, zs)
    if distribution is None:
        distribution = interaction_distribution(graph)

    n_regular = graph.n_regular
    record_times = cfg.record_times()
    pairs = distribution.sample(stream(cfg.seed, REPLICATE_KEY, replicate), size=cfg.horizon)

    z = np.concatenate([x0, zs])
    values = np.empty((len(record_times), n_regular))
    values[0] = x0
    k = 1
    for t, (i, j) in enumerate(pairs.tolist(), start=1):
        midpoint = 0.5 * (z[i] + z[j])
        z[i] = midpoint # i < j, so i is always regular
        if j < n_regular:
            z[j] = midpoint
        if k < len(record_times) and t == record_times[k]:
            values[k] = z[:n_regular]
            k += 1

    meta = {'seed': cfg.seed, 'replicate': replicate}
    return TrajectoryBundle(record_times, values, SINGLE_RUN, meta=meta)

def _batch_moments(distribution, n_regular, x0, zs, cfg, replicates, record_times):
    """Per recorded time (count, mean, M2) of the states of a batch of replicates."""
    idx = np.stack([
        distribution.sample_index(stream(cfg.seed, REPLICATE_KEY, r), size=cfg.horizon) for r in replicates
    ])
    I, J = distribution.pairs[idx, 0], distribution.pairs[idx, 1]

    batch = len(replicates)
    rows = np.arange(batch)
    Z = np.tile(np.concatenate([x0, zs]), (batch, 1))

    means = np.empty((len(record_times), n_regular))
    m2s = np.empty((len(record_times), n_regular))
    _, means[0], m2s[0] = stats.moments(Z[:, :n_regular])
    k = 1
    for t in range(1, cfg.horizon + 1):
        i, j = I[:, t-1], J[:, t-1]
        midpoint = 0.5 * (Z[rows, i] + Z[rows, j])
        Z[rows, i] = midpoint
        regular = j < n_regular
        Z[rows[regular], j[regular]] = midpoint[regular]
        if k < len(record_times) and t == record_times[k]:
            _, means[k], m2s[k] = stats.moments(Z[:, :n_regular])
            k += 1

    return batch, means, m2s

def monte_carlo_mean(graph, x0, zs, cfg, distribution=None, batch_size=None, progress=False):
    """
    Sample mean and standard error of the regular states over cfg.replicates
    independent runs. Replicate r uses the same stream as run(..., replicate=r),
    and batches are reduced in replicate order.
    """
    x0, zs = check_initial_state(graph, x0, zs)
    if distribution is None:
        distribution = interaction_distribution(graph)
    if batch_size is None:
        batch_size = package_cfg["simulation"]["batch_size"]

    n_regular = graph.n_regular
    record_times = cfg.record_times()
    M = cfg.replicates
    acc = (0, np.zeros((len(record_times), n_regular)), np.zeros((len(record_times), n_regular)))

    starts = range(0, M, batch_size)
    with logging_redirect_tqdm():
        for start in tqdm(starts, total=len(starts), disable=(not progress)):
            replicates = range(start, min(M, start + batch_size))
            acc = stats.merge_moments(acc, _batch_moments(distribution, n_regular, x0, zs, cfg, replicates, record_times))
            logger.debug(f"Merged replicates {replicates.start}..{replicates.stop - 1}.")

    count, mean, m2 = acc
    if M == 1:
        logger.warning("Standard errors are undefined with a single replicate.")
    stderr = stats.sem_from_moments(count, m2)

    meta = {'seed': cfg.seed, 'replicates': M, 'stderr': stderr}
    return TrajectoryBundle(record_times, mean, MC_MEAN, meta=meta)