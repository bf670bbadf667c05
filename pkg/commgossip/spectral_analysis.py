"""
Mean dynamics of the gossip process and exact expected trajectories.

By independence of the edge draws, x(t) = E{X(t)} obeys
x(t+1) = Qbar x(t) + Rbar zs. Qbar has three eigenvalues: 1 - lambda1 on the
consensus direction eta, 1 - lambda2 on the community-contrast direction xi,
and 1 - lambda3 on everything orthogonal to both.
"""
import collections
import logging

import numpy as np
from scipy.sparse import linalg as splinalg

from . import cfg
from .gossip_sim import TrajectoryBundle, EXACT_EXPECTATION

logger = logging.getLogger(__name__)

__all__ = [
    'MeanDynamics',
    'SpectralSummary',
    'SpectralProjections',
    'mean_dynamics',
    'spectral_summary',
    'projections',
    'decompose',
    'expected_state_recursion',
    'expected_state_closed_form',
    'eigen_residuals',
]

SpectralSummary = collections.namedtuple('SpectralSummary', ('lambda1', 'lambda2', 'lambda3', 'eta', 'xi'))
SpectralProjections = collections.namedtuple('SpectralProjections', ('c_eta_x', 'c_xi_x', 'zeta1', 'zeta2'))

class MeanDynamics:
    """
    Qbar = I - L / (2 alpha), where L is the Laplacian-style matrix of the regular
    block (degrees d_i counting stubborn links on the diagonal, -a(i, j) off it),
    and Rbar = Mtilde / (2 alpha).

    qbar is dense when r0n <= cfg['spectral']['dense_limit'] and None otherwise;
    operator is a scipy LinearOperator in both cases and carries every product with Qbar.
    """
    def __init__(self, graph, dense=None):
        self.n_regular = graph.n_regular
        self.half = graph.half
        self.ls, self.ld = graph.ls, graph.ld
        self.two_alpha = 2.0 * graph.alpha
        self.degrees = np.array([graph.degree(i) for i in range(self.n_regular)])

        self.mtilde = graph.regular_weights()
        self.rbar = self.mtilde / self.two_alpha

        if dense is None:
            dense = self.n_regular <= cfg['spectral']['dense_limit']
        self.qbar = self._dense_qbar() if dense else None
        self.operator = splinalg.aslinearoperator(self.qbar) if dense else self._structured_operator()

    def _dense_qbar(self):
        communities = np.arange(self.n_regular) < self.half
        adjacency = np.where(communities[:, None] == communities[None, :], self.ls, self.ld)
        np.fill_diagonal(adjacency, 0.0)
        laplacian = np.diag(self.degrees) - adjacency
        qbar = np.eye(self.n_regular) - laplacian / self.two_alpha
        return 0.5 * (qbar + qbar.T) # exact symmetry

    def qbar_matvec(self, x):
        """Qbar @ x without forming Qbar; x may have trailing batch dimensions."""
        x = np.asarray(x, dtype=float)
        own = np.empty_like(x)
        other = np.empty_like(x)
        sum_1 = x[:self.half].sum(axis=0)
        sum_2 = x[self.half:].sum(axis=0)
        own[:self.half], own[self.half:] = sum_1, sum_2
        other[:self.half], other[self.half:] = sum_2, sum_1
        neighbours = self.ls * (own - x) + self.ld * other
        degrees = self.degrees.reshape((-1,) + (1,) * (x.ndim - 1))
        return x - (degrees * x - neighbours) / self.two_alpha

    def _structured_operator(self):
        return splinalg.LinearOperator(
            (self.n_regular, self.n_regular),
            matvec=self.qbar_matvec,
            matmat=self.qbar_matvec,
            rmatvec=self.qbar_matvec, # symmetric
            dtype=float,
        )

    def apply(self, x, zs):
        """One step of the mean dynamics, Qbar x + Rbar zs."""
        return self.operator @ x + self.rbar @ zs

    def __repr__(self):
        return f"MeanDynamics(n_regular={self.n_regular}, dense={self.qbar is not None})"

def mean_dynamics(graph, dense=None):
    return MeanDynamics(graph, dense=dense)

def spectral_summary(graph):
    r0n = graph.n_regular
    two_alpha = 2.0 * graph.alpha
    l_total = graph.l_total

    lambda1 = l_total / two_alpha
    lambda2 = (graph.ld * r0n + l_total) / two_alpha
    lambda3 = ((graph.ls + graph.ld) * r0n / 2 + l_total) / two_alpha

    eta = np.full(r0n, 1.0 / np.sqrt(r0n))
    xi = np.concatenate([np.ones(graph.half), -np.ones(graph.half)]) / np.sqrt(r0n)
    for v in (eta, xi):
        v.flags.writeable = False

    return SpectralSummary(lambda1, lambda2, lambda3, eta, xi)

def projections(summary, mtilde, x0, zs, l_total):
    x0 = np.asarray(x0, dtype=float)
    c_eta_x = float(summary.eta @ x0)
    c_xi_x = float(summary.xi @ x0)

    if mtilde.shape[1] == 0 or l_total == 0.0:
        zeta1 = zeta2 = 0.0
    else:
        pull = mtilde @ np.asarray(zs, dtype=float)
        zeta1 = float(summary.eta @ pull / l_total)
        zeta2 = float(summary.xi @ pull / l_total)

    return SpectralProjections(c_eta_x, c_xi_x, zeta1, zeta2)

def decompose(summary, v):
    """
    Splits v into its eta, xi and remaining components, which sum back to v.
    The remainder is P v with P = I - eta eta^T - xi xi^T.
    """
    v = np.asarray(v, dtype=float)
    along_eta = summary.eta * (summary.eta @ v)
    along_xi = summary.xi * (summary.xi @ v)
    return along_eta, along_xi, v - along_eta - along_xi

def expected_state_recursion(dyn, x0, zs, horizon, record_every=1):
    """
    Exact expected trajectory by iterating x(t+1) = Qbar x(t) + Rbar zs.
    This is the reference the closed form is checked against.
    """
    x = np.asarray(x0, dtype=float).copy()
    zs = np.asarray(zs, dtype=float)
    drift = dyn.rbar @ zs

    times = np.arange(0, horizon + 1, record_every)
    if times[-1] != horizon:
        times = np.append(times, horizon)

    values = np.empty((len(times), len(x)))
    values[0] = x
    k = 1
    for t in range(1, horizon + 1):
        x = dyn.operator @ x + drift
        if k < len(times) and t == times[k]:
            values[k] = x
            k += 1

    return TrajectoryBundle(times, values, EXACT_EXPECTATION, meta={'method': 'recursion'})

def _geometric_sum(lam, t):
    """[1 - (1 - lam)^t] / lam, with its limit t at lam = 0."""
    if lam == 0.0:
        return np.asarray(t, dtype=float)
    return -np.expm1(t * np.log1p(-lam)) / lam

def expected_state_closed_form(summary, projections, rbar, x0, zs, t):
    """
    x(t) from the three-mode expansion of the mean dynamics. t may be an int
    (returns shape (r0n,)) or a 1D array of times (returns shape (len(t), r0n)).
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]

    zs = np.asarray(zs, dtype=float)
    drift = rbar @ zs if rbar.shape[1] > 0 else np.zeros(rbar.shape[0])
    _, _, rest_x = decompose(summary, x0)
    _, _, rest_drift = decompose(summary, drift)

    lambda1, lambda2, lambda3 = summary.lambda1, summary.lambda2, summary.lambda3
    eta_coef = (1 - lambda1)**t * projections.c_eta_x + _geometric_sum(lambda1, t) * (summary.eta @ drift)
    xi_coef = (1 - lambda2)**t * projections.c_xi_x + _geometric_sum(lambda2, t) * (summary.xi @ drift)
    rest = (1 - lambda3)**t * rest_x + _geometric_sum(lambda3, t) * rest_drift

    x = eta_coef * summary.eta + xi_coef * summary.xi + rest
    return x[0] if scalar else x

def eigen_residuals(dyn, summary, rng, n_random=20):
    """
    Norms of Qbar v - mu v for v = eta, v = xi and n_random random unit vectors
    orthogonal to both (the largest of those is reported).
    """
    def residual(v, mu):
        return float(np.linalg.norm(dyn.operator @ v - mu * v))

    rest = 0.0
    for _ in range(n_random):
        _, _, w = decompose(summary, rng.standard_normal(dyn.n_regular))
        w /= np.linalg.norm(w)
        rest = max(rest, residual(w, 1 - summary.lambda3))

    return {
        'eta': residual(summary.eta, 1 - summary.lambda1),
        'xi': residual(summary.xi, 1 - summary.lambda2),
        'orthogonal': rest,
    }
