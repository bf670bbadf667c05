"""
Transient behaviour of the expected states: the time window on which every
expected state carries the sign of its community, the local (ls > ld) and
global (ls <= ld) consensus envelopes, and the log-scaling parameter regimes.
All logarithms are natural.
"""
import collections
import logging
import math

import numpy as np
import pandas as pd

from . import cfg, exceptions
from .community_graph import GraphParams, Uniform, build_graph
from .spectral_analysis import spectral_summary, projections

logger = logging.getLogger(__name__)

__all__ = [
    'LOCAL',
    'GLOBAL',
    'SignWindow',
    'SignReport',
    'ConsensusBound',
    'BoundReport',
    'sign_window',
    'check_sign_theorem',
    'empirical_sign_window',
    'consensus_bound',
    'local_bound_check',
    'global_bound_check',
    'scaling_regime',
    'transient_interval',
    'consensus_interval',
    'stubborn_scaling_scan',
]

LOCAL = 'local'
GLOBAL = 'global'

SignWindow = collections.namedtuple('SignWindow', ('t_lower', 't_upper', 'terms', 'nonempty', 'predicted_sign'))

def _log_term(numerator, denominator, rate, offset=0.0):
    """log(numerator / denominator + offset) / rate, +inf for a zero denominator."""
    if denominator == 0.0:
        return math.inf
    argument = numerator / denominator + offset
    if argument == 0.0:
        return -math.inf
    return math.log(argument) / rate

def sign_window(summary, projections, graph):
    if not graph.ls > graph.ld:
        raise exceptions.PreconditionError(f"the sign window needs ls > ld, but {graph.ls=} and {graph.ld=}")

    r0n, l_total, cx = graph.n_regular, graph.l_total, graph.cx
    lambda1, lambda2, lambda3 = summary.lambda1, summary.lambda2, summary.lambda3
    c_eta, c_xi = abs(projections.c_eta_x), abs(projections.c_xi_x)
    zeta1, zeta2 = abs(projections.zeta1), abs(projections.zeta2)

    rate_12 = math.log1p(-lambda1) - math.log1p(-lambda2)
    rate_2 = -math.log1p(-lambda2)
    rate_23 = math.log1p(-lambda2) - math.log1p(-lambda3)

    t_lower = _log_term(15 * cx * math.sqrt(r0n), c_xi, rate_23)
    terms = (
        _log_term(c_xi, 5 * c_eta, rate_12),
        _log_term(c_xi, 5 * zeta1, rate_2),
        _log_term((graph.ld * r0n + l_total) * c_xi, 5 * l_total * zeta2, rate_2, offset=1.0),
        _log_term(((graph.ls + graph.ld) * r0n / 2 + l_total) * c_xi, 15 * l_total * cx * math.sqrt(r0n), rate_2),
    )
    t_upper = min(terms)

    predicted_sign = np.sign(projections.c_xi_x) * np.sign(summary.xi)
    window = SignWindow(t_lower, t_upper, terms, t_lower < t_upper, predicted_sign)
    logger.debug(f"Sign window ({t_lower}, {t_upper}), candidate upper ends {terms}.")
    return window

class SignReport(collections.namedtuple('SignReport', (
    'interval', 'times', 'agree', 'disagree', 'indeterminate', 'passed',
))):
    """
    Per checked integer time, the number of regular agents whose expected state
    has the predicted sign, the opposite sign, or is numerically zero.
    """
    @property
    def n_checked(self):
        return int(self.agree.sum() + self.disagree.sum() + self.indeterminate.sum())

    @property
    def n_indeterminate(self):
        return int(self.indeterminate.sum())

    @property
    def n_disagree(self):
        return int(self.disagree.sum())

    def to_frame(self):
        return pd.DataFrame({
            't': self.times,
            'agree': self.agree,
            'disagree': self.disagree,
            'indeterminate': self.indeterminate,
            'pass': (self.disagree == 0) & (self.indeterminate == 0),
        })

def _integer_times(lo, hi):
    """Integers strictly inside (lo, hi)."""
    if not lo < hi:
        return np.arange(0)
    if math.isinf(hi):
        raise exceptions.CoverageError(f"cannot check an unbounded interval ({lo}, {hi})")
    start = math.floor(lo) + 1 if not math.isinf(lo) else 0
    stop = math.ceil(hi) - 1
    return np.arange(max(start, 0), stop + 1)

def check_sign_theorem(window, exact_trajectory, interval=None):
    """
    Compares sgn(x_i(t)) with the predicted sign for every integer t in the open
    window (or in the open interval given instead) and every regular agent.
    """
    lo, hi = (window.t_lower, window.t_upper) if interval is None else interval
    times = _integer_times(lo, hi) if interval is not None or window.nonempty else np.arange(0)

    if not exact_trajectory.covers(times):
        raise exceptions.CoverageError(
            f"the trajectory (recorded up to t={exact_trajectory.times[-1]}) does not cover every integer in ({lo}, {hi})"
        )

    if len(times) == 0:
        empty = np.zeros(0, dtype=int)
        return SignReport((lo, hi), times, empty, empty, empty, True)

    values = exact_trajectory.values[np.searchsorted(exact_trajectory.times, times)]
    zero = np.abs(values) < cfg['theory']['zero_tol']
    match = np.sign(values) == window.predicted_sign

    agree = (match & ~zero).sum(axis=1)
    disagree = (~match & ~zero).sum(axis=1)
    indeterminate = zero.sum(axis=1)
    passed = bool(disagree.sum() == 0 and indeterminate.sum() == 0)

    report = SignReport((lo, hi), times, agree, disagree, indeterminate, passed)
    logger.info(f"Sign check over {len(times)} times: {report.n_disagree} disagreements, {report.n_indeterminate} indeterminate.")
    return report

def empirical_sign_window(exact_trajectory, predicted_sign):
    """
    The longest run of consecutive recorded times at which every expected state
    has its predicted sign, as inclusive (first, last), or None if there is none.
    The trajectory should be recorded at every step.
    """
    zero = np.abs(exact_trajectory.values) < cfg['theory']['zero_tol']
    ok = ((np.sign(exact_trajectory.values) == predicted_sign) & ~zero).all(axis=1)

    best, start = None, None
    for k, good in enumerate(np.append(ok, False)):
        if good and start is None:
            start = k
        elif not good and start is not None:
            if best is None or k - start > best[1] - best[0] + 1:
                best = (start, k - 1)
            start = None

    if best is None:
        return None
    return int(exact_trajectory.times[best[0]]), int(exact_trajectory.times[best[1]])

def _reference(mode, x0, half):
    x0 = np.asarray(x0, dtype=float)
    if mode == GLOBAL:
        return np.full_like(x0, x0.mean())
    return np.concatenate([np.full(half, x0[:half].mean()), np.full(len(x0) - half, x0[half:].mean())])

class ConsensusBound:
    """
    Envelope on |x_i(t) - reference_i|. The reference is the initial average of
    agent i's community in local mode and the initial average of all regular
    agents in global mode.
    """
    def __init__(self, mode, summary, cx, reference):
        self.mode = mode
        self.lambda1, self.lambda2, self.lambda3 = summary.lambda1, summary.lambda2, summary.lambda3
        self.cx = cx
        self.reference = reference

    def bound_at(self, t):
        t = np.asarray(t, dtype=float)
        decay = (1 - self.lambda3)**t
        if self.mode == LOCAL:
            return ((4 * self.lambda1 + self.lambda2) * t + decay) * self.cx
        return (4 * self.lambda1 * t + 2 * decay) * self.cx

    def __repr__(self):
        return f"ConsensusBound(mode={self.mode}, cx={self.cx})"

def consensus_bound(mode, summary, graph, x0):
    if mode == LOCAL and not graph.ls > graph.ld:
        raise exceptions.PreconditionError(f"the local consensus bound needs ls > ld, but {graph.ls=} and {graph.ld=}")
    if mode == GLOBAL and not graph.ls <= graph.ld:
        raise exceptions.PreconditionError(f"the global consensus bound needs ls <= ld, but {graph.ls=} and {graph.ld=}")
    if mode not in (LOCAL, GLOBAL):
        raise ValueError(f"mode must be '{LOCAL}' or '{GLOBAL}', but {mode=}")
    return ConsensusBound(mode, summary, graph.cx, _reference(mode, x0, graph.half))

class BoundReport(collections.namedtuple('BoundReport', (
    'mode', 'times', 'max_deviation', 'envelope', 'violations',
))):
    @property
    def passed(self):
        return len(self.violations) == 0

    @property
    def slack(self):
        """Smallest margin envelope - deviation over the checked times."""
        return float((self.envelope - self.max_deviation).min())

    def to_frame(self):
        tol = cfg['theory']['bound_tol']
        return pd.DataFrame({
            't': self.times,
            'max_deviation': self.max_deviation,
            'envelope': self.envelope,
            'pass': self.max_deviation <= self.envelope + tol,
        })

def _bound_check(mode, bound, exact_trajectory, x0):
    if bound.mode != mode:
        raise exceptions.PreconditionError(f"expected a {mode} bound, but got a {bound.mode} bound")

    half = exact_trajectory.n_agents // 2
    deviation = np.abs(exact_trajectory.values - _reference(mode, x0, half))
    envelope = bound.bound_at(exact_trajectory.times)
    bad_t, bad_i = np.nonzero(deviation > envelope[:, None] + cfg['theory']['bound_tol'])
    violations = [(int(exact_trajectory.times[k]), int(i)) for k, i in zip(bad_t, bad_i)]

    report = BoundReport(mode, exact_trajectory.times, deviation.max(axis=1), envelope, violations)
    logger.info(f"{mode.capitalize()} bound check over {len(report.times)} times: {len(violations)} violations, slack {report.slack:.3g}.")
    return report

def local_bound_check(bound, exact_trajectory, x0):
    return _bound_check(LOCAL, bound, exact_trajectory, x0)

def global_bound_check(bound, exact_trajectory, x0):
    return _bound_check(GLOBAL, bound, exact_trajectory, x0)

def scaling_regime(n, beta1, beta2, beta3, r0=0.9, cx=1.0, stubborn_convention='per_edge'):
    """
    ls = (ln n)^beta1 / n, ld = (ln n)^beta2 / n and stubborn weights from beta3:
    with 'row_sum' every regular agent's stubborn weights add up to (ln n)^beta3,
    with 'per_edge' every regular-stubborn edge weighs (ln n)^beta3 / n.
    The parameters are validated when the graph is built.
    """
    log_n = math.log(n)
    ls = log_n**beta1 / n
    ld = log_n**beta2 / n
    n_stubborn = n - round(r0 * n)
    if stubborn_convention == 'row_sum':
        l_total = log_n**beta3 if n_stubborn > 0 else 0.0
    elif stubborn_convention == 'per_edge':
        l_total = n_stubborn * log_n**beta3 / n
    else:
        raise ValueError(f"stubborn_convention must be 'row_sum' or 'per_edge', but {stubborn_convention=}")
    return GraphParams(n, r0, ls, ld, Uniform(l_total), cx=cx)

def transient_interval(n):
    """(n, round(n ln n)), the interval on which the transient clusters are displayed."""
    return n, round(n * math.log(n))

def consensus_interval(n, beta1, beta2, beta3):
    """
    Interval of the log-scaling regime on which the expected states stay close to
    their community averages (beta1 > beta2) or to the global average (otherwise).
    """
    log_n = math.log(n)
    if beta1 > beta2:
        return LOCAL, (n, n * log_n**((beta1 - beta2) / 2))
    return GLOBAL, (n, n * log_n**((beta2 - beta3) / 2))

def stubborn_scaling_scan(params, x0, zs, scales):
    """
    Recomputes the sign window while the stubborn row sum is multiplied by each
    of scales (uniform stubborn weights, everything else fixed). The upper-end
    candidates that involve the stubborn projections should not grow with the
    stubborn weight; rows where one does are flagged in 'violation'.
    """
    if not isinstance(params.stubborn_weights, Uniform):
        raise exceptions.PreconditionError("the stubborn scaling scan needs uniform stubborn weights")

    rows = []
    for scale in sorted(scales):
        scaled = GraphParams(params.n, params.r0, params.ls, params.ld,
                             Uniform(params.stubborn_weights.l_total * scale), cx=params.cx)
        graph = build_graph(scaled)
        summary = spectral_summary(graph)
        proj = projections(summary, graph.regular_weights(), x0, zs, graph.l_total)
        window = sign_window(summary, proj, graph)
        rows.append({'scale': scale, 'l_total': graph.l_total, 't_lower': window.t_lower,
                     **{f'term_{k}': term for k, term in enumerate(window.terms, start=1)},
                     't_upper': window.t_upper})

    frame = pd.DataFrame(rows)
    stubborn_terms = frame[['term_2', 'term_3', 'term_4']]
    grew = (stubborn_terms.diff() > 0) & np.isfinite(stubborn_terms)
    frame['violation'] = grew.any(axis=1)
    if frame['violation'].any():
        logger.warning(f"Upper-end candidates grew with the stubborn weight at scales {frame.loc[frame['violation'], 'scale'].tolist()}.")
    return frame
