import math

import pytest
import numpy as np

import commgossip as lib
from commgossip import community_graph as cgraph, spectral_analysis as sa, transient_theory as tt
from commgossip.gossip_sim import TrajectoryBundle, EXACT_EXPECTATION

def setup(params, x0, zs):
    graph = cgraph.build_graph(params)
    summary = sa.spectral_summary(graph)
    proj = sa.projections(summary, graph.regular_weights(), x0, zs, graph.l_total)
    return graph, summary, proj

@pytest.fixture
def local_case():
    # eta projection is zero and the stubborn agents sit at 0, so only the last upper-end candidate is finite
    x0 = np.concatenate([np.linspace(0.1, 0.9, 9), -np.linspace(0.1, 0.9, 9)])
    zs = np.zeros(2)
    graph, summary, proj = setup(cgraph.GraphParams(20, 0.9, 0.5, 0.05, 0.01), x0, zs)
    return graph, summary, proj, x0, zs

def exact(graph, x0, zs, horizon):
    return sa.expected_state_recursion(sa.mean_dynamics(graph), x0, zs, horizon, record_every=1)

def test_sign_window_terms(local_case):
    graph, summary, proj, x0, zs = local_case
    window = tt.sign_window(summary, proj, graph)
    t1, t2, t3, t4 = window.terms
    assert math.isinf(t2) and math.isinf(t3)
    assert t1 > t4
    assert window.t_upper == t4

    lambda2, lambda3 = summary.lambda2, summary.lambda3
    r0n = graph.n_regular
    expected_lower = math.log(15 * math.sqrt(r0n) / abs(proj.c_xi_x)) / math.log((1 - lambda2) / (1 - lambda3))
    expected_t4 = (math.log(((0.55) * r0n / 2 + 0.01) * abs(proj.c_xi_x) / (15 * 0.01 * math.sqrt(r0n)))
                   / math.log(1 / (1 - lambda2)))
    assert window.t_lower == pytest.approx(expected_lower, rel=1e-12)
    assert t4 == pytest.approx(expected_t4, rel=1e-12)
    assert window.nonempty
    assert window.predicted_sign.tolist() == [1.0] * 9 + [-1.0] * 9

def test_sign_theorem_holds(local_case):
    graph, summary, proj, x0, zs = local_case
    window = tt.sign_window(summary, proj, graph)
    traj = exact(graph, x0, zs, math.ceil(window.t_upper))
    report = tt.check_sign_theorem(window, traj)
    assert report.passed
    assert report.times[0] == math.floor(window.t_lower) + 1
    assert report.times[-1] == math.ceil(window.t_upper) - 1
    assert report.n_checked == len(report.times) * graph.n_regular

    frame = report.to_frame()
    assert frame.columns.tolist() == ['t', 'agree', 'disagree', 'indeterminate', 'pass']
    assert frame['pass'].all()

def test_sign_theorem_random_initial_state():
    params = cgraph.GraphParams(20, 0.9, 0.5, 0.05, 0.05)
    graph = cgraph.build_graph(params)
    for seed in range(5):
        x0, zs = lib.harness.sample_initial_state(graph, lib.harness.InitSection(), seed)
        summary = sa.spectral_summary(graph)
        proj = sa.projections(summary, graph.regular_weights(), x0, zs, graph.l_total)
        window = tt.sign_window(summary, proj, graph)
        if not window.nonempty:
            assert len(tt.check_sign_theorem(window, exact(graph, x0, zs, 0)).times) == 0
            continue
        report = tt.check_sign_theorem(window, exact(graph, x0, zs, math.ceil(window.t_upper)))
        assert report.passed

def test_sign_window_needs_local_regime():
    x0 = np.zeros(8)
    graph, summary, proj = setup(cgraph.GraphParams(10, 0.8, 0.1, 0.5, 0.2), x0, np.zeros(2))
    with pytest.raises(lib.exceptions.PreconditionError):
        tt.sign_window(summary, proj, graph)

def test_sign_window_zero_contrast():
    x0 = np.zeros(8)
    graph, summary, proj = setup(cgraph.GraphParams(10, 0.8, 0.5, 0.1, 0.2), x0, np.zeros(2))
    assert proj.c_xi_x == 0.0
    window = tt.sign_window(summary, proj, graph)
    assert math.isinf(window.t_lower) and window.t_lower > 0
    assert not window.nonempty
    report = tt.check_sign_theorem(window, exact(graph, x0, np.zeros(2), 1))
    assert report.passed and len(report.times) == 0

def test_sign_window_no_stubborn():
    x0 = np.concatenate([np.linspace(0.1, 0.9, 4), -np.linspace(0.2, 0.8, 4)])
    graph, summary, proj = setup(cgraph.GraphParams(8, 1.0, 0.5, 0.1, 0.0), x0, np.zeros(0))
    window = tt.sign_window(summary, proj, graph)
    assert all(math.isinf(t) for t in window.terms[1:])

@pytest.fixture
def synthetic():
    window = tt.SignWindow(1.5, 4.0, (4.0,) * 4, True, np.array([1.0, 1.0, -1.0, -1.0]))
    values = np.array([
        [0.5, 0.5, -0.5, -0.5],
        [0.4, 0.4, -0.4, -0.4],
        [0.3, -0.1, -0.3, 0.0],
        [0.2, 0.2, -0.2, -0.2],
        [0.1, 0.1, 0.1, -0.1],
    ])
    return window, TrajectoryBundle(np.arange(5), values, EXACT_EXPECTATION)

def test_sign_check_counts(synthetic):
    window, traj = synthetic
    report = tt.check_sign_theorem(window, traj)
    assert report.times.tolist() == [2, 3]
    assert report.agree.tolist() == [2, 4]
    assert report.disagree.tolist() == [1, 0]
    assert report.indeterminate.tolist() == [1, 0]
    assert not report.passed
    assert (report.n_disagree, report.n_indeterminate) == (1, 1)

def test_sign_check_interval(synthetic):
    window, traj = synthetic
    report = tt.check_sign_theorem(window, traj, interval=(2, 4))
    assert report.times.tolist() == [3]
    assert report.passed
    with pytest.raises(lib.exceptions.CoverageError):
        tt.check_sign_theorem(window, traj, interval=(0, 10))
    with pytest.raises(lib.exceptions.CoverageError):
        tt.check_sign_theorem(window, traj, interval=(0, math.inf))

def test_empirical_sign_window(synthetic):
    window, traj = synthetic
    assert tt.empirical_sign_window(traj, window.predicted_sign) == (0, 1)
    assert tt.empirical_sign_window(traj, -window.predicted_sign) is None

def test_bound_formulas():
    summary = sa.SpectralSummary(0.01, 0.02, 0.1, None, None)
    local = tt.ConsensusBound(tt.LOCAL, summary, 2.0, None)
    glob = tt.ConsensusBound(tt.GLOBAL, summary, 2.0, None)
    assert local.bound_at(0) == pytest.approx(2.0)
    assert glob.bound_at(0) == pytest.approx(4.0)
    t = np.array([1, 10])
    assert np.allclose(local.bound_at(t), ((0.04 + 0.02) * t + 0.9**t) * 2.0)
    assert np.allclose(glob.bound_at(t), (0.04 * t + 2 * 0.9**t) * 2.0)

def test_bound_hypotheses():
    x0 = np.linspace(-0.5, 0.5, 8)
    graph, summary, _ = setup(cgraph.GraphParams(10, 0.8, 0.5, 0.1, 0.2), x0, np.zeros(2))
    with pytest.raises(lib.exceptions.PreconditionError):
        tt.consensus_bound(tt.GLOBAL, summary, graph, x0)
    bound = tt.consensus_bound(tt.LOCAL, summary, graph, x0)
    assert np.allclose(bound.reference, [x0[:4].mean()] * 4 + [x0[4:].mean()] * 4)
    with pytest.raises(lib.exceptions.PreconditionError):
        tt.global_bound_check(bound, exact(graph, x0, np.zeros(2), 5), x0)
    with pytest.raises(ValueError):
        tt.consensus_bound('partial', summary, graph, x0)

@pytest.mark.parametrize('params, mode', [
    (cgraph.GraphParams(20, 0.9, 0.5, 0.05, 0.3), tt.LOCAL),
    (cgraph.GraphParams(20, 0.9, 0.05, 0.5, 0.3), tt.GLOBAL),
    (cgraph.GraphParams(20, 0.9, 0.2, 0.2, 0.3), tt.GLOBAL),
    (lib.transient_theory.scaling_regime(100, 3.0, 1.0, 1.0), tt.LOCAL),
    (lib.transient_theory.scaling_regime(100, 1.0, 3.0, 1.0), tt.GLOBAL),
])
def test_bound_envelope(params, mode):
    graph = cgraph.build_graph(params)
    x0, zs = lib.harness.sample_initial_state(graph, lib.harness.InitSection(), 1)
    summary = sa.spectral_summary(graph)
    bound = tt.consensus_bound(mode, summary, graph, x0)
    check = tt.local_bound_check if mode == tt.LOCAL else tt.global_bound_check
    report = check(bound, exact(graph, x0, zs, 2000), x0)
    assert report.passed, report.violations[:5]
    assert report.slack >= -lib.cfg['theory']['bound_tol']
    assert report.to_frame()['pass'].all()

def test_bound_violation_reported():
    x0 = np.linspace(-0.5, 0.5, 8)
    graph, summary, _ = setup(cgraph.GraphParams(10, 0.8, 0.5, 0.1, 0.2), x0, np.zeros(2))
    bound = tt.consensus_bound(tt.LOCAL, summary, graph, x0)
    values = np.tile(x0, (3, 1))
    values[2, 5] += 5.0
    report = tt.local_bound_check(bound, TrajectoryBundle([0, 1, 2], values, EXACT_EXPECTATION), x0)
    assert not report.passed
    assert report.violations == [(2, 5)]
    assert report.slack < 0

@pytest.mark.parametrize('convention, l_total', [
    ('row_sum', math.log(100)),
    ('per_edge', 10 * math.log(100) / 100),
])
def test_scaling_regime(convention, l_total):
    params = tt.scaling_regime(100, 3.0, 1.0, 1.0, stubborn_convention=convention)
    assert params.ls == pytest.approx(math.log(100)**3 / 100)
    assert params.ld == pytest.approx(math.log(100) / 100)
    assert params.stubborn_weights.l_total == pytest.approx(l_total)
    params.validate()

def test_scaling_regime_default_convention():
    default = tt.scaling_regime(100, 3.0, 1.0, 1.0)
    section = lib.harness.GraphSection()
    assert default.stubborn_weights == tt.scaling_regime(100, 3.0, 1.0, 1.0, stubborn_convention=section.stubborn_convention).stubborn_weights

def test_scaling_regime_invalid():
    with pytest.raises(ValueError):
        tt.scaling_regime(100, 3.0, 1.0, 1.0, stubborn_convention='per_row')
    with pytest.raises(lib.exceptions.ConstraintViolation):
        tt.scaling_regime(20, 3.0, 1.0, 1.0).validate() # ls > 1 for small n

def test_transient_interval():
    assert tt.transient_interval(500) == (500, 3107)

def test_consensus_interval():
    mode, (lo, hi) = tt.consensus_interval(500, 3.0, 1.0, 1.0)
    assert mode == tt.LOCAL
    assert (lo, hi) == (500, pytest.approx(500 * math.log(500)))
    mode, (lo, hi) = tt.consensus_interval(500, 1.0, 3.0, 2.0)
    assert mode == tt.GLOBAL
    assert hi == pytest.approx(500 * math.log(500)**0.5)

def test_stubborn_scaling_scan():
    params = cgraph.GraphParams(20, 0.9, 0.5, 0.05, 0.002)
    x0 = np.concatenate([np.linspace(0.1, 0.9, 9), -np.linspace(0.1, 0.9, 9)])
    zs = np.array([0.01, 0.02])
    frame = tt.stubborn_scaling_scan(params, x0, zs, [4.0, 0.5, 1.0, 2.0])
    assert frame["scale"].tolist() == [0.5, 1.0, 2.0, 4.0]
    assert frame["l_total"].tolist() == pytest.approx([0.001, 0.002, 0.004, 0.008])
    assert (frame[["term_2", "term_4"]] > 0).all().all()
    assert not frame['violation'].any()

    with pytest.raises(lib.exceptions.PreconditionError):
        tt.stubborn_scaling_scan(cgraph.GraphParams(10, 0.8, 0.5, 0.1, cgraph.Explicit(np.full((8, 2), 0.1))), x0, zs, [1.0])
