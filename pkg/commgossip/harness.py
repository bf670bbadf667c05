"""
Experiment harness: typed experiment configs, the presets of the two-community
study and the artifact set of one experiment (trajectory CSVs, check reports,
manifest.toml and summary.txt).
"""
import collections
import logging
import math
import pathlib

import numpy as np
import pandas as pd

from . import cfg, config as config_utils, exceptions, io, pprint
from .logging import set_level
from .community_graph import GraphParams, Uniform, Explicit, build_graph, interaction_distribution
from .configurable import Configurable, Parameter
from .contextlib import StagedDirectory
from .gossip_sim import RunConfig, TrajectoryBundle, INIT_KEY, stream, run, monte_carlo_mean, check_initial_state
from .spectral_analysis import (
    mean_dynamics, spectral_summary, projections, expected_state_recursion, expected_state_closed_form,
)
from .timeit import timeit
from .transient_theory import (
    LOCAL, GLOBAL, sign_window, check_sign_theorem, empirical_sign_window, consensus_bound,
    local_bound_check, global_bound_check, scaling_regime, transient_interval,
)

logger = logging.getLogger(__name__)

__all__ = [
    'ANALYSES',
    'PRESETS',
    'ExperimentConfig',
    'ExperimentResult',
    'load_config',
    'config_from_dict',
    'preset_config',
    'resolve_graph_params',
    'sample_initial_state',
    'analyze',
    'run_experiment',
    'build_manifest',
    'emit_manifest',
    'scaling_check',
]

ANALYSES = ('simulate', 'mc_mean', 'exact', 'window', 'local_bound', 'global_bound')
CHECKS = ('window', 'local_bound', 'global_bound')
STUBBORN_CONVENTIONS = ('per_edge', 'row_sum')
ALIASES = {'T': 'run.horizon', 'run.T': 'run.horizon'}

class GraphSection(Configurable):
    """
    Either ls, ld and the stubborn weights (l_total or stubborn_matrix) are given
    directly, or beta1, beta2 and beta3 select a log-scaling regime.
    """
    def __init__(self):
        super().__init__()
        self.n = Parameter(500, int)
        self.r0 = Parameter(0.9, float)
        self.cx = Parameter(1.0, float)
        self.ls = Parameter(None, float)
        self.ld = Parameter(None, float)
        self.l_total = Parameter(None, float)
        self.stubborn_matrix = Parameter(None, list)
        self.beta1 = Parameter(None, float)
        self.beta2 = Parameter(None, float)
        self.beta3 = Parameter(None, float)
        self.stubborn_convention = Parameter('per_edge', str, choices=STUBBORN_CONVENTIONS)

class InitSection(Configurable):
    def __init__(self):
        super().__init__()
        self.x0 = Parameter('uniform_split', (str, list))
        self.x0_ranges = Parameter(None, list)
        self.zs = Parameter('uniform', (str, list))

class RunSection(Configurable):
    def __init__(self):
        super().__init__()
        self.horizon = Parameter(1000, int)
        self.record_every = Parameter(0, int)
        self.seed = Parameter(0, int)
        self.replicates = Parameter(1, int)

class ExperimentConfig(Configurable):
    def __init__(self):
        super().__init__()
        self.preset = Parameter('', str)
        self.analyses = Parameter(['exact'], list, choices=ANALYSES)
        self.output_dir = Parameter('out', str)
        self.sign_interval = Parameter([], list)
        self.graph = GraphSection()
        self.init = InitSection()
        self.run = RunSection()

    def graph_params(self):
        return resolve_graph_params(self.graph)

    def run_config(self):
        try:
            return RunConfig(self.run.horizon, seed=self.run.seed, record_every=self.run.record_every, replicates=self.run.replicates)
        except ValueError as err:
            raise exceptions.InvalidConfigParameter(f"invalid run section: {err}") from err

    def validate(self):
        params = self.graph_params().validate()
        self.run_config()

        analyses = self.analyses
        if len(analyses) == 0:
            raise exceptions.InvalidConfigParameter("analyses must not be empty")
        if any(a in analyses for a in ('window', 'local_bound')) and not params.ls > params.ld:
            raise exceptions.PreconditionError(
                f"analyses 'window' and 'local_bound' need ls > ld, but ls={params.ls} and ld={params.ld}"
            )
        if 'global_bound' in analyses and not params.ls <= params.ld:
            raise exceptions.PreconditionError(f"analysis 'global_bound' needs ls <= ld, but ls={params.ls} and ld={params.ld}")

        interval = self.sign_interval
        if len(interval) not in (0, 2) or (len(interval) == 2 and not interval[0] < interval[1]):
            raise exceptions.InvalidConfigParameter(f"sign_interval must be empty or [lo, hi] with lo < hi, but got {interval}")
        return self

    def __repr__(self):
        return f"ExperimentConfig(preset={self.preset!r}, analyses={self.analyses})"

def resolve_graph_params(section):
    betas = [section.beta1, section.beta2, section.beta3]
    direct = [section.ls, section.ld, section.l_total, section.stubborn_matrix]

    if any(b is not None for b in betas):
        if any(b is None for b in betas):
            raise exceptions.InvalidConfigParameter(f"graph.beta1, graph.beta2 and graph.beta3 must be given together, but got {betas}")
        if any(d is not None for d in direct):
            raise exceptions.InvalidConfigParameter("graph.beta1..3 cannot be combined with graph.ls, graph.ld, graph.l_total or graph.stubborn_matrix")
        return scaling_regime(section.n, *betas, r0=section.r0, cx=section.cx, stubborn_convention=section.stubborn_convention)

    if section.ls is None or section.ld is None:
        raise exceptions.InvalidConfigParameter("graph.ls and graph.ld are required unless graph.beta1..3 are given")

    if section.stubborn_matrix is not None:
        if section.l_total is not None:
            raise exceptions.InvalidConfigParameter("give either graph.l_total or graph.stubborn_matrix, not both")
        try:
            weights = Explicit(section.stubborn_matrix)
        except ValueError as err:
            raise exceptions.InvalidConfigParameter(f"graph.stubborn_matrix is not a numeric matrix: {err}") from err
    else:
        weights = Uniform(0.0 if section.l_total is None else section.l_total)

    return GraphParams(section.n, section.r0, section.ls, section.ld, weights, cx=section.cx)

def _study_preset(betas, analyses, seed, sign_interval=()):
    n = 500
    return {
        'analyses': list(analyses),
        'sign_interval': list(sign_interval),
        'graph': {'n': n, 'r0': 0.9, 'cx': 1.0, 'beta1': betas[0], 'beta2': betas[1], 'beta3': betas[2], 'stubborn_convention': 'per_edge'},
        'init': {'x0': 'uniform_split', 'zs': 'uniform'},
        'run': {'horizon': 5000, 'record_every': 1, 'seed': seed, 'replicates': 1},
    }

# ls = (ln n)^3 / n and ld = ln n / n (local), swapped for the global regime;
# every regular-stubborn edge weighs ln n / n
PRESETS = {
    'fig2_expected_local': _study_preset((3.0, 1.0, 1.0), ['exact', 'window', 'local_bound'], seed=2, sign_interval=transient_interval(500)),
    'fig3_expected_global': _study_preset((1.0, 3.0, 1.0), ['exact', 'global_bound'], seed=3),
    'fig4a_states_local': _study_preset((3.0, 1.0, 1.0), ['simulate', 'exact'], seed=4),
    'fig4b_states_global': _study_preset((1.0, 3.0, 1.0), ['simulate', 'exact'], seed=5),
}

def preset_config(name):
    if name not in PRESETS:
        raise exceptions.InvalidConfigParameter(f"unknown preset {name!r}, choose one of {list(PRESETS)}")
    experiment = ExperimentConfig()
    experiment.load_config_dict({'preset': name, **config_utils.flatten(PRESETS[name])})
    return experiment

def _route(raw):
    """Flattens raw to dotted keys and moves bare section keys (n, T, seed, ...) into their section."""
    template = ExperimentConfig()
    owners = {}
    for section, configurable in template.configurables_dict.items():
        for name in configurable.params_dict:
            owners[name] = section

    routed = {}
    for key, value in config_utils.flatten(raw).items():
        key = ALIASES.get(key, key)
        if '.' not in key and key not in template.params_dict and key in owners:
            key = f'{owners[key]}.{key}'
        routed[key] = value
    return routed

def config_from_dict(raw, strict=True):
    flat = _route(raw)
    preset = flat.pop('preset', '')
    experiment = preset_config(preset) if preset else ExperimentConfig()
    experiment.load_config_dict(flat, strict=strict)
    return experiment.validate()

def load_config(path):
    raw = config_utils.load(path)
    experiment = config_from_dict(raw)
    logger.info(f"Loaded {experiment} from {path}.")
    return experiment

def sample_initial_state(graph, init, seed):
    """
    x0 and zs from the init section. Random entries come from the seeded init
    stream: x0 first (community 1, then community 2), then zs.
    """
    rng = stream(seed, INIT_KEY)
    cx, half = graph.cx, graph.half

    if isinstance(init.x0, list):
        x0 = np.asarray(init.x0, dtype=float)
    else:
        if init.x0 == 'uniform_split':
            ranges = [(0.0, cx), (-cx, 0.0)]
        elif init.x0 == 'ranges':
            ranges = init.x0_ranges
            if ranges is None or len(ranges) != 2 or any(len(r) != 2 for r in ranges):
                raise exceptions.InvalidConfigParameter(f"init.x0_ranges must be [[lo, hi], [lo, hi]], but got {ranges}")
        else:
            raise exceptions.InvalidConfigParameter(f"init.x0 must be 'uniform_split', 'ranges' or a list, but got {init.x0!r}")
        x0 = np.concatenate([rng.uniform(lo, hi, size=half) for lo, hi in ranges])

    if isinstance(init.zs, list):
        zs = np.asarray(init.zs, dtype=float)
    elif init.zs == 'uniform':
        zs = rng.uniform(-cx, cx, size=graph.n_stubborn)
    else:
        raise exceptions.InvalidConfigParameter(f"init.zs must be 'uniform' or a list, but got {init.zs!r}")

    return check_initial_state(graph, x0, zs)

ExperimentResult = collections.namedtuple('ExperimentResult', ('experiment', 'derived', 'trajectories', 'reports', 'out_dir'))

def _subsample(bundle, times):
    return TrajectoryBundle(times, bundle.values[np.searchsorted(bundle.times, times)], bundle.kind, bundle.meta)

def _check_horizon(horizon):
    limit = cfg['theory']['max_check_horizon']
    if horizon > limit:
        logger.warning(f"Checking the theorems up to t={limit} only, not up to the horizon {horizon}.")
        return limit
    return horizon

def analyze(experiment, progress=False):
    """
    Runs every analysis of the experiment in memory. Precondition failures and
    coverage errors are raised here, before anything is written.
    """
    experiment.validate()
    analyses = experiment.analyses
    run_cfg = experiment.run_config()

    with timeit('graph'):
        graph = build_graph(experiment.graph_params())
    x0, zs = sample_initial_state(graph, experiment.init, run_cfg.seed)
    summary = spectral_summary(graph)
    proj = projections(summary, graph.regular_weights(), x0, zs, graph.l_total)

    derived = {
        'graph': graph, 'summary': summary, 'projections': proj, 'run': run_cfg,
        'x0': x0, 'zs': zs, 'checks': {},
    }
    trajectories, reports = {}, {}

    if 'simulate' in analyses or 'mc_mean' in analyses:
        distribution = interaction_distribution(graph)
        if 'simulate' in analyses:
            with timeit('single run'):
                trajectories['single_run'] = run(graph, x0, zs, run_cfg, distribution=distribution)
        if 'mc_mean' in analyses:
            sim_logger = logging.getLogger('commgossip.gossip_sim')
            quiet = max(logging.INFO, sim_logger.getEffectiveLevel()) # no per-batch debug lines
            with timeit('monte carlo mean'), set_level(sim_logger, quiet):
                trajectories['mc_mean'] = monte_carlo_mean(graph, x0, zs, run_cfg, distribution=distribution, progress=progress)

    checks = [a for a in analyses if a in CHECKS]
    if 'exact' in analyses or len(checks) > 0:
        dyn = mean_dynamics(graph)
        full = None
        if len(checks) > 0:
            check_horizon = _check_horizon(run_cfg.horizon)
            with timeit('exact recursion (every step)'):
                full = expected_state_recursion(dyn, x0, zs, check_horizon, record_every=1)

        if 'exact' in analyses:
            times = run_cfg.record_times()
            if full is not None and full.times[-1] == run_cfg.horizon:
                exact = _subsample(full, times)
            else:
                with timeit('exact recursion'):
                    exact = expected_state_recursion(dyn, x0, zs, run_cfg.horizon, record_every=run_cfg.record_every)
            trajectories['exact'] = exact
            closed = expected_state_closed_form(summary, proj, dyn.rbar, x0, zs, exact.times)
            derived['closed_form_max_error'] = float(np.abs(closed - exact.values).max())
            if derived['closed_form_max_error'] > cfg['spectral']['trajectory_tol']:
                logger.warning(f"Closed form and recursion differ by {derived['closed_form_max_error']:.3g}.")

        if 'window' in analyses:
            window = sign_window(summary, proj, graph)
            interval = tuple(experiment.sign_interval) if len(experiment.sign_interval) == 2 else None
            with timeit('sign check'):
                report = check_sign_theorem(window, full, interval=interval)
            reports['sign_check'] = report.to_frame()
            empirical = empirical_sign_window(full, window.predicted_sign)
            derived['window'] = window
            derived['checks']['sign_check'] = {
                'lo': float(report.interval[0]), 'hi': float(report.interval[1]),
                'n_times': len(report.times), 'n_disagree': report.n_disagree,
                'n_indeterminate': report.n_indeterminate, 'passed': report.passed,
                'empirical_first': None if empirical is None else empirical[0],
                'empirical_last': None if empirical is None else empirical[1],
            }

        for mode, check in [(LOCAL, local_bound_check), (GLOBAL, global_bound_check)]:
            if f'{mode}_bound' in analyses:
                bound = consensus_bound(mode, summary, graph, x0)
                report = check(bound, full, x0)
                reports[f'{mode}_bound'] = report.to_frame()
                derived['checks'][f'{mode}_bound'] = {
                    'passed': report.passed, 'violations': len(report.violations), 'slack': report.slack,
                }

    return ExperimentResult(experiment, derived, trajectories, reports, None)

def build_manifest(experiment, derived):
    """
    Resolved parameters, derived quantities and the initial state. Floats are
    written at full precision and nothing depends on the wall clock, so equal
    inputs give byte-identical manifests.
    """
    graph, summary, proj, run_cfg = derived['graph'], derived['summary'], derived['projections'], derived['run']
    manifest = {
        'n': graph.n, 'r0': graph.params.r0, 'cx': graph.cx, 'ls': graph.ls, 'ld': graph.ld,
        'l_total': graph.l_total, 'alpha': graph.alpha,
        'n_regular': graph.n_regular, 'n_stubborn': graph.n_stubborn,
        'lambda1': summary.lambda1, 'lambda2': summary.lambda2, 'lambda3': summary.lambda3,
        'c_eta_x': proj.c_eta_x, 'c_xi_x': proj.c_xi_x, 'zeta1': proj.zeta1, 'zeta2': proj.zeta2,
        'seed': run_cfg.seed, 'replicates': run_cfg.replicates,
        'horizon': run_cfg.horizon, 'record_every': run_cfg.record_every,
        'analyses': experiment.analyses,
    }
    if 'closed_form_max_error' in derived:
        manifest['closed_form_max_error'] = derived['closed_form_max_error']
    if 'window' in derived:
        window = derived['window']
        manifest.update({'t_lower': window.t_lower, 't_upper': window.t_upper, 'window_nonempty': window.nonempty})
        manifest.update({f't_upper_term_{k}': term for k, term in enumerate(window.terms, start=1)})

    manifest.update(derived['checks'])
    manifest['initial_state'] = {'x0': derived['x0'], 'zs': derived['zs']}
    manifest['config'] = config_utils.unflatten(experiment.config_dict())
    return manifest

def emit_manifest(path, experiment, derived, overwrite=False):
    manifest = build_manifest(experiment, derived)
    io.save_manifest(path, manifest, overwrite=overwrite)
    return manifest

def summary_text(manifest):
    shown = {k: v for k, v in manifest.items() if k not in ('initial_state', 'config')}
    return pprint.pformat(shown)

def run_experiment(experiment, out_dir=None, overwrite=False, progress=False):
    """
    Runs the experiment and writes its artifacts to out_dir (the config's
    output_dir by default). Either every artifact is written or none is.
    """
    out_dir = pathlib.Path(experiment.output_dir if out_dir is None else out_dir)
    if out_dir.exists() and not overwrite:
        raise exceptions.PathAlreadyExists(f"The output directory {out_dir} already exists.")

    result = analyze(experiment, progress=progress)

    with timeit('write artifacts'), StagedDirectory(out_dir, overwrite=overwrite) as staging:
        for name, bundle in result.trajectories.items():
            io.save_trajectory(staging / f'{name}.csv', bundle)
        for name, frame in result.reports.items():
            io.save_report(staging / f'{name}.csv', frame)
        manifest = emit_manifest(staging / 'manifest.toml', experiment, result.derived)
        io.save_text(staging / 'summary.txt', summary_text(manifest))

    logger.info(f"Wrote {len(result.trajectories)} trajectories and {len(result.reports)} reports to {out_dir}.")
    return result._replace(out_dir=out_dir)

def scaling_check(ns=(100, 500), betas=(3.0, 1.0, 1.0), r0=0.9, cx=1.0, stubborn_convention='per_edge', seed=0):
    """
    Largest distance between an expected state and its community's initial
    average over the integer times in (n, round(n ln n)), for each n, in a
    local regime. 'shrinks' marks rows whose deviation is below the previous row's.
    """
    if not betas[0] > betas[1]:
        raise exceptions.PreconditionError(f"the scaling check needs beta1 > beta2, but {betas=}")

    rows = []
    for n in ns:
        graph = build_graph(scaling_regime(n, *betas, r0=r0, cx=cx, stubborn_convention=stubborn_convention))
        x0, zs = sample_initial_state(graph, InitSection(), seed)
        summary = spectral_summary(graph)
        lo, hi = transient_interval(n)
        exact = expected_state_recursion(mean_dynamics(graph), x0, zs, hi, record_every=1)
        report = local_bound_check(consensus_bound(LOCAL, summary, graph, x0), exact, x0)
        inside = (report.times > lo) & (report.times < hi)
        rows.append({'n': n, 'lo': lo, 'hi': hi, 'max_deviation': float(report.max_deviation[inside].max()),
                     'max_envelope': float(report.envelope[inside].max())})

    frame = pd.DataFrame(rows)
    frame['shrinks'] = frame['max_deviation'].diff() < 0
    return frame
