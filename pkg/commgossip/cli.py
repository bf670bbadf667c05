"""
Command line interface.

    commgossip [--ll LEVEL] simulate --config exp.toml [--seed S] [--replicates M] [--horizon T] [--out DIR]
    commgossip expect --config exp.toml
    commgossip window --config exp.toml
    commgossip bounds --config exp.toml
    commgossip reproduce fig2_expected_local [--config overrides.toml] [--out DIR]
"""
import argparse
import logging
import sys

from . import argparse as argparse_utils, logging as logging_utils, config as config_utils, exceptions, harness

logger = logging.getLogger(__name__)

def _overrides(seed, replicates, horizon, analyses=None):
    d = {'run.seed': seed, 'run.replicates': replicates, 'run.horizon': horizon, 'analyses': analyses}
    return {k: v for k, v in d.items() if v is not None}

def _execute(experiment, overrides, out, overwrite):
    experiment.load_config_dict(overrides)
    experiment.validate()
    result = harness.run_experiment(experiment, out_dir=out, overwrite=overwrite)
    print(harness.summary_text(harness.build_manifest(experiment, result.derived)))
    return result

def simulate(config: str, seed: int = None, replicates: int = None, horizon: int = None, out: str = None, overwrite: bool = False):
    experiment = harness.load_config(config)
    analyses = ['simulate'] if (replicates or experiment.run.replicates) == 1 else ['simulate', 'mc_mean']
    return _execute(experiment, _overrides(seed, replicates, horizon, analyses), out, overwrite)

def expect(config: str, seed: int = None, horizon: int = None, out: str = None, overwrite: bool = False):
    experiment = harness.load_config(config)
    return _execute(experiment, _overrides(seed, None, horizon, ['exact']), out, overwrite)

def window(config: str, seed: int = None, horizon: int = None, out: str = None, overwrite: bool = False):
    experiment = harness.load_config(config)
    return _execute(experiment, _overrides(seed, None, horizon, ['exact', 'window']), out, overwrite)

def bounds(config: str, seed: int = None, horizon: int = None, out: str = None, overwrite: bool = False):
    experiment = harness.load_config(config)
    params = experiment.graph_params()
    mode = 'local_bound' if params.ls > params.ld else 'global_bound'
    return _execute(experiment, _overrides(seed, None, horizon, ['exact', mode]), out, overwrite)

def reproduce(preset: str, config: str = None, seed: int = None, replicates: int = None, horizon: int = None, out: str = None, overwrite: bool = False):
    if config is None:
        experiment = harness.preset_config(preset)
    else:
        raw = config_utils.load(config)
        experiment = harness.config_from_dict({**raw, 'preset': preset})
    return _execute(experiment, _overrides(seed, replicates, horizon), out, overwrite)

COMMANDS = {
    'simulate': (simulate, "single stochastic run, plus a Monte Carlo mean when replicates > 1"),
    'expect': (expect, "exact expected trajectory"),
    'window': (window, "sign window and sign check on the exact expected trajectory"),
    'bounds': (bounds, "local or global consensus envelope check, whichever the graph satisfies"),
    'reproduce': (reproduce, "run a preset of the two-community study"),
}

ARG_CONFIGS = {
    'config': dict(opt_str=['--config'], help='experiment config file (.toml or .json)'),
    'preset': dict(choices=list(harness.PRESETS)),
    'out': dict(help='output directory, overrides output_dir of the config'),
    'overwrite': dict(action='store_true', help='replace an existing output directory'),
}

def build_parser():
    parser = argparse.ArgumentParser(prog='commgossip', description=__doc__.strip().splitlines()[0],
                                     parents=[logging_utils.basic_parser(add_help=False)])
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, (func, description) in COMMANDS.items():
        subparser = subparsers.add_parser(name, help=description)
        argparse_utils.add_arguments(subparser, func, configs=ARG_CONFIGS)
        subparser.set_defaults(func=func)
    return parser

def main(argv=None):
    args = build_parser().parse_args(argv)
    logging_utils.basic_config(level=args.level, format=args.format, capture_warnings=args.capture_warnings)

    try:
        argparse_utils.call_with_args(args.func, args)
    except (exceptions.ModelError, exceptions.ConfigurableError, IOError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return 1
    return 0

if __name__ == '__main__':
    sys.exit(main())
