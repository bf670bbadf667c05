from . import exceptions, config

cfg = config.load_package_config('commgossip')

from . import logging, argparse, pprint, timeit, contextlib, configurable, np, community_graph, gossip_sim, spectral_analysis, transient_theory, io, harness
