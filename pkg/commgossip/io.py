import pathlib
import logging

import numpy as np
import pandas as pd

from . import config, exceptions
from .gossip_sim import TrajectoryBundle, MC_MEAN, EXACT_EXPECTATION

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g' # enough digits for every double to round-trip

def _writable(path, overwrite):
    path = pathlib.Path(path)
    if path.exists() and not overwrite:
        raise exceptions.PathAlreadyExists(f"{path} already exists, pass overwrite=True to replace it.")
    return path

def _readable(path):
    path = pathlib.Path(path)
    if not path.is_file():
        raise exceptions.PathNotFound(f"The file {path} does not exist.")
    return path

def stderr_path(path):
    path = pathlib.Path(path)
    return path.with_name(f'{path.stem}_stderr{path.suffix}')

def _trajectory_frame(times, values):
    frame = pd.DataFrame(values, columns=[f'agent_{i}' for i in range(1, values.shape[1] + 1)])
    frame.insert(0, 't', times)
    return frame

def save_trajectory(path, bundle, overwrite=False):
    """
    Writes t,agent_1,...,agent_{r0n} with one row per recorded time. For
    Monte Carlo means the standard errors go to a parallel *_stderr.csv.
    """
    path = _writable(path, overwrite)
    _trajectory_frame(bundle.times, bundle.values).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saved {bundle.kind} trajectory to {path}.")

    if bundle.stderr is not None:
        sidecar = _writable(stderr_path(path), overwrite)
        _trajectory_frame(bundle.times, bundle.stderr).to_csv(sidecar, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Saved standard errors to {sidecar}.")

def load_trajectory(path, kind=EXACT_EXPECTATION):
    path = _readable(path)
    frame = pd.read_csv(path, float_precision='round_trip')

    columns = frame.columns.tolist()
    expected = ['t'] + [f'agent_{i}' for i in range(1, len(columns))]
    if columns != expected:
        raise exceptions.DimensionMismatch(f"{path} must have the columns t,agent_1,...,agent_{len(columns) - 1}, but got {columns}")

    meta = {}
    if kind == MC_MEAN:
        sidecar = _readable(stderr_path(path))
        meta['stderr'] = pd.read_csv(sidecar, float_precision='round_trip')[expected[1:]].to_numpy(dtype=float)

    return TrajectoryBundle(frame['t'].to_numpy(), frame[expected[1:]].to_numpy(dtype=float), kind, meta=meta)

def save_report(path, frame, overwrite=False):
    path = _writable(path, overwrite)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Saved report to {path}.")

def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(vi) for k, vi in v.items() if vi is not None}
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_plain(vi) for vi in v]
    return v

def save_manifest(path, manifest, overwrite=False):
    """TOML with every float written as its shortest exact repr. None entries are dropped."""
    path = _writable(path, overwrite)
    config.dump(_plain(manifest), path)
    logger.info(f"Saved manifest to {path}.")

def load_manifest(path):
    return config.load(_readable(path))

def save_text(path, text, overwrite=False):
    path = _writable(path, overwrite)
    path.write_text(text + '\n')
