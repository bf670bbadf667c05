import json
from importlib import resources
import pathlib
import logging
import os

import platformdirs
import tomli
import tomli_w

from . import exceptions

logger = logging.getLogger(__name__)

def load(filename):
    filename = str(filename)
    if not os.path.isfile(filename):
        raise exceptions.PathNotFound(f"The config file {filename} does not exist.")

    if filename.endswith('.toml'):
        with open(filename, "rb") as f:
            try:
                config = tomli.load(f)
            except tomli.TOMLDecodeError as err:
                # tomli reports "(at line L, column C)" in the message
                raise exceptions.ConfigParseError(f"Could not parse {filename}: {err}") from err
    elif filename.endswith('.json'):
        with open(filename, 'r') as f:
            try:
                config = json.load(f)
            except json.JSONDecodeError as err:
                raise exceptions.ConfigParseError(f"Could not parse {filename}: {err}") from err
    else:
        raise NotImplementedError(f"Only .toml and .json configs are supported, but got {filename}")

    return config

def dump(config, filename):
    filename = str(filename)
    if filename.endswith('.json'):
        with open(filename, 'w') as f:
            json.dump(config, f, indent=4)
    elif filename.endswith('.toml'):
        with open(filename, "wb") as f:
            tomli_w.dump(config, f)
    else:
        raise NotImplementedError(f"Only .toml and .json configs are supported, but got {filename}")

def dict_iter(d, delimiter='.'):
    """
    Iterates over all leaf nodes of a nested dictionary in (key, value) pairs.
    If delimiter is None, key is a tuple of the nested keys,
    otherwise it is a string with the nested keys joined by delimiter.
    """
    for k, v in d.items():
        if isinstance(v, dict) and len(v) > 0:
            for ki, vi in dict_iter(v, delimiter=delimiter):
                yield ((k, *ki), vi) if delimiter is None else (delimiter.join([k, ki]), vi)
        else:
            yield ((k,), v) if delimiter is None else (k, v)

def dict_set(d, k, v, delimiter='.'):
    ks = k if delimiter is None else k.split(delimiter)
    for ki in ks[:-1]:
        d = d.setdefault(ki, {})
    d[ks[-1]] = v

def flatten(d):
    """
    >>> flatten({'graph': {'n': 10}, 'analyses': ['exact']})
    {'graph.n': 10, 'analyses': ['exact']}
    """
    return dict(dict_iter(d))

def unflatten(d):
    out = {}
    for k, v in d.items():
        dict_set(out, k, v)
    return out

def package_config_locs(package_name, package_author=None, package_version=None, default_config_path='config.toml'):
    default_config_filename = resources.files(package_name).joinpath(default_config_path)

    user_config_filenames = []

    user_config_filenames.append(pathlib.Path(f'{package_name}_config.toml'))
    try:
        path = pathlib.Path(os.environ[f'{package_name.upper()}_CONFIG'])
    except KeyError:
        pass
    else:
        user_config_filenames.append(path if path.is_file() else path / f'{package_name}_config.toml')
    user_config_filenames.append(pathlib.Path(
        platformdirs.user_config_dir(package_name, appauthor=package_author, version=package_version)
    ) / 'config.toml')

    return {'default_config': default_config_filename, 'user_configs': user_config_filenames}

def load_package_config(*args, **kwargs):
    """
    Loads the package defaults (tolerances, dense/structured threshold, batch sizes)
    and overlays user config files, from highest to lowest priority:
        1. f'{package_name}_config.toml' in the working directory
        2. $COMMGOSSIP_CONFIG if it is a file, $COMMGOSSIP_CONFIG/commgossip_config.toml otherwise
        3. f'{platformdirs.user_config_dir(package_name)}/config.toml'
    Keys present in a higher priority file win.
    """
    filenames = package_config_locs(*args, **kwargs)

    default_config_filename = filenames['default_config']
    if default_config_filename.is_file():
        with resources.as_file(default_config_filename) as default_config_file:
            config = load(default_config_file)

        logger.debug(f"Loaded default config file at {default_config_filename}.")
    else:
        config = {}

    user_config_filenames = [filename for filename in filenames['user_configs'] if filename.is_file()]
    for filename in reversed(user_config_filenames):
        new_config = load(filename)
        for k, v in dict_iter(new_config, delimiter=None):
            dict_set(config, k, v, delimiter=None)

    if len(user_config_filenames) > 0:
        logger.debug(f"Loaded user config files at the following locations from highest to lowest priority: {user_config_filenames}")

    return config
