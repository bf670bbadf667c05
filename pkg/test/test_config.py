import math
import pathlib

import pytest

import commgossip as lib

@pytest.mark.parametrize('filename', [
    ('minimal_config.toml'),
    ('minimal_config.json'),
])
def test_load(filename, pytestconfig):
    data_path = pathlib.Path(pytestconfig.rootdir) / 'test' / 'data'
    config = lib.config.load(data_path / filename)
    assert config == {'n': 10, 'r0': 0.8, 'ls': 0.5, 'ld': 0.1, 'l_total': 0.2, 'cx': 1, 'T': 100, 'seed': 7, 'analyses': ['exact']}

def test_load_unsupported(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('n: 10\n')
    with pytest.raises(NotImplementedError):
        lib.config.load(path)

@pytest.mark.parametrize('suffix', ['.json', '.toml'])
def test_dump(tmp_path, suffix):
    config = {'a': 1, 'b': 'hi "there"', 'c': True, 'd': [10, 11], 'e': {'f': 0.1, 'g': {'h': [[0.5, 1.5]]}}}
    filename = tmp_path / f'config{suffix}'
    lib.config.dump(config, filename)
    assert lib.config.load(filename) == config

def test_dump_dotted_keys(tmp_path):
    config = {'n': 10, 'flat': {'graph.n': 10, 'run.seed': 2}}
    lib.config.dump(config, tmp_path / 'config.toml')
    assert lib.config.load(tmp_path / 'config.toml') == config

def test_dump_special_floats(tmp_path):
    config = {'inf': math.inf, 'ninf': -math.inf, 'nan': math.nan, 'tiny': 5e-324}
    lib.config.dump(config, tmp_path / 'config.toml')
    loaded = lib.config.load(tmp_path / 'config.toml')
    assert loaded['inf'] == math.inf and loaded['ninf'] == -math.inf
    assert math.isnan(loaded['nan'])
    assert loaded['tiny'] == 5e-324

def test_flatten():
    d = {'graph': {'n': 10, 'r0': 0.8}, 'analyses': ['exact'], 'run': {}}
    flat = lib.config.flatten(d)
    assert flat == {'graph.n': 10, 'graph.r0': 0.8, 'analyses': ['exact'], 'run': {}}
    assert lib.config.unflatten({k: v for k, v in flat.items() if k != 'run'}) == {'graph': {'n': 10, 'r0': 0.8}, 'analyses': ['exact']}

def test_package_config():
    cfg = lib.config.load_package_config('commgossip')
    assert set(cfg) >= {'graph', 'simulation', 'spectral', 'theory'}
    assert cfg['spectral']['dense_limit'] == 2000
    assert cfg['theory']['bound_tol'] == 1e-10

def test_package_config_override(tmp_path, monkeypatch):
    user_config = tmp_path / 'user.toml'
    user_config.write_text('[simulation]\nbatch_size = 8\n')
    monkeypatch.setenv('COMMGOSSIP_CONFIG', str(user_config))
    cfg = lib.config.load_package_config('commgossip')
    assert cfg['simulation']['batch_size'] == 8
    assert cfg['simulation']['max_records'] == 2000
