import pytest

import commgossip as lib
import commgossip.configurable as conf

class SubModule(conf.Configurable):
    def __init__(self, a):
        super().__init__()
        self.x = conf.Parameter(0, int)
        self.a = a

class Module(conf.Configurable):
    def __init__(self, y, z):
        super().__init__()
        self.sub_module = SubModule(conf.Parameter([0, 1, 2.1]))
        self.y = y
        self.z = z

def test_dict_save_load(tmp_path):
    m1 = Module(conf.Parameter([1, 2]), 'not a parameter')
    m1.load_config_dict({'sub_module.x': 3})
    lib.config.dump(m1.config_dict(), tmp_path / 'config.json')

    m2 = Module(conf.Parameter([3, 4]), 'not a parameter')
    m2.load_config_dict(lib.config.load(tmp_path / 'config.json'))

    assert m1.y == m2.y == [1, 2]
    assert m1.sub_module.x == m2.sub_module.x == 3
    assert m1.sub_module.a == m2.sub_module.a == [0, 1, 2.1]

def test_conflicting_attributes():
    m1 = Module(conf.Parameter([1, 2]), None)
    m1.y = (10,)
    assert 'y' not in m1.config_dict() and m1.y == (10,)
    m1.y = conf.Parameter(dtype=tuple, data=())
    assert m1.y == tuple()
    m1.y = None
    assert 'y' not in m1.config_dict() and m1.y is None
    m1.sub_module = None
    assert list(m1.config_dict().items()) == []
    m1.y = conf.Parameter(10)
    assert list(m1.config_dict().items()) == [('y', 10)]

def test_strict_loading():
    m = Module(conf.Parameter([1, 2]), None)
    with pytest.raises(lib.exceptions.ConfigDictError, match='sub_module.w'):
        m.load_config_dict({'y': [5], 'sub_module.w': 1})
    assert m.y == [1, 2] # nothing was loaded
    m.load_config_dict({'y': [5], 'sub_module.w': 1}, strict=False)
    assert m.y == [5]

def test_missing_keys_keep_values():
    m = Module(conf.Parameter([1, 2]), None)
    m.load_config_dict({'sub_module.x': 4})
    assert m.y == [1, 2] and m.sub_module.x == 4

@pytest.mark.parametrize('param, value, expected', [
    (conf.Parameter(0.5, float), 2, 2.0),
    (conf.Parameter(1, int), 3.0, 3),
    (conf.Parameter(1, int), '4', 4),
    (conf.Parameter(None, float), None, None),
    (conf.Parameter('a', (str, list)), [1, 2], [1, 2]),
    (conf.Parameter(['exact'], list, choices=['exact', 'window']), ['window', 'exact'], ['window', 'exact']),
])
def test_coercion(param, value, expected):
    param.load(value)
    assert param.data == expected
    assert type(param.data) is type(expected)

@pytest.mark.parametrize('param, value', [
    (conf.Parameter(1, int), 2.5),
    (conf.Parameter(1, int), 'two'),
    (conf.Parameter(1.0, float), True),
    (conf.Parameter(1.0, float), None),
    (conf.Parameter('a', str), 3),
    (conf.Parameter([], list), 'exact'),
    (conf.Parameter('a', str, choices=['a', 'b']), 'c'),
    (conf.Parameter(['a'], list, choices=['a', 'b']), ['a', 'c']),
])
def test_invalid_values(param, value):
    with pytest.raises(lib.exceptions.InvalidConfigParameter):
        param.load(value)

def test_data_is_copied():
    param = conf.Parameter([[0, 1]], list)
    param.data[0].append(2)
    assert param.data == [[0, 1]]

def test_load_callback():
    seen = []
    param = conf.Parameter(1, int, load_callback=lambda p: seen.append(p.data))
    param.load(5)
    assert seen == [5]
