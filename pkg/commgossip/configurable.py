import copy
import logging

from . import exceptions

logger = logging.getLogger(__name__)

class Parameter:
    """
    A typed config leaf. dtype is a type or a tuple of accepted types; values of
    another type are coerced with the first one. nullable allows None, which
    means "not set". choices restricts the value (each element for lists).
    """
    def __init__(self, data=None, dtype=None, nullable=False, choices=None, load_callback=None):
        if dtype is None:
            if data is None:
                raise ValueError("dtype must not be None when data is None")
            dtype = type(data)
        self.dtypes = dtype if isinstance(dtype, tuple) else (dtype,)
        self.nullable = nullable or data is None
        self.choices = choices
        self.load_callback = load_callback
        self.set_data(data)

    @property
    def dtype(self):
        return self.dtypes[0]

    def coerce(self, data):
        if data is None:
            if not self.nullable:
                raise exceptions.InvalidConfigParameter(f"value must not be None for dtype {self.dtype.__name__}")
            return None
        if isinstance(data, bool) and bool not in self.dtypes:
            raise exceptions.InvalidConfigParameter(f"expected {self._type_names()}, but got {data=}")
        if isinstance(data, self.dtypes):
            return copy.deepcopy(data)
        if self.dtype is int and isinstance(data, float) and not data.is_integer():
            raise exceptions.InvalidConfigParameter(f"expected an integer, but got {data=}")
        if self.dtype in (list, tuple, str) or isinstance(data, (list, tuple, dict)):
            raise exceptions.InvalidConfigParameter(f"expected {self._type_names()}, but got {data=}")
        try:
            return self.dtype(data)
        except (TypeError, ValueError) as err:
            raise exceptions.InvalidConfigParameter(f"expected {self._type_names()}, but got {data=}") from err

    def _type_names(self):
        return ' or '.join(t.__name__ for t in self.dtypes)

    def set_data(self, data):
        data = self.coerce(data)
        if self.choices is not None and data is not None:
            values = data if isinstance(data, list) else [data]
            bad = [v for v in values if v not in self.choices]
            if len(bad) > 0:
                raise exceptions.InvalidConfigParameter(f"values {bad} are not among the choices {list(self.choices)}")
        self._data = data

    def load(self, data):
        self.set_data(data)
        if self.load_callback is not None:
            self.load_callback(self)

    @property
    def data(self):
        return copy.deepcopy(self._data)

    def __repr__(self):
        return f"Parameter(data={self.data}, dtype={self._type_names()})"

class Configurable:
    # define __init__ with super() call to make this class suitable for multiple inheritance
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.__parameters = {}
        self.__configurables = {}

    def __getattribute__(self, name):
        value = super().__getattribute__(name)
        if isinstance(value, Parameter):
            return value.data
        return value

    def __setattr__(self, name, value):
        super().__setattr__(name, value)
        if isinstance(value, Parameter):
            if hasattr(self, '_Configurable__parameters'):
                self.__parameters[name] = value
            else:
                raise RuntimeError("Configurable must be initalized before setting Parameter")
        elif isinstance(value, Configurable):
            if hasattr(self, '_Configurable__configurables'):
                self.__configurables[name] = value
            else:
                raise RuntimeError("Configurable must be initalized before setting Configurable")
        else:
            if hasattr(self, '_Configurable__parameters') and name in self.__parameters:
                del self.__parameters[name]
            elif hasattr(self, '_Configurable__configurables') and name in self.__configurables:
                del self.__configurables[name]

    def __delattr__(self, name):
        if hasattr(self, '_Configurable__parameters') and name in self.__parameters:
            del self.__parameters[name]
        elif hasattr(self, '_Configurable__configurables') and name in self.__configurables:
            del self.__configurables[name]
        super().__delattr__(name)

    @property
    def params_dict(self):
        return self.__parameters

    @property
    def configurables_dict(self):
        return self.__configurables

    def config_dict(self):
        """
        Returns a configuration dictionary. Uses a flat instead of hierarchical structure
        because otherwise config parameters that are dictionaries will be ambiguous when trying
        to load them back in.
        """
        d = {}
        for name, param in self.params_dict.items():
            d[name] = param.data
        for name, configurable in self.configurables_dict.items():
            sub_d = configurable.config_dict()
            d.update({f'{name}.{sub_key}': sub_value for sub_key, sub_value in sub_d.items()})
        return d

    def _parameters(self, prefix=''):
        for name, param in self.params_dict.items():
            yield prefix + name, param
        for name, configurable in self.configurables_dict.items():
            yield from configurable._parameters(prefix + name + '.')

    def load_config_dict(self, config_dict, strict=True):
        """
        Loads the flat dotted keys of config_dict. Parameters without a key keep
        their current value. With strict=True, keys that match no parameter raise
        ConfigDictError and nothing is loaded.
        """
        params = dict(self._parameters())

        unexpected_keys = [key for key in config_dict if key not in params]
        if len(unexpected_keys) > 0:
            if strict:
                raise exceptions.ConfigDictError(f"unexpected config keys: {unexpected_keys}")
            logger.warning(f"Ignoring unexpected config keys {unexpected_keys}.")

        missing_keys = [key for key in params if key not in config_dict]
        if len(missing_keys) > 0:
            logger.debug(f"Using current values for config keys {missing_keys}.")

        for key, param in params.items():
            if key not in config_dict:
                continue
            try:
                param.load(config_dict[key])
            except exceptions.InvalidConfigParameter as err:
                raise exceptions.InvalidConfigParameter(f"invalid value for config key '{key}': {err}") from err
