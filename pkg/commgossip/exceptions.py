class PathNotFound(IOError):
    pass

class PathAlreadyExists(IOError):
    pass

class ConfigurableError(Exception):
    pass

class InvalidConfigParameter(ConfigurableError):
    pass

class ConfigDictError(ConfigurableError):
    pass

class ConfigParseError(ConfigurableError):
    pass

class ModelError(ValueError):
    pass

class ConstraintViolation(ModelError):
    pass

class DimensionMismatch(ModelError):
    pass

class PreconditionError(ModelError):
    pass

class CoverageError(ModelError):
    pass
