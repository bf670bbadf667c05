import numbers

import numpy as np

def _format_value(value, float_format):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return float_format.format(float(value))
    if isinstance(value, (list, tuple)) and all(isinstance(v, numbers.Real) for v in value):
        return '(' + ', '.join(_format_value(v, float_format) for v in value) + ')'
    if isinstance(value, np.ndarray):
        return f"array {value.shape} ({value.dtype})"
    return str(value)

def pformat(d, indent=0, spaces=4, float_format='{:.6g}'):
    """
    Human-readable block for nested report dictionaries.

    >>> print(pformat({'window': {'t_lower': 312.25, 'nonempty': True}}))
    window:
        t_lower: 312.25
        nonempty: True
    """
    output = ''
    for key, value in d.items():
        if isinstance(value, dict):
            output += f"{' ' * spaces * indent}{key}:\n"
            output += f"{pformat(value, indent=indent+1, spaces=spaces, float_format=float_format)}\n"
        else:
            output += f"{' ' * spaces * indent}{key}: {_format_value(value, float_format)}\n"
    return output.rstrip('\n')
