import inspect
import argparse

INTERPRETABLE_TYPES = [str, int, float, bool]

def add_arguments(parser, func, configs=None):
    """
    Adds one argument per parameter in the signature of func. Parameters without defaults
    become positional arguments, the rest become --options. configs maps a parameter name
    to overrides for 'opt_str', 'type', 'nargs', 'default', 'choices', 'help' and 'action'.
    """
    if configs is None:
        configs = {}

    signature = inspect.signature(func)

    for k, v in signature.parameters.items():
        config = configs.get(k, {})

        if 'opt_str' in config:
            option_strings_k = config['opt_str']
        elif v.default is inspect.Parameter.empty:
            option_strings_k = []
        elif len(k) == 1:
            option_strings_k = [f'-{k}']
        else:
            option_strings_k = [f'--{k}'.replace('_', '-')]

        if 'type' in config:
            type_k = config['type']
        elif v.annotation is inspect.Parameter.empty:
            type_k = str
        else:
            type_k = v.annotation
            if not any(type_k == t for t in INTERPRETABLE_TYPES):
                raise ValueError(f"type {type_k} for argument {k} is not recognized. Please provide the type manually")

        nargs_k = config.get('nargs')
        default_k = config.get('default', None if v.default is inspect.Parameter.empty else v.default)
        choices_k = config.get('choices')
        help_k = config.get('help', k.replace('_', ' '))

        if 'action' in config:
            action_k = config['action']
            if action_k not in ['store_true', 'store_false']:
                raise NotImplementedError(f"action {action_k} is not supported")
            parser.add_argument(*option_strings_k, dest=k, action=action_k, help=help_k)
            continue

        help_k = f'{help_k} (dtype: {type_k.__name__})'
        if v.default is not inspect.Parameter.empty:
            help_k = f'{help_k} (default: {default_k})'.replace('%', '%%') # argparse interpolates help strings
        else:
            help_k = f'{help_k} (required argument)'

        if len(option_strings_k) == 0:
            parser.add_argument(k, type=type_k, nargs=nargs_k, choices=choices_k, help=help_k)
        elif v.default is inspect.Parameter.empty:
            parser.add_argument(*option_strings_k, dest=k, type=type_k, nargs=nargs_k, default=default_k, choices=choices_k, help=help_k, required=True)
        else:
            parser.add_argument(*option_strings_k, dest=k, type=type_k, nargs=nargs_k, default=default_k, choices=choices_k, help=help_k)

    return parser

def default_parser(func, configs=None, **kwargs):
    parser = argparse.ArgumentParser(**kwargs)
    return add_arguments(parser, func, configs=configs)

def call_with_args(func, args):
    """Calls func with the entries of the namespace args that match its signature."""
    names = inspect.signature(func).parameters.keys()
    return func(**{k: getattr(args, k) for k in names if hasattr(args, k)})
