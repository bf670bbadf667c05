from time import perf_counter
import logging

logger = logging.getLogger(__name__)

class timeit:
    """
    Logs the wall-clock time spent in a block, e.g. one harness stage.

    >>> with timeit('exact recursion') as timer:
    ...     pass
    >>> timer.time  # seconds
    """
    def __init__(self, name=None, float_format='{:.4f}', level=logging.INFO):
        self.name = name
        self.float_format = float_format
        self.level = level

    def __enter__(self):
        self.time = perf_counter()
        return self

    def __exit__(self, type, value, traceback):
        self.time = perf_counter() - self.time
        prefix = 'Time' if self.name is None else f'Time in stage {self.name}'
        status = '' if type is None else f' (aborted with {type.__name__})'
        self.readout = f'{prefix}: {self.float_format.format(self.time)} seconds{status}'
        logger.log(self.level, self.readout)
