import os
import signal
import sys
import logging
import pathlib
import shutil

from . import exceptions

logger = logging.getLogger(__name__)

class StagedDirectory:
    """
    A context manager that collects the artifacts of one experiment in a staging
    directory next to out_dir and moves them to out_dir only when the with block
    exits normally. On an exception or a SIGTERM the staging directory is removed,
    so out_dir either holds a complete artifact set or is left untouched.

    >>> with StagedDirectory('out/fig2') as staging:
    ...     (staging / 'manifest.toml').write_text('...')
    """
    def __init__(self, out_dir, overwrite=False):
        self.out_dir = pathlib.Path(out_dir)
        self.staging_dir = self.out_dir.parent / f'.{self.out_dir.name}.staging'
        self.overwrite = overwrite

    def cleanup(self):
        logger.debug(f"Removing staging directory {self.staging_dir}...")
        if self.staging_dir.is_dir():
            shutil.rmtree(self.staging_dir)

    def commit(self):
        if self.out_dir.exists():
            if not self.overwrite:
                raise exceptions.PathAlreadyExists(f"The output directory {self.out_dir} already exists.")
            shutil.rmtree(self.out_dir)
        os.replace(self.staging_dir, self.out_dir)
        logger.debug(f"Moved staged artifacts to {self.out_dir}.")

    def handler(self, signum, frame):
        logger.info(f"Received signal {signal.strsignal(signum)}.")
        sys.exit(0) # raises SystemExit, which reaches __exit__ and triggers self.cleanup()

    def __enter__(self):
        if self.out_dir.exists() and not self.overwrite:
            raise exceptions.PathAlreadyExists(f"The output directory {self.out_dir} already exists.")
        self.cleanup()
        self.staging_dir.mkdir(parents=True)
        self.old_sigterm = signal.signal(signal.SIGTERM, self.handler)
        return self.staging_dir

    def __exit__(self, exc_type, exc_val, exc_tb):
        try:
            if exc_type is None:
                self.commit()
            else:
                logger.info(f"Caught exception {exc_type.__name__}: {exc_val}")
        finally:
            self.cleanup()
            signal.signal(signal.SIGTERM, self.old_sigterm)
