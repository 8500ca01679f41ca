"""Python bindings for the chfam solver.

Fields are plain 1-D numpy arrays sampled on a ``Grid``; every operation takes
the grid as its first argument.
"""

from pathlib import Path

from ._chfam import *  # noqa: F401,F403
from ._chfam import run_config_text, version

__version__ = version()


def run_config(path, write_outputs=False):
    """Runs the experiment in a config file and returns its result record."""
    return run_config_text(Path(path).read_text(), write_outputs)
