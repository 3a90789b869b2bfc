"""
Logger factory for eigencomplete
"""
import logging
import os
from typing import Optional

ROOT_LOGGER = "eigencomplete"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LEVEL_ENV = "EIGENCOMPLETE_LOG_LEVEL"

_configured = False


def _configure_root():
    """Attach a single stream handler to the package root logger"""
    global _configured
    if _configured:
        return
    root = logging.getLogger(ROOT_LOGGER)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(os.environ.get(LEVEL_ENV, "WARNING").upper())
    root.propagate = False
    _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a logger living under the package root logger"""
    _configure_root()
    if name == "__main__" or not name.startswith(ROOT_LOGGER):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)


def set_verbosity(verbose: int, level: Optional[str] = None):
    """Map the CLI -v count (or an explicit level name) onto the root logger"""
    _configure_root()
    root = logging.getLogger(ROOT_LOGGER)
    if level:
        root.setLevel(level.upper())
    elif verbose >= 2:
        root.setLevel(logging.DEBUG)
    elif verbose == 1:
        root.setLevel(logging.INFO)
